#include "expdesign/memory.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "expdesign/error.hpp"

namespace expdesign {

double distance(Metric metric, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw PreconditionError("distance: vector lengths differ (" + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()) + ")");
  }
  if (metric == Metric::l2_squared) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      sum += d * d;
    }
    return sum;
  }
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw PreconditionError("cosine distance is undefined for a zero vector");
  // sqrt(aa * bb) is exactly aa when a == b, so identical vectors give 0.
  const double d = 1.0 - dot / std::sqrt(aa * bb);
  return std::clamp(d, 0.0, 2.0);
}

std::vector<std::size_t> center_quotas(std::size_t batch_size, std::size_t num_centers) {
  if (num_centers == 0) throw PreconditionError("at least one center is required");
  std::vector<std::size_t> quotas(num_centers, batch_size / num_centers);
  for (std::size_t i = 0; i < batch_size % num_centers; ++i) ++quotas[i];
  return quotas;
}

CandidateMemory::CandidateMemory(const CandidatePool& pool)
    : pool_(&pool), explored_(pool.size(), 0) {}

std::vector<std::size_t> CandidateMemory::unexplored_indices() const {
  std::vector<std::size_t> out;
  out.reserve(unexplored_count());
  for (std::size_t i = 0; i < explored_.size(); ++i) {
    if (!explored_[i]) out.push_back(i);
  }
  return out;
}

void CandidateMemory::check_query(std::span<const double> query) const {
  if (query.size() != pool_->dim()) {
    throw PreconditionError("query has dimension " + std::to_string(query.size()) + ", pool has " +
                            std::to_string(pool_->dim()));
  }
  if (pool_->metric() == Metric::cosine &&
      std::all_of(query.begin(), query.end(), [](double v) { return v == 0.0; })) {
    throw PreconditionError("zero query vector under cosine metric");
  }
}

std::vector<std::size_t> CandidateMemory::nearest_unexplored_indices(std::span<const double> query,
                                                                     std::size_t k) const {
  check_query(query);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(unexplored_count());
  for (std::size_t i = 0; i < explored_.size(); ++i) {
    if (explored_[i]) continue;
    scored.emplace_back(distance(pool_->metric(), query, pool_->embedding(i)), i);
  }
  const std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end());
  std::vector<std::size_t> out(take);
  for (std::size_t i = 0; i < take; ++i) out[i] = scored[i].second;
  return out;
}

std::vector<std::string> CandidateMemory::nearest_unexplored(std::span<const double> query,
                                                             std::size_t k) const {
  std::vector<std::string> names;
  for (std::size_t i : nearest_unexplored_indices(query, k)) names.push_back(pool_->name(i));
  return names;
}

void CandidateMemory::mark_explored(std::span<const std::string> names) {
  std::vector<std::size_t> indices;
  indices.reserve(names.size());
  for (const auto& n : names) indices.push_back(pool_->index_of(n));
  mark_explored_indices(indices);
}

void CandidateMemory::mark_explored_indices(std::span<const std::size_t> indices) {
  for (std::size_t i : indices) {
    if (i >= explored_.size()) throw PreconditionError("candidate index out of range");
  }
  for (std::size_t i : indices) {
    if (!explored_[i]) {
      explored_[i] = 1;
      ++explored_count_;
    }
  }
}

std::vector<std::size_t> CandidateMemory::allocate_batch_indices(
    std::span<const std::vector<double>> centers, std::size_t batch_size) {
  if (centers.empty()) throw PreconditionError("allocate_batch needs at least one center");
  for (const auto& c : centers) check_query(c);
  const auto quotas = center_quotas(batch_size, centers.size());
  std::vector<std::size_t> selected;
  selected.reserve(batch_size);
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const auto picked = nearest_unexplored_indices(centers[c], quotas[c]);
    mark_explored_indices(picked);
    selected.insert(selected.end(), picked.begin(), picked.end());
  }
  return selected;
}

std::vector<std::string> CandidateMemory::allocate_batch(std::span<const std::vector<double>> centers,
                                                         std::size_t batch_size) {
  std::vector<std::string> names;
  for (std::size_t i : allocate_batch_indices(centers, batch_size)) names.push_back(pool_->name(i));
  return names;
}

}  // namespace expdesign
