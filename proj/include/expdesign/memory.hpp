#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expdesign/pool.hpp"

namespace expdesign {

// cosine: 1 - a.b / (|a| |b|), clamped to [0, 2]; l2sq: sum of squared
// differences. Accumulates left to right in a single pass. Throws
// PreconditionError on length mismatch or a zero vector under cosine.
double distance(Metric metric, std::span<const double> a, std::span<const double> b);

// Equal-budget split of a batch over cluster centers: every center gets
// floor(B / n_c) and the first B mod n_c centers one more.
std::vector<std::size_t> center_quotas(std::size_t batch_size, std::size_t num_centers);

struct CenterAllocation {
  std::vector<std::vector<double>> centers;
  std::vector<std::size_t> quotas;
};

// Candidate memory of one run: the shared pool plus per-run explored flags.
// Flags only move from unexplored to explored.
class CandidateMemory {
 public:
  explicit CandidateMemory(const CandidatePool& pool);

  const CandidatePool& pool() const { return *pool_; }

  bool is_explored(std::size_t index) const { return explored_.at(index) != 0; }
  std::size_t explored_count() const { return explored_count_; }
  std::size_t unexplored_count() const { return pool_->size() - explored_count_; }
  std::vector<std::size_t> unexplored_indices() const;

  // Up to k unexplored candidates by ascending distance to `query`, ties by
  // ascending index.
  std::vector<std::size_t> nearest_unexplored_indices(std::span<const double> query, std::size_t k) const;
  std::vector<std::string> nearest_unexplored(std::span<const double> query, std::size_t k) const;

  // All-or-nothing: unknown names leave the memory untouched.
  void mark_explored(std::span<const std::string> names);
  void mark_explored_indices(std::span<const std::size_t> indices);

  // Walks `centers` in order; each takes its quota of nearest unexplored
  // candidates, which are marked explored before the next center runs.
  // Returns fewer than B when the pool runs out.
  std::vector<std::size_t> allocate_batch_indices(std::span<const std::vector<double>> centers,
                                                  std::size_t batch_size);
  std::vector<std::string> allocate_batch(std::span<const std::vector<double>> centers,
                                          std::size_t batch_size);

 private:
  void check_query(std::span<const double> query) const;

  const CandidatePool* pool_;
  std::vector<char> explored_;
  std::size_t explored_count_ = 0;
};

}  // namespace expdesign
