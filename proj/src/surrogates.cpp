#include "expdesign/surrogates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "expdesign/error.hpp"

namespace expdesign {
namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

}  // namespace

LinUcb::LinUcb(std::size_t dim, LinUcbParams params)
    : params_(params),
      design_(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)) *
              params.lambda),
      response_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))) {
  if (dim == 0) throw PreconditionError("LinUCB dimension must be positive");
  if (!(params.lambda > 0.0)) throw ConfigError("LinUCB lambda must be positive");
  if (!(params.alpha >= 0.0)) throw ConfigError("LinUCB alpha must be non-negative");
}

void LinUcb::check(std::span<const double> x) const {
  if (x.size() != dim()) {
    throw PreconditionError("LinUCB expects dimension " + std::to_string(dim()) + ", got " +
                            std::to_string(x.size()));
  }
}

LinUcb& LinUcb::update(std::span<const double> x, double y) {
  check(x);
  if (!std::isfinite(y)) throw PreconditionError("LinUCB update with non-finite reward");
  const auto v = as_vector(x);
  design_.selfadjointView<Eigen::Lower>().rankUpdate(v);
  design_.triangularView<Eigen::StrictlyUpper>() = design_.transpose();
  response_ += y * v;
  ++updates_;
  factor_.reset();
  return *this;
}

const Eigen::LLT<Eigen::MatrixXd>& LinUcb::factor() const {
  if (!factor_) {
    factor_.emplace(design_);
    if (factor_->info() != Eigen::Success) throw NumericalError("LinUCB design matrix lost definiteness");
  }
  return *factor_;
}

Eigen::VectorXd LinUcb::theta() const { return factor().solve(response_); }

double LinUcb::uncertainty(std::span<const double> x) const {
  check(x);
  const Eigen::VectorXd half = factor().matrixL().solve(as_vector(x));
  return half.squaredNorm();
}

double LinUcb::score(std::span<const double> x) const {
  check(x);
  return theta().dot(as_vector(x)) + params_.alpha * std::sqrt(uncertainty(x));
}

std::vector<double> LinUcb::score_rows(const EmbeddingMatrix& rows, std::span<const std::size_t> indices) const {
  if (static_cast<std::size_t>(rows.cols()) != dim()) throw PreconditionError("LinUCB row dimension mismatch");
  const Eigen::VectorXd th = theta();
  Eigen::MatrixXd block(dim(), indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    block.col(static_cast<Eigen::Index>(j)) = rows.row(static_cast<Eigen::Index>(indices[j])).transpose();
  }
  const Eigen::VectorXd means = block.transpose() * th;
  factor().matrixL().solveInPlace(block);
  const Eigen::VectorXd widths = block.colwise().squaredNorm().transpose();
  std::vector<double> out(indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out[j] = means(jj) + params_.alpha * std::sqrt(widths(jj));
  }
  return out;
}

GaussianProcess::GaussianProcess(GpParams params) : params_(params) {
  if (!(params.length_scale > 0.0)) throw ConfigError("GP length-scale must be positive");
  if (!(params.signal_variance > 0.0)) throw ConfigError("GP signal variance must be positive");
  if (!(params.noise_variance >= 0.0)) throw ConfigError("GP noise variance must be non-negative");
  if (!(params.beta >= 0.0)) throw ConfigError("GP beta must be non-negative");
}

double GaussianProcess::kernel(std::span<const double> a, std::span<const double> b) const {
  double sq = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq += d * d;
  }
  return params_.signal_variance * std::exp(-sq / (2.0 * params_.length_scale * params_.length_scale));
}

void GaussianProcess::fit(Eigen::MatrixXd inputs, Eigen::VectorXd targets) {
  if (inputs.rows() != targets.size()) throw PreconditionError("GP inputs and targets differ in length");
  if (!targets.allFinite()) throw PreconditionError("GP targets must be finite");
  inputs_ = std::move(inputs);
  const Eigen::Index n = inputs_.rows();
  if (n == 0) {
    weights_.resize(0);
    return;
  }
  const double inv = 1.0 / (2.0 * params_.length_scale * params_.length_scale);
  const Eigen::VectorXd norms = inputs_.rowwise().squaredNorm();
  Eigen::MatrixXd gram = inputs_ * inputs_.transpose();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double sq = std::max(0.0, norms(i) + norms(j) - 2.0 * gram(i, j));
      k(i, j) = params_.signal_variance * std::exp(-sq * inv);
    }
    k(i, i) = params_.signal_variance;
  }
  k.diagonal().array() += params_.noise_variance;

  jitter_ = 0.0;
  factor_.compute(k);
  double jitter = 1e-10 * params_.signal_variance;
  while (factor_.info() != Eigen::Success) {
    if (jitter > 1e-2 * params_.signal_variance) {
      throw NumericalError("GP kernel matrix is not positive definite even with jitter");
    }
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    factor_.compute(kj);
    jitter_ = jitter;
    jitter *= 10.0;
  }
  weights_ = factor_.solve(targets);
}

GpPosterior GaussianProcess::posterior(std::span<const double> x) const {
  if (observations() == 0) return {0.0, params_.signal_variance};
  if (static_cast<Eigen::Index>(x.size()) != inputs_.cols()) throw PreconditionError("GP query dimension mismatch");
  Eigen::VectorXd cross(inputs_.rows());
  // inputs_ is column-major, so copy rows before handing out spans.
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
    const Eigen::VectorXd row = inputs_.row(i).transpose();
    cross(i) = kernel({row.data(), x.size()}, x);
  }
  const double mean = cross.dot(weights_);
  const Eigen::VectorXd half = factor_.matrixL().solve(cross);
  return {mean, std::max(0.0, params_.signal_variance - half.squaredNorm())};
}

double GaussianProcess::acquisition(std::span<const double> x) const {
  const auto p = posterior(x);
  return p.mean + params_.beta * std::sqrt(p.variance);
}

std::vector<GpPosterior> GaussianProcess::posterior_rows(const EmbeddingMatrix& rows,
                                                         std::span<const std::size_t> indices) const {
  std::vector<GpPosterior> out(indices.size(), GpPosterior{0.0, params_.signal_variance});
  if (observations() == 0 || indices.empty()) return out;
  if (rows.cols() != inputs_.cols()) throw PreconditionError("GP query dimension mismatch");
  Eigen::MatrixXd queries(static_cast<Eigen::Index>(indices.size()), rows.cols());
  for (std::size_t j = 0; j < indices.size(); ++j) {
    queries.row(static_cast<Eigen::Index>(j)) = rows.row(static_cast<Eigen::Index>(indices[j]));
  }
  const double inv = 1.0 / (2.0 * params_.length_scale * params_.length_scale);
  const Eigen::VectorXd qn = queries.rowwise().squaredNorm();
  const Eigen::VectorXd tn = inputs_.rowwise().squaredNorm();
  // n_train x n_query
  Eigen::MatrixXd cross = inputs_ * queries.transpose();
  for (Eigen::Index j = 0; j < cross.cols(); ++j) {
    for (Eigen::Index i = 0; i < cross.rows(); ++i) {
      const double sq = std::max(0.0, tn(i) + qn(j) - 2.0 * cross(i, j));
      cross(i, j) = params_.signal_variance * std::exp(-sq * inv);
    }
  }
  const Eigen::VectorXd means = cross.transpose() * weights_;
  factor_.matrixL().solveInPlace(cross);
  const Eigen::VectorXd reduction = cross.colwise().squaredNorm().transpose();
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out[j] = {means(jj), std::max(0.0, params_.signal_variance - reduction(jj))};
  }
  return out;
}

double median_length_scale(const CandidatePool& pool, std::size_t subsample) {
  const std::size_t n = pool.size();
  const std::size_t m = std::min(n, std::max<std::size_t>(subsample, 2));
  std::vector<std::size_t> picks(m);
  for (std::size_t i = 0; i < m; ++i) picks[i] = i * n / m;
  std::vector<double> dists;
  dists.reserve(m * (m - 1) / 2);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      dists.push_back(std::sqrt(distance(Metric::l2_squared, pool.embedding(picks[i]), pool.embedding(picks[j]))));
    }
  }
  if (dists.empty()) return 1.0;
  const auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  double median = *mid;
  if (dists.size() % 2 == 0) {
    median = 0.5 * (median + *std::max_element(dists.begin(), mid));
  }
  return median > 0.0 ? median : 1.0;
}

std::vector<std::size_t> select_top_b(std::span<const double> scores, CandidateMemory& memory,
                                      std::size_t batch_size) {
  if (batch_size == 0) throw PreconditionError("batch size must be positive");
  if (scores.size() != memory.pool().size()) throw PreconditionError("scores must cover the whole pool");
  auto candidates = memory.unexplored_indices();
  const std::size_t take = std::min(batch_size, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take), candidates.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return a < b;
                    });
  candidates.resize(take);
  memory.mark_explored_indices(candidates);
  return candidates;
}

std::vector<std::string> select_top_b(const std::map<std::string, double>& scores, CandidateMemory& memory,
                                      std::size_t batch_size) {
  const auto& pool = memory.pool();
  std::vector<double> dense(pool.size(), -std::numeric_limits<double>::infinity());
  std::vector<char> covered(pool.size(), 0);
  for (const auto& [name, value] : scores) {
    const std::size_t i = pool.index_of(name);
    dense[i] = value;
    covered[i] = 1;
  }
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!memory.is_explored(i) && !covered[i]) {
      throw PreconditionError("no score for unexplored candidate '" + pool.name(i) + "'");
    }
  }
  std::vector<std::string> names;
  for (std::size_t i : select_top_b(dense, memory, batch_size)) names.push_back(pool.name(i));
  return names;
}

}  // namespace expdesign
