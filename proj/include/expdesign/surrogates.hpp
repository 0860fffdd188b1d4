#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "expdesign/memory.hpp"
#include "expdesign/pool.hpp"

namespace expdesign {

struct LinUcbParams {
  double lambda = 1.0;  // ridge weight
  double alpha = 1.0;   // exploration weight
};

// Linear bandit over embedding features.
//
//   A = lambda I + sum x x^T,  b = sum y x,  theta = A^-1 b
//   score(x) = theta^T x + alpha sqrt(x^T A^-1 x)
//
// A is kept explicitly and factorized (Cholesky) lazily after updates, so
// theta always equals the dense ridge solution rather than an accumulated
// rank-one inverse.
class LinUcb {
 public:
  LinUcb(std::size_t dim, LinUcbParams params = {});

  LinUcb& update(std::span<const double> x, double y);

  std::size_t dim() const { return static_cast<std::size_t>(design_.rows()); }
  std::size_t updates() const { return updates_; }
  const LinUcbParams& params() const { return params_; }
  const Eigen::MatrixXd& design() const { return design_; }
  const Eigen::VectorXd& response() const { return response_; }

  Eigen::VectorXd theta() const;
  // x^T A^-1 x
  double uncertainty(std::span<const double> x) const;
  double score(std::span<const double> x) const;

  // Scores for the listed pool rows.
  std::vector<double> score_rows(const EmbeddingMatrix& rows, std::span<const std::size_t> indices) const;

 private:
  void check(std::span<const double> x) const;
  const Eigen::LLT<Eigen::MatrixXd>& factor() const;

  LinUcbParams params_;
  Eigen::MatrixXd design_;
  Eigen::VectorXd response_;
  std::size_t updates_ = 0;
  mutable std::optional<Eigen::LLT<Eigen::MatrixXd>> factor_;
};

struct GpParams {
  double length_scale = 1.0;     // RBF length-scale
  double signal_variance = 1.0;  // sigma_f^2
  double noise_variance = 1e-4;  // sigma_n^2
  double beta = 2.0;             // acquisition: mean + beta * sd
};

struct GpPosterior {
  double mean = 0.0;
  double variance = 0.0;
};

// Zero-mean GP regression with an RBF kernel
// k(a, b) = sigma_f^2 exp(-|a - b|^2 / (2 l^2)).
class GaussianProcess {
 public:
  explicit GaussianProcess(GpParams params);

  // Factorizes K + sigma_n^2 I, escalating diagonal jitter when the
  // factorization fails. Throws NumericalError if no jitter level works.
  void fit(Eigen::MatrixXd inputs, Eigen::VectorXd targets);

  const GpParams& params() const { return params_; }
  std::size_t observations() const { return static_cast<std::size_t>(inputs_.rows()); }
  double jitter() const { return jitter_; }

  double kernel(std::span<const double> a, std::span<const double> b) const;
  GpPosterior posterior(std::span<const double> x) const;
  double acquisition(std::span<const double> x) const;

  // Posterior at the listed rows, computed with matrix products.
  std::vector<GpPosterior> posterior_rows(const EmbeddingMatrix& rows, std::span<const std::size_t> indices) const;

 private:
  GpParams params_;
  Eigen::MatrixXd inputs_;
  Eigen::VectorXd weights_;  // (K + sigma_n^2 I)^-1 y
  Eigen::LLT<Eigen::MatrixXd> factor_;
  double jitter_ = 0.0;
};

// Median pairwise Euclidean distance over an evenly strided subsample of at
// most `subsample` pool rows. Falls back to 1 when the median is zero.
double median_length_scale(const CandidatePool& pool, std::size_t subsample = 512);

// The B unexplored candidates with the largest scores (ties by ascending
// index), marked explored. `scores` is indexed by candidate index; entries for
// explored candidates are ignored.
std::vector<std::size_t> select_top_b(std::span<const double> scores, CandidateMemory& memory,
                                      std::size_t batch_size);
std::vector<std::string> select_top_b(const std::map<std::string, double>& scores, CandidateMemory& memory,
                                      std::size_t batch_size);

}  // namespace expdesign
