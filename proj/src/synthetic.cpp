#include "expdesign/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "expdesign/error.hpp"
#include "expdesign/rng.hpp"

namespace expdesign {

CandidatePool make_synthetic_pool(const SyntheticSpec& spec) {
  if (spec.candidates == 0 || spec.dim == 0 || spec.clusters == 0) {
    throw ConfigError("synthetic pool needs positive candidates, dim and clusters");
  }
  Rng rng(spec.seed);
  const auto d = static_cast<Eigen::Index>(spec.dim);
  Eigen::MatrixXd means(static_cast<Eigen::Index>(spec.clusters), d);
  for (Eigen::Index k = 0; k < means.rows(); ++k) {
    for (Eigen::Index j = 0; j < d; ++j) means(k, j) = spec.cluster_scale * rng.normal();
  }

  EmbeddingMatrix x(static_cast<Eigen::Index>(spec.candidates), d);
  std::vector<Candidate> candidates(spec.candidates);
  const int width = spec.candidates <= 10000 ? 4 : static_cast<int>(std::to_string(spec.candidates - 1).size());
  for (std::size_t i = 0; i < spec.candidates; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const auto k = static_cast<Eigen::Index>(i % spec.clusters);
    double sq = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      x(ii, j) = means(k, j) + spec.spread * rng.normal();
      const double diff = x(ii, j) - (j == 0 ? spec.target_offset : 0.0);
      sq += diff * diff;
    }
    char name[32];
    std::snprintf(name, sizeof name, "s%0*zu", width, i);
    candidates[i] = {name, -std::sqrt(sq) + spec.noise * rng.normal(), i};
  }
  HitPolicy policy;
  policy.mode = HitMode::top_percentile;
  policy.percentile = spec.percentile;
  return CandidatePool(std::move(candidates), EmbeddingTable(std::move(x)), std::move(policy), spec.metric);
}

}  // namespace expdesign
