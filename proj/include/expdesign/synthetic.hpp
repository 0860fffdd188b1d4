#pragma once

#include <cstddef>
#include <cstdint>

#include "expdesign/pool.hpp"

namespace expdesign {

// Clustered benchmark pool. Cluster means are N(0, cluster_scale^2 I), members
// are mean + N(0, spread^2 I), and the score of x is -|x - c*| plus
// N(0, noise^2), with c* = target_offset * e_1. Hits are the top
// (100 - percentile)% by score. Names are "s0000", "s0001", ...
struct SyntheticSpec {
  std::size_t candidates = 2000;
  std::size_t dim = 16;
  std::size_t clusters = 20;
  double cluster_scale = 4.0;
  double spread = 1.0;
  double target_offset = 30.0;
  double noise = 0.05;
  double percentile = 90.0;
  Metric metric = Metric::l2_squared;
  std::uint64_t seed = 2024;
};

CandidatePool make_synthetic_pool(const SyntheticSpec& spec);

}  // namespace expdesign
