#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "expdesign/pool.hpp"

namespace testutil {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

inline std::filesystem::path data_dir() { return EXPDESIGN_TEST_DATA; }

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("expdesign-unit-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Pool with names c0, c1, ...; scores default to the row index and the hit
// policy to an empty ground-truth set.
inline expdesign::CandidatePool make_pool(const std::vector<std::vector<double>>& rows,
                                          expdesign::Metric metric = expdesign::Metric::l2_squared,
                                          std::vector<double> scores = {},
                                          std::optional<expdesign::HitPolicy> policy = std::nullopt,
                                          std::vector<std::string> names = {}) {
  std::vector<expdesign::Candidate> cands;
  expdesign::EmbeddingMatrix m(static_cast<Eigen::Index>(rows.size()),
                               static_cast<Eigen::Index>(rows.empty() ? 0 : rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string name = names.empty() ? "c" + std::to_string(i) : names[i];
    cands.push_back({name, scores.empty() ? static_cast<double>(i) : scores[i], i});
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return expdesign::CandidatePool(std::move(cands), expdesign::EmbeddingTable(std::move(m)), policy.value_or(expdesign::HitPolicy{expdesign::HitMode::ground_truth_set, 90.0, {}, {}}), metric);
}

inline std::vector<std::vector<double>> random_rows(std::size_t n, std::size_t d, std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  for (auto& r : rows)
    for (auto& v : r) v = normal(gen);
  return rows;
}

}  // namespace testutil
