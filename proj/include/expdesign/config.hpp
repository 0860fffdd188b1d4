#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "expdesign/agents.hpp"
#include "expdesign/pool.hpp"

namespace expdesign {

enum class FeedbackMode { truthful, randomized };

FeedbackMode parse_feedback_mode(std::string_view text);  // "true" | "randomized"
std::string_view to_string(FeedbackMode mode);

struct DatasetConfig {
  std::string key;  // report label; also selects a bundled descriptor
  std::filesystem::path measurements;
  std::filesystem::path embeddings;
  std::optional<std::filesystem::path> ground_truth;
  Metric metric = Metric::cosine;
  std::optional<HitMode> hit_mode;
  double percentile = 90.0;
  std::optional<std::size_t> expected_dim;
  std::optional<std::vector<std::string>> element_filter;
  std::optional<std::pair<double, double>> score_range;

  // Prompt fields; empty strings fall back to the descriptor for `key`.
  std::optional<llm::Domain> domain;
  std::string func_desc;
  std::string score_desc;
  std::string candidate_space_info;
};

struct RandomizationConfig {
  bool level1 = true;
  bool level2 = true;
  bool per_round = true;  // false: each record keeps its first randomized values
  LabelNoise label_noise = LabelNoise::permute;
};

enum class BackendKind { none, scripted, http };

struct LlmConfig {
  BackendKind backend = BackendKind::none;
  std::filesystem::path fixtures;
  std::string endpoint;
  std::string model;
  double temperature = 1.0;
  int max_tokens = 4096;
  std::size_t max_attempts = 3;
  std::size_t backoff_ms = 0;
  std::size_t bda_reprompts = 5;
  std::size_t timeout_s = 120;
};

enum class TargetChoice { automatic, score, abs_score };

struct ExperimentConfig {
  AgentKind agent = AgentKind::random;
  FeedbackMode feedback = FeedbackMode::truthful;
  std::size_t rounds = 5;
  std::size_t batch_size = 128;
  std::size_t num_centers = 5;
  std::size_t runs = 5;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool include_incomplete = false;

  DatasetConfig dataset;
  RandomizationConfig randomization;
  LinUcbParams linucb;
  bool linucb_center_targets = true;
  GpSettings gp;
  TargetChoice surrogate_target = TargetChoice::automatic;
  LlmConfig llm;
  std::filesystem::path out = "results";
};

// Parses a config document. Relative paths resolve against `base_dir`.
// Unknown keys are rejected. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Checks N, B, n_c, R >= 1 and agent/backend compatibility. Returns warnings.
std::vector<std::string> validate_config(const ExperimentConfig& config);

// Pool-dependent warnings, e.g. N * B exceeding the pool size.
std::vector<std::string> pool_warnings(const ExperimentConfig& config, const CandidatePool& pool);

IngestOptions ingest_options(const DatasetConfig& dataset);
CandidatePool load_dataset(const DatasetConfig& dataset);

// Agent settings for a config over a loaded pool: prompt fields come from the
// dataset section or its bundled descriptor, and the automatic surrogate
// target regresses |score| under abs-top-percentile hits.
AgentSettings agent_settings(const ExperimentConfig& config, const CandidatePool& pool);

}  // namespace expdesign
