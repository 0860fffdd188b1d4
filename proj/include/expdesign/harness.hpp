#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "expdesign/config.hpp"
#include "expdesign/llm_backend.hpp"
#include "expdesign/pool.hpp"
#include "expdesign/trace.hpp"

namespace expdesign {

inline constexpr int kReportSchemaVersion = 1;

// Identifies which aggregate a run belongs to.
struct RunKey {
  std::string agent;
  std::string dataset;
  std::string feedback;
  std::size_t rounds = 0;
  std::size_t batch_size = 0;
  std::size_t num_centers = 0;

  bool operator==(const RunKey&) const = default;
};

struct RunResult {
  RunKey key;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<std::string>> selected;  // C_i per round
  std::vector<std::vector<std::string>> hits;      // hits within C_i
  std::vector<std::size_t> cumulative_hits;        // |C_a| after each round
  std::filesystem::path trace_path;
  bool complete = true;
  bool feedback_constructed = false;
  std::string error;
  std::vector<std::string> warnings;

  std::size_t final_hits() const { return cumulative_hits.empty() ? 0 : cumulative_hits.back(); }
};

RunKey run_key(const ExperimentConfig& config);

// One seeded run of the N-round loop. `backend` is required for LLM agents;
// `trace` is optional. LLM failures end the run early with complete = false.
RunResult run_experiment(const ExperimentConfig& config, const CandidatePool& pool, std::uint64_t seed,
                         llm::LlmBackend* backend = nullptr, TraceLog* trace = nullptr,
                         const Embedder& embedder = {});

using BackendFactory = std::function<std::unique_ptr<llm::LlmBackend>()>;

// Builds a fresh backend per run from the llm section (none, fixtures or
// HTTP with the key from EXPDESIGN_API_KEY).
BackendFactory backend_factory(const LlmConfig& llm);

// Runs 0..R-1 with seeds base + r, `jobs` at a time. Trace logs go to
// `trace_dir`/run-<r>.jsonl when trace_dir is non-empty. Results are ordered
// by run index.
std::vector<RunResult> run_all(const ExperimentConfig& config, const CandidatePool& pool,
                               const BackendFactory& make_backend, const std::filesystem::path& trace_dir = {});

struct Summary {
  RunKey key;
  std::size_t runs_total = 0;
  std::size_t runs_used = 0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  std::vector<std::size_t> finals;
  std::vector<double> per_round_mean;  // extension: mean |C_a| after each round
};

// Mean and population std of final hits over the complete runs (all runs
// when include_incomplete). Throws PreconditionError for an empty input, mixed
// keys, or no usable run.
Summary aggregate_runs(const std::vector<RunResult>& results, bool include_incomplete = false);

// results.csv (one row per run), summary.json and runs/run-<r>.json under
// `out_dir`. With summaries for both feedback modes of one agent, the JSON
// also holds a paired comparison. No wall-clock data is written.
void write_report(const std::vector<Summary>& summaries, const std::vector<RunResult>& results,
                  const std::filesystem::path& out_dir);

// Reads results.csv back into per-run records (cumulative counts only).
std::vector<RunResult> read_results_csv(const std::filesystem::path& path);

// Summary document as written to summary.json; adds the paired comparison
// when `results` hold both feedback modes of one agent.
nlohmann::json summary_json(const std::vector<Summary>& summaries, const std::vector<RunResult>& results = {});

// Groups results by key in first-seen order and aggregates each group.
std::vector<Summary> aggregate_groups(const std::vector<RunResult>& results, bool include_incomplete = false);

}  // namespace expdesign
