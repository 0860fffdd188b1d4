// Command-line entry point: run experiments, validate datasets, re-aggregate
// reports and write synthetic benchmark pools.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "expdesign/config.hpp"
#include "expdesign/error.hpp"
#include "expdesign/harness.hpp"
#include "expdesign/synthetic.hpp"

namespace {

using namespace expdesign;

constexpr int kConfigFailure = 1;
constexpr int kRunFailure = 2;

struct RunFlags {
  std::string config;
  std::optional<std::string> agent;
  std::optional<std::size_t> rounds;
  std::optional<std::size_t> batch;
  std::optional<std::size_t> centers;
  std::optional<std::size_t> runs;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<std::string> feedback;
  std::optional<std::string> dataset;
  std::optional<std::string> embeddings;
  std::optional<std::string> metric;
  std::optional<std::string> fixtures;
  std::optional<std::string> out;
};

void warn_all(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

int run_command(const RunFlags& f) {
  ExperimentConfig config;
  bool both = false;
  try {
    if (!f.config.empty()) config = load_config(f.config);
    if (f.agent) config.agent = parse_agent_kind(*f.agent);
    if (f.rounds) config.rounds = *f.rounds;
    if (f.batch) config.batch_size = *f.batch;
    if (f.centers) config.num_centers = *f.centers;
    if (f.runs) config.runs = *f.runs;
    if (f.seed) config.seed = *f.seed;
    if (f.jobs) config.jobs = *f.jobs;
    if (f.feedback) {
      both = *f.feedback == "both";
      if (!both) config.feedback = parse_feedback_mode(*f.feedback);
    }
    if (f.dataset) config.dataset.measurements = *f.dataset;
    if (f.embeddings) config.dataset.embeddings = *f.embeddings;
    if (f.metric) config.dataset.metric = parse_metric(*f.metric);
    if (f.fixtures) {
      config.llm.fixtures = *f.fixtures;
      config.llm.backend = BackendKind::scripted;
    }
    if (f.out) config.out = *f.out;
    warn_all(validate_config(config));
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigFailure;
  }

  try {
    const auto pool = load_dataset(config.dataset);
    const auto factory = backend_factory(config.llm);
    std::vector<FeedbackMode> modes{config.feedback};
    if (both) modes = {FeedbackMode::truthful, FeedbackMode::randomized};

    std::vector<RunResult> all;
    std::vector<Summary> summaries;
    bool incomplete = false;
    for (const auto mode : modes) {
      auto cfg = config;
      cfg.feedback = mode;
      auto results = run_all(cfg, pool, factory, config.out / "traces" / std::string(to_string(mode)));
      for (auto& r : results) {
        for (const auto& w : r.warnings) std::cerr << "warning: run " << r.run << ": " << w << "\n";
        if (!r.complete) {
          incomplete = true;
          std::cerr << "run " << r.run << " incomplete: " << r.error << "\n";
        }
      }
      summaries.push_back(aggregate_runs(results, cfg.include_incomplete));
      all.insert(all.end(), std::make_move_iterator(results.begin()), std::make_move_iterator(results.end()));
    }
    write_report(summaries, all, config.out);
    for (const auto& s : summaries) {
      std::cout << s.key.agent << " feedback=" << s.key.feedback << " runs=" << s.runs_used << "/" << s.runs_total
                << " final hits mean=" << s.mean << " std=" << s.std << "\n";
    }
    std::cout << "report written to " << config.out.string() << "\n";
    return incomplete ? kRunFailure : 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return kRunFailure;
  }
}

struct ValidateFlags {
  std::string dataset;
  std::string embeddings;
  std::string metric = "cosine";
  std::optional<std::size_t> expected_dim;
  std::optional<std::string> hit_mode;
  double percentile = 90.0;
  std::optional<std::string> ground_truth;
  std::vector<std::string> elements;
};

int validate_command(const ValidateFlags& f) {
  IngestOptions options;
  try {
    options.metric = parse_metric(f.metric);
    options.expected_dim = f.expected_dim;
    if (f.hit_mode) options.hit_mode = parse_hit_mode(*f.hit_mode);
    options.percentile = f.percentile;
    if (f.ground_truth) options.ground_truth_path = *f.ground_truth;
    if (!f.elements.empty()) options.element_filter = f.elements;
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigFailure;
  }
  try {
    const auto pool = load_pool(f.dataset, f.embeddings, options);
    std::cout << "candidates: " << pool.size() << "\n"
              << "dim: " << pool.dim() << "\n"
              << "metric: " << to_string(pool.metric()) << "\n"
              << "hit mode: " << to_string(pool.hit_policy().mode) << "\n"
              << "hits: " << pool.hit_count() << "\n";
    if (pool.hit_policy().threshold) std::cout << "threshold: " << *pool.hit_policy().threshold << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "invalid dataset: " << e.what() << "\n";
    return kRunFailure;
  }
}

int report_command(const std::string& in_dir, bool include_incomplete) {
  try {
    const std::filesystem::path dir(in_dir);
    const auto results = read_results_csv(dir / "results.csv");
    const auto doc = summary_json(aggregate_groups(results, include_incomplete), results);
    std::ofstream(dir / "summary.json", std::ios::binary | std::ios::trunc) << doc.dump(2) << "\n";
    std::cout << doc.dump(2) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "report failed: " << e.what() << "\n";
    return kRunFailure;
  }
}

int synth_command(const std::string& out_dir, const SyntheticSpec& spec) {
  try {
    const auto pool = make_synthetic_pool(spec);
    std::filesystem::create_directories(out_dir);
    write_pool(pool, std::filesystem::path(out_dir) / "measurements.csv",
               std::filesystem::path(out_dir) / "embeddings.csv");
    std::cout << "wrote " << pool.size() << " candidates (" << pool.hit_count() << " hits) to " << out_dir << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const std::exception& e) {
    std::cerr << "synth failed: " << e.what() << "\n";
    return kRunFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop experiment design harness"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "Run a seeded multi-run experiment");
  run->add_option("--config", rf.config, "JSON config file");
  run->add_option("--agent", rf.agent, "random|coreset|linucb|gp|bda|llmnn|llmnn-noexp|random-centroids");
  run->add_option("--rounds", rf.rounds, "Rounds N");
  run->add_option("--batch", rf.batch, "Batch size B");
  run->add_option("--centers", rf.centers, "Cluster centers n_c");
  run->add_option("--runs", rf.runs, "Seeded runs R");
  run->add_option("--seed", rf.seed, "Base seed; run r uses seed + r");
  run->add_option("--jobs", rf.jobs, "Runs executed in parallel");
  run->add_option("--feedback", rf.feedback, "true|randomized|both")
      ->check(CLI::IsMember({"true", "randomized", "both"}));
  run->add_option("--dataset", rf.dataset, "Measurements CSV");
  run->add_option("--embeddings", rf.embeddings, "Embeddings CSV");
  run->add_option("--metric", rf.metric, "cosine|l2sq");
  run->add_option("--fixtures", rf.fixtures, "Directory of round-<i>.txt scripted LLM replies");
  run->add_option("--out", rf.out, "Report directory");

  ValidateFlags vf;
  auto* validate = app.add_subcommand("validate", "Check a dataset without running");
  validate->add_option("--dataset", vf.dataset, "Measurements CSV")->required();
  validate->add_option("--embeddings", vf.embeddings, "Embeddings CSV")->required();
  validate->add_option("--metric", vf.metric, "cosine|l2sq");
  validate->add_option("--expected-dim", vf.expected_dim, "Required embedding dimension");
  validate->add_option("--hit-mode", vf.hit_mode, "ground-truth|top-percentile|abs-top-percentile");
  validate->add_option("--percentile", vf.percentile, "Percentile p for percentile modes");
  validate->add_option("--ground-truth", vf.ground_truth, "Sidecar file of hit names");
  validate->add_option("--elements", vf.elements, "Allowed element symbols for SMILES names");

  std::string in_dir;
  bool include_incomplete = false;
  auto* report = app.add_subcommand("report", "Re-aggregate results.csv into summary.json");
  report->add_option("--in", in_dir, "Report directory")->required();
  report->add_flag("--include-incomplete", include_incomplete, "Aggregate incomplete runs too");

  std::string synth_out;
  SyntheticSpec spec;
  auto* synth = app.add_subcommand("synth", "Write a synthetic clustered benchmark pool");
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--seed", spec.seed, "Generator seed");
  synth->add_option("--candidates", spec.candidates, "Pool size");
  synth->add_option("--dim", spec.dim, "Embedding dimension");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigFailure;
  }

  if (*run) return run_command(rf);
  if (*validate) return validate_command(vf);
  if (*report) return report_command(in_dir, include_incomplete);
  if (*synth) return synth_command(synth_out, spec);
  return kConfigFailure;
}
