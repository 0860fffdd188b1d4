#include "expdesign/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "expdesign/csv.hpp"
#include "expdesign/error.hpp"
#include "expdesign/feedback.hpp"
#include "expdesign/memory.hpp"

namespace expdesign {

RunKey run_key(const ExperimentConfig& c) {
  RunKey k;
  k.agent = std::string(to_string(c.agent));
  k.dataset = c.dataset.key.empty() ? c.dataset.measurements.stem().string() : c.dataset.key;
  k.feedback = std::string(to_string(c.feedback));
  k.rounds = c.rounds;
  k.batch_size = c.batch_size;
  k.num_centers = c.num_centers;
  return k;
}

namespace {

nlohmann::json names_of(const CandidatePool& pool, std::span<const std::size_t> indices) {
  auto arr = nlohmann::json::array();
  for (std::size_t i : indices) arr.push_back(pool.name(i));
  return arr;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& config, const CandidatePool& pool, std::uint64_t seed,
                         llm::LlmBackend* backend, TraceLog* trace, const Embedder& embedder) {
  validate_config(config);
  RunResult result;
  result.key = run_key(config);
  result.seed = seed;

  const auto warn = [&](std::string message, std::size_t round) {
    if (trace) trace->write({{"event", "warning"}, {"round", round}, {"message", message}});
    result.warnings.push_back(std::move(message));
  };
  for (auto& w : pool_warnings(config, pool)) warn(std::move(w), 0);
  if (config.feedback == FeedbackMode::randomized && !uses_llm(config.agent)) {
    warn("randomized feedback delivered to a non-LLM agent", 0);
  }

  auto settings = agent_settings(config, pool);
  settings.embedder = embedder;
  auto agent = make_agent(config.agent, settings);
  CandidateMemory memory(pool);

  std::vector<std::size_t> history;
  Feedback persisted;  // randomized records kept across rounds when !per_round
  std::size_t previous_end = 0;
  std::size_t cumulative = 0;

  for (std::size_t round = 1; round <= config.rounds; ++round) {
    Feedback delivered;
    if (round > 1) {
      result.feedback_constructed = true;
      if (config.feedback == FeedbackMode::truthful) {
        delivered = build_feedback(pool, history);
      } else if (config.randomization.per_round) {
        Rng rng(derive_seed(seed, stream::kFeedbackShuffle, round));
        delivered = randomize_feedback(build_feedback(pool, history), config.randomization.level1,
                                       config.randomization.level2, rng, config.randomization.label_noise);
      } else {
        const std::span<const std::size_t> fresh(history.data() + previous_end, history.size() - previous_end);
        Rng rng(derive_seed(seed, stream::kFeedbackShuffle, round));
        const auto shuffled = randomize_feedback(build_feedback(pool, fresh), config.randomization.level1,
                                                 config.randomization.level2, rng, config.randomization.label_noise);
        for (const auto& r : shuffled.records()) persisted.add(r);
        delivered = persisted;
      }
      previous_end = history.size();
      if (trace) {
        auto names = nlohmann::json::array();
        for (const auto& r : delivered.records()) names.push_back(r.name);
        trace->write({{"event", "feedback"},
                      {"round", round},
                      {"randomized", config.feedback == FeedbackMode::randomized},
                      {"names", names}});
      }
    }

    std::vector<std::size_t> batch;
    if (memory.unexplored_count() == 0) {
      warn("round " + std::to_string(round) + ": pool exhausted, nothing selected", round);
    } else {
      RoundContext ctx;
      ctx.round = round;
      ctx.feedback = round > 1 ? &delivered : nullptr;
      ctx.memory = &memory;
      ctx.run_seed = seed;
      ctx.backend = backend;
      ctx.trace = trace;
      try {
        batch = agent->select(ctx);
      } catch (const LlmError& e) {
        result.complete = false;
        result.error = "round " + std::to_string(round) + ": " + e.what();
        if (trace) trace->write({{"event", "abort"}, {"round", round}, {"error", result.error}});
        break;
      }
      if (batch.size() < config.batch_size) {
        warn("round " + std::to_string(round) + ": selected " + std::to_string(batch.size()) + " of " +
                 std::to_string(config.batch_size) + " (pool exhausted)",
             round);
      }
    }

    std::vector<std::string> names;
    std::vector<std::string> hit_names;
    std::vector<std::size_t> hit_indices;
    for (std::size_t i : batch) {
      names.push_back(pool.name(i));
      if (pool.is_hit(i)) {
        hit_names.push_back(pool.name(i));
        hit_indices.push_back(i);
      }
    }
    cumulative += hit_names.size();
    history.insert(history.end(), batch.begin(), batch.end());
    if (trace) {
      trace->write({{"event", "selection"},
                    {"round", round},
                    {"names", names_of(pool, batch)},
                    {"hits", names_of(pool, hit_indices)},
                    {"cumulative_hits", cumulative}});
    }
    result.selected.push_back(std::move(names));
    result.hits.push_back(std::move(hit_names));
    result.cumulative_hits.push_back(cumulative);
  }
  return result;
}

BackendFactory backend_factory(const LlmConfig& llm) {
  switch (llm.backend) {
    case BackendKind::none:
      return [] { return std::unique_ptr<llm::LlmBackend>(); };
    case BackendKind::scripted: {
      auto base = std::make_shared<llm::ScriptedBackend>(llm::ScriptedBackend::from_directory(llm.fixtures));
      return [base] { return std::unique_ptr<llm::LlmBackend>(new llm::ScriptedBackend(base->fork())); };
    }
    case BackendKind::http: {
      llm::HttpBackendConfig cfg;
      cfg.endpoint = llm.endpoint;
      cfg.model = llm.model;
      if (const char* key = std::getenv(llm::kApiKeyEnv)) cfg.api_key = key;
      cfg.timeout = std::chrono::seconds(llm.timeout_s);
      return [cfg] { return std::unique_ptr<llm::LlmBackend>(new llm::HttpBackend(cfg)); };
    }
  }
  throw ConfigError("unsupported backend");
}

std::vector<RunResult> run_all(const ExperimentConfig& config, const CandidatePool& pool,
                               const BackendFactory& make_backend, const std::filesystem::path& trace_dir) {
  validate_config(config);
  if (!trace_dir.empty()) std::filesystem::create_directories(trace_dir);
  std::vector<RunResult> results(config.runs);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&] {
    for (std::size_t r = next++; r < config.runs; r = next++) {
      try {
        std::unique_ptr<TraceLog> trace;
        std::filesystem::path trace_path;
        if (!trace_dir.empty()) {
          trace_path = trace_dir / ("run-" + std::to_string(r) + ".jsonl");
          trace = std::make_unique<TraceLog>(trace_path);
        }
        auto backend = make_backend ? make_backend() : nullptr;
        results[r] = run_experiment(config, pool, config.seed + r, backend.get(), trace.get());
        results[r].run = r;
        results[r].trace_path = trace_path;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  const std::size_t threads = std::min(config.jobs, config.runs);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool_threads;
    for (std::size_t t = 0; t < threads; ++t) pool_threads.emplace_back(worker);
    for (auto& t : pool_threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

Summary aggregate_runs(const std::vector<RunResult>& results, bool include_incomplete) {
  if (results.empty()) throw PreconditionError("aggregate_runs needs at least one result");
  Summary s;
  s.key = results.front().key;
  s.runs_total = results.size();
  for (const auto& r : results) {
    if (!(r.key == s.key)) {
      throw PreconditionError("cannot aggregate runs of different configurations (" + r.key.agent + "/" +
                              r.key.feedback + " vs " + s.key.agent + "/" + s.key.feedback + ")");
    }
  }
  std::vector<double> round_sums;
  std::vector<std::size_t> round_counts;
  for (const auto& r : results) {
    if (!r.complete && !include_incomplete) continue;
    s.finals.push_back(r.final_hits());
    for (std::size_t i = 0; i < r.cumulative_hits.size(); ++i) {
      if (round_sums.size() <= i) {
        round_sums.push_back(0.0);
        round_counts.push_back(0);
      }
      round_sums[i] += static_cast<double>(r.cumulative_hits[i]);
      ++round_counts[i];
    }
  }
  s.runs_used = s.finals.size();
  if (s.runs_used == 0) throw PreconditionError("no complete run to aggregate");
  double sum = 0.0;
  for (auto f : s.finals) sum += static_cast<double>(f);
  s.mean = sum / static_cast<double>(s.runs_used);
  double sq = 0.0;
  for (auto f : s.finals) sq += (static_cast<double>(f) - s.mean) * (static_cast<double>(f) - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(s.runs_used));
  for (std::size_t i = 0; i < round_sums.size(); ++i) {
    s.per_round_mean.push_back(round_sums[i] / static_cast<double>(round_counts[i]));
  }
  return s;
}

std::vector<Summary> aggregate_groups(const std::vector<RunResult>& results, bool include_incomplete) {
  std::vector<std::vector<RunResult>> groups;
  for (const auto& r : results) {
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.front().key == r.key; });
    if (it == groups.end()) groups.push_back({r});
    else it->push_back(r);
  }
  std::vector<Summary> out;
  for (const auto& g : groups) out.push_back(aggregate_runs(g, include_incomplete));
  return out;
}

namespace {

nlohmann::json key_json(const RunKey& k) {
  return {{"agent", k.agent},
          {"dataset", k.dataset},
          {"feedback", k.feedback},
          {"rounds", k.rounds},
          {"batch_size", k.batch_size},
          {"num_centers", k.num_centers}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::optional<nlohmann::json> paired(const std::vector<Summary>& summaries, const std::vector<RunResult>& results) {
  const Summary* truthful = nullptr;
  const Summary* randomized = nullptr;
  for (const auto& s : summaries) {
    if (s.key.feedback == "true") truthful = &s;
    if (s.key.feedback == "randomized") randomized = &s;
  }
  if (!truthful || !randomized || truthful->key.agent != randomized->key.agent ||
      truthful->key.dataset != randomized->key.dataset) {
    return std::nullopt;
  }
  std::map<std::uint64_t, std::pair<const RunResult*, const RunResult*>> by_seed;
  for (const auto& r : results) {
    if (!r.complete) continue;
    if (r.key == truthful->key) by_seed[r.seed].first = &r;
    if (r.key == randomized->key) by_seed[r.seed].second = &r;
  }
  auto rows = nlohmann::json::array();
  double diff_sum = 0.0;
  std::size_t n = 0;
  for (const auto& [seed, pair] : by_seed) {
    if (!pair.first || !pair.second) continue;
    const auto a = pair.first->final_hits();
    const auto b = pair.second->final_hits();
    rows.push_back({{"seed", seed}, {"true", a}, {"randomized", b}});
    diff_sum += static_cast<double>(a) - static_cast<double>(b);
    ++n;
  }
  return nlohmann::json{{"agent", truthful->key.agent},
                        {"dataset", truthful->key.dataset},
                        {"true_mean", truthful->mean},
                        {"randomized_mean", randomized->mean},
                        {"mean_difference", n ? diff_sum / static_cast<double>(n) : 0.0},
                        {"pairs", rows}};
}

}  // namespace

nlohmann::json summary_json(const std::vector<Summary>& summaries, const std::vector<RunResult>& results) {
  auto arr = nlohmann::json::array();
  for (const auto& s : summaries) {
    auto j = key_json(s.key);
    j["runs_total"] = s.runs_total;
    j["runs_used"] = s.runs_used;
    j["mean_final_hits"] = s.mean;
    j["std_final_hits"] = s.std;
    j["final_hits"] = s.finals;
    j["per_round_mean_cumulative_hits"] = s.per_round_mean;
    arr.push_back(std::move(j));
  }
  nlohmann::json doc{{"schema_version", kReportSchemaVersion}, {"summaries", arr}};
  if (auto p = paired(summaries, results)) doc["paired"] = *p;
  return doc;
}

void write_report(const std::vector<Summary>& summaries, const std::vector<RunResult>& results,
                  const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir / "runs");
  std::size_t rounds = 0;
  for (const auto& r : results) rounds = std::max(rounds, r.key.rounds);

  std::ostringstream csv_text;
  std::vector<std::string> header{"schema_version", "agent",   "dataset",  "feedback", "rounds",    "batch_size",
                                  "num_centers",    "run",     "seed",     "complete", "final_hits"};
  for (std::size_t i = 1; i <= rounds; ++i) header.push_back("hits_r" + std::to_string(i));
  csv::write_record(csv_text, header);
  for (const auto& r : results) {
    std::vector<std::string> row{std::to_string(kReportSchemaVersion),
                                 r.key.agent,
                                 r.key.dataset,
                                 r.key.feedback,
                                 std::to_string(r.key.rounds),
                                 std::to_string(r.key.batch_size),
                                 std::to_string(r.key.num_centers),
                                 std::to_string(r.run),
                                 std::to_string(r.seed),
                                 r.complete ? "1" : "0",
                                 std::to_string(r.final_hits())};
    for (std::size_t i = 0; i < rounds; ++i) {
      row.push_back(i < r.cumulative_hits.size() ? std::to_string(r.cumulative_hits[i]) : "");
    }
    csv::write_record(csv_text, row);

    nlohmann::json run = key_json(r.key);
    run["schema_version"] = kReportSchemaVersion;
    run["run"] = r.run;
    run["seed"] = r.seed;
    run["complete"] = r.complete;
    run["error"] = r.error;
    run["feedback_constructed"] = r.feedback_constructed;
    run["selected"] = r.selected;
    run["hits"] = r.hits;
    run["cumulative_hits"] = r.cumulative_hits;
    run["warnings"] = r.warnings;
    run["trace"] = r.trace_path.empty() ? "" : std::filesystem::relative(r.trace_path, out_dir).generic_string();
    write_text(out_dir / "runs" / (r.key.feedback + "-run-" + std::to_string(r.run) + ".json"), run.dump(2) + "\n");
  }
  write_text(out_dir / "results.csv", csv_text.str());

  write_text(out_dir / "summary.json", summary_json(summaries, results).dump(2) + "\n");
}

std::vector<RunResult> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DatasetError(path.string() + " is empty");
  const auto header = csv::split_record(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
  for (const char* need : {"schema_version", "agent", "dataset", "feedback", "rounds", "batch_size", "num_centers",
                           "run", "seed", "complete"}) {
    if (!col.contains(need)) throw DatasetError(path.string() + " lacks column " + need);
  }
  const auto number = [&](const std::string& text) -> std::uint64_t {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      throw DatasetError("bad integer '" + text + "' in " + path.string());
    }
  };
  std::vector<RunResult> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = csv::split_record(line);
    if (f.size() != header.size()) throw DatasetError("ragged row in " + path.string());
    if (number(f[col["schema_version"]]) != static_cast<std::uint64_t>(kReportSchemaVersion)) {
      throw DatasetError("unsupported schema version in " + path.string());
    }
    RunResult r;
    r.key.agent = f[col["agent"]];
    r.key.dataset = f[col["dataset"]];
    r.key.feedback = f[col["feedback"]];
    r.key.rounds = number(f[col["rounds"]]);
    r.key.batch_size = number(f[col["batch_size"]]);
    r.key.num_centers = number(f[col["num_centers"]]);
    r.run = number(f[col["run"]]);
    r.seed = number(f[col["seed"]]);
    r.complete = f[col["complete"]] == "1";
    for (std::size_t i = 1;; ++i) {
      const auto it = col.find("hits_r" + std::to_string(i));
      if (it == col.end() || f[it->second].empty()) break;
      r.cumulative_hits.push_back(number(f[it->second]));
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace expdesign
