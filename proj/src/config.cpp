#include "expdesign/config.hpp"

#include <fstream>
#include <set>

#include "expdesign/error.hpp"

namespace expdesign {

FeedbackMode parse_feedback_mode(std::string_view text) {
  if (text == "true") return FeedbackMode::truthful;
  if (text == "randomized") return FeedbackMode::randomized;
  throw ConfigError("feedback mode must be 'true' or 'randomized', got '" + std::string(text) + "'");
}

std::string_view to_string(FeedbackMode mode) {
  return mode == FeedbackMode::truthful ? "true" : "randomized";
}

namespace {

using nlohmann::json;

void only_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + " must be an object");
  const std::set<std::string_view> ok(allowed);
  for (const auto& [key, value] : obj.items()) {
    if (!ok.contains(key)) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
  }
}

template <typename T>
T get(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

std::size_t get_count(const json& obj, const char* key, std::size_t fallback) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(std::string("config key '") + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.empty() || path.is_absolute() || base.empty()) return path;
  return base / path;
}

DatasetConfig parse_dataset(const json& d, const std::filesystem::path& base) {
  only_keys(d, "dataset",
            {"key", "measurements", "embeddings", "ground_truth", "metric", "hit_mode", "percentile",
             "expected_dim", "element_filter", "score_range", "domain", "func_desc", "score_desc",
             "candidate_space_info"});
  DatasetConfig out;
  out.key = get<std::string>(d, "key", "");
  out.measurements = resolve(base, get<std::string>(d, "measurements", ""));
  out.embeddings = resolve(base, get<std::string>(d, "embeddings", ""));
  if (d.contains("ground_truth")) out.ground_truth = resolve(base, get<std::string>(d, "ground_truth", ""));
  try {
    if (d.contains("metric")) out.metric = parse_metric(get<std::string>(d, "metric", ""));
    if (d.contains("hit_mode")) out.hit_mode = parse_hit_mode(get<std::string>(d, "hit_mode", ""));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  out.percentile = get<double>(d, "percentile", 90.0);
  if (d.contains("expected_dim")) out.expected_dim = get_count(d, "expected_dim", 0);
  if (d.contains("element_filter")) out.element_filter = get<std::vector<std::string>>(d, "element_filter", {});
  if (d.contains("score_range")) {
    const auto r = get<std::vector<double>>(d, "score_range", {});
    if (r.size() != 2 || r[0] > r[1]) throw ConfigError("dataset.score_range must be [lo, hi] with lo <= hi");
    out.score_range = std::make_pair(r[0], r[1]);
  }
  if (d.contains("domain")) {
    try {
      out.domain = llm::parse_domain(get<std::string>(d, "domain", ""));
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  out.func_desc = get<std::string>(d, "func_desc", "");
  out.score_desc = get<std::string>(d, "score_desc", "");
  out.candidate_space_info = get<std::string>(d, "candidate_space_info", "");
  return out;
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  only_keys(doc, "config",
            {"agent", "feedback", "rounds", "batch_size", "num_centers", "runs", "seed", "jobs",
             "include_incomplete", "dataset", "randomization", "linucb", "gp", "surrogate_target", "llm", "out"});
  ExperimentConfig c;
  c.agent = parse_agent_kind(get<std::string>(doc, "agent", "random"));
  c.feedback = parse_feedback_mode(get<std::string>(doc, "feedback", "true"));
  c.rounds = get_count(doc, "rounds", c.rounds);
  c.batch_size = get_count(doc, "batch_size", c.batch_size);
  c.num_centers = get_count(doc, "num_centers", c.num_centers);
  c.runs = get_count(doc, "runs", c.runs);
  c.seed = get<std::uint64_t>(doc, "seed", 0);
  c.jobs = get_count(doc, "jobs", c.jobs);
  c.include_incomplete = get<bool>(doc, "include_incomplete", false);
  if (doc.contains("dataset")) c.dataset = parse_dataset(doc.at("dataset"), base_dir);

  if (doc.contains("randomization")) {
    const auto& r = doc.at("randomization");
    only_keys(r, "randomization", {"level1", "level2", "per_round", "label_noise"});
    c.randomization.level1 = get<bool>(r, "level1", true);
    c.randomization.level2 = get<bool>(r, "level2", true);
    c.randomization.per_round = get<bool>(r, "per_round", true);
    const auto noise = get<std::string>(r, "label_noise", "permute");
    if (noise == "permute") c.randomization.label_noise = LabelNoise::permute;
    else if (noise == "resample") c.randomization.label_noise = LabelNoise::resample;
    else throw ConfigError("randomization.label_noise must be 'permute' or 'resample'");
  }
  if (doc.contains("linucb")) {
    const auto& l = doc.at("linucb");
    only_keys(l, "linucb", {"lambda", "alpha", "center_targets"});
    c.linucb_center_targets = get<bool>(l, "center_targets", true);
    c.linucb.lambda = get<double>(l, "lambda", c.linucb.lambda);
    c.linucb.alpha = get<double>(l, "alpha", c.linucb.alpha);
    if (!(c.linucb.lambda > 0.0) || !(c.linucb.alpha >= 0.0)) {
      throw ConfigError("linucb.lambda must be positive and linucb.alpha non-negative");
    }
  }
  if (doc.contains("gp")) {
    const auto& g = doc.at("gp");
    only_keys(g, "gp", {"beta", "length_scale", "noise_ratio", "subsample"});
    c.gp.beta = get<double>(g, "beta", c.gp.beta);
    if (g.contains("length_scale") && !g.at("length_scale").is_null()) {
      c.gp.length_scale = get<double>(g, "length_scale", 1.0);
      if (!(*c.gp.length_scale > 0.0)) throw ConfigError("gp.length_scale must be positive");
    }
    c.gp.noise_ratio = get<double>(g, "noise_ratio", c.gp.noise_ratio);
    c.gp.subsample = get_count(g, "subsample", c.gp.subsample);
    if (!(c.gp.beta >= 0.0) || !(c.gp.noise_ratio >= 0.0)) {
      throw ConfigError("gp.beta and gp.noise_ratio must be non-negative");
    }
  }
  const auto target = get<std::string>(doc, "surrogate_target", "auto");
  if (target == "auto") c.surrogate_target = TargetChoice::automatic;
  else if (target == "score") c.surrogate_target = TargetChoice::score;
  else if (target == "abs_score") c.surrogate_target = TargetChoice::abs_score;
  else throw ConfigError("surrogate_target must be 'auto', 'score' or 'abs_score'");

  if (doc.contains("llm")) {
    const auto& l = doc.at("llm");
    only_keys(l, "llm",
              {"backend", "fixtures", "endpoint", "model", "temperature", "max_tokens", "max_attempts",
               "backoff_ms", "bda_reprompts", "timeout_s"});
    c.llm.fixtures = resolve(base_dir, get<std::string>(l, "fixtures", ""));
    c.llm.endpoint = get<std::string>(l, "endpoint", "");
    c.llm.model = get<std::string>(l, "model", "");
    c.llm.temperature = get<double>(l, "temperature", c.llm.temperature);
    c.llm.max_tokens = get<int>(l, "max_tokens", c.llm.max_tokens);
    c.llm.max_attempts = get_count(l, "max_attempts", c.llm.max_attempts);
    c.llm.backoff_ms = get_count(l, "backoff_ms", c.llm.backoff_ms);
    c.llm.bda_reprompts = get_count(l, "bda_reprompts", c.llm.bda_reprompts);
    c.llm.timeout_s = get_count(l, "timeout_s", c.llm.timeout_s);
    const auto backend = get<std::string>(l, "backend", "");
    if (backend == "scripted") c.llm.backend = BackendKind::scripted;
    else if (backend == "http") c.llm.backend = BackendKind::http;
    else if (backend == "none") c.llm.backend = BackendKind::none;
    else if (backend.empty()) {
      c.llm.backend = !c.llm.fixtures.empty() ? BackendKind::scripted
                      : !c.llm.endpoint.empty() ? BackendKind::http
                                                : BackendKind::none;
    } else {
      throw ConfigError("llm.backend must be 'scripted', 'http' or 'none'");
    }
  }
  if (doc.contains("out")) c.out = resolve(base_dir, get<std::string>(doc, "out", "results"));
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

std::vector<std::string> validate_config(const ExperimentConfig& c) {
  if (c.rounds == 0) throw ConfigError("rounds must be at least 1");
  if (c.batch_size == 0) throw ConfigError("batch_size must be at least 1");
  if (c.num_centers == 0) throw ConfigError("num_centers must be at least 1");
  if (c.runs == 0) throw ConfigError("runs must be at least 1");
  if (c.jobs == 0) throw ConfigError("jobs must be at least 1");
  if (c.llm.max_attempts == 0) throw ConfigError("llm.max_attempts must be at least 1");
  if (!(c.dataset.percentile > 0.0 && c.dataset.percentile < 100.0)) {
    throw ConfigError("dataset.percentile must lie in (0, 100)");
  }
  std::vector<std::string> warnings;
  if (uses_llm(c.agent)) {
    if (c.llm.backend == BackendKind::none) {
      throw ConfigError("agent '" + std::string(to_string(c.agent)) + "' needs llm.fixtures or llm.endpoint");
    }
    if (c.llm.backend == BackendKind::scripted && c.llm.fixtures.empty()) {
      throw ConfigError("scripted backend needs llm.fixtures");
    }
    if (c.llm.backend == BackendKind::http && c.llm.endpoint.empty()) {
      throw ConfigError("http backend needs llm.endpoint");
    }
  }
  if (c.feedback == FeedbackMode::randomized && !uses_llm(c.agent)) {
    warnings.push_back("randomized feedback is applied to non-LLM agent '" + std::string(to_string(c.agent)) + "'");
  }
  if (c.num_centers > c.batch_size && (c.agent == AgentKind::llmnn || c.agent == AgentKind::llmnn_noexp ||
                                       c.agent == AgentKind::random_centroids)) {
    warnings.push_back("num_centers exceeds batch_size; some centers get an empty quota");
  }
  return warnings;
}

std::vector<std::string> pool_warnings(const ExperimentConfig& c, const CandidatePool& pool) {
  std::vector<std::string> warnings;
  if (c.rounds * c.batch_size > pool.size()) {
    warnings.push_back("rounds * batch_size = " + std::to_string(c.rounds * c.batch_size) +
                       " exceeds the pool size " + std::to_string(pool.size()) + "; late rounds will be short");
  }
  return warnings;
}

IngestOptions ingest_options(const DatasetConfig& d) {
  IngestOptions o;
  o.expected_dim = d.expected_dim;
  o.element_filter = d.element_filter;
  o.score_range = d.score_range;
  o.hit_mode = d.hit_mode;
  o.percentile = d.percentile;
  o.ground_truth_path = d.ground_truth;
  o.metric = d.metric;
  return o;
}

CandidatePool load_dataset(const DatasetConfig& d) {
  if (d.measurements.empty() || d.embeddings.empty()) {
    throw ConfigError("dataset.measurements and dataset.embeddings are required");
  }
  return load_pool(d.measurements, d.embeddings, ingest_options(d));
}

AgentSettings agent_settings(const ExperimentConfig& c, const CandidatePool& pool) {
  AgentSettings s;
  s.batch_size = c.batch_size;
  s.num_centers = c.num_centers;
  s.total_rounds = c.rounds;
  s.linucb = c.linucb;
  s.linucb_center_targets = c.linucb_center_targets;
  s.gp = c.gp;
  switch (c.surrogate_target) {
    case TargetChoice::score: s.target = SurrogateTarget::score; break;
    case TargetChoice::abs_score: s.target = SurrogateTarget::abs_score; break;
    case TargetChoice::automatic:
      s.target = pool.hit_policy().mode == HitMode::abs_top_percentile ? SurrogateTarget::abs_score
                                                                          : SurrogateTarget::score;
      break;
  }
  const auto* desc = llm::find_descriptor(c.dataset.key);
  s.domain = c.dataset.domain.value_or(desc ? desc->domain : llm::Domain::genes);
  s.func_desc = !c.dataset.func_desc.empty() ? c.dataset.func_desc : desc ? std::string(desc->func_desc) : "";
  s.score_desc = !c.dataset.score_desc.empty() ? c.dataset.score_desc : desc ? std::string(desc->score_desc) : "";
  s.candidate_space_info = !c.dataset.candidate_space_info.empty() ? c.dataset.candidate_space_info
                           : desc ? std::string(desc->candidate_space_info)
                                  : "";
  s.sampling.temperature = c.llm.temperature;
  s.sampling.max_tokens = c.llm.max_tokens;
  s.retry.max_attempts = c.llm.max_attempts;
  s.retry.initial_backoff = std::chrono::milliseconds(c.llm.backoff_ms);
  s.bda_reprompts = c.llm.bda_reprompts;
  return s;
}

}  // namespace expdesign
