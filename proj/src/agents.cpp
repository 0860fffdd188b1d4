#include "expdesign/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "expdesign/error.hpp"
#include "expdesign/response.hpp"

namespace expdesign {

AgentKind parse_agent_kind(std::string_view text) {
  if (text == "random") return AgentKind::random;
  if (text == "coreset") return AgentKind::coreset;
  if (text == "linucb") return AgentKind::linucb;
  if (text == "gp") return AgentKind::gp;
  if (text == "bda") return AgentKind::bda;
  if (text == "llmnn") return AgentKind::llmnn;
  if (text == "llmnn-noexp") return AgentKind::llmnn_noexp;
  if (text == "random-centroids") return AgentKind::random_centroids;
  throw ConfigError("unknown agent '" + std::string(text) + "'");
}

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::random: return "random";
    case AgentKind::coreset: return "coreset";
    case AgentKind::linucb: return "linucb";
    case AgentKind::gp: return "gp";
    case AgentKind::bda: return "bda";
    case AgentKind::llmnn: return "llmnn";
    case AgentKind::llmnn_noexp: return "llmnn-noexp";
    case AgentKind::random_centroids: return "random-centroids";
  }
  return "?";
}

bool uses_llm(AgentKind kind) {
  return kind == AgentKind::bda || kind == AgentKind::llmnn || kind == AgentKind::llmnn_noexp;
}

std::vector<std::size_t> sample_unexplored(const CandidateMemory& memory, std::size_t k, Rng& rng) {
  auto pool = memory.unexplored_indices();
  const std::size_t take = std::min(k, pool.size());
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + rng.uniform_index(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(take);
  return pool;
}

std::vector<std::size_t> coreset_select(CandidateMemory& memory, std::size_t batch_size) {
  const auto& pool = memory.pool();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> gap(pool.size(), inf);
  std::vector<std::size_t> cover;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (memory.is_explored(i)) cover.push_back(i);
  }
  auto open = memory.unexplored_indices();
  const auto absorb = [&](std::size_t c) {
    for (std::size_t i : open) gap[i] = std::min(gap[i], distance(pool.metric(), pool.embedding(i), pool.embedding(c)));
  };
  for (std::size_t c : cover) absorb(c);

  std::vector<std::size_t> picked;
  while (picked.size() < batch_size && !open.empty()) {
    std::size_t best_pos = 0;
    if (!cover.empty() || !picked.empty()) {
      for (std::size_t p = 1; p < open.size(); ++p) {
        if (gap[open[p]] > gap[open[best_pos]]) best_pos = p;
      }
    }
    const std::size_t choice = open[best_pos];
    open.erase(open.begin() + static_cast<std::ptrdiff_t>(best_pos));
    picked.push_back(choice);
    absorb(choice);
  }
  memory.mark_explored_indices(picked);
  return picked;
}

namespace {

nlohmann::json names_json(const CandidatePool& pool, std::span<const std::size_t> indices) {
  auto arr = nlohmann::json::array();
  for (std::size_t i : indices) arr.push_back(pool.name(i));
  return arr;
}

void trace(RoundContext& ctx, nlohmann::json event) {
  if (!ctx.trace) return;
  event["round"] = ctx.round;
  ctx.trace->write(std::move(event));
}

double target_value(SurrogateTarget target, double score) {
  return target == SurrogateTarget::abs_score ? std::abs(score) : score;
}

// Fills the batch up to `want` with uniform unexplored candidates, logging the
// top-up. Marks the additions explored.
void top_up(RoundContext& ctx, std::vector<std::size_t>& batch, std::size_t want, std::string_view reason) {
  if (batch.size() >= want || ctx.memory->unexplored_count() == 0) return;
  Rng rng(derive_seed(ctx.run_seed, stream::kTopUp, ctx.round));
  const auto extra = sample_unexplored(*ctx.memory, want - batch.size(), rng);
  ctx.memory->mark_explored_indices(extra);
  batch.insert(batch.end(), extra.begin(), extra.end());
  trace(ctx, {{"event", "top_up"}, {"reason", reason}, {"names", names_json(ctx.memory->pool(), extra)}});
}

class RandomAgent final : public Agent {
 public:
  explicit RandomAgent(const AgentSettings& s) : settings_(s) {}
  AgentKind kind() const override { return AgentKind::random; }
  std::vector<std::size_t> select(RoundContext& ctx) override {
    Rng rng(derive_seed(ctx.run_seed, stream::kAgent, ctx.round));
    auto batch = sample_unexplored(*ctx.memory, settings_.batch_size, rng);
    ctx.memory->mark_explored_indices(batch);
    return batch;
  }

 private:
  AgentSettings settings_;
};

class CoresetAgent final : public Agent {
 public:
  explicit CoresetAgent(const AgentSettings& s) : settings_(s) {}
  AgentKind kind() const override { return AgentKind::coreset; }
  std::vector<std::size_t> select(RoundContext& ctx) override {
    return coreset_select(*ctx.memory, settings_.batch_size);
  }

 private:
  AgentSettings settings_;
};

// Training rows for the surrogates: embeddings and targets of every record.
struct Observations {
  std::vector<std::size_t> rows;
  std::vector<double> targets;
};

Observations observations(const RoundContext& ctx, SurrogateTarget target) {
  Observations obs;
  if (!ctx.feedback) return obs;
  const auto& pool = ctx.memory->pool();
  for (const auto& r : ctx.feedback->records()) {
    obs.rows.push_back(pool.index_of(r.name));
    obs.targets.push_back(target_value(target, r.score));
  }
  return obs;
}

class LinUcbAgent final : public Agent {
 public:
  explicit LinUcbAgent(const AgentSettings& s) : settings_(s) {}
  AgentKind kind() const override { return AgentKind::linucb; }
  std::vector<std::size_t> select(RoundContext& ctx) override {
    const auto& pool = ctx.memory->pool();
    LinUcb model(pool.dim(), settings_.linucb);
    const auto obs = observations(ctx, settings_.target);
    double offset = 0.0;
    if (settings_.linucb_center_targets && !obs.targets.empty()) {
      offset = std::accumulate(obs.targets.begin(), obs.targets.end(), 0.0) / static_cast<double>(obs.targets.size());
    }
    for (std::size_t k = 0; k < obs.rows.size(); ++k) {
      model.update(pool.embedding(obs.rows[k]), obs.targets[k] - offset);
    }
    const auto open = ctx.memory->unexplored_indices();
    const auto values = model.score_rows(pool.embeddings().matrix(), open);
    std::vector<double> scores(pool.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < open.size(); ++j) scores[open[j]] = values[j];
    return select_top_b(scores, *ctx.memory, settings_.batch_size);
  }

 private:
  AgentSettings settings_;
};

class GpAgent final : public Agent {
 public:
  explicit GpAgent(const AgentSettings& s) : settings_(s) {}
  AgentKind kind() const override { return AgentKind::gp; }
  std::vector<std::size_t> select(RoundContext& ctx) override {
    const auto& pool = ctx.memory->pool();
    const auto obs = observations(ctx, settings_.target);
    if (obs.rows.empty()) {
      // A flat prior ranks every candidate equally; draw the first batch uniformly.
      Rng rng(derive_seed(ctx.run_seed, stream::kAgent, ctx.round));
      auto batch = sample_unexplored(*ctx.memory, settings_.batch_size, rng);
      ctx.memory->mark_explored_indices(batch);
      return batch;
    }
    if (!length_scale_) length_scale_ = settings_.gp.length_scale.value_or(median_length_scale(pool, settings_.gp.subsample));

    // z-score the targets so that sigma_f^2 = 1 matches their sample variance.
    const double n = static_cast<double>(obs.targets.size());
    const double mean = std::accumulate(obs.targets.begin(), obs.targets.end(), 0.0) / n;
    double var = 0.0;
    for (double t : obs.targets) var += (t - mean) * (t - mean);
    var = obs.targets.size() > 1 ? var / (n - 1.0) : 0.0;
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;

    Eigen::MatrixXd x(static_cast<Eigen::Index>(obs.rows.size()), static_cast<Eigen::Index>(pool.dim()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(obs.rows.size()));
    for (std::size_t k = 0; k < obs.rows.size(); ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      x.row(kk) = pool.embeddings().matrix().row(static_cast<Eigen::Index>(obs.rows[k]));
      y(kk) = (obs.targets[k] - mean) / sd;
    }
    GaussianProcess gp({*length_scale_, 1.0, settings_.gp.noise_ratio, settings_.gp.beta});
    gp.fit(std::move(x), std::move(y));

    const auto open = ctx.memory->unexplored_indices();
    const auto post = gp.posterior_rows(pool.embeddings().matrix(), open);
    std::vector<double> scores(pool.size(), -std::numeric_limits<double>::infinity());
    for (std::size_t j = 0; j < open.size(); ++j) {
      // Back in target units; the affine map keeps the ranking.
      scores[open[j]] = mean + sd * (post[j].mean + settings_.gp.beta * std::sqrt(post[j].variance));
    }
    trace(ctx, {{"event", "gp_fit"}, {"length_scale", *length_scale_}, {"jitter", gp.jitter()}});
    return select_top_b(scores, *ctx.memory, settings_.batch_size);
  }

 private:
  AgentSettings settings_;
  std::optional<double> length_scale_;
};

llm::PromptSpec base_prompt(const AgentSettings& s, const RoundContext& ctx, llm::PromptVariant variant) {
  llm::PromptSpec spec;
  spec.domain = s.domain;
  spec.variant = variant;
  spec.round_num = ctx.round;
  spec.batch_len = s.batch_size;
  spec.num_centers = s.num_centers;
  spec.total_rounds = s.total_rounds;
  spec.func_desc = s.func_desc;
  spec.score_desc = s.score_desc;
  spec.candidate_space_info = s.candidate_space_info;
  if (ctx.round > 1) spec.feedback = ctx.feedback ? *ctx.feedback : Feedback{};
  return spec;
}

llm::ParsedResponse ask(RoundContext& ctx, const AgentSettings& s, const llm::PromptSpec& spec, std::size_t expected) {
  if (!ctx.backend) throw ConfigError("LLM agent needs a backend");
  const auto prompt = llm::render_prompt(spec);
  trace(ctx, {{"event", "prompt"}, {"system", prompt.system}, {"user", prompt.user}});
  const llm::ChatRequest request{prompt.system, prompt.user, s.sampling, ctx.round};
  std::size_t attempt = 0;
  const auto text = llm::chat_with_retry(*ctx.backend, request, s.retry, [&](const std::string& raw) {
    ++attempt;
    trace(ctx, {{"event", "response"}, {"attempt", attempt}, {"text", raw}});
    llm::parse_solution(raw, expected);
  });
  auto parsed = llm::parse_solution(text, expected);
  trace(ctx, {{"event", "parsed"},
              {"solution", parsed.solution},
              {"truncated", parsed.truncated},
              {"short", parsed.short_}});
  return parsed;
}

class LlmnnAgent final : public Agent {
 public:
  LlmnnAgent(const AgentSettings& s, bool explain) : settings_(s), explain_(explain) {}
  AgentKind kind() const override { return explain_ ? AgentKind::llmnn : AgentKind::llmnn_noexp; }

  std::vector<std::size_t> select(RoundContext& ctx) override {
    auto& memory = *ctx.memory;
    const auto& pool = memory.pool();
    const std::size_t want = std::min(settings_.batch_size, memory.unexplored_count());
    if (want == 0) return {};

    const auto spec = base_prompt(settings_, ctx,
                                  explain_ ? llm::PromptVariant::llmnn : llm::PromptVariant::llmnn_noexp);
    const auto parsed = ask(ctx, settings_, spec, settings_.num_centers);

    Rng replace_rng(derive_seed(ctx.run_seed, stream::kCenterReplace, ctx.round));
    std::vector<std::vector<double>> centers;
    auto center_log = nlohmann::json::array();
    for (const auto& name : parsed.solution) {
      if (const auto idx = pool.find(name)) {
        const auto row = pool.embedding(*idx);
        centers.emplace_back(row.begin(), row.end());
        center_log.push_back({{"proposed", name}, {"source", "pool"}});
        continue;
      }
      if (settings_.domain == llm::Domain::molecules && settings_.embedder) {
        if (auto v = settings_.embedder(name); v && v->size() == pool.dim()) {
          centers.push_back(std::move(*v));
          center_log.push_back({{"proposed", name}, {"source", "embedder"}});
          continue;
        }
      }
      const auto sub = sample_unexplored(memory, 1, replace_rng);
      const auto row = pool.embedding(sub.front());
      centers.emplace_back(row.begin(), row.end());
      center_log.push_back({{"proposed", name}, {"source", "random"}, {"substitute", pool.name(sub.front())}});
      trace(ctx, {{"event", "substitution"}, {"proposed", name}, {"substitute", pool.name(sub.front())}});
    }
    trace(ctx, {{"event", "centers"}, {"centers", center_log}});

    auto batch = memory.allocate_batch_indices(centers, settings_.batch_size);
    top_up(ctx, batch, want, "allocation shortfall");
    return batch;
  }

 private:
  AgentSettings settings_;
  bool explain_;
};

class BdaAgent final : public Agent {
 public:
  explicit BdaAgent(const AgentSettings& s) : settings_(s) {}
  AgentKind kind() const override { return AgentKind::bda; }

  std::vector<std::size_t> select(RoundContext& ctx) override {
    auto& memory = *ctx.memory;
    const auto& pool = memory.pool();
    const std::size_t want = std::min(settings_.batch_size, memory.unexplored_count());
    if (want == 0) return {};

    std::vector<std::size_t> batch;
    std::unordered_set<std::size_t> taken;
    std::vector<std::string> rejected;
    auto spec = base_prompt(settings_, ctx, llm::PromptVariant::bda);
    for (std::size_t prompt_no = 0; prompt_no <= settings_.bda_reprompts && batch.size() < want; ++prompt_no) {
      const std::size_t need = want - batch.size();
      if (prompt_no > 0) {
        spec.request_count = need;
        spec.exclude = rejected;
        for (std::size_t i : batch) spec.exclude.push_back(pool.name(i));
      }
      const auto parsed = ask(ctx, settings_, spec, need);
      for (const auto& name : parsed.solution) {
        const auto idx = pool.find(name);
        if (!idx || memory.is_explored(*idx) || taken.contains(*idx)) {
          if (std::find(rejected.begin(), rejected.end(), name) == rejected.end()) rejected.push_back(name);
          trace(ctx, {{"event", "rejected"}, {"name", name}, {"reason", idx ? "explored" : "not in pool"}});
          continue;
        }
        taken.insert(*idx);
        batch.push_back(*idx);
      }
    }
    memory.mark_explored_indices(batch);
    top_up(ctx, batch, want, "bda retries exhausted");
    return batch;
  }

 private:
  AgentSettings settings_;
};

class RandomCentroidsAgent final : public Agent {
 public:
  explicit RandomCentroidsAgent(const AgentSettings& s) : settings_(s) {}
  AgentKind kind() const override { return AgentKind::random_centroids; }
  std::vector<std::size_t> select(RoundContext& ctx) override {
    auto& memory = *ctx.memory;
    const auto& pool = memory.pool();
    const std::size_t want = std::min(settings_.batch_size, memory.unexplored_count());
    if (want == 0) return {};
    Rng rng(derive_seed(ctx.run_seed, stream::kAgent, ctx.round));
    const auto picks = sample_unexplored(memory, settings_.num_centers, rng);
    std::vector<std::vector<double>> centers;
    for (std::size_t i : picks) {
      const auto row = pool.embedding(i);
      centers.emplace_back(row.begin(), row.end());
    }
    trace(ctx, {{"event", "centers"}, {"centers", names_json(pool, picks)}});
    auto batch = memory.allocate_batch_indices(centers, settings_.batch_size);
    top_up(ctx, batch, want, "allocation shortfall");
    return batch;
  }

 private:
  AgentSettings settings_;
};

}  // namespace

std::unique_ptr<Agent> make_agent(AgentKind kind, const AgentSettings& settings) {
  if (settings.batch_size == 0) throw ConfigError("batch size must be positive");
  if (settings.num_centers == 0) throw ConfigError("number of centers must be positive");
  switch (kind) {
    case AgentKind::random: return std::make_unique<RandomAgent>(settings);
    case AgentKind::coreset: return std::make_unique<CoresetAgent>(settings);
    case AgentKind::linucb: return std::make_unique<LinUcbAgent>(settings);
    case AgentKind::gp: return std::make_unique<GpAgent>(settings);
    case AgentKind::bda:
      if (settings.domain != llm::Domain::genes) throw ConfigError("the bda agent only supports the genes domain");
      return std::make_unique<BdaAgent>(settings);
    case AgentKind::llmnn: return std::make_unique<LlmnnAgent>(settings, true);
    case AgentKind::llmnn_noexp: return std::make_unique<LlmnnAgent>(settings, false);
    case AgentKind::random_centroids: return std::make_unique<RandomCentroidsAgent>(settings);
  }
  throw ConfigError("unsupported agent kind");
}

std::vector<std::string> select_batch(AgentKind kind, const AgentSettings& settings, RoundContext& ctx) {
  if (!ctx.memory) throw PreconditionError("select_batch needs a candidate memory");
  if (ctx.round == 0) throw PreconditionError("round numbers start at 1");
  auto agent = make_agent(kind, settings);
  const auto batch = agent->select(ctx);
  std::vector<std::string> names;
  for (std::size_t i : batch) names.push_back(ctx.memory->pool().name(i));
  return names;
}

}  // namespace expdesign
