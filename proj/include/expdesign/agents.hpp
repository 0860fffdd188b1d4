#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "expdesign/feedback.hpp"
#include "expdesign/llm_backend.hpp"
#include "expdesign/memory.hpp"
#include "expdesign/prompt.hpp"
#include "expdesign/rng.hpp"
#include "expdesign/surrogates.hpp"
#include "expdesign/trace.hpp"

namespace expdesign {

enum class AgentKind { random, coreset, linucb, gp, bda, llmnn, llmnn_noexp, random_centroids };

AgentKind parse_agent_kind(std::string_view text);
std::string_view to_string(AgentKind kind);
bool uses_llm(AgentKind kind);

// Which observed quantity the surrogates regress on.
enum class SurrogateTarget { score, abs_score };

// Embeds an arbitrary proposed string (e.g. a SMILES not in the library).
// Returns nullopt when it cannot.
using Embedder = std::function<std::optional<std::vector<double>>(std::string_view)>;

struct GpSettings {
  double beta = 2.0;
  std::optional<double> length_scale;  // unset: median heuristic
  double noise_ratio = 1e-4;           // sigma_n^2 / sigma_f^2
  std::size_t subsample = 512;         // rows used by the median heuristic
};

struct AgentSettings {
  std::size_t batch_size = 128;
  std::size_t num_centers = 5;
  std::size_t total_rounds = 5;
  LinUcbParams linucb;
  bool linucb_center_targets = true;  // regress y - mean(y); the model has no intercept
  GpSettings gp;
  SurrogateTarget target = SurrogateTarget::score;

  llm::Domain domain = llm::Domain::genes;
  std::string func_desc;
  std::string score_desc;
  std::string candidate_space_info;
  llm::SamplingParams sampling;
  llm::RetryPolicy retry;
  std::size_t bda_reprompts = 5;
  Embedder embedder;  // molecules only; optional
};

// Everything an agent sees in one round.
struct RoundContext {
  std::size_t round = 1;                // 1-based
  const Feedback* feedback = nullptr;   // history as delivered; null in round 1
  CandidateMemory* memory = nullptr;
  std::uint64_t run_seed = 0;
  llm::LlmBackend* backend = nullptr;   // required by LLM agents
  TraceLog* trace = nullptr;            // optional
};

// One selection policy. select() returns the round's batch C_i as candidate
// indices, all of them marked explored, of size min(B, #unexplored).
class Agent {
 public:
  virtual ~Agent() = default;
  virtual AgentKind kind() const = 0;
  virtual std::vector<std::size_t> select(RoundContext& ctx) = 0;
};

std::unique_ptr<Agent> make_agent(AgentKind kind, const AgentSettings& settings);

// One-shot convenience over make_agent(kind)->select(ctx), returning names.
std::vector<std::string> select_batch(AgentKind kind, const AgentSettings& settings, RoundContext& ctx);

// Greedy farthest-point selection. The covering set starts as every explored
// candidate; with nothing explored, the lowest-index unexplored candidate is
// picked first. Each step takes the unexplored candidate whose distance to the
// covering set is largest (ties: lowest index). Marks picks explored.
std::vector<std::size_t> coreset_select(CandidateMemory& memory, std::size_t batch_size);

// k uniform unexplored candidates without replacement (partial Fisher-Yates
// over the unexplored indices in ascending order). Does not mark them.
std::vector<std::size_t> sample_unexplored(const CandidateMemory& memory, std::size_t k, Rng& rng);

}  // namespace expdesign
