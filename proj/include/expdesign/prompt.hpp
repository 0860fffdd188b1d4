#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "expdesign/feedback.hpp"

namespace expdesign::llm {

enum class Domain { genes, molecules };
enum class PromptVariant {
  llmnn,        // ask for cluster centers, with Reflection / Research Plan
  llmnn_noexp,  // ask for cluster centers, Solution only
  bda,          // ask for the whole batch by name
};

Domain parse_domain(std::string_view text);
std::string_view to_string(Domain domain);
std::string_view to_string(PromptVariant variant);

// Task descriptions and default batch settings for the bundled benchmarks.
struct DatasetDescriptor {
  std::string_view key;
  Domain domain;
  std::string_view func_desc;
  std::string_view score_desc;            // genes
  std::string_view candidate_space_info;  // molecules
  std::size_t batch_size;
  std::size_t num_centers;
};

std::span<const DatasetDescriptor> dataset_descriptors();
const DatasetDescriptor* find_descriptor(std::string_view key);

struct PromptSpec {
  Domain domain = Domain::genes;
  PromptVariant variant = PromptVariant::llmnn;
  std::size_t round_num = 1;
  std::size_t batch_len = 128;    // B; the number of names requested for bda
  std::size_t num_centers = 5;    // n_c
  std::size_t total_rounds = 5;
  std::string func_desc;
  std::string score_desc;
  std::string candidate_space_info;
  std::optional<Feedback> feedback;  // must be absent in round 1
  // bda re-prompts: how many names to ask for (default batch_len) and which
  // names must not be proposed again.
  std::optional<std::size_t> request_count;
  std::vector<std::string> exclude;
};

struct Prompt {
  std::string system;
  std::string user;
};

// Deterministic: equal specs give identical bytes. Throws PreconditionError for
// round 1 with feedback, round 0, zero counts, or bda in the molecules domain.
Prompt render_prompt(const PromptSpec& spec);

// Right-aligned two-column table with a `name  score` header and scores at two
// decimals, rows in record order.
std::string render_table(std::span<const FeedbackRecord> records);

// "[HITS]" table followed by "[OTHER RESULTS]" table.
std::string render_feedback(const Feedback& feedback);

}  // namespace expdesign::llm
