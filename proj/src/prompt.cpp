#include "expdesign/prompt.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

#include "expdesign/error.hpp"

namespace expdesign::llm {
namespace {

constexpr std::array<DatasetDescriptor, 8> kDescriptors{{
    {"il2", Domain::genes, "regulate the production of Interleukin-2 (IL-2)",
     "log fold change in Interleukin-2 (IL-2) normalized read counts", "", 128, 5},
    {"ifng", Domain::genes, "regulate the production of Interferon-gamma (IFNG)",
     "log fold change in Interferon-gamma (IFNG) normalized read counts", "", 128, 5},
    {"carnevale", Domain::genes,
     "upon being knocked out, would boost the efficacy of engineered T cells in the presence of an adenosine "
     "agonist that creates an immunosuppresive condition",
     "change in T cell proliferation", "", 128, 5},
    {"sanchez", Domain::genes,
     "when knocked out, either increase or decrease expression of endogenous tau protein levels in neurons",
     "change in tau protein level compared to the non-targeting control, using a total tau antibody", "", 128, 5},
    {"sanchez-down", Domain::genes,
     "when knocked out, decrease expression of endogenous tau protein levels in neurons",
     "change in tau protein level compared to the non-targeting control, using a total tau antibody", "", 128, 5},
    {"ion-e", Domain::molecules, "ionization energy (in eV)", "",
     "The molecules in the library are composed of only C, H, N and O elements.", 128, 5},
    {"esol", Domain::molecules, "solubility in water (log mol per litre)", "",
     "The molecules in the library are small organic molecules.", 64, 4},
    {"freesolv", Domain::molecules, "hydration free energy in water", "",
     "The molecules in the library are small organic molecules.", 32, 4},
}};

std::string format_score(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

void pad_left(std::string& out, std::string_view text, std::size_t width) {
  if (text.size() < width) out.append(width - text.size(), ' ');
  out.append(text);
}

// "## <Gene 1>", "## <Gene 2>", "...", "## <Gene n>"
std::string answer_slots(std::string_view unit, std::size_t n) {
  const auto slot = [&](std::size_t i) { return "## <" + std::string(unit) + " " + std::to_string(i) + ">\n"; };
  std::string out = slot(1);
  if (n == 2) out += slot(2);
  if (n >= 3) out += slot(2) + "...\n" + slot(n);
  return out;
}

std::string join(std::span<const std::string> names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += names[i];
  }
  return out;
}

std::string gene_system(const PromptSpec& s) {
  return "You are a biomedicine expert who will assist me on problems in drug discovery. I am planning to run a "
         "CRISPR screen to identify genes that " +
         s.func_desc + ". I can only perturb exactly " + std::to_string(s.batch_len) +
         " genes at a time. For each predicted perturbation, I am able to measure out the " + s.score_desc +
         " which will be referred to as the score. I can only do " + std::to_string(s.total_rounds) +
         " rounds of experimentation. After every round of experiment, I will provide you with feedback on your "
         "predictions, including the correctly identified genes called hits and the corresponding score. The "
         "predictions which are not hits will be included in other results.";
}

std::string molecule_system(const PromptSpec& s) {
  return "You are a chemistry expert who will assist me with problems in molecular property optimization. Given a "
         "library of molecules, I am planning to conduct wet-lab experiments to identify molecules that have high " +
         s.func_desc + ". " + s.candidate_space_info + " I can only experiment with exactly " +
         std::to_string(s.batch_len) +
         " molecules at a time. For each predicted molecule, I am able to measure out the property value, which will "
         "be referred to as the score. I can only do " +
         std::to_string(s.total_rounds) +
         " rounds of experimentation. After every round of experiment, I will provide you with feedback on your "
         "predictions, including the correctly identified molecules called hits and the corresponding score. The "
         "predictions which are not hits will be included in other results.";
}

constexpr std::string_view kReflectionLine = "**Reflection: Thoughts on previous results and next steps.\n";
constexpr std::string_view kPlanLine =
    "**Research Plan: The full high level research plan, with current status and reasoning behind each proposed "
    "approach. It should be at most 5 sentences.\n";
constexpr std::string_view kNoComments = "DO NOT ADD ANY COMMENTS IN THE SOLUTION OR AFTER THE SOLUTION.";

std::string response_format(const PromptSpec& s, std::string_view unit, std::size_t count) {
  std::string out = "Your response should exactly follow the format:\n";
  if (s.variant != PromptVariant::llmnn_noexp) {
    out += kReflectionLine;
    out += kPlanLine;
  }
  out += "**Solution:\n";
  out += answer_slots(unit, count);
  return out;
}

std::string feedback_block(const PromptSpec& s) {
  if (s.round_num == 1) return {};
  return "Here is the feedback on all your predictions till now:\n" +
         render_feedback(s.feedback.value_or(Feedback{})) + "\n";
}

std::string gene_user(const PromptSpec& s) {
  std::string out;
  if (s.round_num == 1) {
    out += "This is round 1. We are beginning with our experiments.\n";
    out += "Here is a strategy to follow: Choose genes that are very different in their biological pathways to "
           "discover what pathways give you hits.\n";
  } else {
    out += "This is round " + std::to_string(s.round_num) + ".\n";
    out += feedback_block(s);
    out += "Here is a strategy to follow: Update your priors appropriately and choose genes that gave you hits. "
           "Also, be sure to explore by including some genes that could give hits.\n";
  }
  const bool direct = s.variant == PromptVariant::bda;
  const std::size_t count = direct ? s.request_count.value_or(s.batch_len) : s.num_centers;
  out += "Please propose " + std::to_string(count) +
         " different yet valid gene names as per the HGNC nomenclature you want to explore next. ";
  if (direct) {
    if (!s.exclude.empty()) {
      out += "Do not propose any of the following genes, which are invalid or already tested: " + join(s.exclude) +
             ". ";
    }
  } else {
    out += "Note that I will choose unexplored genes closest to your predicted genes to form the predictions. ";
  }
  out += response_format(s, "Gene", count);
  out += "Each gene in the solution should only be the gene name in the HGNC nomenclature.\n";
  out += kNoComments;
  return out;
}

std::string molecule_user(const PromptSpec& s) {
  std::string out = "This is round " + std::to_string(s.round_num) + ".\n";
  out += feedback_block(s);
  out += "Here is a strategy to follow: Update your priors appropriately and choose SMILES that gave you hits. "
         "Also, be sure to explore by including some SMILES strings that could give hits.\n";
  out += "Please propose " + std::to_string(s.num_centers) +
         " different yet valid SMILES strings of molecules you want to explore next. Note that I will choose "
         "unexplored molecules closest to your predicted SMILES strings to form the predictions. ";
  out += response_format(s, "SMILES", s.num_centers);
  out += "Each SMILES string in the solution should be a SMILES string representation of a valid molecule.\n";
  out += kNoComments;
  return out;
}

}  // namespace

Domain parse_domain(std::string_view text) {
  if (text == "genes") return Domain::genes;
  if (text == "molecules") return Domain::molecules;
  throw ConfigError("unknown domain '" + std::string(text) + "' (expected genes or molecules)");
}

std::string_view to_string(Domain domain) { return domain == Domain::genes ? "genes" : "molecules"; }

std::string_view to_string(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::llmnn: return "llmnn";
    case PromptVariant::llmnn_noexp: return "llmnn-noexp";
    case PromptVariant::bda: return "bda";
  }
  return "?";
}

std::span<const DatasetDescriptor> dataset_descriptors() { return kDescriptors; }

const DatasetDescriptor* find_descriptor(std::string_view key) {
  const auto it = std::find_if(kDescriptors.begin(), kDescriptors.end(),
                               [&](const DatasetDescriptor& d) { return d.key == key; });
  return it == kDescriptors.end() ? nullptr : &*it;
}

std::string render_table(std::span<const FeedbackRecord> records) {
  std::vector<std::string> scores;
  scores.reserve(records.size());
  std::size_t name_width = 4;   // "name"
  std::size_t score_width = 5;  // "score"
  for (const auto& r : records) {
    scores.push_back(format_score(r.score));
    name_width = std::max(name_width, r.name.size());
    score_width = std::max(score_width, scores.back().size());
  }
  std::string out;
  pad_left(out, "name", name_width);
  out += "  ";
  pad_left(out, "score", score_width);
  for (std::size_t i = 0; i < records.size(); ++i) {
    out += '\n';
    pad_left(out, records[i].name, name_width);
    out += "  ";
    pad_left(out, scores[i], score_width);
  }
  return out;
}

std::string render_feedback(const Feedback& feedback) {
  const auto hits = feedback.hits();
  const auto others = feedback.others();
  return "[HITS]\n" + render_table(hits) + "\n[OTHER RESULTS]\n" + render_table(others);
}

Prompt render_prompt(const PromptSpec& spec) {
  if (spec.round_num == 0) throw PreconditionError("round numbers start at 1");
  if (spec.round_num == 1 && spec.feedback) throw PreconditionError("round 1 prompt cannot carry feedback");
  if (spec.batch_len == 0) throw PreconditionError("batch length must be positive");
  if (spec.request_count && *spec.request_count == 0) throw PreconditionError("request count must be positive");
  if (spec.variant != PromptVariant::bda && spec.num_centers == 0) {
    throw PreconditionError("number of cluster centers must be positive");
  }
  if (spec.domain == Domain::molecules && spec.variant == PromptVariant::bda) {
    throw PreconditionError("the bda prompt variant is only defined for the genes domain");
  }
  if (spec.domain == Domain::genes) return {gene_system(spec), gene_user(spec)};
  return {molecule_system(spec), molecule_user(spec)};
}

}  // namespace expdesign::llm
