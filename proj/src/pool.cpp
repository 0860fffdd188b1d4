#include "expdesign/pool.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "expdesign/csv.hpp"
#include "expdesign/error.hpp"
#include "expdesign/smiles.hpp"

namespace expdesign {

Metric parse_metric(std::string_view text) {
  if (text == "cosine") return Metric::cosine;
  if (text == "l2sq" || text == "l2-squared" || text == "l2_squared") return Metric::l2_squared;
  throw ConfigError("unknown metric '" + std::string(text) + "' (expected cosine or l2sq)");
}

std::string_view to_string(Metric metric) {
  return metric == Metric::cosine ? "cosine" : "l2sq";
}

HitMode parse_hit_mode(std::string_view text) {
  if (text == "ground-truth" || text == "ground-truth-set") return HitMode::ground_truth_set;
  if (text == "top-percentile") return HitMode::top_percentile;
  if (text == "abs-top-percentile") return HitMode::abs_top_percentile;
  throw ConfigError("unknown hit mode '" + std::string(text) + "'");
}

std::string_view to_string(HitMode mode) {
  switch (mode) {
    case HitMode::ground_truth_set: return "ground-truth-set";
    case HitMode::top_percentile: return "top-percentile";
    case HitMode::abs_top_percentile: return "abs-top-percentile";
  }
  return "?";
}

EmbeddingTable::EmbeddingTable(EmbeddingMatrix vectors) : vectors_(std::move(vectors)) {}

std::size_t percentile_hit_count(std::size_t n, double percentile) {
  // (100 - p) * n / 100 is exact for integral p, unlike (1 - p/100) * n; the
  // small slack absorbs rounding for fractional p.
  const double k = (100.0 - percentile) * static_cast<double>(n) / 100.0;
  return static_cast<std::size_t>(std::floor(k + 1e-9));
}

ResolvedHitPolicy resolve_hit_policy(std::span<const Candidate> candidates, HitPolicy policy) {
  ResolvedHitPolicy out;
  out.hit_flags.assign(candidates.size(), 0);

  if (policy.mode == HitMode::ground_truth_set) {
    std::unordered_map<std::string_view, std::size_t> index;
    for (const auto& c : candidates) index.emplace(c.name, c.index);
    for (const auto& name : policy.ground_truth) {
      const auto it = index.find(name);
      if (it == index.end()) {
        throw DatasetError("ground-truth hit '" + name + "' is not in the candidate pool");
      }
      out.hit_flags[it->second] = 1;
    }
    policy.threshold.reset();
    out.policy = std::move(policy);
    return out;
  }

  if (!(policy.percentile > 0.0 && policy.percentile < 100.0)) {
    throw ConfigError("hit percentile must lie in (0, 100)");
  }
  if (candidates.empty()) throw PreconditionError("percentile hit policy needs a non-empty pool");

  const std::size_t k = percentile_hit_count(candidates.size(), policy.percentile);
  if (k == 0) {
    throw DatasetError("pool of " + std::to_string(candidates.size()) +
                       " candidates is too small for a top-percentile rule at p=" +
                       csv::format_double(policy.percentile) +
                       "; supply an explicit ground-truth set instead");
  }

  const bool use_abs = policy.mode == HitMode::abs_top_percentile;
  const auto value = [&](std::size_t i) {
    return use_abs ? std::abs(candidates[i].score) : candidates[i].score;
  };
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return value(a) > value(b); });
  for (std::size_t r = 0; r < k; ++r) out.hit_flags[candidates[order[r]].index] = 1;
  policy.threshold = value(order[k]);
  policy.ground_truth.clear();
  out.policy = std::move(policy);
  return out;
}

CandidatePool::CandidatePool(std::vector<Candidate> candidates, EmbeddingTable embeddings,
                             HitPolicy policy, Metric metric)
    : candidates_(std::move(candidates)), embeddings_(std::move(embeddings)), metric_(metric) {
  if (candidates_.empty()) throw DatasetError("candidate pool is empty");
  if (embeddings_.size() != candidates_.size()) {
    throw DatasetError("embedding table has " + std::to_string(embeddings_.size()) +
                       " rows for " + std::to_string(candidates_.size()) + " candidates");
  }
  if (embeddings_.dim() == 0) throw DatasetError("embedding dimension must be positive");
  if (!embeddings_.matrix().allFinite()) throw DatasetError("embedding contains a non-finite value");
  if (metric_ == Metric::cosine) {
    for (Eigen::Index i = 0; i < embeddings_.matrix().rows(); ++i) {
      if (embeddings_.matrix().row(i).isZero(0.0)) {
        throw DatasetError("zero embedding for candidate " + std::to_string(i) + " under cosine metric");
      }
    }
  }

  by_name_.reserve(candidates_.size());
  for (std::size_t i = 0; i < candidates_.size(); ++i) {
    auto& c = candidates_[i];
    c.index = i;
    if (c.name.empty()) throw DatasetError("candidate " + std::to_string(i) + " has an empty name");
    if (!std::isfinite(c.score)) throw DatasetError("candidate '" + c.name + "' has a non-finite score");
    if (!by_name_.emplace(c.name, i).second) throw DatasetError("duplicate candidate name '" + c.name + "'");
  }

  auto resolved = resolve_hit_policy(candidates_, std::move(policy));
  policy_ = std::move(resolved.policy);
  hit_flags_ = std::move(resolved.hit_flags);
  hit_count_ = static_cast<std::size_t>(std::count(hit_flags_.begin(), hit_flags_.end(), char{1}));
}

std::optional<std::size_t> CandidatePool::find(std::string_view name) const {
  const auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::size_t CandidatePool::index_of(std::string_view name) const {
  if (auto i = find(name)) return *i;
  throw PreconditionError("unknown candidate '" + std::string(name) + "'");
}

namespace {

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open " + path.string());
  return in;
}

struct Measurement {
  std::string name;
  double score;
  std::optional<bool> hit;
};

std::vector<Measurement> read_measurements(const std::filesystem::path& path, bool& has_hit_column) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw DatasetError(path.string() + ": missing header row");
  if (line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
  const auto header = csv::split_record(line);
  std::optional<std::size_t> name_col, score_col, hit_col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto h = csv::trim(header[i]);
    if (h == "name") name_col = i;
    else if (h == "score") score_col = i;
    else if (h == "hit") hit_col = i;
  }
  if (!name_col || !score_col) {
    throw DatasetError(path.string() + ": header must contain 'name' and 'score' columns");
  }
  has_hit_column = hit_col.has_value();

  std::vector<Measurement> rows;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split_record(line);
    const auto where = path.string() + ":" + std::to_string(line_no);
    const std::size_t needed = std::max({*name_col, *score_col, hit_col.value_or(0)}) + 1;
    if (fields.size() < needed) throw DatasetError(where + ": too few fields");
    Measurement m;
    m.name = std::string(csv::trim(fields[*name_col]));
    if (m.name.empty()) throw DatasetError(where + ": empty name");
    if (!csv::parse_double(fields[*score_col], m.score)) {
      throw DatasetError(where + ": unparseable score '" + fields[*score_col] + "'");
    }
    if (!std::isfinite(m.score)) throw DatasetError(where + ": non-finite score for '" + m.name + "'");
    if (hit_col) {
      const auto h = csv::trim(fields[*hit_col]);
      if (h == "1") m.hit = true;
      else if (h == "0") m.hit = false;
      else throw DatasetError(where + ": hit column must be 0 or 1");
    }
    if (!seen.insert(m.name).second) throw DatasetError(where + ": duplicate name '" + m.name + "'");
    rows.push_back(std::move(m));
  }
  return rows;
}

struct EmbeddingRows {
  std::size_t dim = 0;
  std::unordered_map<std::string, std::vector<double>> vectors;
};

EmbeddingRows read_embeddings(const std::filesystem::path& path) {
  auto in = open_input(path);
  EmbeddingRows out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto fields = csv::split_record(line);
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (fields.size() < 2) throw DatasetError(where + ": embedding row needs a name and at least one value");
    const std::size_t dim = fields.size() - 1;
    if (out.dim == 0) out.dim = dim;
    else if (dim != out.dim) {
      throw DatasetError(where + ": ragged embedding row (" + std::to_string(dim) + " values, expected " +
                         std::to_string(out.dim) + ")");
    }
    std::vector<double> v(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      if (!csv::parse_double(fields[j + 1], v[j]) || !std::isfinite(v[j])) {
        throw DatasetError(where + ": invalid embedding value '" + fields[j + 1] + "'");
      }
    }
    std::string name(csv::trim(fields[0]));
    if (!out.vectors.emplace(name, std::move(v)).second) {
      throw DatasetError(where + ": duplicate embedding for '" + name + "'");
    }
  }
  if (out.vectors.empty()) throw DatasetError(path.string() + ": no embedding rows");
  return out;
}

std::vector<std::string> read_name_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    const auto name = csv::trim(line);
    if (!name.empty()) names.emplace_back(name);
  }
  return names;
}

}  // namespace

CandidatePool load_pool(const std::filesystem::path& measurements_path,
                        const std::filesystem::path& embeddings_path, const IngestOptions& options) {
  bool has_hit_column = false;
  auto rows = read_measurements(measurements_path, has_hit_column);
  auto emb = read_embeddings(embeddings_path);

  if (options.expected_dim && *options.expected_dim != emb.dim) {
    throw DatasetError("embedding dimension " + std::to_string(emb.dim) + " does not match expected " +
                       std::to_string(*options.expected_dim));
  }

  std::unordered_set<std::string> dropped;
  std::vector<Measurement> kept;
  kept.reserve(rows.size());
  for (auto& m : rows) {
    bool keep = true;
    if (options.element_filter && !smiles::composed_only_of(m.name, *options.element_filter)) keep = false;
    if (options.score_range &&
        (m.score < options.score_range->first || m.score > options.score_range->second)) {
      keep = false;
    }
    if (keep) kept.push_back(std::move(m));
    else dropped.insert(std::move(m.name));
  }
  if (kept.empty()) throw DatasetError("candidate pool is empty after filtering");

  std::vector<Candidate> candidates;
  candidates.reserve(kept.size());
  EmbeddingMatrix matrix(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(emb.dim));
  for (std::size_t i = 0; i < kept.size(); ++i) {
    const auto it = emb.vectors.find(kept[i].name);
    if (it == emb.vectors.end()) throw DatasetError("missing embedding for candidate '" + kept[i].name + "'");
    for (std::size_t j = 0; j < emb.dim; ++j) {
      matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = it->second[j];
    }
    candidates.push_back({kept[i].name, kept[i].score, i});
  }

  HitPolicy policy;
  policy.percentile = options.percentile;
  const bool have_truth = has_hit_column || options.ground_truth_path.has_value();
  policy.mode = options.hit_mode.value_or(have_truth ? HitMode::ground_truth_set : HitMode::top_percentile);
  if (policy.mode == HitMode::ground_truth_set) {
    if (!have_truth) {
      throw DatasetError("ground-truth hit mode needs a 'hit' column or a ground-truth file");
    }
    if (options.ground_truth_path) {
      for (auto& name : read_name_list(*options.ground_truth_path)) {
        if (dropped.contains(name)) continue;
        policy.ground_truth.push_back(std::move(name));
      }
    } else {
      for (const auto& m : kept) {
        if (m.hit.value_or(false)) policy.ground_truth.push_back(m.name);
      }
    }
  }

  return CandidatePool(std::move(candidates), EmbeddingTable(std::move(matrix)), std::move(policy),
                       options.metric);
}

void write_pool(const CandidatePool& pool, const std::filesystem::path& measurements_path,
                const std::filesystem::path& embeddings_path) {
  const bool truth = pool.hit_policy().mode == HitMode::ground_truth_set;
  {
    std::ofstream out(measurements_path, std::ios::binary);
    if (!out) throw Error("cannot write " + measurements_path.string());
    csv::write_record(out, truth ? std::vector<std::string>{"name", "score", "hit"}
                                 : std::vector<std::string>{"name", "score"});
    for (const auto& c : pool.candidates()) {
      std::vector<std::string> row{c.name, csv::format_double(c.score)};
      if (truth) row.emplace_back(pool.is_hit(c.index) ? "1" : "0");
      csv::write_record(out, row);
    }
  }
  std::ofstream out(embeddings_path, std::ios::binary);
  if (!out) throw Error("cannot write " + embeddings_path.string());
  for (const auto& c : pool.candidates()) {
    std::vector<std::string> row{c.name};
    for (double v : pool.embedding(c.index)) row.push_back(csv::format_double(v));
    csv::write_record(out, row);
  }
}

}  // namespace expdesign
