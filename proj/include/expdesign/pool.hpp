#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace expdesign {

enum class Metric { cosine, l2_squared };

// Accepts "cosine", "l2sq" and "l2-squared".
Metric parse_metric(std::string_view text);
std::string_view to_string(Metric metric);

struct Candidate {
  std::string name;   // HGNC symbol or SMILES string
  double score = 0.0; // measured value f(c)
  std::size_t index = 0;
};

using EmbeddingMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// One row per candidate, in pool order.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(EmbeddingMatrix vectors);

  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }
  std::size_t size() const { return static_cast<std::size_t>(vectors_.rows()); }
  std::span<const double> row(std::size_t i) const {
    return {vectors_.data() + i * dim(), dim()};
  }
  const EmbeddingMatrix& matrix() const { return vectors_; }

 private:
  EmbeddingMatrix vectors_;
};

enum class HitMode { ground_truth_set, top_percentile, abs_top_percentile };

HitMode parse_hit_mode(std::string_view text);
std::string_view to_string(HitMode mode);

struct HitPolicy {
  HitMode mode = HitMode::top_percentile;
  double percentile = 90.0;                 // percentile modes, in (0, 100)
  std::vector<std::string> ground_truth;    // ground-truth-set mode
  std::optional<double> threshold;          // tau; filled in by resolve_hit_policy
};

struct ResolvedHitPolicy {
  HitPolicy policy;
  std::vector<char> hit_flags;  // indexed by candidate index
};

// Percentile modes: k = floor((1 - p/100) * n) candidates with the largest
// score (or |score|) are hits, lower index winning ties at the boundary, and
// tau is the (k+1)-th largest value. Throws when k == 0.
ResolvedHitPolicy resolve_hit_policy(std::span<const Candidate> candidates, HitPolicy policy);

// Number of hits the percentile rule yields for a pool of n candidates.
std::size_t percentile_hit_count(std::size_t n, double percentile);

// Immutable candidate set with embeddings and a resolved hit rule. Safe to
// share between concurrent runs.
class CandidatePool {
 public:
  // Validates every invariant (unique non-empty names, finite scores,
  // matching embedding rows) and resolves the hit policy.
  CandidatePool(std::vector<Candidate> candidates, EmbeddingTable embeddings, HitPolicy policy,
                Metric metric);

  std::size_t size() const { return candidates_.size(); }
  std::size_t dim() const { return embeddings_.dim(); }
  Metric metric() const { return metric_; }

  const std::vector<Candidate>& candidates() const { return candidates_; }
  const Candidate& candidate(std::size_t index) const { return candidates_.at(index); }
  const std::string& name(std::size_t index) const { return candidates_.at(index).name; }
  double score(std::size_t index) const { return candidates_.at(index).score; }
  std::span<const double> embedding(std::size_t index) const { return embeddings_.row(index); }
  const EmbeddingTable& embeddings() const { return embeddings_; }

  // Resolved policy; threshold is populated for percentile modes.
  const HitPolicy& hit_policy() const { return policy_; }

  std::optional<std::size_t> find(std::string_view name) const;
  // Throws PreconditionError for names outside the pool.
  std::size_t index_of(std::string_view name) const;

  bool is_hit(std::size_t index) const { return hit_flags_.at(index) != 0; }
  bool is_hit(std::string_view name) const { return is_hit(index_of(name)); }
  std::size_t hit_count() const { return hit_count_; }

 private:
  std::vector<Candidate> candidates_;
  EmbeddingTable embeddings_;
  HitPolicy policy_;
  Metric metric_;
  std::unordered_map<std::string, std::size_t> by_name_;
  std::vector<char> hit_flags_;
  std::size_t hit_count_ = 0;
};

inline bool is_hit(const CandidatePool& pool, std::string_view name) { return pool.is_hit(name); }

struct IngestOptions {
  std::optional<std::size_t> expected_dim;
  // Allowed element symbols; candidates whose SMILES use any other element
  // are dropped.
  std::optional<std::vector<std::string>> element_filter;
  // Inclusive [lo, hi]; candidates scoring outside are dropped.
  std::optional<std::pair<double, double>> score_range;
  // Unset: ground-truth-set when the measurements carry a hit column or a
  // ground_truth_path is given, top-percentile otherwise.
  std::optional<HitMode> hit_mode;
  double percentile = 90.0;
  // Sidecar with one hit name per line.
  std::optional<std::filesystem::path> ground_truth_path;
  Metric metric = Metric::l2_squared;
};

// Reads `name,score[,hit]` measurements and headerless `name,v1,...,vd`
// embeddings. Throws DatasetError on any integrity problem.
CandidatePool load_pool(const std::filesystem::path& measurements_path,
                        const std::filesystem::path& embeddings_path,
                        const IngestOptions& options = {});

// Writes the pool back in the ingestion formats. Values use the shortest
// round-trip representation, so reloading reproduces scores and embeddings
// bit-for-bit. A hit column is written in ground-truth-set mode.
void write_pool(const CandidatePool& pool, const std::filesystem::path& measurements_path,
                const std::filesystem::path& embeddings_path);

}  // namespace expdesign
