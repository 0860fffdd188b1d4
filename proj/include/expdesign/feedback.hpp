#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "expdesign/pool.hpp"
#include "expdesign/rng.hpp"

namespace expdesign {

struct FeedbackRecord {
  std::string name;
  double score = 0.0;
  bool hit = false;
};

// Experiment history Z_i: every (candidate, score, hit) observed so far, in
// order of discovery.
class Feedback {
 public:
  Feedback() = default;
  explicit Feedback(std::vector<FeedbackRecord> records);

  // Throws PreconditionError on a repeated name.
  void add(FeedbackRecord record);

  const std::vector<FeedbackRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::vector<FeedbackRecord> hits() const;
  std::vector<FeedbackRecord> others() const;
  std::size_t hit_count() const;

 private:
  std::vector<FeedbackRecord> records_;
};

// Records for `selected` (in the given order) with true scores and hit flags.
Feedback build_feedback(const CandidatePool& pool, std::span<const std::size_t> selected);

enum class LabelNoise {
  permute,   // shuffle hit labels among records; hit count preserved
  resample,  // draw each label independently at the observed hit rate
};

// Breaks the pairing between candidates and outcomes.
//   level 1: scores are shuffled among all records (score multiset kept).
//   level 2: hit labels are shuffled among all records (hit count kept), or
//            resampled independently under LabelNoise::resample.
// Level 1 is applied first, then level 2, each with Rng::shuffle. Names and
// record order are unchanged.
Feedback randomize_feedback(const Feedback& feedback, bool level1, bool level2, Rng& rng,
                            LabelNoise label_noise = LabelNoise::permute);

}  // namespace expdesign
