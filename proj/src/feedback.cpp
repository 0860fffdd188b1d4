#include "expdesign/feedback.hpp"

#include <algorithm>
#include <unordered_set>

#include "expdesign/error.hpp"

namespace expdesign {

Feedback::Feedback(std::vector<FeedbackRecord> records) {
  records_.reserve(records.size());
  for (auto& r : records) add(std::move(r));
}

void Feedback::add(FeedbackRecord record) {
  const bool dup = std::any_of(records_.begin(), records_.end(),
                               [&](const FeedbackRecord& r) { return r.name == record.name; });
  if (dup) throw PreconditionError("feedback already has a record for '" + record.name + "'");
  records_.push_back(std::move(record));
}

std::vector<FeedbackRecord> Feedback::hits() const {
  std::vector<FeedbackRecord> out;
  std::copy_if(records_.begin(), records_.end(), std::back_inserter(out),
               [](const FeedbackRecord& r) { return r.hit; });
  return out;
}

std::vector<FeedbackRecord> Feedback::others() const {
  std::vector<FeedbackRecord> out;
  std::copy_if(records_.begin(), records_.end(), std::back_inserter(out),
               [](const FeedbackRecord& r) { return !r.hit; });
  return out;
}

std::size_t Feedback::hit_count() const {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [](const FeedbackRecord& r) { return r.hit; }));
}

Feedback build_feedback(const CandidatePool& pool, std::span<const std::size_t> selected) {
  std::vector<FeedbackRecord> records;
  records.reserve(selected.size());
  std::unordered_set<std::size_t> seen;
  for (std::size_t i : selected) {
    if (!seen.insert(i).second) throw PreconditionError("candidate selected twice: '" + pool.name(i) + "'");
    records.push_back({pool.name(i), pool.score(i), pool.is_hit(i)});
  }
  Feedback fb;
  for (auto& r : records) fb.add(std::move(r));
  return fb;
}

Feedback randomize_feedback(const Feedback& feedback, bool level1, bool level2, Rng& rng,
                            LabelNoise label_noise) {
  std::vector<FeedbackRecord> records = feedback.records();
  if (level1) {
    std::vector<double> scores;
    scores.reserve(records.size());
    for (const auto& r : records) scores.push_back(r.score);
    rng.shuffle(std::span<double>(scores));
    for (std::size_t i = 0; i < records.size(); ++i) records[i].score = scores[i];
  }
  if (level2) {
    if (label_noise == LabelNoise::permute) {
      std::vector<char> labels;
      labels.reserve(records.size());
      for (const auto& r : records) labels.push_back(r.hit ? 1 : 0);
      rng.shuffle(std::span<char>(labels));
      for (std::size_t i = 0; i < records.size(); ++i) records[i].hit = labels[i] != 0;
    } else if (!records.empty()) {
      const double rate = static_cast<double>(feedback.hit_count()) / static_cast<double>(records.size());
      for (auto& r : records) r.hit = rng.uniform01() < rate;
    }
  }
  Feedback out;
  for (auto& r : records) out.add(std::move(r));
  return out;
}

}  // namespace expdesign
