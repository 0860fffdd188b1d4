#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "doctest.h"
#include "expdesign/error.hpp"
#include "expdesign/pool.hpp"
#include "helpers.hpp"

using namespace expdesign;

namespace {

std::vector<Candidate> scored(const std::vector<double>& scores) {
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < scores.size(); ++i) out.push_back({"g" + std::to_string(i), scores[i], i});
  return out;
}

std::size_t count_hits(const ResolvedHitPolicy& r) {
  return static_cast<std::size_t>(std::count(r.hit_flags.begin(), r.hit_flags.end(), 1));
}

// Writes measurement and embedding files under a scratch dir.
struct Files {
  std::filesystem::path dir, meas, emb;
  Files(const std::string& name, const std::string& m, const std::string& e) : dir(testutil::scratch(name)) {
    meas = dir / "m.csv";
    emb = dir / "e.csv";
    testutil::write_file(meas, m);
    testutil::write_file(emb, e);
  }
};

std::string embedding_rows(const std::vector<std::string>& names, std::size_t dim) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    out += names[i];
    for (std::size_t j = 0; j < dim; ++j) out += "," + std::to_string(0.001 * static_cast<double>(i + j + 1));
    out += "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("top percentile on scores 1..10 picks the single best") {
  std::vector<double> s;
  for (int i = 1; i <= 10; ++i) s.push_back(i);
  const auto r = resolve_hit_policy(scored(s), HitPolicy{HitMode::top_percentile, 90.0, {}, {}});
  CHECK(count_hits(r) == 1);
  CHECK(r.hit_flags[9] == 1);
  REQUIRE(r.policy.threshold);
  CHECK(*r.policy.threshold == 9.0);
}

TEST_CASE("benchmark pool sizes give the expected hit counts") {
  std::mt19937_64 gen(7);
  for (auto [n, want] : std::vector<std::pair<std::size_t, std::size_t>>{{1128, 112}, {642, 64}, {11565, 1156}}) {
    std::vector<double> s(n);
    std::iota(s.begin(), s.end(), 0.0);
    std::shuffle(s.begin(), s.end(), gen);
    const auto r = resolve_hit_policy(scored(s), HitPolicy{HitMode::top_percentile, 90.0, {}, {}});
    CHECK(count_hits(r) == want);
    // Brute force: hits are exactly the scores above the (k+1)-th largest.
    for (std::size_t i = 0; i < n; ++i) CHECK((r.hit_flags[i] == 1) == (s[i] >= static_cast<double>(n - want)));
  }
}

TEST_CASE("ties at the boundary go to the lower index") {
  const auto r = resolve_hit_policy(scored({5, 1, 5, 5, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0}),
                                    HitPolicy{HitMode::top_percentile, 90.0, {}, {}});
  // k = 2 of three tied 5s; indices 0 and 2 win.
  CHECK(r.hit_flags[0] == 1);
  CHECK(r.hit_flags[2] == 1);
  CHECK(r.hit_flags[3] == 0);
  CHECK(*r.policy.threshold == 5.0);
}

TEST_CASE("abs mode ranks by magnitude") {
  std::vector<double> s{-9, 1, 2, 3, 4, 5, 6, 7, 8, 0.5};
  const auto r = resolve_hit_policy(scored(s), {HitMode::abs_top_percentile, 90.0, {}, {}});
  CHECK(count_hits(r) == 1);
  CHECK(r.hit_flags[0] == 1);
}

TEST_CASE("a pool too small for the percentile is rejected") {
  CHECK_THROWS_AS(resolve_hit_policy(scored({1, 2, 3}), HitPolicy{HitMode::top_percentile, 90.0, {}, {}}), DatasetError);
}

TEST_CASE("ground truth membership") {
  const auto pool = testutil::make_pool({{1.0}, {2.0}}, Metric::l2_squared, {0.82, -0.1},
                                        HitPolicy{HitMode::ground_truth_set, 90.0, {"WDR5"}, {}}, {"WDR5", "ABL1"});
  CHECK(is_hit(pool, "WDR5"));
  CHECK_FALSE(is_hit(pool, "ABL1"));
  CHECK_THROWS_AS(is_hit(pool, "NOPE"), PreconditionError);

  const auto empty = testutil::make_pool({{1.0}, {2.0}}, Metric::l2_squared, {}, HitPolicy{HitMode::ground_truth_set, 90.0, {}, {}});
  CHECK_FALSE(empty.is_hit(0));
  CHECK_FALSE(empty.is_hit(1));
  CHECK_THROWS_AS(testutil::make_pool({{1.0}}, Metric::l2_squared, {}, HitPolicy{HitMode::ground_truth_set, 90.0, {"X"}, {}}),
                  DatasetError);
}

TEST_CASE("pool construction validates invariants") {
  CHECK_THROWS(testutil::make_pool({{1.0}, {2.0}}, Metric::l2_squared, {}, {}, {"A", "A"}));
  CHECK_THROWS(testutil::make_pool({{1.0}, {2.0}}, Metric::l2_squared, {0.0, NAN}));
  CHECK_THROWS(testutil::make_pool({{0.0, 0.0}, {1.0, 0.0}}, Metric::cosine));
  CHECK_NOTHROW(testutil::make_pool({{0.0, 0.0}, {1.0, 0.0}}, Metric::l2_squared));
}

TEST_CASE("load_pool checks dimensions") {
  std::vector<std::string> names{"A", "B", "C"};
  {
    Files f("dim808", "name,score\nA,1\nB,2\nC,3\n", embedding_rows(names, 808));
    IngestOptions o;
    o.expected_dim = 808;
    o.percentile = 50.0;
    CHECK(load_pool(f.meas, f.emb, o).dim() == 808);
    o.expected_dim = 800;
    CHECK_THROWS_WITH_AS(load_pool(f.meas, f.emb, o), doctest::Contains("does not match expected"), DatasetError);
  }
  {
    Files f("dim768", "name,score\nA,1\nB,2\nC,3\n", embedding_rows(names, 768));
    IngestOptions o;
    o.expected_dim = 768;
    o.percentile = 50.0;
    CHECK(load_pool(f.meas, f.emb, o).dim() == 768);
  }
}

TEST_CASE("load_pool rejects integrity problems") {
  IngestOptions o;
  o.percentile = 50.0;
  {
    Files f("dup", "name,score\nMYC,1\nMYC,2\n", "MYC,1,2\n");
    CHECK_THROWS_WITH_AS(load_pool(f.meas, f.emb, o), doctest::Contains("duplicate name"), DatasetError);
  }
  {
    Files f("missing", "name,score\nA,1\nB,2\n", "A,1,2\n");
    CHECK_THROWS_WITH_AS(load_pool(f.meas, f.emb, o), doctest::Contains("missing embedding"), DatasetError);
  }
  {
    Files f("ragged", "name,score\nA,1\nB,2\n", "A,1,2\nB,1\n");
    CHECK_THROWS_WITH_AS(load_pool(f.meas, f.emb, o), doctest::Contains("ragged"), DatasetError);
  }
  {
    Files f("nan", "name,score\nA,nan\nB,2\n", "A,1,2\nB,1,3\n");
    CHECK_THROWS_WITH_AS(load_pool(f.meas, f.emb, o), doctest::Contains("non-finite score"), DatasetError);
  }
  {
    Files f("inf", "name,score\nA,1\nB,2\n", "A,1,inf\nB,1,3\n");
    CHECK_THROWS_WITH_AS(load_pool(f.meas, f.emb, o), doctest::Contains("invalid embedding value"), DatasetError);
  }
  {
    Files f("noheader", "A,1\nB,2\n", "A,1,2\nB,1,3\n");
    CHECK_THROWS_WITH_AS(load_pool(f.meas, f.emb, o), doctest::Contains("header must contain"), DatasetError);
  }
  {
    IngestOptions filt = o;
    filt.score_range = std::make_pair(10.0, 20.0);
    Files f("emptyfilter", "name,score\nA,1\nB,2\n", "A,1,2\nB,1,3\n");
    CHECK_THROWS_WITH_AS(load_pool(f.meas, f.emb, filt), doctest::Contains("empty after filtering"), DatasetError);
  }
}

TEST_CASE("load_pool applies element and score filters") {
  Files f("filters", "name,score\nCCN,1\nCCO,2\nC[NH3+],3\nCCCl,4\nNCCN,50\nc1ccncc1,5\n",
          "CCN,1,0\nCCO,0,1\nC[NH3+],1,1\nCCCl,2,1\nNCCN,1,2\nc1ccncc1,2,2\n");
  IngestOptions o;
  o.element_filter = std::vector<std::string>{"C", "H", "N"};
  o.score_range = std::make_pair(0.0, 10.0);
  o.percentile = 50.0;
  const auto pool = load_pool(f.meas, f.emb, o);
  std::vector<std::string> names;
  for (const auto& c : pool.candidates()) names.push_back(c.name);
  CHECK(names == std::vector<std::string>{"CCN", "C[NH3+]", "c1ccncc1"});
  for (std::size_t i = 0; i < pool.size(); ++i) CHECK(pool.candidate(i).index == i);
}

TEST_CASE("hit column and sidecar select ground-truth mode") {
  {
    Files f("hitcol", "name,score,hit\nWDR5,0.82,1\nABL1,-0.1,0\nHNF4A,-0.34,1\n", "WDR5,1,0\nABL1,0,1\nHNF4A,1,1\n");
    const auto pool = load_pool(f.meas, f.emb);
    CHECK(pool.hit_policy().mode == HitMode::ground_truth_set);
    CHECK(pool.is_hit("WDR5"));
    CHECK(pool.is_hit("HNF4A"));
    CHECK_FALSE(pool.is_hit("ABL1"));
  }
  {
    Files f("sidecar", "name,score\nWDR5,0.82\nABL1,-0.1\n", "WDR5,1,0\nABL1,0,1\n");
    testutil::write_file(f.dir / "gt.txt", "WDR5\n");
    IngestOptions o;
    o.ground_truth_path = f.dir / "gt.txt";
    const auto pool = load_pool(f.meas, f.emb, o);
    CHECK(pool.hit_count() == 1);
    CHECK(pool.is_hit("WDR5"));
  }
}

TEST_CASE("write_pool then load_pool reproduces the pool bit for bit") {
  std::mt19937_64 gen(11);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> rows(40, std::vector<double>(5));
  std::vector<double> scores(40);
  for (auto& r : rows)
    for (auto& v : r) v = normal(gen) * 1e-3 + 1.0 / 3.0;
  for (auto& s : scores) s = normal(gen);
  const auto pool = testutil::make_pool(rows, Metric::l2_squared, scores, HitPolicy{HitMode::top_percentile, 90.0, {}, {}});
  const auto dir = testutil::scratch("roundtrip");
  write_pool(pool, dir / "m.csv", dir / "e.csv");
  IngestOptions o;
  o.metric = Metric::l2_squared;
  const auto back = load_pool(dir / "m.csv", dir / "e.csv", o);
  REQUIRE(back.size() == pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    CHECK(back.name(i) == pool.name(i));
    CHECK(back.score(i) == pool.score(i));
    CHECK(back.is_hit(i) == pool.is_hit(i));
  }
  CHECK((back.embeddings().matrix().array() == pool.embeddings().matrix().array()).all());
}

TEST_CASE("metric and hit mode parsing") {
  CHECK(parse_metric("cosine") == Metric::cosine);
  CHECK(parse_metric("l2sq") == Metric::l2_squared);
  CHECK(parse_metric("l2-squared") == Metric::l2_squared);
  CHECK_THROWS_AS(parse_metric("manhattan"), ConfigError);
  CHECK(parse_hit_mode("abs-top-percentile") == HitMode::abs_top_percentile);
  CHECK_THROWS_AS(parse_hit_mode("top"), ConfigError);
}
