#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "doctest.h"
#include "expdesign/error.hpp"
#include "expdesign/memory.hpp"
#include "expdesign/surrogates.hpp"
#include "helpers.hpp"

using namespace expdesign;

namespace {

std::vector<double> vec(std::initializer_list<double> v) { return v; }

}  // namespace

TEST_CASE("linucb single update by hand") {
  LinUcb m(1, {1.0, 0.0});
  m.update(vec({1.0}), 1.0);
  CHECK(m.design()(0, 0) == 2.0);
  CHECK(m.response()(0) == 1.0);
  CHECK(m.theta()(0) == doctest::Approx(0.5));
  CHECK(m.score(vec({1.0})) == doctest::Approx(0.5));
}

TEST_CASE("fresh linucb scores the norm") {
  LinUcb m(3, {1.0, 1.0});
  CHECK(m.score(vec({3, 4, 0})) == doctest::Approx(5.0));
  CHECK_THROWS_AS(m.score(vec({1, 2})), PreconditionError);
  CHECK_THROWS_AS(m.update(vec({1, 2}), 0.0), PreconditionError);
}

TEST_CASE("zero update leaves the state unchanged") {
  LinUcb m(2);
  m.update(vec({1, 2}), 3.0);
  const Eigen::MatrixXd a = m.design();
  const Eigen::VectorXd b = m.response();
  m.update(vec({0, 0}), 5.0);
  CHECK(m.design() == a);
  CHECK(m.response() == b);
}

TEST_CASE("linucb updates commute") {
  LinUcb a(2), b(2);
  a.update(vec({1, 2}), 0.5).update(vec({-1, 3}), 2.0);
  b.update(vec({-1, 3}), 2.0).update(vec({1, 2}), 0.5);
  CHECK((a.design() - b.design()).norm() == 0.0);
  CHECK((a.theta() - b.theta()).norm() < 1e-14);
}

TEST_CASE("uncertainty shrinks with every update") {
  std::mt19937_64 gen(5);
  LinUcb m(4);
  const auto probe = testutil::random_rows(1, 4, gen)[0];
  double last = m.uncertainty(probe);
  for (const auto& x : testutil::random_rows(30, 4, gen)) {
    m.update(x, 1.0);
    const double now = m.uncertainty(probe);
    CHECK(now <= last + 1e-15);
    last = now;
  }
}

TEST_CASE("symmetric candidates tie only when uncertainties match") {
  // x1 = -x2: the bonus is identical, so alpha cannot reorder them.
  LinUcb m(2, {1.0, 0.0});
  m.update(vec({1, 0}), 1.0);
  const auto x1 = vec({0.5, 0.5}), x2 = vec({-0.5, -0.5});
  CHECK(m.uncertainty(x1) == doctest::Approx(m.uncertainty(x2)));
  LinUcb m2(2, {1.0, 2.0});
  m2.update(vec({1, 0}), 1.0);
  CHECK((m.score(x1) > m.score(x2)) == (m2.score(x1) > m2.score(x2)));
}

TEST_CASE("batch scoring agrees with per-row scoring") {
  std::mt19937_64 gen(8);
  const auto rows = testutil::random_rows(20, 5, gen);
  const auto pool = testutil::make_pool(rows);
  LinUcb m(5, {0.5, 1.5});
  for (std::size_t i = 0; i < 8; ++i) m.update(rows[i], static_cast<double>(i) * 0.3);
  std::vector<std::size_t> idx{3, 9, 12, 19};
  const auto batch = m.score_rows(pool.embeddings().matrix(), idx);
  for (std::size_t j = 0; j < idx.size(); ++j) CHECK(batch[j] == doctest::Approx(m.score(rows[idx[j]])).epsilon(1e-12));
}

TEST_CASE("gp noiseless interpolation and far field") {
  GaussianProcess gp({1.0, 1.0, 0.0, 2.0});
  Eigen::MatrixXd x(2, 1);
  x << 0.0, 2.0;
  Eigen::VectorXd y(2);
  y << 1.5, -0.5;
  gp.fit(x, y);
  const auto at = gp.posterior(vec({0.0}));
  CHECK(at.mean == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(at.variance == doctest::Approx(0.0).epsilon(1e-8));
  const auto far = gp.posterior(vec({1e6}));
  CHECK(std::abs(far.mean) < 1e-12);
  CHECK(far.variance == doctest::Approx(1.0));
}

TEST_CASE("gp one point by hand") {
  GaussianProcess gp({1.0, 1.0, 1e-6, 2.0});
  Eigen::MatrixXd x(1, 1);
  x << 0.0;
  Eigen::VectorXd y(1);
  y << 1.0;
  gp.fit(x, y);
  CHECK(gp.posterior(vec({1.0})).mean == doctest::Approx(std::exp(-0.5) / (1.0 + 1e-6)).epsilon(1e-12));
  CHECK(gp.posterior(vec({1.0})).mean == doctest::Approx(0.6065).epsilon(1e-4));
}

TEST_CASE("gp with no data returns the prior") {
  GaussianProcess gp({1.0, 2.5, 1e-4, 2.0});
  gp.fit(Eigen::MatrixXd(0, 3), Eigen::VectorXd(0));
  const auto p = gp.posterior(vec({1, 2, 3}));
  CHECK(p.mean == 0.0);
  CHECK(p.variance == 2.5);
  CHECK(gp.acquisition(vec({1, 2, 3})) == doctest::Approx(2.0 * std::sqrt(2.5)));
}

TEST_CASE("gp jitter rescues duplicated inputs") {
  GaussianProcess gp({1.0, 1.0, 0.0, 2.0});
  Eigen::MatrixXd x(2, 1);
  x << 1.0, 1.0;
  Eigen::VectorXd y(2);
  y << 1.0, 1.0;
  gp.fit(x, y);
  CHECK(gp.jitter() > 0.0);
  CHECK(gp.posterior(vec({1.0})).mean == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("gp rejects invalid hyperparameters") {
  CHECK_THROWS_AS(GaussianProcess({0.0, 1.0, 0.0, 2.0}), ConfigError);
  CHECK_THROWS_AS(GaussianProcess({1.0, -1.0, 0.0, 2.0}), ConfigError);
}

TEST_CASE("select_top_b examples") {
  const auto pool = testutil::make_pool({{0.0}, {1.0}, {2.0}}, Metric::l2_squared, {}, {}, {"A", "B", "C"});
  {
    CandidateMemory mem(pool);
    CHECK(select_top_b(std::map<std::string, double>{{"A", 1}, {"B", 2}, {"C", 3}}, mem, 2) ==
          std::vector<std::string>{"C", "B"});
    CHECK(mem.is_explored(1));
    CHECK(mem.is_explored(2));
  }
  {
    CandidateMemory mem(pool);
    CHECK(select_top_b(std::map<std::string, double>{{"A", 1}, {"B", 1}, {"C", 1}}, mem, 2) ==
          std::vector<std::string>{"A", "B"});
  }
  {
    CandidateMemory mem(pool);
    CHECK(select_top_b(std::map<std::string, double>{{"A", 5}, {"B", 2}, {"C", 3}}, mem, 10) ==
          std::vector<std::string>{"A", "C", "B"});
  }
  {
    CandidateMemory mem(pool);
    CHECK_THROWS_AS(select_top_b(std::map<std::string, double>{{"A", 1}}, mem, 1), PreconditionError);
    CHECK_THROWS_AS(select_top_b(std::map<std::string, double>{{"A", 1}, {"B", 1}, {"C", 1}}, mem, 0),
                    PreconditionError);
  }
}

TEST_CASE("median heuristic on a known layout") {
  // Points 0,1,3 on a line: pairwise distances 1,2,3 with median 2.
  const auto pool = testutil::make_pool({{0.0}, {1.0}, {3.0}});
  CHECK(median_length_scale(pool) == doctest::Approx(2.0));
  const auto same = testutil::make_pool({{1.0}, {1.0}});
  CHECK(median_length_scale(same) == 1.0);
}
