#pragma once

// Reference implementations used as test oracles. Each is written from the
// textbook definition and shares no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline double cosine_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::clamp(1.0 - dot / std::sqrt(na * nb), 0.0, 2.0);
}

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

// Full scan: distances to every unexplored row, stable-sorted, first k.
inline std::vector<std::size_t> nearest(const std::vector<std::vector<double>>& rows, const std::vector<char>& explored,
                                        const std::vector<double>& query, std::size_t k, bool cosine) {
  std::vector<std::pair<double, std::size_t>> all;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (explored[i]) continue;
    all.emplace_back(cosine ? cosine_distance(rows[i], query) : squared_distance(rows[i], query), i);
  }
  std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < std::min(k, all.size()); ++i) out.push_back(all[i].second);
  return out;
}

// Ridge solution (lambda I + X^T X)^{-1} X^T y as the least-squares solution
// of the stacked system [X; sqrt(lambda) I] theta = [y; 0], via Householder QR.
inline Eigen::VectorXd ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda) {
  const Eigen::Index n = x.rows(), d = x.cols();
  Eigen::MatrixXd a(n + d, d);
  a.topRows(n) = x;
  a.bottomRows(d) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(d, d);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + d);
  b.head(n) = y;
  return a.colPivHouseholderQr().solve(b);
}

struct Posterior {
  double mean;
  double variance;
};

// GP regression with an RBF kernel, straight from the textbook formulas with
// an explicit matrix inverse.
inline Posterior gp(const std::vector<std::vector<double>>& xs, const std::vector<double>& ys,
                    const std::vector<double>& q, double ell, double sf2, double sn2) {
  const auto k = [&](const std::vector<double>& a, const std::vector<double>& b) {
    return sf2 * std::exp(-squared_distance(a, b) / (2 * ell * ell));
  };
  const auto n = static_cast<Eigen::Index>(xs.size());
  if (n == 0) return {0.0, sf2};
  Eigen::MatrixXd kk(n, n);
  Eigen::VectorXd ks(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) kk(i, j) = k(xs[i], xs[j]) + (i == j ? sn2 : 0.0);
    ks(i) = k(xs[i], q);
    y(i) = ys[i];
  }
  const Eigen::MatrixXd inv = kk.fullPivLu().inverse();
  return {ks.dot(inv * y), k(q, q) - ks.dot(inv * ks)};
}

}  // namespace oracle
