#pragma once

// Brute-force reference implementations. They share no code with the
// library and trade speed for transparency.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

/// Mean absolute pairwise difference over twice the mean.
inline double gini_pairwise(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double diff = 0.0, sum = 0.0;
  for (double a : x) {
    sum += a;
    for (double b : x) diff += std::abs(a - b);
  }
  if (sum == 0.0) return 0.0;
  const double mean = sum / n;
  return diff / (2.0 * n * n * mean);
}

/// Share of keywords found as a contiguous token run, scanning every offset.
inline double intensity(const std::vector<std::string>& doc, const std::vector<std::vector<std::string>>& keywords) {
  if (keywords.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& kw : keywords) {
    bool found = false;
    for (std::size_t start = 0; !found && start + kw.size() <= doc.size(); ++start) {
      bool all = true;
      for (std::size_t i = 0; i < kw.size(); ++i)
        if (doc[start + i] != kw[i]) all = false;
      found = all && !kw.empty();
    }
    if (found) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(keywords.size());
}

/// C_V by explicit window enumeration: every window is materialized as a set.
inline std::vector<double> coherence_cv(const std::vector<std::vector<std::string>>& topics,
                                        const std::vector<std::vector<std::string>>& docs, int window,
                                        double eps = 1e-12) {
  std::vector<std::set<std::string>> windows;
  for (const auto& d : docs) {
    if (d.empty()) continue;
    const std::size_t w = static_cast<std::size_t>(window);
    if (d.size() <= w) {
      windows.emplace_back(d.begin(), d.end());
      continue;
    }
    for (std::size_t s = 0; s + w <= d.size(); ++s) windows.emplace_back(d.begin() + s, d.begin() + s + w);
  }
  const double n_win = static_cast<double>(windows.size());
  std::vector<double> scores;
  for (const auto& t : topics) {
    const std::size_t n = t.size();
    auto p1 = [&](const std::string& a) {
      double c = 0;
      for (const auto& w : windows) c += w.count(a) ? 1 : 0;
      return c / n_win;
    };
    auto p2 = [&](const std::string& a, const std::string& b) {
      double c = 0;
      for (const auto& w : windows) c += (w.count(a) && w.count(b)) ? 1 : 0;
      return c / n_win;
    };
    std::vector<std::vector<double>> npmi(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double pi = p1(t[i]), pj = p1(t[j]);
        if (pi == 0) pi = eps;
        if (pj == 0) pj = eps;
        const double pij = p2(t[i], t[j]);
        npmi[i][j] = std::log((pij + eps) / (pi * pj)) / -std::log(pij + eps);
      }
    std::vector<double> total(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) total[j] += npmi[i][j];
    double score = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0, a = 0, b = 0;
      for (std::size_t j = 0; j < n; ++j) {
        dot += npmi[i][j] * total[j];
        a += npmi[i][j] * npmi[i][j];
        b += total[j] * total[j];
      }
      score += (a == 0 || b == 0) ? 0.0 : dot / std::sqrt(a * b);
    }
    scores.push_back(score / static_cast<double>(n));
  }
  return scores;
}

/// [intercept, beta...] from the normal equations (Z'Z) b = Z'y, Z = [1 X].
inline Eigen::VectorXd ols_normal_equations(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd Z(X.rows(), X.cols() + 1);
  Z.col(0).setOnes();
  Z.rightCols(X.cols()) = X;
  return (Z.transpose() * Z).ldlt().solve(Z.transpose() * y);
}

/// Feature coefficients from OLS with explicit dummy columns (first level of
/// each grouping omitted).
inline Eigen::VectorXd ols_with_dummies(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                        const std::vector<std::vector<int>>& groups) {
  std::vector<std::pair<std::size_t, int>> dummies;  // (grouping, level)
  for (std::size_t g = 0; g < groups.size(); ++g) {
    std::set<int> levels(groups[g].begin(), groups[g].end());
    for (auto it = std::next(levels.begin()); it != levels.end(); ++it) dummies.emplace_back(g, *it);
  }
  const Eigen::Index n = y.size(), p = X.cols(), d = static_cast<Eigen::Index>(dummies.size());
  Eigen::MatrixXd W(n, p + d);
  W.leftCols(p) = X;
  for (Eigen::Index k = 0; k < d; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      W(i, p + k) = groups[dummies[static_cast<std::size_t>(k)].first][static_cast<std::size_t>(i)] ==
                            dummies[static_cast<std::size_t>(k)].second
                        ? 1.0
                        : 0.0;
  const Eigen::VectorXd b = ols_normal_equations(y, W);
  return b.segment(1, p);
}

/// Pairs rows of A with rows of B greedily by descending cosine similarity;
/// match[i] is the row of B assigned to row i of A.
inline std::vector<int> greedy_match(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  const Eigen::Index k = A.rows();
  std::vector<std::tuple<double, int, int>> pairs;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
      const double c = A.row(i).dot(B.row(j)) / (A.row(i).norm() * B.row(j).norm());
      pairs.emplace_back(-c, static_cast<int>(i), static_cast<int>(j));
    }
  std::sort(pairs.begin(), pairs.end());
  std::vector<int> match(static_cast<std::size_t>(k), -1);
  std::vector<bool> used(static_cast<std::size_t>(B.rows()), false);
  for (const auto& [c, i, j] : pairs)
    if (match[static_cast<std::size_t>(i)] < 0 && !used[static_cast<std::size_t>(j)]) {
      match[static_cast<std::size_t>(i)] = j;
      used[static_cast<std::size_t>(j)] = true;
    }
  return match;
}

}  // namespace oracle
