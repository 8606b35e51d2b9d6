#pragma once

// Textbook two-phase dense tableau simplex with Bland's rule.
// Deliberately independent of the library solver: rows are a.x (<=,=,>=) b,
// variables are x >= 0 with optional finite upper bounds turned into rows.

#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

enum class TabSense { Le, Eq, Ge };
enum class TabStatus { Optimal, Infeasible, Unbounded };

struct TabLp {
  int n = 0;
  std::vector<double> c;                 // minimise c.x
  std::vector<std::vector<double>> a;    // rows
  std::vector<TabSense> sense;
  std::vector<double> b;
  std::vector<double> ub;                // per variable, +inf when absent
};

struct TabResult {
  TabStatus status = TabStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> x;
};

inline TabResult tableau_solve(TabLp lp) {
  const double eps = 1e-9;
  for (int j = 0; j < lp.n; ++j) {
    if (std::isfinite(lp.ub[static_cast<std::size_t>(j)])) {
      std::vector<double> row(static_cast<std::size_t>(lp.n), 0.0);
      row[static_cast<std::size_t>(j)] = 1.0;
      lp.a.push_back(row);
      lp.sense.push_back(TabSense::Le);
      lp.b.push_back(lp.ub[static_cast<std::size_t>(j)]);
    }
  }
  const int m = static_cast<int>(lp.a.size());
  for (int i = 0; i < m; ++i) {
    auto ui = static_cast<std::size_t>(i);
    if (lp.b[ui] < 0) {
      for (auto& v : lp.a[ui]) v = -v;
      lp.b[ui] = -lp.b[ui];
      if (lp.sense[ui] == TabSense::Le)
        lp.sense[ui] = TabSense::Ge;
      else if (lp.sense[ui] == TabSense::Ge)
        lp.sense[ui] = TabSense::Le;
    }
  }
  // Columns: x | slack/surplus per non-eq row | artificial per ge/eq row.
  int ns = 0, na = 0;
  for (auto s : lp.sense) {
    if (s != TabSense::Eq) ++ns;
    if (s != TabSense::Le) ++na;
  }
  const int cols = lp.n + ns + na;
  std::vector<std::vector<double>> t(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(cols) + 1, 0.0));
  std::vector<int> basis(static_cast<std::size_t>(m));
  int sk = lp.n, ak = lp.n + ns;
  for (int i = 0; i < m; ++i) {
    auto ui = static_cast<std::size_t>(i);
    for (int j = 0; j < lp.n; ++j) t[ui][static_cast<std::size_t>(j)] = lp.a[ui][static_cast<std::size_t>(j)];
    t[ui][static_cast<std::size_t>(cols)] = lp.b[ui];
    if (lp.sense[ui] == TabSense::Le) {
      t[ui][static_cast<std::size_t>(sk)] = 1.0;
      basis[ui] = sk++;
    } else {
      if (lp.sense[ui] == TabSense::Ge) t[ui][static_cast<std::size_t>(sk++)] = -1.0;
      t[ui][static_cast<std::size_t>(ak)] = 1.0;
      basis[ui] = ak++;
    }
  }
  auto pivot = [&](int r, int q) {
    auto ur = static_cast<std::size_t>(r);
    const double p = t[ur][static_cast<std::size_t>(q)];
    for (auto& v : t[ur]) v /= p;
    for (int i = 0; i < m; ++i) {
      if (i == r) continue;
      auto ui = static_cast<std::size_t>(i);
      const double f = t[ui][static_cast<std::size_t>(q)];
      if (f == 0.0) continue;
      for (int j = 0; j <= cols; ++j) t[ui][static_cast<std::size_t>(j)] -= f * t[ur][static_cast<std::size_t>(j)];
    }
    basis[ur] = q;
  };
  // Runs Bland simplex on cost vector over columns [0, limit). Returns false if unbounded.
  auto run = [&](const std::vector<double>& cost, int limit) {
    for (int iter = 0; iter < 100000; ++iter) {
      int q = -1;
      for (int j = 0; j < limit && q < 0; ++j) {
        double d = cost[static_cast<std::size_t>(j)];
        for (int i = 0; i < m; ++i)
          d -= cost[static_cast<std::size_t>(basis[static_cast<std::size_t>(i)])] * t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        if (d < -eps) q = j;
      }
      if (q < 0) return true;
      int r = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) {
        const double a = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(q)];
        if (a <= eps) continue;
        const double ratio = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(cols)] / a;
        if (ratio < best - 1e-12 ||
            (ratio <= best + 1e-12 && r >= 0 && basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(r)])) {
          best = ratio;
          r = i;
        }
      }
      if (r < 0) return false;
      pivot(r, q);
    }
    return true;
  };
  TabResult res;
  std::vector<double> c1(static_cast<std::size_t>(cols), 0.0);
  for (int j = lp.n + ns; j < cols; ++j) c1[static_cast<std::size_t>(j)] = 1.0;
  run(c1, cols);
  double infeas = 0.0;
  for (int i = 0; i < m; ++i)
    if (basis[static_cast<std::size_t>(i)] >= lp.n + ns) infeas += t[static_cast<std::size_t>(i)][static_cast<std::size_t>(cols)];
  if (infeas > 1e-7) return res;
  // Drive remaining zero-level artificials out of the basis where possible.
  for (int i = 0; i < m; ++i) {
    if (basis[static_cast<std::size_t>(i)] < lp.n + ns) continue;
    for (int j = 0; j < lp.n + ns; ++j)
      if (std::abs(t[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) > 1e-7) {
        pivot(i, j);
        break;
      }
  }
  std::vector<double> c2(static_cast<std::size_t>(cols), 0.0);
  for (int j = 0; j < lp.n; ++j) c2[static_cast<std::size_t>(j)] = lp.c[static_cast<std::size_t>(j)];
  if (!run(c2, lp.n + ns)) {
    res.status = TabStatus::Unbounded;
    return res;
  }
  res.status = TabStatus::Optimal;
  res.x.assign(static_cast<std::size_t>(lp.n), 0.0);
  for (int i = 0; i < m; ++i) {
    const int bj = basis[static_cast<std::size_t>(i)];
    if (bj < lp.n) res.x[static_cast<std::size_t>(bj)] = t[static_cast<std::size_t>(i)][static_cast<std::size_t>(cols)];
  }
  for (int j = 0; j < lp.n; ++j) res.objective += lp.c[static_cast<std::size_t>(j)] * res.x[static_cast<std::size_t>(j)];
  return res;
}

}  // namespace oracle
