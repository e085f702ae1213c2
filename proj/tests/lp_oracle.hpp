#ifndef MESHOPT_TESTS_LP_ORACLE_HPP
#define MESHOPT_TESTS_LP_ORACLE_HPP

#include <cmath>
#include <vector>

#include "meshopt/simplex.hpp"

namespace lporacle {

using meshopt::kLpInfinity;
using meshopt::LinearProgram;
using meshopt::LpSolution;
using meshopt::Sense;

struct Oracle {
  bool feasible = false;
  double objective = 0;
};

inline bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b,
                         std::vector<double>& x) {
  const int n = static_cast<int>(b.size());
  x.assign(n, 0.0);
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    double best = 1e-9;
    for (int r = col; r < n; ++r)
      if (std::abs(a[r][col]) > best) {
        best = std::abs(a[r][col]);
        piv = r;
      }
    if (piv < 0) return false;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
  return true;
}

// Brute-force vertex enumeration over all constraints (rows and bounds):
// pick num_vars active constraints, solve, keep feasible points, return the
// best objective.  Independent optimality oracle for small LPs.
inline Oracle vertex_enumerate(const LinearProgram& lp) {
  const int n = lp.num_vars();
  std::vector<std::vector<double>> rows;
  std::vector<double> rhs;
  std::vector<Sense> senses;
  for (int i = 0; i < lp.num_rows(); ++i) {
    rows.push_back(lp.rows[i]);
    rhs.push_back(lp.rhs[i]);
    senses.push_back(lp.senses[i]);
  }
  for (int j = 0; j < n; ++j) {
    if (lp.lower[j] != -kLpInfinity) {
      std::vector<double> r(n, 0.0);
      r[j] = 1.0;
      rows.push_back(r);
      rhs.push_back(lp.lower[j]);
      senses.push_back(Sense::Ge);
    }
    if (lp.upper[j] != kLpInfinity) {
      std::vector<double> r(n, 0.0);
      r[j] = 1.0;
      rows.push_back(r);
      rhs.push_back(lp.upper[j]);
      senses.push_back(Sense::Le);
    }
  }

  const int m = static_cast<int>(rows.size());
  Oracle out;
  if (m < n) return out;
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  auto advance = [&]() {
    int i = n - 1;
    while (i >= 0 && idx[i] == m - n + i) --i;
    if (i < 0) return false;
    ++idx[i];
    for (int j = i + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
    return true;
  };
  do {
    std::vector<std::vector<double>> a(n);
    std::vector<double> b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = rows[idx[i]];
      b[i] = rhs[idx[i]];
    }
    std::vector<double> x;
    if (!solve_square(a, b, x)) continue;
    bool ok = true;
    for (int i = 0; i < m && ok; ++i) {
      double lhs = 0;
      for (int j = 0; j < n; ++j) lhs += rows[i][j] * x[j];
      if (senses[i] == Sense::Le && lhs > rhs[i] + 1e-7) ok = false;
      if (senses[i] == Sense::Ge && lhs < rhs[i] - 1e-7) ok = false;
      if (senses[i] == Sense::Eq && std::abs(lhs - rhs[i]) > 1e-7) ok = false;
    }
    if (!ok) continue;
    double obj = 0;
    for (int j = 0; j < n; ++j) obj += lp.objective[j] * x[j];
    if (!out.feasible || obj < out.objective) {
      out.feasible = true;
      out.objective = obj;
    }
  } while (advance());
  return out;
}

// |objective - duals.rhs - sum_j reduced_cost_j * x_j|
inline double strong_duality_residual(const LinearProgram& lp, const LpSolution& sol) {
  double dual_val = 0;
  for (int i = 0; i < lp.num_rows(); ++i) dual_val += sol.duals[i] * lp.rhs[i];
  for (int j = 0; j < lp.num_vars(); ++j) {
    double r = lp.objective[j];
    for (int i = 0; i < lp.num_rows(); ++i) r -= sol.duals[i] * lp.rows[i][j];
    dual_val += r * sol.x[j];
  }
  return std::abs(sol.objective - dual_val);
}

}  // namespace lporacle

#endif  // MESHOPT_TESTS_LP_ORACLE_HPP
