#include "meshopt/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace meshopt {

namespace {

constexpr double kPivotTol = 1e-9;

struct VarMap {
  enum Kind { ShiftedLower, NegatedUpper, Free } kind = ShiftedLower;
  int col = -1;       // primary standard-form column
  int col_neg = -1;   // second column of a free split
  double offset = 0;  // x = offset + x' (ShiftedLower) or offset - x'' (NegatedUpper)
};

struct Standard {
  int n_cols = 0;                         // structural + slack + artificial
  std::vector<std::vector<double>> a;     // m x n_cols
  std::vector<double> b;                  // m, >= 0
  std::vector<double> cost;               // phase-2 cost per column
  std::vector<int> basis;                 // basic column per row
  std::vector<int> identity_col;          // slack/artificial column of each row
  std::vector<int> orig_row;              // -1 for bound rows
  std::vector<double> row_sign;           // dual factor: (flip sign) * (equilibration scale)
  std::vector<char> artificial;           // per column
  std::vector<VarMap> vars;
  double obj_const = 0;
};

Standard build_standard(const LinearProgram& lp) {
  const int n = lp.num_vars();
  Standard st;
  st.vars.resize(n);

  // Structural columns with shifts making every variable nonnegative.
  int col = 0;
  for (int j = 0; j < n; ++j) {
    const double lo = lp.lower[j];
    const double up = lp.upper[j];
    if (lo > up) throw std::invalid_argument("variable with lower > upper");
    VarMap& vm = st.vars[j];
    if (lo != -kLpInfinity) {
      vm.kind = VarMap::ShiftedLower;
      vm.col = col++;
      vm.offset = lo;
    } else if (up != kLpInfinity) {
      vm.kind = VarMap::NegatedUpper;
      vm.col = col++;
      vm.offset = up;
    } else {
      vm.kind = VarMap::Free;
      vm.col = col++;
      vm.col_neg = col++;
    }
  }
  const int n_struct = col;

  // Rows: originals plus upper-bound rows for doubly-bounded variables.
  struct RawRow {
    std::vector<double> coeffs;  // over structural columns
    Sense sense;
    double rhs;
    int orig = -1;
    bool flipped = false;
    double scale = 1.0;
  };
  std::vector<RawRow> raw;

  auto structural_coeffs = [&](const std::vector<double>& dense) {
    std::vector<double> c(n_struct, 0.0);
    double shift = 0;
    for (int j = 0; j < n; ++j) {
      const VarMap& vm = st.vars[j];
      const double aij = dense[j];
      switch (vm.kind) {
        case VarMap::ShiftedLower:
          c[vm.col] += aij;
          shift += aij * vm.offset;
          break;
        case VarMap::NegatedUpper:
          c[vm.col] -= aij;
          shift += aij * vm.offset;
          break;
        case VarMap::Free:
          c[vm.col] += aij;
          c[vm.col_neg] -= aij;
          break;
      }
    }
    return std::pair(c, shift);
  };

  for (int i = 0; i < lp.num_rows(); ++i) {
    if (static_cast<int>(lp.rows[i].size()) != n)
      throw std::invalid_argument("row coefficient count mismatch");
    auto [coeffs, shift] = structural_coeffs(lp.rows[i]);
    raw.push_back({std::move(coeffs), lp.senses[i], lp.rhs[i] - shift, i});
  }
  for (int j = 0; j < n; ++j) {
    const VarMap& vm = st.vars[j];
    if (vm.kind == VarMap::ShiftedLower && lp.upper[j] != kLpInfinity) {
      std::vector<double> c(n_struct, 0.0);
      c[vm.col] = 1.0;
      raw.push_back({std::move(c), Sense::Le, lp.upper[j] - vm.offset, -1});
    }
  }

  // Objective over structural columns plus the constant from shifts.
  st.cost.assign(n_struct, 0.0);
  for (int j = 0; j < n; ++j) {
    const VarMap& vm = st.vars[j];
    const double cj = lp.objective[j];
    switch (vm.kind) {
      case VarMap::ShiftedLower:
        st.cost[vm.col] += cj;
        st.obj_const += cj * vm.offset;
        break;
      case VarMap::NegatedUpper:
        st.cost[vm.col] -= cj;
        st.obj_const += cj * vm.offset;
        break;
      case VarMap::Free:
        st.cost[vm.col] += cj;
        st.cost[vm.col_neg] -= cj;
        break;
    }
  }

  // Slack / artificial columns; every row keeps an identity column so the
  // duals can be read off the final reduced costs.
  const int m = static_cast<int>(raw.size());
  int extra = 0;
  for (RawRow& r : raw) {
    if (r.rhs < 0) {
      for (double& v : r.coeffs) v = -v;
      r.rhs = -r.rhs;
      r.flipped = true;
      if (r.sense == Sense::Le)
        r.sense = Sense::Ge;
      else if (r.sense == Sense::Ge)
        r.sense = Sense::Le;
    }
    // Row equilibration: badly scaled rows (cut pools mix unit-scale and
    // 1e6-scale coefficients) would make the absolute pivot tolerance
    // meaningless.  Duals are scaled back on extraction.
    double mx = 0;
    for (double v : r.coeffs) mx = std::max(mx, std::abs(v));
    if (mx > 0) {
      for (double& v : r.coeffs) v /= mx;
      r.rhs /= mx;
      r.scale = 1.0 / mx;
    }
    extra += (r.sense == Sense::Le || r.sense == Sense::Ge) ? 1 : 0;
  }
  // Deterministic right-hand-side perturbation on inequality rows: distinct
  // ratios keep degenerate vertices from cycling; the displacement is orders
  // below every tolerance used by callers.
  for (size_t i = 0; i < raw.size(); ++i)
    if (raw[i].sense != Sense::Eq) raw[i].rhs += 1e-11 * static_cast<double>(i + 1);
  int n_cols = n_struct + extra + m;  // upper bound; artificials for Ge/Eq only
  st.a.assign(m, std::vector<double>(n_cols, 0.0));
  st.b.assign(m, 0.0);
  st.cost.resize(n_cols, 0.0);
  st.artificial.assign(n_cols, 0);
  st.basis.assign(m, -1);
  st.identity_col.assign(m, -1);
  st.orig_row.assign(m, -1);
  st.row_sign.assign(m, 1.0);

  int next = n_struct;
  for (int i = 0; i < m; ++i) {
    std::copy(raw[i].coeffs.begin(), raw[i].coeffs.end(), st.a[i].begin());
    st.b[i] = raw[i].rhs;
    st.orig_row[i] = raw[i].orig;
    st.row_sign[i] = (raw[i].flipped ? -1.0 : 1.0) * raw[i].scale;
    if (raw[i].sense == Sense::Le) {
      st.a[i][next] = 1.0;
      st.basis[i] = next;
      st.identity_col[i] = next;
      ++next;
    } else if (raw[i].sense == Sense::Ge) {
      st.a[i][next] = -1.0;
      ++next;
      st.a[i][next] = 1.0;
      st.artificial[next] = 1;
      st.basis[i] = next;
      st.identity_col[i] = next;
      ++next;
    } else {
      st.a[i][next] = 1.0;
      st.artificial[next] = 1;
      st.basis[i] = next;
      st.identity_col[i] = next;
      ++next;
    }
  }
  st.n_cols = next;
  for (auto& row : st.a) row.resize(st.n_cols);
  st.cost.resize(st.n_cols);
  return st;
}

// Reduced-cost row for the given column costs; also returns the objective.
void compute_objrow(const Standard& st, const std::vector<double>& cost,
                    std::vector<double>& objrow, double& value) {
  const int m = static_cast<int>(st.a.size());
  objrow = cost;
  value = 0;
  for (int i = 0; i < m; ++i) {
    const double cb = cost[st.basis[i]];
    if (cb == 0.0) continue;
    value += cb * st.b[i];
    for (int j = 0; j < st.n_cols; ++j) objrow[j] -= cb * st.a[i][j];
  }
}

void pivot(Standard& st, std::vector<double>& objrow, int row, int col) {
  const double p = st.a[row][col];
  const double inv = 1.0 / p;
  for (double& v : st.a[row]) v *= inv;
  st.b[row] *= inv;
  st.a[row][col] = 1.0;
  const int m = static_cast<int>(st.a.size());
  for (int i = 0; i < m; ++i) {
    if (i == row) continue;
    const double f = st.a[i][col];
    if (f == 0.0) continue;
    for (int j = 0; j < st.n_cols; ++j) st.a[i][j] -= f * st.a[row][j];
    st.a[i][col] = 0.0;
    st.b[i] -= f * st.b[row];
    if (st.b[i] < 0 && st.b[i] > -1e-11) st.b[i] = 0;
  }
  const double f = objrow[col];
  if (f != 0.0) {
    for (int j = 0; j < st.n_cols; ++j) objrow[j] -= f * st.a[row][j];
    objrow[col] = 0.0;
  }
  st.basis[row] = col;
}

// Bland's rule loop.  allow(col) filters entering candidates.  The reduced
// costs are refreshed from the tableau periodically; drift in the updated
// objective row otherwise feeds noise-level entering candidates that can
// stall on degenerate vertices.
enum class LoopResult { Optimal, Unbounded };

template <typename Allow>
LoopResult simplex_loop(Standard& st, const std::vector<double>& cost,
                        std::vector<double>& objrow, Allow allow) {
  const int m = static_cast<int>(st.a.size());
  for (int pivots = 0; pivots < 200000; ++pivots) {
    if (pivots % 64 == 63) {
      double value = 0;
      compute_objrow(st, cost, objrow, value);
    }
    int enter = -1;
    for (int j = 0; j < st.n_cols; ++j)
      if (allow(j) && objrow[j] < -kPivotTol) {
        enter = j;
        break;
      }
    if (enter < 0) return LoopResult::Optimal;

    // Min-ratio test with negative-rhs rows treated as degenerate (exact
    // feasibility can drift at roundoff level); within the min-ratio window
    // prefer the largest pivot element for stability, then the smallest
    // basic index.
    int leave = -1;
    double best_ratio = 0;
    for (int i = 0; i < m; ++i) {
      if (st.a[i][enter] > kPivotTol) {
        const double ratio = std::max(0.0, st.b[i] / st.a[i][enter]);
        if (leave < 0 || ratio < best_ratio * (1.0 - 1e-9) - 1e-15) {
          leave = i;
          best_ratio = ratio;
        } else if (ratio <= best_ratio * (1.0 + 1e-9) + 1e-15) {
          const double cand = st.a[i][enter];
          const double cur = st.a[leave][enter];
          if (cand > cur * (1.0 + 1e-9) ||
              (cand >= cur * (1.0 - 1e-9) && st.basis[i] < st.basis[leave])) {
            leave = i;
            best_ratio = std::min(best_ratio, ratio);
          }
        }
      }
    }
    if (leave < 0) return LoopResult::Unbounded;
    pivot(st, objrow, leave, enter);
  }
  throw std::runtime_error("simplex: pivot limit exceeded");
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  Standard st = build_standard(lp);
  const int m = static_cast<int>(st.a.size());

  LpSolution sol;
  sol.duals.assign(lp.num_rows(), 0.0);

  // Phase 1: minimize the artificial sum.
  bool any_artificial = false;
  std::vector<double> phase1_cost(st.n_cols, 0.0);
  for (int j = 0; j < st.n_cols; ++j)
    if (st.artificial[j]) {
      phase1_cost[j] = 1.0;
      any_artificial = true;
    }
  std::vector<double> objrow;
  double value = 0;
  if (any_artificial) {
    compute_objrow(st, phase1_cost, objrow, value);
    simplex_loop(st, phase1_cost, objrow, [](int) { return true; });
    double infeas = 0;
    for (int i = 0; i < m; ++i)
      if (st.artificial[st.basis[i]]) infeas += st.b[i];
    if (infeas > 1e-7) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    // Drive basic artificials out where possible (they sit at zero).
    for (int i = 0; i < m; ++i) {
      if (!st.artificial[st.basis[i]]) continue;
      for (int j = 0; j < st.n_cols; ++j) {
        if (!st.artificial[j] && std::abs(st.a[i][j]) > kPivotTol) {
          pivot(st, objrow, i, j);
          break;
        }
      }
    }
  }

  // Phase 2 with the real costs; artificials may not re-enter.
  compute_objrow(st, st.cost, objrow, value);
  const LoopResult res =
      simplex_loop(st, st.cost, objrow, [&](int j) { return !st.artificial[j]; });
  if (res == LoopResult::Unbounded) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }

  // Recover x.
  std::vector<double> xs(st.n_cols, 0.0);
  for (int i = 0; i < m; ++i) xs[st.basis[i]] = st.b[i];
  sol.x.assign(lp.num_vars(), 0.0);
  for (int j = 0; j < lp.num_vars(); ++j) {
    const VarMap& vm = st.vars[j];
    switch (vm.kind) {
      case VarMap::ShiftedLower:
        sol.x[j] = vm.offset + xs[vm.col];
        break;
      case VarMap::NegatedUpper:
        sol.x[j] = vm.offset - xs[vm.col];
        break;
      case VarMap::Free:
        sol.x[j] = xs[vm.col] - xs[vm.col_neg];
        break;
    }
  }
  sol.objective = 0;
  for (int j = 0; j < lp.num_vars(); ++j) sol.objective += lp.objective[j] * sol.x[j];

  // Duals off the reduced costs of each row's identity column.
  for (int i = 0; i < m; ++i) {
    if (st.orig_row[i] < 0) continue;
    const double y = -objrow[st.identity_col[i]];
    sol.duals[st.orig_row[i]] = st.row_sign[i] * y;
  }

  sol.status = LpStatus::Optimal;
  return sol;
}

}  // namespace meshopt
