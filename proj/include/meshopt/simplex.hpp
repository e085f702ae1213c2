#ifndef MESHOPT_SIMPLEX_HPP
#define MESHOPT_SIMPLEX_HPP

#include <limits>
#include <vector>

namespace meshopt {

enum class Sense { Le, Ge, Eq };
enum class LpStatus { Optimal, Infeasible, Unbounded };

constexpr double kLpInfinity = std::numeric_limits<double>::infinity();

/// Dense linear program: minimize objective . x subject to the rows and the
/// per-variable bounds (lower defaults 0, upper defaults +inf).
struct LinearProgram {
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<Sense> senses;
  std::vector<double> rhs;
  std::vector<double> lower;
  std::vector<double> upper;

  explicit LinearProgram(int n_vars = 0)
      : objective(n_vars, 0.0), lower(n_vars, 0.0), upper(n_vars, kLpInfinity) {}

  int num_vars() const { return static_cast<int>(objective.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  void add_row(std::vector<double> coeffs, Sense sense, double b) {
    rows.push_back(std::move(coeffs));
    senses.push_back(sense);
    rhs.push_back(b);
  }
};

/// duals holds one multiplier per original row, signed so that at optimality
///   objective = duals . rhs + sum_j reduced_cost_j * x_j
/// with reduced_cost = c - rows^T duals vanishing on variables strictly
/// inside their bounds (y <= 0 on Le rows, y >= 0 on Ge rows, free on Eq).
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  std::vector<double> duals;
  double objective = 0;
};

/// Two-phase dense tableau simplex with Bland's rule (pivot tolerance 1e-9).
LpSolution solve_lp(const LinearProgram& lp);

}  // namespace meshopt

#endif  // MESHOPT_SIMPLEX_HPP
