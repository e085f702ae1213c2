#ifndef MESHOPT_DUAL_SOLVERS_HPP
#define MESHOPT_DUAL_SOLVERS_HPP

#include <string>
#include <utility>
#include <vector>

#include "meshopt/mac_link.hpp"
#include "meshopt/network.hpp"
#include "meshopt/routing.hpp"

namespace meshopt {

enum class Scheme { Dpc, Tdm };

const char* scheme_name(Scheme s);

/// Per-node link-layer primal point.  tau is empty for DPC.
struct NodeAllocation {
  std::vector<HermitianMatrix> q;
  std::vector<double> rates;
  std::vector<double> tau;
  bool converged = true;
};

/// One Lagrangian evaluation: theta(u) = theta_net(u) + sum_n theta_link(u).
struct DualEvaluation {
  std::vector<double> u;
  double theta = 0;
  RoutingSolution routing;
  std::vector<NodeAllocation> allocations;  // per node
  std::vector<double> link_rates;
  std::vector<double> link_loads;
  bool subproblems_converged = true;
};

/// Warm-start covariances carried across dual iterations (per node).
struct WarmCache {
  std::vector<std::vector<HermitianMatrix>> q_by_node;
};

DualEvaluation evaluate_theta(const Scenario& sc, const std::vector<double>& u, Scheme scheme,
                              WarmCache* warm = nullptr);

struct TraceRow {
  int k = 0;
  double dual_bound = 0;
  double value = 0;  // master z (cutting plane) or theta(u^k) (subgradient)
  double primal_obj = 0;
  double max_violation = 0;
  double wall_ms = 0;
  double theta = 0;  // theta(u^k) of this iteration (not emitted to CSV)
};

struct SolveTrace {
  std::vector<TraceRow> rows;
};

/// Recovered primal plus certificates.
struct CrpaSolution {
  Scheme scheme = Scheme::Dpc;
  FlowState flow;
  std::vector<NodeAllocation> allocations;
  std::vector<double> link_rates;
  std::vector<double> link_loads;
  std::vector<double> node_power;
  std::vector<double> prices;  // final dual prices u
  double objective = 0;        // sum_f ln s_f
  double dual_bound = 0;
  double gap = 0;  // dual_bound - objective
  bool converged = false;
  int iterations = 0;
};

struct SolverOptions {
  double tol_rel = 1e-4;   // cutting-plane relative stop tolerance
  double u_max = 1e3;      // master price box
  int max_cuts = 1000;
  double sg_beta = 0.1;    // subgradient harmonic step scale
  int sg_max_iters = 5000;
  double s_max = 1e6;      // session-rate cap in the network subproblem
};

/// Outer linearization: grows a cut pool from Lagrangian evaluations, solves
/// the master LP over the price box, recovers the primal by dual-weighted
/// averaging of the stored subproblem points.
std::pair<CrpaSolution, SolveTrace> cutting_plane_solve(const Scenario& sc, Scheme scheme,
                                                        const SolverOptions& opts = {});

/// Projected subgradient descent on the dual with harmonic steps beta/k and
/// ergodic (step-weighted) primal averaging.
std::pair<CrpaSolution, SolveTrace> subgradient_solve(const Scenario& sc, Scheme scheme,
                                                      const SolverOptions& opts = {});

/// Proportional-fairness objective sum_f ln(s_f); -inf when any s_f <= 0.
double crpa_objective(const FlowState& flow);

struct CompareReport {
  CrpaSolution dpc;
  CrpaSolution tdm;
  double objective_gain = 0;  // (obj_dpc - obj_tdm) / |obj_tdm|
  double rate_gain = 0;       // (sum s_dpc - sum s_tdm) / sum s_tdm
  bool dominance_ok = false;  // obj_dpc >= obj_tdm - 1e-6
};

CompareReport compare_dpc_tdm(const Scenario& sc, const SolverOptions& opts = {});

std::string trace_to_csv(const SolveTrace& trace);
std::string solution_to_json(const CrpaSolution& sol, const Scenario& sc);
std::string compare_to_json(const CompareReport& rep);

}  // namespace meshopt

#endif  // MESHOPT_DUAL_SOLVERS_HPP
