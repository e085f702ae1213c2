#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "meshopt/dual_solvers.hpp"
#include "test_support.hpp"

using namespace meshopt;

namespace {

int link_id(const Scenario& sc, int src, int dst) {
  for (int l = 0; l < sc.link_count(); ++l)
    if (sc.topology.links[l].src == src && sc.topology.links[l].dst == dst) return l;
  return -1;
}

// Capacity of the micro scenario's forward link: h = 1, rho = 1 scalar, so
// C = log2(1 + P).
double micro_capacity(const Scenario& sc) { return std::log2(1.0 + sc.p_max); }

void check_primal_feasible(const Scenario& sc, const CrpaSolution& sol, double tol) {
  CHECK(validate_flows(sc, sol.flow, tol).max_violation <= tol);
  for (int l = 0; l < sc.link_count(); ++l)
    CHECK(sol.link_loads[l] <= sol.link_rates[l] + tol);
  for (double p : sol.node_power) CHECK(p <= sc.p_max + tol);
  for (const NodeAllocation& a : sol.allocations)
    for (const HermitianMatrix& q : a.q)
      if (q.dim() > 0) CHECK(eigh(q).eigenvalues.back() >= -tol);
}

}  // namespace

TEST_CASE("evaluate_theta at zero prices equals F * ln(s_max)") {
  const Scenario sc = random_scenario(5, 6, 2, 2, 2, 0.7, 10.0);
  const DualEvaluation eval =
      evaluate_theta(sc, std::vector<double>(sc.link_count(), 0.0), Scheme::Dpc);
  CHECK(eval.theta ==
        doctest::Approx(sc.session_count() * std::log(1e6)).epsilon(1e-9));
}

TEST_CASE("evaluate_theta at the analytic single-link optimum") {
  const Scenario sc = testsup::micro_scenario(10.0);
  const double c = micro_capacity(sc);
  std::vector<double> u(sc.link_count(), 0.0);
  u[link_id(sc, 0, 1)] = 1.0 / c;
  const DualEvaluation eval = evaluate_theta(sc, u, Scheme::Dpc);
  CHECK(eval.theta == doctest::Approx(std::log(c)).epsilon(1e-4));
}

TEST_CASE("evaluate_theta decomposes across isolated subnetworks") {
  // Two connected halves glued into one (disconnected) instance; sessions
  // stay inside their halves so every routing query remains solvable.
  const Scenario a = scenario_from_positions({{0.0, 0.0}, {0.1, 0.0}, {0.05, 0.1}}, 0.2,
                                             {{0, 2}}, 3, 2, 2, 10.0);
  const Scenario b = scenario_from_positions({{0.8, 0.8}, {0.9, 0.8}, {0.85, 0.9}}, 0.2,
                                             {{1, 0}}, 4, 2, 2, 10.0);
  Scenario joint = a;
  const int offset_nodes = a.node_count();
  for (const auto& p : b.topology.node_positions) joint.topology.node_positions.push_back(p);
  for (const LinkInfo& l : b.topology.links)
    joint.topology.links.push_back({l.src + offset_nodes, l.dst + offset_nodes, l.dist});
  joint.channels.insert(joint.channels.end(), b.channels.begin(), b.channels.end());
  joint.rho.insert(joint.rho.end(), b.rho.begin(), b.rho.end());
  for (const Session& s : b.sessions)
    joint.sessions.push_back({s.src + offset_nodes, s.dst + offset_nodes});
  joint.incidence = incidence_of(joint.topology);

  Rng rng(90);
  std::vector<double> ua(a.link_count()), ub(b.link_count());
  for (double& w : ua) w = rng.uniform();
  for (double& w : ub) w = rng.uniform();
  std::vector<double> uj = ua;
  uj.insert(uj.end(), ub.begin(), ub.end());

  const double theta_joint = evaluate_theta(joint, uj, Scheme::Dpc).theta;
  const double theta_split =
      evaluate_theta(a, ua, Scheme::Dpc).theta + evaluate_theta(b, ub, Scheme::Dpc).theta;
  CHECK(std::abs(theta_joint - theta_split) <= 1e-10 * std::max(1.0, std::abs(theta_joint)));
}

TEST_CASE("crpa_objective") {
  FlowState flow(0, 3);
  flow.s = {1.0, 1.0, 1.0};
  CHECK(crpa_objective(flow) == doctest::Approx(0.0));
  flow.s = {std::exp(1.0)};
  flow.sessions = 1;
  CHECK(crpa_objective(flow) == doctest::Approx(1.0));
  flow.s = {0.0};
  CHECK(crpa_objective(flow) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("cutting plane solves the single-link micro scenario") {
  const Scenario sc = testsup::micro_scenario(10.0);
  const double c = micro_capacity(sc);
  SolverOptions opts;
  opts.tol_rel = 1e-7;
  const auto [sol, trace] = cutting_plane_solve(sc, Scheme::Dpc, opts);

  CHECK(sol.converged);
  CHECK(std::abs(sol.objective - std::log(c)) <= 1e-3);
  CHECK(std::abs(sol.prices[link_id(sc, 0, 1)] - 1.0 / c) <= 1e-3);
  CHECK(std::abs(sol.flow.s[0] - c) <= 1e-2);
  CHECK(sol.gap >= -1e-6);
  CHECK(sol.gap <= 1e-3);
  check_primal_feasible(sc, sol, 1e-6);

  // Master values never decrease; the running dual bound never increases.
  for (size_t i = 1; i < trace.rows.size(); ++i) {
    CHECK(trace.rows[i].value >= trace.rows[i - 1].value - 1e-7);
    CHECK(trace.rows[i].dual_bound <= trace.rows[i - 1].dual_bound + 1e-12);
  }
}

TEST_CASE("subgradient solves the single-link micro scenario") {
  const Scenario sc = testsup::micro_scenario(10.0);
  const double c = micro_capacity(sc);
  SolverOptions opts;
  opts.sg_beta = 0.1;
  opts.sg_max_iters = 2000;
  const auto [sol, trace] = subgradient_solve(sc, Scheme::Dpc, opts);

  // Harmonic steps with beta = 0.1: the objective lands within 1% by k = 2000
  // and the price converges toward 1/C.
  CHECK(std::abs(sol.dual_bound - std::log(c)) <= 0.01 * std::max(1.0, std::log(c)));
  CHECK(std::abs(sol.objective - std::log(c)) <= 0.01 * std::max(1.0, std::log(c)));
  const double u_fwd = sol.prices[link_id(sc, 0, 1)];
  CHECK(std::abs(u_fwd - 1.0 / c) <= 0.05 / c);
  CHECK(sol.gap >= -1e-6);
  check_primal_feasible(sc, sol, 1e-6);

  for (size_t i = 1; i < trace.rows.size(); ++i)
    CHECK(trace.rows[i].dual_bound <= trace.rows[i - 1].dual_bound + 1e-12);
}

TEST_CASE("zero sessions converge in one cut with objective zero") {
  Scenario sc = testsup::micro_scenario(10.0);
  sc.sessions.clear();
  const auto [sol, trace] = cutting_plane_solve(sc, Scheme::Dpc);
  CHECK(sol.converged);
  CHECK(sol.objective == doctest::Approx(0.0));
  CHECK(sol.dual_bound == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(trace.rows.size() == 1);
}

TEST_CASE("weak duality holds along both solvers' traces") {
  const Scenario sc = random_scenario(101, 6, 2, 2, 2, 0.7, 10.0);
  SolverOptions opts;
  opts.sg_max_iters = 400;
  const auto [cp_sol, cp_trace] = cutting_plane_solve(sc, Scheme::Dpc, opts);
  for (const TraceRow& r : cp_trace.rows) CHECK(r.dual_bound >= r.primal_obj - 1e-6);
  const auto [sg_sol, sg_trace] = subgradient_solve(sc, Scheme::Dpc, opts);
  for (const TraceRow& r : sg_trace.rows) CHECK(r.dual_bound >= r.primal_obj - 1e-6);
}

TEST_CASE("cutting plane closes the gap on a seeded desk scenario") {
  const Scenario sc = random_scenario(77, 7, 2, 2, 2, 0.65, 10.0);
  const auto [sol, trace] = cutting_plane_solve(sc, Scheme::Dpc);
  CHECK(sol.converged);
  CHECK(sol.gap <= 1e-3 * std::max(1.0, std::abs(sol.objective)));
  CHECK(sol.gap >= -1e-6);
  check_primal_feasible(sc, sol, 1e-6);
  // The price box stays inactive at optimality.
  for (double u : sol.prices) CHECK(u < 1e3 - 1e-6);
}

TEST_CASE("cross-solver agreement within 1% on a desk scenario") {
  const Scenario sc = random_scenario(7, 6, 2, 2, 2, 0.7, 10.0);
  const CrpaSolution cp = cutting_plane_solve(sc, Scheme::Dpc).first;
  SolverOptions opts;
  opts.sg_max_iters = 3000;
  const CrpaSolution sg = subgradient_solve(sc, Scheme::Dpc, opts).first;
  CHECK(std::abs(sg.objective - cp.objective) <= 0.01 * std::max(1.0, std::abs(cp.objective)));
}

TEST_CASE("TDM pipeline converges and stays feasible") {
  const Scenario sc = random_scenario(77, 7, 2, 2, 2, 0.65, 10.0);
  const auto [sol, trace] = cutting_plane_solve(sc, Scheme::Tdm);
  CHECK(sol.converged);
  CHECK(sol.gap <= 1e-3 * std::max(1.0, std::abs(sol.objective)));
  check_primal_feasible(sc, sol, 1e-6);
  // Time shares of the averaged allocation stay within the unit frame.
  for (const NodeAllocation& a : sol.allocations) {
    double total = 0;
    for (double t : a.tau) total += t;
    CHECK(total <= 1.0 + 1e-9);
  }
}

TEST_CASE("DPC dominates TDM; strict gain with a multi-link hub") {
  const Scenario sc = random_scenario(11, 6, 2, 2, 2, 0.8, 10.0);
  const CompareReport rep = compare_dpc_tdm(sc);
  CHECK(rep.dominance_ok);
  CHECK(rep.dpc.objective >= rep.tdm.objective - 1e-6);

  // A node with >= 2 priced outgoing links at the DPC optimum.
  bool hub = false;
  for (int n = 0; n < sc.node_count() && !hub; ++n) {
    int priced = 0;
    for (int l : sc.topology.outgoing(n))
      if (rep.dpc.prices[l] > 1e-6) ++priced;
    hub = priced >= 2;
  }
  if (hub) CHECK(rep.objective_gain > 0.0);
}

TEST_CASE("single-outgoing-link nodes make DPC and TDM coincide") {
  // Directed ring: every node has exactly one outgoing link, so the MAC
  // degenerates to single-user water-filling and TDM gives tau = 1.
  const int n = 4;
  Scenario sc;
  sc.n_t = 2;
  sc.n_r = 2;
  sc.p_max_dbm = 10.0;
  sc.p_max = dbm_to_linear(10.0);
  sc.seed = 21;
  for (int i = 0; i < n; ++i)
    sc.topology.node_positions.push_back({0.5 + 0.3 * std::cos(i * 1.5707963267948966),
                                          0.5 + 0.3 * std::sin(i * 1.5707963267948966)});
  sc.topology.d_max = 1.0;
  Rng rng(21);
  for (int i = 0; i < n; ++i) {
    sc.topology.links.push_back({i, (i + 1) % n, 0.42});
    sc.channels.push_back(testsup::random_complex(rng, 2, 2));
    sc.rho.push_back(4.0);
  }
  sc.incidence = incidence_of(sc.topology);
  sc.sessions = {{0, 2}};

  const CompareReport rep = compare_dpc_tdm(sc);
  CHECK(rep.dominance_ok);
  CHECK(std::abs(rep.objective_gain) <= 1e-3);
}

TEST_CASE("each added cut is violated by the incumbent master point") {
  const Scenario sc = random_scenario(13, 6, 2, 2, 2, 0.7, 10.0);
  SolverOptions opts;
  const auto [sol, trace] = cutting_plane_solve(sc, Scheme::Dpc, opts);
  CHECK(sol.converged);
  // Before convergence z^(k) < theta(u^(k)) by at least the stop tolerance;
  // the cut generated at u^(k) takes value theta(u^(k)) there, so the
  // incumbent (z^(k), u^(k)) violates it.
  for (size_t i = 0; i + 1 < trace.rows.size(); ++i)
    CHECK(trace.rows[i].value <
          trace.rows[i].theta - opts.tol_rel * std::max(1.0, std::abs(trace.rows[i].theta)));
}

TEST_CASE("trace CSV and solution JSON emission") {
  const Scenario sc = testsup::micro_scenario(10.0);
  const auto [sol, trace] = cutting_plane_solve(sc, Scheme::Dpc);
  const std::string csv = trace_to_csv(trace);
  CHECK(csv.rfind("k,dual_bound,master_z_or_theta,primal_obj,max_violation,wall_ms\n", 0) ==
        0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(trace.rows.size()) + 1);

  const std::string js = solution_to_json(sol, sc);
  CHECK(js.find("\"scheme\": \"dpc\"") != std::string::npos);
  CHECK(js.find("\"objective\"") != std::string::npos);
  CHECK(js.find("\"node_power\"") != std::string::npos);
}
