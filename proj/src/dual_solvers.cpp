#include "meshopt/dual_solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "meshopt/simplex.hpp"

namespace meshopt {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double round9(double x) {
  const double r = std::round(x * 1e9) / 1e9;
  return r == 0.0 ? 0.0 : r;
}

// A subproblem maximizer: one point of the constraint set, with the pieces
// needed for cuts and for dual-weighted primal averaging.
struct PrimalPoint {
  std::vector<double> s;
  std::vector<double> t;  // links x sessions, row-major
  std::vector<double> rates;
  std::vector<double> loads;
  std::vector<NodeAllocation> allocations;
  double ln_sum = 0;
};

double ln_sum_of(const std::vector<double>& s) {
  double sum = 0;
  for (double v : s) {
    if (v <= 0) return -std::numeric_limits<double>::infinity();
    sum += std::log(v);
  }
  return sum;
}

PrimalPoint point_from_eval(const Scenario& sc, const DualEvaluation& eval) {
  PrimalPoint p;
  p.s = eval.routing.flow.s;
  p.t = eval.routing.flow.t;
  p.rates = eval.link_rates;
  p.loads = eval.link_loads;
  p.allocations = eval.allocations;
  p.ln_sum = ln_sum_of(p.s);
  (void)sc;
  return p;
}

// Cheap always-feasible starting point: uniform covariances (DPC) or uniform
// time shares (TDM), sessions on min-hop paths at rates that cannot exceed
// any traversed link's capacity even if all sessions share it.
PrimalPoint initial_point(const Scenario& sc, Scheme scheme) {
  PrimalPoint p;
  const int links = sc.link_count();
  const int f_count = sc.session_count();
  p.t.assign(static_cast<size_t>(links) * f_count, 0.0);
  p.s.assign(f_count, 0.0);
  p.rates.assign(links, 0.0);
  p.loads.assign(links, 0.0);

  for (int n = 0; n < sc.node_count(); ++n) {
    const NodeMac mac = node_mac_of(sc, n);
    const std::vector<int> out = sc.topology.outgoing(n);
    const int k = mac.link_count();
    NodeAllocation alloc;
    if (k == 0) {
      p.allocations.push_back(std::move(alloc));
      continue;
    }
    if (scheme == Scheme::Dpc) {
      const double scale = sc.p_max / (static_cast<double>(k) * mac.n_r());
      alloc.q.assign(k, HermitianMatrix::scaled_identity(mac.n_r(), scale));
      const WeightOrdering order = make_weight_ordering(std::vector<double>(k, 1.0));
      alloc.rates = recover_rates(mac, order, alloc.q);
    } else {
      alloc.tau.assign(k, 1.0 / k);
      alloc.rates.assign(k, 0.0);
      for (int i = 0; i < k; ++i) {
        Waterfill wf = waterfill_single_link(mac.channels[i], mac.rho[i], mac.p_max);
        alloc.rates[i] = wf.capacity / k;
        alloc.q.push_back(std::move(wf.q));
      }
    }
    for (int i = 0; i < k; ++i) p.rates[out[i]] = alloc.rates[i];
    p.allocations.push_back(std::move(alloc));
  }

  const std::vector<PathResult> paths =
      shortest_paths(sc.topology, std::vector<double>(links, 1.0), sc.sessions);
  for (int f = 0; f < f_count; ++f) {
    double min_rate = std::numeric_limits<double>::infinity();
    for (int l : paths[f].links) min_rate = std::min(min_rate, p.rates[l]);
    const double s = min_rate / std::max(1, f_count);
    if (!(s > 0)) throw std::runtime_error("initial point: zero-capacity path");
    p.s[f] = s;
    for (int l : paths[f].links) {
      p.t[static_cast<size_t>(l) * f_count + f] += s;
      p.loads[l] += s;
    }
  }
  p.ln_sum = ln_sum_of(p.s);
  return p;
}

// Convex combination of stored points followed by a one-sided feasibility
// repair: the averaged rate vector is achievable for the averaged
// covariances (the region is convex), so only numerical slack needs
// rescaling.
struct Recovered {
  FlowState flow;
  std::vector<double> rates;
  std::vector<double> loads;
  std::vector<NodeAllocation> allocations;
  double objective = 0;
  double pre_repair_violation = 0;
};

Recovered recover_primal(const Scenario& sc, const std::vector<PrimalPoint>& points,
                         const std::vector<double>& weights) {
  const int links = sc.link_count();
  const int f_count = sc.session_count();
  Recovered rec;
  rec.flow = FlowState(links, f_count);
  rec.rates.assign(links, 0.0);
  rec.loads.assign(links, 0.0);

  if (weights.size() != points.size())
    throw std::invalid_argument("recover_primal: weight count != point count");
  double wsum = 0;
  for (double w : weights) wsum += w;
  if (wsum <= 0) throw std::invalid_argument("recover_primal: weights sum to zero");

  for (size_t j = 0; j < points.size(); ++j) {
    const double w = weights[j] / wsum;
    if (w == 0.0) continue;
    const PrimalPoint& p = points[j];
    for (int f = 0; f < f_count; ++f) rec.flow.s[f] += w * p.s[f];
    for (size_t i = 0; i < p.t.size(); ++i) rec.flow.t[i] += w * p.t[i];
    for (int l = 0; l < links; ++l) {
      rec.rates[l] += w * p.rates[l];
      rec.loads[l] += w * p.loads[l];
    }
  }

  // Averaged per-node allocations.
  for (int n = 0; n < sc.node_count(); ++n) {
    const int k = static_cast<int>(sc.topology.outgoing(n).size());
    NodeAllocation alloc;
    const bool tdm = !points.empty() && !points.front().allocations[n].tau.empty();
    const int qdim = points.empty() || points.front().allocations[n].q.empty()
                         ? 0
                         : points.front().allocations[n].q[0].dim();
    alloc.q.assign(k, HermitianMatrix(qdim));
    alloc.rates.assign(k, 0.0);
    if (tdm) alloc.tau.assign(k, 0.0);
    for (size_t j = 0; j < points.size(); ++j) {
      const double w = weights[j] / wsum;
      if (w == 0.0) continue;
      const NodeAllocation& pa = points[j].allocations[n];
      for (int i = 0; i < k; ++i) {
        HermitianMatrix scaled = pa.q[i];
        scaled *= w;
        alloc.q[i] += scaled;
        alloc.rates[i] += w * pa.rates[i];
        if (tdm) alloc.tau[i] += w * pa.tau[i];
      }
    }
    rec.allocations.push_back(std::move(alloc));
  }

  // Rescale only on meaningful excess: averaging leaves at most LP-noise
  // violations (~1e-9), and a noise-level load on a zero-rate link would
  // otherwise drive the ratio to infinity.
  double scale = 1.0;
  for (int l = 0; l < links; ++l) {
    rec.pre_repair_violation = std::max(rec.pre_repair_violation, rec.loads[l] - rec.rates[l]);
    if (rec.loads[l] - rec.rates[l] > 1e-9)
      scale = std::max(scale, rec.loads[l] / std::max(rec.rates[l], 1e-12));
  }
  rec.pre_repair_violation = std::max(rec.pre_repair_violation, 0.0);
  if (scale > 1.0) {
    const double inv = 1.0 / scale;
    for (double& v : rec.flow.s) v *= inv;
    for (double& v : rec.flow.t) v *= inv;
    for (double& v : rec.loads) v *= inv;
  }
  rec.objective = ln_sum_of(rec.flow.s);
  return rec;
}

std::vector<double> node_power_of(const Scenario& sc,
                                  const std::vector<NodeAllocation>& allocations) {
  std::vector<double> power(sc.node_count(), 0.0);
  for (int n = 0; n < sc.node_count(); ++n) {
    const NodeAllocation& a = allocations[n];
    for (size_t i = 0; i < a.q.size(); ++i) {
      const double tr = a.q[i].trace_real();
      power[n] += a.tau.empty() ? tr : a.tau[i] * tr;
    }
  }
  return power;
}

CrpaSolution finish_solution(const Scenario& sc, Scheme scheme, Recovered rec,
                             std::vector<double> prices, double dual_bound, bool converged,
                             int iterations) {
  CrpaSolution sol;
  sol.scheme = scheme;
  sol.flow = std::move(rec.flow);
  sol.allocations = std::move(rec.allocations);
  sol.link_rates = std::move(rec.rates);
  sol.link_loads = std::move(rec.loads);
  sol.node_power = node_power_of(sc, sol.allocations);
  sol.prices = std::move(prices);
  sol.objective = rec.objective;
  sol.dual_bound = dual_bound;
  sol.gap = dual_bound - sol.objective;
  sol.converged = converged;
  sol.iterations = iterations;
  return sol;
}

}  // namespace

const char* scheme_name(Scheme s) { return s == Scheme::Dpc ? "dpc" : "tdm"; }

DualEvaluation evaluate_theta(const Scenario& sc, const std::vector<double>& u, Scheme scheme,
                              WarmCache* warm) {
  if (static_cast<int>(u.size()) != sc.link_count())
    throw std::invalid_argument("evaluate_theta: price count != link count");

  DualEvaluation eval;
  eval.u = u;
  eval.routing = net_subproblem(sc, u);
  eval.link_loads = eval.routing.flow.link_loads();
  eval.link_rates.assign(sc.link_count(), 0.0);

  if (warm && warm->q_by_node.size() != static_cast<size_t>(sc.node_count()))
    warm->q_by_node.assign(sc.node_count(), {});

  double theta_link = 0;
  for (int n = 0; n < sc.node_count(); ++n) {
    const std::vector<int> out = sc.topology.outgoing(n);
    NodeAllocation alloc;
    if (!out.empty()) {
      const NodeMac mac = node_mac_of(sc, n);
      std::vector<double> weights(out.size());
      for (size_t i = 0; i < out.size(); ++i) weights[i] = u[out[i]];
      if (scheme == Scheme::Dpc) {
        const std::vector<HermitianMatrix>* seed =
            warm && !warm->q_by_node[n].empty() ? &warm->q_by_node[n] : nullptr;
        LinkAllocation la = cgp_solve(mac, weights, CgpParams{}, seed);
        if (warm) warm->q_by_node[n] = la.q;
        alloc.q = std::move(la.q);
        alloc.rates = std::move(la.rates);
        alloc.converged = la.converged;
        eval.subproblems_converged = eval.subproblems_converged && la.converged;
      } else {
        TdmAllocation ta = tdm_link_subproblem(mac, weights);
        alloc.q = std::move(ta.q);
        alloc.rates = std::move(ta.rates);
        alloc.tau = std::move(ta.tau);
      }
      for (size_t i = 0; i < out.size(); ++i) {
        eval.link_rates[out[i]] = alloc.rates[i];
        theta_link += weights[i] * alloc.rates[i];
      }
    }
    eval.allocations.push_back(std::move(alloc));
  }
  eval.theta = eval.routing.theta_net + theta_link;
  return eval;
}

double crpa_objective(const FlowState& flow) { return ln_sum_of(flow.s); }

std::pair<CrpaSolution, SolveTrace> cutting_plane_solve(const Scenario& sc, Scheme scheme,
                                                        const SolverOptions& opts) {
  const auto start = Clock::now();
  const int links = sc.link_count();

  struct Cut {
    double ln_term;
    std::vector<double> coeff;  // rates - loads per link
  };
  std::vector<Cut> cuts;
  std::vector<PrimalPoint> points;

  PrimalPoint p0 = initial_point(sc, scheme);
  cuts.push_back({p0.ln_sum, {}});
  cuts.back().coeff.resize(links);
  for (int l = 0; l < links; ++l) cuts.back().coeff[l] = p0.rates[l] - p0.loads[l];
  points.push_back(std::move(p0));

  SolveTrace trace;
  WarmCache warm;
  double best_dual = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::vector<double> u_final(links, 0.0);
  std::vector<double> cut_weights(1, 1.0);
  int k = 0;

  while (k < opts.max_cuts) {
    ++k;
    // Master over (z, u): minimize z subject to the accumulated cuts and the
    // price box 0 <= u <= u_max.
    LinearProgram lp(1 + links);
    lp.objective[0] = 1.0;
    lp.lower[0] = -kLpInfinity;
    for (int l = 0; l < links; ++l) lp.upper[1 + l] = opts.u_max;
    for (const Cut& cut : cuts) {
      std::vector<double> row(1 + links, 0.0);
      row[0] = 1.0;
      for (int l = 0; l < links; ++l) row[1 + l] = -cut.coeff[l];
      lp.add_row(std::move(row), Sense::Ge, cut.ln_term);
    }
    const LpSolution master = solve_lp(lp);
    if (master.status != LpStatus::Optimal)
      throw std::runtime_error("cutting plane: master LP not optimal");
    const double z = master.objective;
    std::vector<double> u(links);
    for (int l = 0; l < links; ++l) u[l] = std::max(0.0, master.x[1 + l]);

    cut_weights = master.duals;  // nonnegative, summing to ~1
    for (double& w : cut_weights) w = std::max(0.0, w);
    const DualEvaluation eval = evaluate_theta(sc, u, scheme, &warm);
    best_dual = std::min(best_dual, eval.theta);
    u_final = u;

    Recovered rec = recover_primal(sc, points, cut_weights);
    trace.rows.push_back({k, best_dual, z, rec.objective, rec.pre_repair_violation,
                          elapsed_ms(start), eval.theta});

    if (z >= eval.theta - opts.tol_rel * std::max(1.0, std::abs(eval.theta))) {
      converged = true;
      break;
    }

    PrimalPoint p = point_from_eval(sc, eval);
    Cut cut;
    cut.ln_term = p.ln_sum;
    cut.coeff.resize(links);
    for (int l = 0; l < links; ++l) cut.coeff[l] = p.rates[l] - p.loads[l];
    cuts.push_back(std::move(cut));
    points.push_back(std::move(p));
  }

  cut_weights.resize(points.size(), 0.0);  // cap exit leaves one unweighted point
  Recovered rec = recover_primal(sc, points, cut_weights);
  CrpaSolution sol =
      finish_solution(sc, scheme, std::move(rec), u_final, best_dual, converged, k);
  return {std::move(sol), std::move(trace)};
}

std::pair<CrpaSolution, SolveTrace> subgradient_solve(const Scenario& sc, Scheme scheme,
                                                      const SolverOptions& opts) {
  const auto start = Clock::now();
  const int links = sc.link_count();
  const int f_count = sc.session_count();

  std::vector<double> u(links, 1.0);
  std::vector<double> u_best = u;
  double best_dual = std::numeric_limits<double>::infinity();

  // Ergodic (step-weighted) running sums of the primal pieces.  The window
  // restarts at powers of two so early iterates, which carry the largest
  // harmonic weights, do not dominate the average forever.
  double wsum = 0;
  std::vector<double> acc_s(f_count, 0.0);
  std::vector<double> acc_t(static_cast<size_t>(links) * f_count, 0.0);
  std::vector<double> acc_rates(links, 0.0);
  std::vector<double> acc_loads(links, 0.0);
  std::vector<NodeAllocation> acc_alloc;
  int next_reset = 2;

  SolveTrace trace;
  WarmCache warm;
  bool diverged = false;
  int worsening_streak = 0;
  double prev_theta = std::numeric_limits<double>::infinity();
  int k = 0;

  for (k = 1; k <= opts.sg_max_iters; ++k) {
    if (k == next_reset) {
      next_reset *= 2;
      wsum = 0;
      std::fill(acc_s.begin(), acc_s.end(), 0.0);
      std::fill(acc_t.begin(), acc_t.end(), 0.0);
      std::fill(acc_rates.begin(), acc_rates.end(), 0.0);
      std::fill(acc_loads.begin(), acc_loads.end(), 0.0);
      acc_alloc.clear();
    }
    const DualEvaluation eval = evaluate_theta(sc, u, scheme, &warm);
    if (eval.theta < best_dual) {
      best_dual = eval.theta;
      u_best = u;
    }
    if (k > 1 && eval.theta > prev_theta) {
      if (++worsening_streak >= 100) {
        diverged = true;
      }
    } else {
      worsening_streak = 0;
    }
    prev_theta = eval.theta;

    const double lambda = opts.sg_beta / k;
    wsum += lambda;
    for (int f = 0; f < f_count; ++f) acc_s[f] += lambda * eval.routing.flow.s[f];
    for (size_t i = 0; i < acc_t.size(); ++i) acc_t[i] += lambda * eval.routing.flow.t[i];
    for (int l = 0; l < links; ++l) {
      acc_rates[l] += lambda * eval.link_rates[l];
      acc_loads[l] += lambda * eval.link_loads[l];
    }
    if (acc_alloc.empty()) {
      acc_alloc = eval.allocations;
      for (NodeAllocation& a : acc_alloc) {
        for (HermitianMatrix& qm : a.q) qm *= lambda;
        for (double& r : a.rates) r *= lambda;
        for (double& t : a.tau) t *= lambda;
      }
    } else {
      for (int n = 0; n < sc.node_count(); ++n) {
        NodeAllocation& acc = acc_alloc[n];
        const NodeAllocation& cur = eval.allocations[n];
        for (size_t i = 0; i < acc.q.size(); ++i) {
          HermitianMatrix scaled = cur.q[i];
          scaled *= lambda;
          acc.q[i] += scaled;
          acc.rates[i] += lambda * cur.rates[i];
          if (!acc.tau.empty()) acc.tau[i] += lambda * cur.tau[i];
        }
      }
    }

    // Repaired ergodic average for the trace.
    double viol = 0;
    double scale = 1.0;
    for (int l = 0; l < links; ++l) {
      viol = std::max(viol, (acc_loads[l] - acc_rates[l]) / wsum);
      if ((acc_loads[l] - acc_rates[l]) / wsum > 1e-9)
        scale = std::max(scale, acc_loads[l] / std::max(acc_rates[l], 1e-12 * wsum));
    }
    viol = std::max(viol, 0.0);
    double ln_avg = 0;
    for (int f = 0; f < f_count; ++f) ln_avg += std::log(acc_s[f] / (wsum * scale));
    if (f_count == 0) ln_avg = 0;
    trace.rows.push_back(
        {k, best_dual, eval.theta, ln_avg, viol, elapsed_ms(start), eval.theta});

    if (diverged) break;

    for (int l = 0; l < links; ++l)
      u[l] = std::max(0.0, u[l] - lambda * (eval.link_rates[l] - eval.link_loads[l]));
  }
  const int iterations = std::min(k, opts.sg_max_iters);

  // Final recovery from the ergodic sums (each accumulator divided by wsum).
  std::vector<PrimalPoint> points(1);
  points[0].s = acc_s;
  points[0].t = acc_t;
  points[0].rates = acc_rates;
  points[0].loads = acc_loads;
  points[0].allocations = acc_alloc;
  for (double& v : points[0].s) v /= wsum;
  for (double& v : points[0].t) v /= wsum;
  for (double& v : points[0].rates) v /= wsum;
  for (double& v : points[0].loads) v /= wsum;
  for (NodeAllocation& a : points[0].allocations) {
    for (HermitianMatrix& qm : a.q) qm *= 1.0 / wsum;
    for (double& r : a.rates) r /= wsum;
    for (double& t : a.tau) t /= wsum;
  }
  points[0].ln_sum = ln_sum_of(points[0].s);

  Recovered rec = recover_primal(sc, points, {1.0});
  const double rel_gap = (best_dual - rec.objective) / std::max(1.0, std::abs(best_dual));
  const bool converged = !diverged && rel_gap <= 0.01;
  CrpaSolution sol =
      finish_solution(sc, scheme, std::move(rec), u_best, best_dual, converged, iterations);
  return {std::move(sol), std::move(trace)};
}

CompareReport compare_dpc_tdm(const Scenario& sc, const SolverOptions& opts) {
  CompareReport rep;
  rep.dpc = cutting_plane_solve(sc, Scheme::Dpc, opts).first;
  rep.tdm = cutting_plane_solve(sc, Scheme::Tdm, opts).first;
  rep.objective_gain =
      (rep.dpc.objective - rep.tdm.objective) / std::max(1e-12, std::abs(rep.tdm.objective));
  double s_dpc = 0, s_tdm = 0;
  for (double v : rep.dpc.flow.s) s_dpc += v;
  for (double v : rep.tdm.flow.s) s_tdm += v;
  rep.rate_gain = (s_dpc - s_tdm) / std::max(1e-12, s_tdm);
  rep.dominance_ok = rep.dpc.objective >= rep.tdm.objective - 1e-6;
  return rep;
}

std::string trace_to_csv(const SolveTrace& trace) {
  std::ostringstream out;
  out << "k,dual_bound,master_z_or_theta,primal_obj,max_violation,wall_ms\n";
  out.precision(12);
  for (const TraceRow& r : trace.rows)
    out << r.k << ',' << r.dual_bound << ',' << r.value << ',' << r.primal_obj << ','
        << r.max_violation << ',' << r.wall_ms << '\n';
  return out.str();
}

std::string solution_to_json(const CrpaSolution& sol, const Scenario& sc) {
  nlohmann::ordered_json j;
  j["scheme"] = scheme_name(sol.scheme);
  j["converged"] = sol.converged;
  j["iterations"] = sol.iterations;
  j["objective"] = round9(sol.objective);
  j["dual_bound"] = round9(sol.dual_bound);
  j["gap"] = round9(sol.gap);
  j["session_rates"] = nlohmann::ordered_json::array();
  for (double s : sol.flow.s) j["session_rates"].push_back(round9(s));
  j["links"] = nlohmann::ordered_json::array();
  for (int l = 0; l < sc.link_count(); ++l) {
    nlohmann::ordered_json jl;
    jl["src"] = sc.topology.links[l].src;
    jl["dst"] = sc.topology.links[l].dst;
    jl["rate"] = round9(sol.link_rates[l]);
    jl["load"] = round9(sol.link_loads[l]);
    jl["price"] = round9(sol.prices[l]);
    j["links"].push_back(jl);
  }
  j["node_power"] = nlohmann::ordered_json::array();
  for (double p : sol.node_power) j["node_power"].push_back(round9(p));
  return j.dump(2) + "\n";
}

std::string compare_to_json(const CompareReport& rep) {
  nlohmann::ordered_json j;
  j["objective_dpc"] = round9(rep.dpc.objective);
  j["objective_tdm"] = round9(rep.tdm.objective);
  j["objective_gain"] = round9(rep.objective_gain);
  j["rate_gain"] = round9(rep.rate_gain);
  j["dominance_ok"] = rep.dominance_ok;
  return j.dump(2) + "\n";
}

}  // namespace meshopt
