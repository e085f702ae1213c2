#include "meshopt/mac_link.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace meshopt {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// rho * H^dag Q H, the dual-MAC Gram contribution of one link (n_t x n_t).
HermitianMatrix gram_term(const ComplexMatrix& h, const HermitianMatrix& q, double rho) {
  return HermitianMatrix(Complex(rho, 0) * (h.adjoint() * q.matrix() * h));
}

// (I + A)^-1 for PSD A, via the eigenbasis.
HermitianMatrix inverse_identity_plus(const HermitianMatrix& a) {
  const EigenDecomposition ed = eigh(a);
  const int n = a.dim();
  ComplexMatrix lam(n, n);
  for (int i = 0; i < n; ++i) lam(i, i) = 1.0 / (1.0 + std::max(ed.eigenvalues[i], 0.0));
  return HermitianMatrix(ed.basis * lam * ed.basis.adjoint());
}

void check_dims(const NodeMac& node, const std::vector<HermitianMatrix>& q) {
  if (static_cast<int>(q.size()) != node.link_count())
    throw std::invalid_argument("covariance count != link count");
  for (const HermitianMatrix& qi : q)
    if (qi.dim() != node.n_r()) throw std::invalid_argument("covariance dimension != n_r");
}

void check_psd(const std::vector<HermitianMatrix>& q) {
  for (const HermitianMatrix& qi : q) {
    const EigenDecomposition ed = eigh(qi);
    const double scale = std::max(1.0, qi.frobenius_norm());
    if (!ed.eigenvalues.empty() && ed.eigenvalues.back() < -1e-6 * scale)
      throw NotPsdError("covariance not PSD beyond tolerance");
  }
}

// Running Gram sums S_i = sum_{j>=i} rho_pi(j) H_pi(j)^dag Q_pi(j) H_pi(j),
// built from j = K downward so each step adds a single term.
std::vector<HermitianMatrix> running_gram_sums(const NodeMac& node, const WeightOrdering& order,
                                               const std::vector<HermitianMatrix>& q) {
  const int k = node.link_count();
  std::vector<HermitianMatrix> sums(k, HermitianMatrix(node.n_t()));
  for (int i = k - 1; i >= 0; --i) {
    const int l = order.pi[i];
    sums[i] = gram_term(node.channels[l], q[l], node.rho[l]);
    if (i + 1 < k) sums[i] += sums[i + 1];
  }
  return sums;
}

}  // namespace

NodeMac node_mac_of(const Scenario& sc, int node) {
  NodeMac mac;
  mac.node = node;
  mac.p_max = sc.p_max;
  for (int l : sc.topology.outgoing(node)) {
    mac.channels.push_back(sc.channels[l]);
    mac.rho.push_back(sc.rho[l]);
  }
  return mac;
}

WeightOrdering make_weight_ordering(const std::vector<double>& u) {
  for (double w : u)
    if (w < 0) throw std::invalid_argument("weights must be non-negative");
  WeightOrdering order;
  order.pi.resize(u.size());
  std::iota(order.pi.begin(), order.pi.end(), 0);
  std::stable_sort(order.pi.begin(), order.pi.end(), [&](int a, int b) { return u[a] < u[b]; });
  order.deltas.resize(u.size());
  double prev = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    order.deltas[i] = u[order.pi[i]] - prev;
    prev = u[order.pi[i]];
  }
  return order;
}

double mac_weighted_objective(const NodeMac& node, const WeightOrdering& order,
                              const std::vector<HermitianMatrix>& q) {
  check_dims(node, q);
  check_psd(q);
  const std::vector<HermitianMatrix> sums = running_gram_sums(node, order, q);
  double value = 0;
  for (int i = 0; i < node.link_count(); ++i)
    if (order.deltas[i] > 0) value += order.deltas[i] * logdet2_I_plus(sums[i]);
  return value;
}

std::vector<HermitianMatrix> mac_gradient(const NodeMac& node, const WeightOrdering& order,
                                          const std::vector<HermitianMatrix>& q) {
  check_dims(node, q);
  const int k = node.link_count();
  const std::vector<HermitianMatrix> sums = running_gram_sums(node, order, q);

  // Prefix sums W_j = sum_{i<=j} deltas[i] (I + S_i)^-1, reusing the inverses.
  std::vector<HermitianMatrix> grad(k, HermitianMatrix(node.n_r()));
  HermitianMatrix w(node.n_t());
  for (int j = 0; j < k; ++j) {
    if (order.deltas[j] > 0) {
      HermitianMatrix inv = inverse_identity_plus(sums[j]);
      inv *= order.deltas[j];
      w += inv;
    }
    const int l = order.pi[j];
    const double scale = 2.0 / kLn2 * node.rho[l];
    grad[l] =
        HermitianMatrix(Complex(scale, 0) * (node.channels[l] * w.matrix() *
                                             node.channels[l].adjoint()));
  }
  return grad;
}

std::vector<HermitianMatrix> project_onto_omega(const std::vector<HermitianMatrix>& q,
                                                double p_max, double* mu_out) {
  if (p_max <= 0) throw std::invalid_argument("p_max must be positive");

  // Eigendecompose each diagonal block of D = Diag{Q_1 ... Q_K}; the block
  // structure survives the shared shift, so only the pooled eigenvalues
  // couple through the water level mu*.
  std::vector<EigenDecomposition> eds;
  eds.reserve(q.size());
  std::vector<double> lambda;
  for (const HermitianMatrix& qi : q) {
    eds.push_back(eigh(qi));
    lambda.insert(lambda.end(), eds.back().eigenvalues.begin(), eds.back().eigenvalues.end());
  }
  std::sort(lambda.begin(), lambda.end(), std::greater<double>());
  const int m = static_cast<int>(lambda.size());

  double positive_part = 0;
  for (double l : lambda) positive_part += std::max(l, 0.0);

  double mu = 0;
  if (positive_part > p_max) {
    // Walk the pieces of psi(mu): with i active eigenvalues the stationary
    // candidate is (sum_{j<=i} lambda_j - P)/i, accepted when it falls inside
    // [lambda_{i+1}, lambda_i] intersected with the nonnegative reals.
    double csum = 0;
    for (int i = 1; i <= m; ++i) {
      csum += lambda[i - 1];
      const double cand = (csum - p_max) / i;
      const double lo = (i < m) ? lambda[i] : -std::numeric_limits<double>::infinity();
      if (cand >= std::max(lo, 0.0) && cand <= lambda[i - 1]) {
        mu = cand;
        break;
      }
    }
  }
  if (mu_out) *mu_out = mu;

  std::vector<HermitianMatrix> out;
  out.reserve(q.size());
  for (size_t b = 0; b < q.size(); ++b) {
    const int n = q[b].dim();
    ComplexMatrix lam(n, n);
    for (int i = 0; i < n; ++i) lam(i, i) = std::max(eds[b].eigenvalues[i] - mu, 0.0);
    out.push_back(HermitianMatrix(eds[b].basis * lam * eds[b].basis.adjoint()));
  }
  return out;
}

bool armijo_accept(double f_old, double f_new, const std::vector<HermitianMatrix>& g,
                   const std::vector<HermitianMatrix>& dir, double sigma, double beta, int m) {
  if (m < 0) throw std::invalid_argument("armijo_accept: m must be >= 0");
  return f_new - f_old >= sigma * std::pow(beta, m) * real_inner(g, dir);
}

double real_inner(const std::vector<HermitianMatrix>& a, const std::vector<HermitianMatrix>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("real_inner: list size mismatch");
  double sum = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    const ComplexMatrix& x = a[i].matrix();
    const ComplexMatrix& y = b[i].matrix();
    if (x.rows() != y.rows() || x.cols() != y.cols())
      throw std::invalid_argument("real_inner: shape mismatch");
    for (size_t k = 0; k < x.data().size(); ++k)
      sum += (std::conj(x.data()[k]) * y.data()[k]).real();
  }
  return sum;
}

namespace {

std::vector<HermitianMatrix> combine(const std::vector<HermitianMatrix>& q,
                                     const std::vector<HermitianMatrix>& dir, double alpha) {
  std::vector<HermitianMatrix> out = q;
  for (size_t i = 0; i < out.size(); ++i) {
    HermitianMatrix step = dir[i];
    step *= alpha;
    out[i] += step;
  }
  return out;
}

double max_abs_entry(const std::vector<HermitianMatrix>& a) {
  double best = 0;
  for (const HermitianMatrix& m : a)
    for (const Complex& z : m.matrix().data()) best = std::max(best, std::abs(z));
  return best;
}

}  // namespace

LinkAllocation cgp_solve(const NodeMac& node, const std::vector<double>& u,
                         const CgpParams& params, const std::vector<HermitianMatrix>* warm,
                         std::vector<double>* objective_trace) {
  const int k = node.link_count();
  if (static_cast<int>(u.size()) != k)
    throw std::invalid_argument("cgp_solve: weight count != link count");
  const WeightOrdering order = make_weight_ordering(u);
  const int nr = node.n_r();
  const int restart_period =
      params.restart_period > 0 ? params.restart_period : 4 * k * nr;

  std::vector<char> active(k, 0);
  bool any_active = false;
  for (int l = 0; l < k; ++l) {
    active[l] = u[l] > 0;
    any_active = any_active || active[l];
  }

  LinkAllocation result;
  if (!any_active) {
    result.q.assign(k, HermitianMatrix(nr));
    result.rates.assign(k, 0.0);
    result.objective = 0;
    return result;
  }

  // Zero-weight links contribute nothing to the objective; pinning them to
  // zero frees their share of the power budget.
  std::vector<HermitianMatrix> q;
  bool warm_ok = warm && static_cast<int>(warm->size()) == k;
  if (warm_ok)
    for (const HermitianMatrix& w : *warm) warm_ok = warm_ok && w.dim() == nr;
  if (warm_ok) {
    q = *warm;
    for (int l = 0; l < k; ++l)
      if (!active[l]) q[l] = HermitianMatrix(nr);
    q = project_onto_omega(q, node.p_max);
  } else {
    q.assign(k, HermitianMatrix(nr));
    const double scale = node.p_max / (static_cast<double>(k) * nr);
    for (int l = 0; l < k; ++l)
      if (active[l]) q[l] = HermitianMatrix::scaled_identity(nr, scale);
  }

  double f_cur = mac_weighted_objective(node, order, q);
  if (objective_trace) objective_trace->push_back(f_cur);

  std::vector<HermitianMatrix> dir_prev;
  double gbar_prev_norm2 = 0;
  int since_restart = 0;
  bool converged = false;

  for (int iter = 0; iter < params.max_iters; ++iter) {
    std::vector<HermitianMatrix> gbar = mac_gradient(node, order, q);
    for (int l = 0; l < k; ++l)
      if (!active[l]) gbar[l] = HermitianMatrix(nr);
    const double gbar_norm2 = real_inner(gbar, gbar);

    double kappa = 0;
    if (iter > 0 && since_restart < restart_period && gbar_prev_norm2 > 0)
      kappa = gbar_norm2 / gbar_prev_norm2;
    else
      since_restart = 0;

    // Try the deflected direction first with a short backtrack budget; a
    // direction that cannot accept a reasonable step is treated as "not
    // improving" and triggers the plain-gradient restart.  The plain gradient
    // accepts whenever any feasible ascent remains.
    bool accepted = false;
    double f_new = f_cur;
    std::vector<HermitianMatrix> g, q_new;
    for (int attempt = kappa > 0 ? 0 : 1; attempt < 2 && !accepted; ++attempt) {
      g = gbar;
      if (attempt == 0)
        for (int l = 0; l < k; ++l) {
          HermitianMatrix d = dir_prev[l];
          d *= kappa;
          g[l] += d;
        }
      else
        since_restart = 0;

      const std::vector<HermitianMatrix> q_bar =
          project_onto_omega(combine(q, g, params.s_step), node.p_max);
      std::vector<HermitianMatrix> dir(k, HermitianMatrix(nr));
      for (int l = 0; l < k; ++l) dir[l] = q_bar[l] - q[l];
      const double dir_dot = real_inner(g, dir);
      if (dir_dot <= 0) continue;  // projection fixed point for this direction
      const int max_backtrack = attempt == 0 ? 8 : 60;
      for (int m = 0; m <= max_backtrack && !accepted; ++m) {
        const double alpha = std::pow(params.beta, m);
        q_new = combine(q, dir, alpha);
        f_new = mac_weighted_objective(node, order, q_new);
        accepted = armijo_accept(f_cur, f_new, g, dir, params.sigma, params.beta, m);
      }
    }
    if (!accepted) {
      converged = true;  // plain-gradient step found no numerical ascent
      break;
    }

    std::vector<HermitianMatrix> delta(k, HermitianMatrix(nr));
    for (int l = 0; l < k; ++l) delta[l] = q_new[l] - q[l];
    const double change = max_abs_entry(delta);

    q = std::move(q_new);
    f_cur = f_new;
    if (objective_trace) objective_trace->push_back(f_cur);
    dir_prev = std::move(g);
    gbar_prev_norm2 = gbar_norm2;
    ++since_restart;

    if (change < params.eps_stop) {
      converged = true;
      break;
    }
  }

  result.q = std::move(q);
  result.rates = recover_rates(node, order, result.q);
  result.objective = f_cur;
  result.converged = converged;
  return result;
}

std::vector<double> recover_rates(const NodeMac& node, const WeightOrdering& order,
                                  const std::vector<HermitianMatrix>& q) {
  check_dims(node, q);
  const int k = node.link_count();
  const std::vector<HermitianMatrix> sums = running_gram_sums(node, order, q);
  std::vector<double> logdets(k + 1, 0.0);
  for (int i = 0; i < k; ++i) logdets[i] = logdet2_I_plus(sums[i]);
  std::vector<double> rates(k, 0.0);
  for (int i = 0; i < k; ++i) rates[order.pi[i]] = logdets[i] - logdets[i + 1];
  return rates;
}

bool polymatroid_check(const NodeMac& node, const std::vector<HermitianMatrix>& q,
                       const std::vector<double>& rates, double tol) {
  const int k = node.link_count();
  if (k > 10) throw std::invalid_argument("polymatroid_check: K > 10 refused");
  check_dims(node, q);
  for (unsigned mask = 1; mask < (1u << k); ++mask) {
    double rate_sum = 0;
    HermitianMatrix gram(node.n_t());
    for (int i = 0; i < k; ++i)
      if (mask & (1u << i)) {
        rate_sum += rates[i];
        gram += gram_term(node.channels[i], q[i], node.rho[i]);
      }
    if (rate_sum > logdet2_I_plus(gram) + tol) return false;
  }
  return true;
}

Waterfill waterfill_single_link(const ComplexMatrix& h, double rho, double p_max) {
  if (p_max <= 0) throw std::invalid_argument("waterfill: p_max must be positive");
  const int nt = h.cols();
  const HermitianMatrix w(Complex(rho, 0) * (h.adjoint() * h));
  const EigenDecomposition ed = eigh(w);

  std::vector<int> active;
  const double g_tol = 1e-12 * std::max(1.0, ed.eigenvalues.empty() ? 0.0 : ed.eigenvalues[0]);
  for (int i = 0; i < nt; ++i)
    if (ed.eigenvalues[i] > g_tol) active.push_back(i);

  Waterfill out;
  out.q = HermitianMatrix(nt);
  if (active.empty()) return out;  // dead channel: zero power, zero capacity

  // Bisection for the water level, then an exact solve on the active set.
  double lo = 0;
  double hi = p_max;
  for (int i : active) hi = std::max(hi, p_max + 1.0 / ed.eigenvalues[i]);
  auto total_power = [&](double mu) {
    double sum = 0;
    for (int i : active) sum += std::max(0.0, mu - 1.0 / ed.eigenvalues[i]);
    return sum;
  };
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (total_power(mid) < p_max ? lo : hi) = mid;
  }
  double mu = 0.5 * (lo + hi);
  double inv_sum = 0;
  int n_on = 0;
  for (int i : active)
    if (mu > 1.0 / ed.eigenvalues[i]) {
      inv_sum += 1.0 / ed.eigenvalues[i];
      ++n_on;
    }
  if (n_on > 0) mu = (p_max + inv_sum) / n_on;

  ComplexMatrix lam(nt, nt);
  for (int i : active) {
    const double p = std::max(0.0, mu - 1.0 / ed.eigenvalues[i]);
    lam(i, i) = p;
    out.capacity += std::log2(1.0 + ed.eigenvalues[i] * p);
  }
  out.q = HermitianMatrix(ed.basis * lam * ed.basis.adjoint());
  return out;
}

TdmAllocation tdm_link_subproblem(const NodeMac& node, const std::vector<double>& u) {
  const int k = node.link_count();
  if (static_cast<int>(u.size()) != k)
    throw std::invalid_argument("tdm_link_subproblem: weight count != link count");
  for (double w : u)
    if (w < 0) throw std::invalid_argument("weights must be non-negative");

  TdmAllocation out;
  out.tau.assign(k, 0.0);
  out.rates.assign(k, 0.0);
  std::vector<double> capacity(k, 0.0);
  for (int l = 0; l < k; ++l) {
    Waterfill wf = waterfill_single_link(node.channels[l], node.rho[l], node.p_max);
    capacity[l] = wf.capacity;
    out.q.push_back(std::move(wf.q));
  }

  double best = 0;
  for (int l = 0; l < k; ++l) best = std::max(best, u[l] * capacity[l]);
  std::vector<int> winners;
  for (int l = 0; l < k; ++l)
    if (u[l] * capacity[l] >= best - 1e-12 * std::max(1.0, best)) winners.push_back(l);

  const double share = 1.0 / winners.size();
  for (int l : winners) {
    out.tau[l] = share;
    out.rates[l] = share * capacity[l];
  }
  for (int l = 0; l < k; ++l) out.value += u[l] * out.rates[l];
  return out;
}

}  // namespace meshopt
