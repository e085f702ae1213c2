#ifndef MESHOPT_MAC_LINK_HPP
#define MESHOPT_MAC_LINK_HPP

#include <vector>

#include "meshopt/complex_matrix.hpp"
#include "meshopt/network.hpp"

namespace meshopt {

/// One node's outgoing links seen as a dual multiple-access channel: the
/// stored channels are the broadcast-side gains H_l (n_r x n_t); every rate
/// expression uses the dualized Gram form H^dag Q H with user covariances Q
/// of size n_r x n_r.
struct NodeMac {
  int node = 0;
  std::vector<ComplexMatrix> channels;
  std::vector<double> rho;
  double p_max = 0;

  int link_count() const { return static_cast<int>(channels.size()); }
  int n_r() const { return channels.empty() ? 0 : channels[0].rows(); }
  int n_t() const { return channels.empty() ? 0 : channels[0].cols(); }
};

/// Assembles the MAC of a node's outgoing links; link order matches
/// Scenario::topology.outgoing(node).
NodeMac node_mac_of(const Scenario& sc, int node);

/// Permutation pi with u[pi[0]] <= ... <= u[pi[K-1]] (stable by link index)
/// and the weight increments deltas[i] = u[pi[i]] - u[pi[i-1]].
struct WeightOrdering {
  std::vector<int> pi;
  std::vector<double> deltas;
};

WeightOrdering make_weight_ordering(const std::vector<double>& u);

/// Weighted sum-rate objective
///   F(Q) = sum_i deltas[i] * log2|I + sum_{j>=i} rho_pi(j) H_pi(j)^dag Q_pi(j) H_pi(j)|
/// evaluated with a running Gram sum from j = K downward.
double mac_weighted_objective(const NodeMac& node, const WeightOrdering& order,
                              const std::vector<HermitianMatrix>& q);

/// Gradient list (one Hermitian n_r x n_r matrix per link, link order):
///   G_pi(j) = (2/ln 2) rho_pi(j) H_pi(j) [ sum_{i<=j} deltas[i] (I + S_i)^-1 ] H_pi(j)^dag,
/// where S_i is the i-th running Gram sum.  The factor 2 follows the
/// grad_z f = 2 (df/dz)* convention; 1/ln2 converts to the log2 objective.
std::vector<HermitianMatrix> mac_gradient(const NodeMac& node, const WeightOrdering& order,
                                          const std::vector<HermitianMatrix>& q);

/// Frobenius-nearest point of {Q_l PSD, sum Tr(Q_l) <= p_max}: pools the block
/// eigenvalues, finds the water level mu* piecewise, clips (lambda - mu*)+.
/// mu_out, when given, receives mu*.
std::vector<HermitianMatrix> project_onto_omega(const std::vector<HermitianMatrix>& q,
                                                double p_max, double* mu_out = nullptr);

/// Armijo acceptance test: F_new - F_old >= sigma * beta^m * <G, dir>.
bool armijo_accept(double f_old, double f_new, const std::vector<HermitianMatrix>& g,
                   const std::vector<HermitianMatrix>& dir, double sigma, double beta, int m);

struct CgpParams {
  double sigma = 0.1;
  double beta = 0.5;
  double s_step = 1.0;
  double eps_stop = 1e-6;
  int max_iters = 500;
  int restart_period = 0;  // 0 -> 4 * K * n_r
};

/// Link-layer primal variables of one node.
struct LinkAllocation {
  std::vector<HermitianMatrix> q;  // n_r x n_r each
  std::vector<double> rates;       // bits/s/Hz
  double objective = 0;            // achieved weighted sum rate
  bool converged = true;
};

/// Conjugate gradient projection (Fletcher-Reeves deflection, Armijo step)
/// for the weighted sum-rate program.  Links with zero weight are pinned to
/// Q = 0.  warm, when given and shape-compatible, seeds the iteration.
LinkAllocation cgp_solve(const NodeMac& node, const std::vector<double>& u,
                         const CgpParams& params = {},
                         const std::vector<HermitianMatrix>* warm = nullptr,
                         std::vector<double>* objective_trace = nullptr);

/// Per-link rates of the optimal covariances: successive log-det differences
/// along the weight ordering.  Satisfies sum_i u_i R_i = F(Q).
std::vector<double> recover_rates(const NodeMac& node, const WeightOrdering& order,
                                  const std::vector<HermitianMatrix>& q);

/// True iff for every nonempty subset S:
///   sum_{i in S} rates[i] <= log2|I + sum_{i in S} rho_i H_i^dag Q_i H_i| + tol.
/// Refuses K > 10.
bool polymatroid_check(const NodeMac& node, const std::vector<HermitianMatrix>& q,
                       const std::vector<double>& rates, double tol);

struct Waterfill {
  HermitianMatrix q;       // n_t x n_t transmit covariance
  double capacity = 0;     // bits/s/Hz
};

/// Single-link water-filling over the eigenmodes of rho H^dag H.
Waterfill waterfill_single_link(const ComplexMatrix& h, double rho, double p_max);

/// Time-division baseline: unit frame split into shares tau_l, each link
/// transmitting at peak power during its share.  All time goes to the link
/// maximizing u_l * C_l (exact ties split evenly).
struct TdmAllocation {
  std::vector<double> tau;
  std::vector<HermitianMatrix> q;  // per-link water-filling covariances
  std::vector<double> rates;       // tau_l * C_l
  double value = 0;                // sum u_l rates_l
};

TdmAllocation tdm_link_subproblem(const NodeMac& node, const std::vector<double>& u);

/// Re Tr(sum_i a_i^dag b_i); the inner product behind Armijo and the
/// Fletcher-Reeves norms.
double real_inner(const std::vector<HermitianMatrix>& a, const std::vector<HermitianMatrix>& b);

}  // namespace meshopt

#endif  // MESHOPT_MAC_LINK_HPP
