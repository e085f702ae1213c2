#ifndef MESHOPT_NETWORK_HPP
#define MESHOPT_NETWORK_HPP

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "meshopt/complex_matrix.hpp"

namespace meshopt {

/// Deterministic random source: mt19937_64 engine with hand-rolled uniform
/// and normal transforms so draws do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double normal() {  // Box-Muller, one value per call
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(eng_() % span);
  }

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0;
};

struct LinkInfo {
  int src = 0;
  int dst = 0;
  double dist = 0;
};

struct Topology {
  std::vector<std::array<double, 2>> node_positions;
  double d_max = 0;
  std::vector<LinkInfo> links;

  int node_count() const { return static_cast<int>(node_positions.size()); }
  int link_count() const { return static_cast<int>(links.size()); }

  std::vector<int> outgoing(int node) const;
  std::vector<int> incoming(int node) const;
};

/// Node-arc incidence matrix: +1 at the transmitter row, -1 at the receiver
/// row of each link column.
struct IncidenceMatrix {
  int nodes = 0;
  int links = 0;
  std::vector<double> a;  // row-major nodes x links

  double at(int n, int l) const { return a[static_cast<size_t>(n) * links + l]; }
};

IncidenceMatrix incidence_of(const Topology& topo);

struct Session {
  int src = 0;
  int dst = 0;
};

/// Network-layer primal variables: per-link per-session flow and session rates.
struct FlowState {
  int links = 0;
  int sessions = 0;
  std::vector<double> t;  // row-major links x sessions
  std::vector<double> s;  // per session

  FlowState() = default;
  FlowState(int l, int f)
      : links(l), sessions(f), t(static_cast<size_t>(l) * f, 0.0), s(f, 0.0) {}

  double& t_at(int l, int f) { return t[static_cast<size_t>(l) * sessions + f]; }
  double t_at(int l, int f) const { return t[static_cast<size_t>(l) * sessions + f]; }

  std::vector<double> link_loads() const {
    std::vector<double> loads(links, 0.0);
    for (int l = 0; l < links; ++l)
      for (int f = 0; f < sessions; ++f) loads[l] += t_at(l, f);
    return loads;
  }
};

/// Full problem instance.  Power is noise-normalized linear (unit noise is
/// assumed throughout); rates are bits/s/Hz.
struct Scenario {
  Topology topology;
  IncidenceMatrix incidence;
  std::vector<Session> sessions;
  std::vector<ComplexMatrix> channels;  // per link, n_r x n_t
  std::vector<double> rho;              // per link path gain
  double p_max = 0;                     // linear, per node
  double p_max_dbm = 0;
  int n_t = 1;
  int n_r = 1;
  double g_pl = 1.0;
  double alpha = 4.0;
  std::uint64_t seed = 0;

  int node_count() const { return topology.node_count(); }
  int link_count() const { return topology.link_count(); }
  int session_count() const { return static_cast<int>(sessions.size()); }
};

/// Builds the directed link set {(i,j): 0 < D_ij <= d_max} and checks
/// connectivity; throws listing an unreachable component otherwise.
Topology build_topology(const std::vector<std::array<double, 2>>& positions, double d_max);

/// Seed-deterministic instance: uniform positions in the unit square
/// (regenerated until connected, bounded retries), i.i.d. circularly-symmetric
/// unit-variance complex Gaussian channel entries, rho = g_pl * max(d, 0.05)^-alpha.
Scenario random_scenario(std::uint64_t seed, int n_nodes, int n_sessions, int n_t, int n_r,
                         double d_max, double p_max_dbm, double g_pl = 1.0, double alpha = 4.0);

/// Instance over fixed positions with seeded random channels; used by desk
/// scenarios and tests.
Scenario scenario_from_positions(const std::vector<std::array<double, 2>>& positions,
                                 double d_max, const std::vector<Session>& sessions,
                                 std::uint64_t channel_seed, int n_t, int n_r, double p_max_dbm,
                                 double g_pl = 1.0, double alpha = 4.0);

struct FlowViolation {
  int node = 0;
  int session = 0;
  double amount = 0;
};

struct FlowReport {
  double max_violation = 0;
  std::vector<FlowViolation> violations;
};

/// Report-only check of A*T = S against the session source-sink vectors.
FlowReport validate_flows(const Scenario& sc, const FlowState& flow, double tol);

std::string scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const std::string& text);
void save_scenario(const Scenario& sc, const std::string& path);
Scenario load_scenario(const std::string& path);

double dbm_to_linear(double dbm);

}  // namespace meshopt

#endif  // MESHOPT_NETWORK_HPP
