#ifndef MESHOPT_ROUTING_HPP
#define MESHOPT_ROUTING_HPP

#include <vector>

#include "meshopt/network.hpp"

namespace meshopt {

struct PathResult {
  std::vector<int> links;  // src -> dst
  double cost = 0;
};

/// Minimum-price path per session under non-negative link prices (Dijkstra;
/// ties broken toward the smaller predecessor node).  Throws when a
/// destination is unreachable.
std::vector<PathResult> shortest_paths(const Topology& topo, const std::vector<double>& prices,
                                       const std::vector<Session>& sessions);

/// Network-layer dual subproblem value and its maximizer.
struct RoutingSolution {
  FlowState flow;
  double theta_net = 0;
  std::vector<PathResult> paths;
};

/// Exact solution of max sum_f ln(s_f) - sum_l u_l load_l under flow
/// conservation: each session rides one minimum-price path at rate
/// s_f = min(1/c_f, s_max).
RoutingSolution net_subproblem(const Scenario& sc, const std::vector<double>& prices,
                               double s_max = 1e6);

}  // namespace meshopt

#endif  // MESHOPT_ROUTING_HPP
