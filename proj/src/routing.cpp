#include "meshopt/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace meshopt {

namespace {

struct Arc {
  int to;
  int link;
};

std::vector<std::vector<Arc>> adjacency(const Topology& topo) {
  std::vector<std::vector<Arc>> adj(topo.node_count());
  for (int l = 0; l < topo.link_count(); ++l)
    adj[topo.links[l].src].push_back({topo.links[l].dst, l});
  return adj;
}

}  // namespace

std::vector<PathResult> shortest_paths(const Topology& topo, const std::vector<double>& prices,
                                       const std::vector<Session>& sessions) {
  if (static_cast<int>(prices.size()) != topo.link_count())
    throw std::invalid_argument("price count != link count");
  for (double p : prices)
    if (p < 0) throw std::invalid_argument("prices must be non-negative");

  const auto adj = adjacency(topo);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<PathResult> out;

  for (const Session& sess : sessions) {
    std::vector<double> dist(topo.node_count(), inf);
    std::vector<int> pred_node(topo.node_count(), -1);
    std::vector<int> pred_link(topo.node_count(), -1);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap;
    dist[sess.src] = 0;
    heap.push({0.0, sess.src});
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[u]) continue;
      // Strict improvement only: nodes pop in (dist, id) order, so among
      // equal-cost paths the smallest-id predecessor claims the node first
      // and the tie-break is deterministic.
      for (const Arc& arc : adj[u]) {
        const double nd = d + prices[arc.link];
        if (nd < dist[arc.to]) {
          dist[arc.to] = nd;
          pred_node[arc.to] = u;
          pred_link[arc.to] = arc.link;
          heap.push({nd, arc.to});
        }
      }
    }
    if (dist[sess.dst] == inf)
      throw std::runtime_error("shortest_paths: destination unreachable");

    PathResult path;
    path.cost = dist[sess.dst];
    for (int v = sess.dst; v != sess.src; v = pred_node[v]) path.links.push_back(pred_link[v]);
    std::reverse(path.links.begin(), path.links.end());
    out.push_back(std::move(path));
  }
  return out;
}

RoutingSolution net_subproblem(const Scenario& sc, const std::vector<double>& prices,
                               double s_max) {
  if (s_max <= 0) throw std::invalid_argument("s_max must be positive");

  RoutingSolution sol;
  sol.paths = shortest_paths(sc.topology, prices, sc.sessions);
  sol.flow = FlowState(sc.link_count(), sc.session_count());

  for (int f = 0; f < sc.session_count(); ++f) {
    const double c = sol.paths[f].cost;
    // ln(s) - c*s is maximized at s = 1/c, capped at s_max (the cap also
    // covers c = 0, where the subproblem alone is unbounded).
    const double s = (c > 1.0 / s_max) ? 1.0 / c : s_max;
    sol.flow.s[f] = s;
    for (int l : sol.paths[f].links) sol.flow.t_at(l, f) += s;
    sol.theta_net += std::log(s) - c * s;
  }
  return sol;
}

}  // namespace meshopt
