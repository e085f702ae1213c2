#include "meshopt/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include "json.hpp"

namespace meshopt {

namespace {

double distance(const std::array<double, 2>& a, const std::array<double, 2>& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

// Undirected connectivity over the link set; returns the component of node 0.
std::vector<int> component_of_zero(int n, const std::vector<LinkInfo>& links) {
  std::vector<std::vector<int>> adj(n);
  for (const LinkInfo& l : links) {
    adj[l.src].push_back(l.dst);
    adj[l.dst].push_back(l.src);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> comp;
  std::queue<int> q;
  q.push(0);
  seen[0] = 1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    comp.push_back(u);
    for (int v : adj[u])
      if (!seen[v]) {
        seen[v] = 1;
        q.push(v);
      }
  }
  return comp;
}

double round9(double x) {
  const double r = std::round(x * 1e9) / 1e9;
  return r == 0.0 ? 0.0 : r;  // avoid -0
}

}  // namespace

std::vector<int> Topology::outgoing(int node) const {
  std::vector<int> out;
  for (int l = 0; l < link_count(); ++l)
    if (links[l].src == node) out.push_back(l);
  return out;
}

std::vector<int> Topology::incoming(int node) const {
  std::vector<int> in;
  for (int l = 0; l < link_count(); ++l)
    if (links[l].dst == node) in.push_back(l);
  return in;
}

IncidenceMatrix incidence_of(const Topology& topo) {
  IncidenceMatrix m;
  m.nodes = topo.node_count();
  m.links = topo.link_count();
  m.a.assign(static_cast<size_t>(m.nodes) * m.links, 0.0);
  for (int l = 0; l < m.links; ++l) {
    m.a[static_cast<size_t>(topo.links[l].src) * m.links + l] = 1.0;
    m.a[static_cast<size_t>(topo.links[l].dst) * m.links + l] = -1.0;
  }
  return m;
}

Topology build_topology(const std::vector<std::array<double, 2>>& positions, double d_max) {
  if (positions.size() < 2) throw std::invalid_argument("need at least 2 nodes");
  if (d_max <= 0) throw std::invalid_argument("d_max must be positive");

  Topology topo;
  topo.node_positions = positions;
  topo.d_max = d_max;
  const int n = topo.node_count();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = distance(positions[i], positions[j]);
      if (d > 0 && d <= d_max) topo.links.push_back({i, j, d});
    }

  const std::vector<int> comp = component_of_zero(n, topo.links);
  if (static_cast<int>(comp.size()) != n) {
    std::ostringstream msg;
    msg << "graph disconnected; component of node 0 = {";
    for (size_t i = 0; i < comp.size(); ++i) msg << (i ? "," : "") << comp[i];
    msg << "} covers " << comp.size() << " of " << n << " nodes";
    throw std::invalid_argument(msg.str());
  }
  return topo;
}

double dbm_to_linear(double dbm) { return std::pow(10.0, dbm / 10.0); }

namespace {

void fill_channels(Scenario& sc, Rng& rng) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  sc.channels.clear();
  sc.rho.clear();
  for (const LinkInfo& l : sc.topology.links) {
    ComplexMatrix h(sc.n_r, sc.n_t);
    for (int i = 0; i < sc.n_r; ++i)
      for (int j = 0; j < sc.n_t; ++j)
        h(i, j) = Complex(rng.normal() * inv_sqrt2, rng.normal() * inv_sqrt2);
    sc.channels.push_back(std::move(h));
    sc.rho.push_back(sc.g_pl * std::pow(std::max(l.dist, 0.05), -sc.alpha));
  }
}

}  // namespace

Scenario random_scenario(std::uint64_t seed, int n_nodes, int n_sessions, int n_t, int n_r,
                         double d_max, double p_max_dbm, double g_pl, double alpha) {
  if (n_nodes < 2) throw std::invalid_argument("need at least 2 nodes");
  if (n_sessions < 1) throw std::invalid_argument("need at least 1 session");
  if (n_t < 1 || n_r < 1) throw std::invalid_argument("antenna counts must be >= 1");

  Rng rng(seed);
  Scenario sc;
  sc.seed = seed;
  sc.n_t = n_t;
  sc.n_r = n_r;
  sc.g_pl = g_pl;
  sc.alpha = alpha;
  sc.p_max_dbm = p_max_dbm;
  sc.p_max = dbm_to_linear(p_max_dbm);

  const int max_retries = 500;
  bool connected = false;
  for (int attempt = 0; attempt < max_retries && !connected; ++attempt) {
    std::vector<std::array<double, 2>> pos(n_nodes);
    for (auto& p : pos) p = {rng.uniform(), rng.uniform()};
    try {
      sc.topology = build_topology(pos, d_max);
      connected = true;
    } catch (const std::invalid_argument&) {
      // disconnected draw, retry
    }
  }
  if (!connected)
    throw std::runtime_error("random_scenario: no connected topology after retries");

  sc.incidence = incidence_of(sc.topology);
  fill_channels(sc, rng);

  for (int f = 0; f < n_sessions; ++f) {
    const int src = rng.uniform_int(0, n_nodes - 1);
    int dst = rng.uniform_int(0, n_nodes - 1);
    while (dst == src) dst = rng.uniform_int(0, n_nodes - 1);
    sc.sessions.push_back({src, dst});
  }
  return sc;
}

Scenario scenario_from_positions(const std::vector<std::array<double, 2>>& positions,
                                 double d_max, const std::vector<Session>& sessions,
                                 std::uint64_t channel_seed, int n_t, int n_r, double p_max_dbm,
                                 double g_pl, double alpha) {
  Scenario sc;
  sc.seed = channel_seed;
  sc.n_t = n_t;
  sc.n_r = n_r;
  sc.g_pl = g_pl;
  sc.alpha = alpha;
  sc.p_max_dbm = p_max_dbm;
  sc.p_max = dbm_to_linear(p_max_dbm);
  sc.topology = build_topology(positions, d_max);
  sc.incidence = incidence_of(sc.topology);
  Rng rng(channel_seed);
  fill_channels(sc, rng);
  for (const Session& s : sessions) {
    if (s.src == s.dst) throw std::invalid_argument("session src == dst");
    sc.sessions.push_back(s);
  }
  return sc;
}

FlowReport validate_flows(const Scenario& sc, const FlowState& flow, double tol) {
  const int n = sc.node_count();
  const int f_count = sc.session_count();
  FlowReport rep;
  for (int f = 0; f < f_count; ++f) {
    for (int node = 0; node < n; ++node) {
      double lhs = 0;
      for (int l = 0; l < sc.link_count(); ++l) lhs += sc.incidence.at(node, l) * flow.t_at(l, f);
      double rhs = 0;
      if (node == sc.sessions[f].src) rhs = flow.s[f];
      if (node == sc.sessions[f].dst) rhs = -flow.s[f];
      const double v = std::abs(lhs - rhs);
      rep.max_violation = std::max(rep.max_violation, v);
      if (v > tol) rep.violations.push_back({node, f, v});
    }
  }
  return rep;
}

std::string scenario_to_json(const Scenario& sc) {
  nlohmann::ordered_json j;
  j["seed"] = sc.seed;
  j["n"] = sc.node_count();
  j["f"] = sc.session_count();
  j["nt"] = sc.n_t;
  j["nr"] = sc.n_r;
  j["dmax"] = round9(sc.topology.d_max);
  j["pmax_dbm"] = round9(sc.p_max_dbm);
  j["gpl"] = round9(sc.g_pl);
  j["alpha"] = round9(sc.alpha);
  j["positions"] = nlohmann::ordered_json::array();
  for (const auto& p : sc.topology.node_positions)
    j["positions"].push_back({round9(p[0]), round9(p[1])});
  j["links"] = nlohmann::ordered_json::array();
  for (int l = 0; l < sc.link_count(); ++l) {
    nlohmann::ordered_json jl;
    jl["src"] = sc.topology.links[l].src;
    jl["dst"] = sc.topology.links[l].dst;
    jl["d"] = round9(sc.topology.links[l].dist);
    jl["rho"] = round9(sc.rho[l]);
    std::vector<double> re, im;
    for (const Complex& z : sc.channels[l].data()) {
      re.push_back(round9(z.real()));
      im.push_back(round9(z.imag()));
    }
    jl["h_re"] = re;
    jl["h_im"] = im;
    j["links"].push_back(jl);
  }
  j["sessions"] = nlohmann::ordered_json::array();
  for (const Session& s : sc.sessions) j["sessions"].push_back({{"src", s.src}, {"dst", s.dst}});
  return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  Scenario sc;
  sc.seed = j.at("seed").get<std::uint64_t>();
  sc.n_t = j.at("nt").get<int>();
  sc.n_r = j.at("nr").get<int>();
  sc.g_pl = j.at("gpl").get<double>();
  sc.alpha = j.at("alpha").get<double>();
  sc.p_max_dbm = j.at("pmax_dbm").get<double>();
  sc.p_max = dbm_to_linear(sc.p_max_dbm);

  sc.topology.d_max = j.at("dmax").get<double>();
  for (const auto& p : j.at("positions"))
    sc.topology.node_positions.push_back({p.at(0).get<double>(), p.at(1).get<double>()});

  const int n = j.at("n").get<int>();
  if (n != sc.topology.node_count()) throw std::invalid_argument("scenario json: n mismatch");

  for (const auto& jl : j.at("links")) {
    LinkInfo li{jl.at("src").get<int>(), jl.at("dst").get<int>(), jl.at("d").get<double>()};
    if (li.src < 0 || li.src >= n || li.dst < 0 || li.dst >= n || li.src == li.dst)
      throw std::invalid_argument("scenario json: bad link endpoints");
    sc.topology.links.push_back(li);
    sc.rho.push_back(jl.at("rho").get<double>());
    const auto& re = jl.at("h_re");
    const auto& im = jl.at("h_im");
    if (static_cast<int>(re.size()) != sc.n_r * sc.n_t || re.size() != im.size())
      throw std::invalid_argument("scenario json: channel entry count mismatch");
    ComplexMatrix h(sc.n_r, sc.n_t);
    for (int i = 0; i < sc.n_r * sc.n_t; ++i)
      h.data()[i] = Complex(re.at(i).get<double>(), im.at(i).get<double>());
    sc.channels.push_back(std::move(h));
  }

  for (const auto& js : j.at("sessions")) {
    Session s{js.at("src").get<int>(), js.at("dst").get<int>()};
    if (s.src < 0 || s.src >= n || s.dst < 0 || s.dst >= n || s.src == s.dst)
      throw std::invalid_argument("scenario json: bad session endpoints");
    sc.sessions.push_back(s);
  }

  const int f = j.at("f").get<int>();
  if (f != sc.session_count()) throw std::invalid_argument("scenario json: f mismatch");

  sc.incidence = incidence_of(sc.topology);
  return sc;
}

void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << scenario_to_json(sc);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for read: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

}  // namespace meshopt
