// Apache License, Version 2.0, refer to LICENSE.txt
#include "nefqvf/graph.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace nefqvf {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

NeighborhoodGraph temporal_graph(int m, int q) {
  require(m >= 1, "temporal_graph: m must be >= 1");
  require(q >= 0, "temporal_graph: q must be >= 0");
  NeighborhoodGraph g{m, {}};
  g.neighbors.reserve(m);
  for (int i = 1; i <= m; ++i) {
    std::vector<int> set;
    for (int j = std::max(1, i - q); j <= i; ++j) set.push_back(j);
    g.neighbors.push_back(std::move(set));
  }
  return g;
}

NeighborhoodGraph seasonal_graph(int m, int q, int s) {
  require(m >= 1, "seasonal_graph: m must be >= 1");
  require(q >= 0, "seasonal_graph: q must be >= 0");
  require(s >= 1, "seasonal_graph: s must be >= 1");
  NeighborhoodGraph g{m, {}};
  g.neighbors.reserve(m);
  for (int i = 1; i <= m; ++i) {
    std::vector<int> set;
    for (int j = q; j >= 0; --j)
      if (i - j * s >= 1) set.push_back(i - j * s);
    g.neighbors.push_back(std::move(set));
  }
  return g;
}

NeighborhoodGraph periodic_graph(int m, const PeriodicSpec& spec) {
  require(m >= 1, "periodic_graph: m must be >= 1");
  require(spec.s >= 1, "periodic_graph: season length must be >= 1");
  require(static_cast<int>(spec.q.size()) == spec.s,
          "periodic_graph: need one order per season position");
  for (int qi : spec.q) require(qi >= 0, "periodic_graph: orders must be >= 0");
  NeighborhoodGraph g{m, {}};
  g.neighbors.reserve(m);
  for (int i = 1; i <= m; ++i) {
    const int pos = (i - 1) % spec.s;  // season position, 0-based
    const int qi = spec.q[pos];
    std::vector<int> set;
    for (int j = std::max(1, i - qi); j <= i; ++j) set.push_back(j);
    g.neighbors.push_back(std::move(set));
  }
  return g;
}

NeighborhoodGraph spatial_graph(const AdjacencyList& adj) {
  check_adjacency(adj);
  NeighborhoodGraph g{adj.m, std::vector<std::vector<int>>(adj.m)};
  for (int i = 1; i <= adj.m; ++i) g.neighbors[i - 1].push_back(i);
  for (auto [a, b] : adj.edges) {
    g.neighbors[a - 1].push_back(b);
    g.neighbors[b - 1].push_back(a);
  }
  for (auto& set : g.neighbors) set = sorted_unique(std::move(set));
  return g;
}

NeighborhoodGraph spatiotemporal_graph(const AdjacencyList& adj, int T, int q) {
  check_adjacency(adj);
  require(T >= 1, "spatiotemporal_graph: T must be >= 1");
  require(q >= 0, "spatiotemporal_graph: q must be >= 0");
  const int ml = adj.m;
  std::vector<std::vector<int>> around(ml);
  for (auto [a, b] : adj.edges) {
    around[a - 1].push_back(b);
    around[b - 1].push_back(a);
  }
  NeighborhoodGraph g{ml * T, {}};
  g.neighbors.reserve(g.m);
  auto unit = [ml](int loc, int t) { return (t - 1) * ml + loc; };
  for (int t = 1; t <= T; ++t) {
    for (int i = 1; i <= ml; ++i) {
      std::vector<int> set;
      for (int tt = std::max(1, t - q); tt <= t; ++tt) set.push_back(unit(i, tt));
      for (int j : around[i - 1]) set.push_back(unit(j, t));
      g.neighbors.push_back(sorted_unique(std::move(set)));
    }
  }
  return g;
}

GraphReport validate(const NeighborhoodGraph& graph) {
  GraphReport report;
  if (graph.m < 0 ||
      static_cast<int>(graph.neighbors.size()) != graph.m) {
    report.violations.push_back({0, "size", static_cast<int>(graph.neighbors.size())});
    return report;
  }
  for (int i = 1; i <= graph.m; ++i) {
    const auto& set = graph.neighbors[i - 1];
    std::set<int> seen;
    bool self = false;
    for (int j : set) {
      if (j < 1 || j > graph.m) report.violations.push_back({i, "out-of-range", j});
      if (!seen.insert(j).second) report.violations.push_back({i, "duplicate", j});
      if (j == i) self = true;
    }
    if (!self) report.violations.push_back({i, "self-membership", i});
  }
  return report;
}

void check_adjacency(const AdjacencyList& adj) {
  require(adj.m >= 1, "adjacency: m must be >= 1");
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : adj.edges) {
    require(a != b, "adjacency: self-loops not allowed");
    require(a >= 1 && a <= adj.m && b >= 1 && b <= adj.m,
            "adjacency: index out of range");
    auto key = std::minmax(a, b);
    require(seen.insert(key).second, "adjacency: duplicate edge");
  }
}

AdjacencyList adjacency_from_csv(const std::string& text, int m) {
  AdjacencyList adj;
  std::istringstream in(text);
  std::string line;
  int max_idx = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    int a, b;
    if (!(row >> a >> b)) {
      // tolerate a single header line
      if (adj.edges.empty() && max_idx == 0) continue;
      throw std::invalid_argument("adjacency csv: expected two integer columns");
    }
    char extra;
    if (row >> extra)
      throw std::invalid_argument("adjacency csv: expected exactly two columns");
    adj.edges.emplace_back(a, b);
    max_idx = std::max({max_idx, a, b});
  }
  adj.m = m > 0 ? m : max_idx;
  check_adjacency(adj);
  return adj;
}

void to_json(nlohmann::json& j, const NeighborhoodGraph& graph) {
  j = nlohmann::json{{"m", graph.m}, {"neighbors", graph.neighbors}};
}

NeighborhoodGraph graph_from_json(const nlohmann::json& j) {
  NeighborhoodGraph g;
  g.m = j.at("m").get<int>();
  g.neighbors = j.at("neighbors").get<std::vector<std::vector<int>>>();
  for (auto& set : g.neighbors) set = sorted_unique(std::move(set));
  auto report = validate(g);
  if (!report.ok())
    throw std::invalid_argument("graph json fails validation");
  return g;
}

namespace {

AdjacencyList adjacency_from_json(const nlohmann::json& j, int m) {
  AdjacencyList adj;
  adj.m = m;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2)
      throw std::invalid_argument("edges must be [i, j] pairs");
    adj.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  return adj;
}

}  // namespace

NeighborhoodGraph graph_from_any_json(const nlohmann::json& j) {
  if (!j.contains("type")) return graph_from_json(j);
  const std::string type = j.at("type").get<std::string>();
  if (type == "temporal")
    return temporal_graph(j.at("m").get<int>(), j.at("q").get<int>());
  if (type == "seasonal")
    return seasonal_graph(j.at("m").get<int>(), j.at("q").get<int>(),
                          j.at("s").get<int>());
  if (type == "periodic") {
    PeriodicSpec spec;
    spec.s = j.at("s").get<int>();
    spec.q = j.at("q").get<std::vector<int>>();
    return periodic_graph(j.at("m").get<int>(), spec);
  }
  if (type == "spatial")
    return spatial_graph(
        adjacency_from_json(j.at("edges"), j.at("m").get<int>()));
  if (type == "spatiotemporal")
    return spatiotemporal_graph(
        adjacency_from_json(j.at("edges"), j.at("m_loc").get<int>()),
        j.at("T").get<int>(), j.at("q").get<int>());
  throw std::invalid_argument("unknown graph type: " + type);
}

}  // namespace nefqvf
