// Apache License, Version 2.0, refer to LICENSE.txt
#pragma once

// Neighbor sets for temporal, seasonal, periodic, spatial, and
// spatio-temporal dependence. Units are 1-based everywhere, including the
// JSON/CSV surface. Every set contains its own unit; out-of-range lags are
// truncated, never wrapped.

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace nefqvf {

struct NeighborhoodGraph {
  int m = 0;
  std::vector<std::vector<int>> neighbors;  // neighbors[i-1] = sorted set, contains i

  const std::vector<int>& at(int i) const { return neighbors[i - 1]; }
};

struct AdjacencyList {
  int m = 0;
  std::vector<std::pair<int, int>> edges;  // undirected, stored once, i != j
};

struct PeriodicSpec {
  int s = 1;                // season length
  std::vector<int> q;       // one nonnegative order per season position
};

struct GraphViolation {
  int unit;          // offending unit (1-based), 0 if structural
  std::string kind;  // "self-membership", "out-of-range", "duplicate", "size"
  int index;         // offending index value if applicable
};

struct GraphReport {
  std::vector<GraphViolation> violations;
  bool ok() const { return violations.empty(); }
};

// d_i = {max(1, i-q), ..., i}.
NeighborhoodGraph temporal_graph(int m, int q);

// d_i = {i - j*s : j = 0..q} truncated to {1..m}.
NeighborhoodGraph seasonal_graph(int m, int q, int s);

// Per-season orders: unit i at season position ((i-1) mod s)+1 gets the
// contiguous lags {i - q_pos, ..., i} truncated.
NeighborhoodGraph periodic_graph(int m, const PeriodicSpec& spec);

// d_i = {i} plus adjacent units.
NeighborhoodGraph spatial_graph(const AdjacencyList& adj);

// Units are (location, time) pairs linearized time-major:
// unit(i, t) = (t-1)*m_loc + i. Neighbors: own location at times
// max(1, t-q)..t plus adjacent locations at time t.
NeighborhoodGraph spatiotemporal_graph(const AdjacencyList& adj, int T, int q);

GraphReport validate(const NeighborhoodGraph& graph);

void check_adjacency(const AdjacencyList& adj);

// CSV with two integer columns "i,j" (header optional), 1-based. With m = 0
// the unit count is inferred from the largest index seen.
AdjacencyList adjacency_from_csv(const std::string& text, int m = 0);

void to_json(nlohmann::json& j, const NeighborhoodGraph& graph);
NeighborhoodGraph graph_from_json(const nlohmann::json& j);

// Accepts either the explicit {"m", "neighbors"} form or a constructor form:
//   {"type":"temporal","m":16,"q":2}
//   {"type":"seasonal","m":30,"q":1,"s":12}
//   {"type":"periodic","m":24,"s":12,"q":[1,0,...]}
//   {"type":"spatial","m":5,"edges":[[1,2],...]}
//   {"type":"spatiotemporal","m_loc":5,"T":4,"q":1,"edges":[[1,2],...]}
NeighborhoodGraph graph_from_any_json(const nlohmann::json& j);

}  // namespace nefqvf
