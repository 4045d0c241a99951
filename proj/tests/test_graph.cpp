// Apache License, Version 2.0, refer to LICENSE.txt
#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "nefqvf/graph.hpp"

using namespace nefqvf;

namespace {

std::vector<int> sorted_copy(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

AdjacencyList lattice5() {
  // 1-2, 1-3, 2-3 triangle; 3 bridges to the 3-4-5 triangle.
  return AdjacencyList{5, {{1, 2}, {1, 3}, {2, 3}, {3, 4}, {3, 5}, {4, 5}}};
}

}  // namespace

TEST_CASE("temporal neighborhoods are truncated sliding windows") {
  const NeighborhoodGraph g = temporal_graph(5, 2);
  CHECK(g.m == 5);
  CHECK(g.at(1) == std::vector<int>{1});
  CHECK(g.at(2) == std::vector<int>{1, 2});
  CHECK(g.at(3) == std::vector<int>{1, 2, 3});
  CHECK(g.at(4) == std::vector<int>{2, 3, 4});
  CHECK(g.at(5) == std::vector<int>{3, 4, 5});
  CHECK(validate(g).ok());
}

TEST_CASE("temporal with order zero is independence") {
  const NeighborhoodGraph g = temporal_graph(4, 0);
  for (int i = 1; i <= 4; ++i) CHECK(g.at(i) == std::vector<int>{i});
}

TEST_CASE("temporal order at least m-1 saturates to the full past") {
  for (int q : {7, 8, 50}) {
    const NeighborhoodGraph g = temporal_graph(8, q);
    for (int i = 1; i <= 8; ++i) {
      std::vector<int> want(i);
      std::iota(want.begin(), want.end(), 1);
      CHECK(g.at(i) == want);
    }
  }
}

TEST_CASE("seasonal neighborhoods skip by the season length") {
  const NeighborhoodGraph a = seasonal_graph(30, 1, 12);
  CHECK(a.at(25) == std::vector<int>{13, 25});
  const NeighborhoodGraph b = seasonal_graph(30, 2, 12);
  CHECK(b.at(25) == std::vector<int>{1, 13, 25});
  CHECK(b.at(5) == std::vector<int>{5});  // lags fall off the left edge
  CHECK(validate(a).ok());
  CHECK(validate(b).ok());
}

TEST_CASE("periodic neighborhoods use per-position orders") {
  PeriodicSpec spec;
  spec.s = 12;
  spec.q.assign(12, 0);
  spec.q[0] = 1;  // season position 1 looks one step back
  const NeighborhoodGraph g = periodic_graph(24, spec);
  CHECK(g.at(13) == std::vector<int>{12, 13});  // position (13-1)%12+1 = 1
  CHECK(g.at(14) == std::vector<int>{14});      // position 2 has order 0
  CHECK(g.at(1) == std::vector<int>{1});        // truncated at the edge
  CHECK(validate(g).ok());
}

TEST_CASE("periodic with all-equal orders reduces to temporal") {
  PeriodicSpec spec;
  spec.s = 4;
  spec.q.assign(4, 2);
  const NeighborhoodGraph p = periodic_graph(9, spec);
  const NeighborhoodGraph t = temporal_graph(9, 2);
  for (int i = 1; i <= 9; ++i) CHECK(p.at(i) == t.at(i));
  CHECK(p.at(6) == std::vector<int>{4, 5, 6});
}

TEST_CASE("spatial neighborhoods are closed adjacency sets") {
  const NeighborhoodGraph g = spatial_graph(lattice5());
  CHECK(g.m == 5);
  CHECK(g.at(1) == std::vector<int>{1, 2, 3});
  CHECK(g.at(2) == std::vector<int>{1, 2, 3});
  CHECK(g.at(3) == std::vector<int>{1, 2, 3, 4, 5});
  CHECK(g.at(4) == std::vector<int>{3, 4, 5});
  CHECK(g.at(5) == std::vector<int>{3, 4, 5});
  CHECK(validate(g).ok());
}

TEST_CASE("spatial graphs commute with unit relabeling") {
  // Relabel 1..5 by the permutation p and rebuild; neighborhoods must map
  // through p as sets.
  const std::vector<int> p = {0, 3, 5, 1, 4, 2};  // p[i] = image of unit i
  AdjacencyList orig = lattice5();
  AdjacencyList relabeled{5, {}};
  for (auto [i, j] : orig.edges) relabeled.edges.push_back({p[i], p[j]});
  const NeighborhoodGraph g = spatial_graph(orig);
  const NeighborhoodGraph h = spatial_graph(relabeled);
  for (int i = 1; i <= 5; ++i) {
    std::vector<int> mapped;
    for (int v : g.at(i)) mapped.push_back(p[v]);
    CHECK(sorted_copy(mapped) == h.at(p[i]));
  }
}

TEST_CASE("spatio-temporal product of a lattice and a window") {
  const NeighborhoodGraph g = spatiotemporal_graph(lattice5(), 5, 1);
  CHECK(g.m == 25);
  // Location 3 at time 5 is unit 23; it sees its own location at times 4-5
  // and the whole lattice neighborhood of 3 at time 5.
  CHECK(g.at(23) == std::vector<int>{18, 21, 22, 23, 24, 25});
  // Location 1 at time 1: no past, neighbors {1,2,3} at time 1.
  CHECK(g.at(1) == std::vector<int>{1, 2, 3});
  CHECK(validate(g).ok());
}

TEST_CASE("builders reject bad sizes and orders") {
  CHECK_THROWS_AS((void)temporal_graph(0, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)temporal_graph(5, -1), std::invalid_argument);
  CHECK_THROWS_AS((void)seasonal_graph(10, 1, 0), std::invalid_argument);
  PeriodicSpec bad;
  bad.s = 3;
  bad.q = {1, 0};  // wrong length
  CHECK_THROWS_AS((void)periodic_graph(6, bad), std::invalid_argument);
  CHECK_THROWS_AS((void)spatiotemporal_graph(lattice5(), 0, 1),
                  std::invalid_argument);
}

TEST_CASE("validate flags broken neighbor sets") {
  NeighborhoodGraph g = temporal_graph(4, 1);

  SUBCASE("missing self-membership") {
    g.neighbors[2] = {1, 2};  // unit 3 lost itself
    const GraphReport r = validate(g);
    REQUIRE(!r.ok());
    CHECK(r.violations[0].unit == 3);
    CHECK(r.violations[0].kind == "self-membership");
  }
  SUBCASE("duplicate entries") {
    g.neighbors[1] = {1, 1, 2};
    const GraphReport r = validate(g);
    REQUIRE(!r.ok());
    CHECK(r.violations[0].kind == "duplicate");
  }
  SUBCASE("out-of-range index") {
    g.neighbors[3] = {3, 4, 9};
    const GraphReport r = validate(g);
    REQUIRE(!r.ok());
    CHECK(r.violations[0].unit == 4);
    CHECK(r.violations[0].kind == "out-of-range");
    CHECK(r.violations[0].index == 9);
  }
  SUBCASE("wrong number of sets") {
    g.neighbors.pop_back();
    const GraphReport r = validate(g);
    REQUIRE(!r.ok());
    CHECK(r.violations[0].kind == "size");
  }
}

TEST_CASE("all builders produce graphs that validate") {
  CHECK(validate(temporal_graph(40, 3)).ok());
  CHECK(validate(seasonal_graph(40, 2, 7)).ok());
  PeriodicSpec s;
  s.s = 5;
  s.q = {2, 0, 1, 3, 0};
  CHECK(validate(periodic_graph(23, s)).ok());
  CHECK(validate(spatial_graph(lattice5())).ok());
  CHECK(validate(spatiotemporal_graph(lattice5(), 4, 2)).ok());
}

TEST_CASE("adjacency checks catch malformed edge lists") {
  CHECK_NOTHROW(check_adjacency(lattice5()));
  CHECK_THROWS_AS(check_adjacency(AdjacencyList{3, {{1, 1}}}),
                  std::invalid_argument);  // self-loop
  CHECK_THROWS_AS(check_adjacency(AdjacencyList{3, {{1, 4}}}),
                  std::invalid_argument);  // out of range
  CHECK_THROWS_AS(check_adjacency(AdjacencyList{3, {{1, 2}, {2, 1}}}),
                  std::invalid_argument);  // duplicate undirected edge
  CHECK_THROWS_AS(check_adjacency(AdjacencyList{0, {}}),
                  std::invalid_argument);
}

TEST_CASE("adjacency CSV parsing") {
  const AdjacencyList a = adjacency_from_csv("i,j\r\n1,2\n2,3\n");
  CHECK(a.m == 3);
  REQUIRE(a.edges.size() == 2);
  CHECK(a.edges[0] == std::pair<int, int>{1, 2});
  CHECK(a.edges[1] == std::pair<int, int>{2, 3});

  const AdjacencyList b = adjacency_from_csv("1,2\n", 4);  // m given explicitly
  CHECK(b.m == 4);

  CHECK_THROWS(adjacency_from_csv("1,2,3\n"));
  CHECK_THROWS(adjacency_from_csv("1,x\n"));
  CHECK_THROWS(adjacency_from_csv(""));
}

TEST_CASE("graphs serialize to JSON and back") {
  const NeighborhoodGraph g = seasonal_graph(9, 1, 4);
  nlohmann::json j;
  to_json(j, g);
  const NeighborhoodGraph back = graph_from_json(j);
  CHECK(back.m == g.m);
  CHECK(back.neighbors == g.neighbors);
}

TEST_CASE("constructor-form JSON builds the same graphs") {
  using nlohmann::json;
  {
    const auto g = graph_from_any_json(
        json{{"type", "temporal"}, {"m", 16}, {"q", 2}});
    CHECK(g.neighbors == temporal_graph(16, 2).neighbors);
  }
  {
    const auto g = graph_from_any_json(
        json{{"type", "seasonal"}, {"m", 30}, {"q", 1}, {"s", 12}});
    CHECK(g.neighbors == seasonal_graph(30, 1, 12).neighbors);
  }
  {
    json q = json::array();
    for (int i = 0; i < 12; ++i) q.push_back(i == 0 ? 1 : 0);
    const auto g = graph_from_any_json(
        json{{"type", "periodic"}, {"m", 24}, {"s", 12}, {"q", q}});
    CHECK(g.at(13) == std::vector<int>{12, 13});
  }
  {
    json edges = json::array();
    for (auto [i, j] : lattice5().edges) edges.push_back(json::array({i, j}));
    const auto g = graph_from_any_json(
        json{{"type", "spatial"}, {"m", 5}, {"edges", edges}});
    CHECK(g.neighbors == spatial_graph(lattice5()).neighbors);
    const auto st = graph_from_any_json(json{{"type", "spatiotemporal"},
                                             {"m_loc", 5},
                                             {"T", 5},
                                             {"q", 1},
                                             {"edges", edges}});
    CHECK(st.neighbors == spatiotemporal_graph(lattice5(), 5, 1).neighbors);
  }
  {
    // Explicit form with unrelated extra keys is accepted.
    nlohmann::json j;
    to_json(j, temporal_graph(3, 1));
    j["meta"] = "ignored";
    CHECK(graph_from_any_json(j).neighbors == temporal_graph(3, 1).neighbors);
  }
  CHECK_THROWS(graph_from_any_json(json{{"type", "mystery"}, {"m", 3}}));
}
