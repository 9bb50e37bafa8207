#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "amod/kdspp.hpp"
#include "amod/policies.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace amod {
namespace {

using testing::enumerate_k_paths;
using testing::random_dag;

struct WeightedArc {
  std::int32_t tail;
  std::int32_t head;
  double weight;
};

// Vertex layout: 0 source, 1..k vehicles, then `kinds`, then sink. Source
// and sink arcs of vehicles and requests are added automatically.
DispatchGraph hand_graph(int k, const std::vector<VertexKind>& kinds, const std::vector<WeightedArc>& arcs) {
  DispatchGraph g;
  g.vehicle_count = k;
  g.vertices.push_back({VertexKind::Source});
  for (int v = 0; v < k; ++v) {
    g.vertices.push_back({VertexKind::Vehicle, v});
    g.vehicle_ids.push_back(v);
  }
  for (std::size_t i = 0; i < kinds.size(); ++i) g.vertices.push_back({kinds[i], static_cast<std::int32_t>(i)});
  g.vertices.push_back({VertexKind::Sink});
  g.sink = static_cast<std::int32_t>(g.vertices.size()) - 1;
  for (int v = 1; v <= k; ++v) {
    g.arcs.push_back({0, v});
    g.weights.push_back(0.0);
  }
  for (std::int32_t v = 1; v < g.sink; ++v) {
    const VertexKind kind = g.vertices[v].kind;
    if (kind == VertexKind::Vehicle || kind == VertexKind::Request || kind == VertexKind::Capacity) {
      g.arcs.push_back({v, g.sink});
      g.weights.push_back(0.0);
    }
  }
  for (const WeightedArc& a : arcs) {
    g.arcs.push_back({a.tail, a.head});
    g.weights.push_back(a.weight);
  }
  g.finalize();
  return g;
}

// Repeatedly commits the single best remaining path; not optimal in general.
double sequential_greedy(const DispatchGraph& g, Disjointness mode) {
  std::vector<double> theta = g.weights;
  std::vector<bool> done(g.vertices.size(), false);
  double total = 0.0;
  for (int round = 0; round < g.vehicle_count; ++round) {
    double best = -1e300;
    std::int32_t best_vehicle = -1;
    std::vector<std::uint8_t> best_arcs;
    for (std::int32_t v = 1; v <= g.vehicle_count; ++v) {
      if (done[v]) continue;
      // the only source arc left open is the one to v
      DispatchGraph h = g;
      h.arcs.clear();
      h.weights.clear();
      std::vector<std::size_t> origin;
      for (std::size_t i = 0; i < g.arcs.size(); ++i) {
        if (g.arcs[i].tail == g.source && g.arcs[i].head != v) continue;
        h.arcs.push_back(g.arcs[i]);
        h.weights.push_back(theta[i]);
        origin.push_back(i);
      }
      h.finalize();
      const auto opt = enumerate_k_paths(h, h.weights, mode);
      if (opt.objective > best) {
        best = opt.objective;
        best_vehicle = v;
        best_arcs.assign(g.arcs.size(), 0);
        for (std::size_t i = 0; i < origin.size(); ++i) best_arcs[origin[i]] = opt.arc_used[i];
      }
    }
    total += best;
    done[best_vehicle] = true;
    for (std::size_t i = 0; i < g.arcs.size(); ++i) {
      if (!best_arcs[i] || g.arcs[i].head == g.sink) continue;
      for (std::size_t j = 0; j < g.arcs.size(); ++j) {
        if (g.arcs[j].head == g.arcs[i].head) theta[j] = -1e9;
      }
    }
  }
  return total;
}

TEST(Solve, SingleVehicleNoRequests) {
  const DispatchGraph g = hand_graph(1, {}, {});
  const PathSolution s = solve(g, 1, Disjointness::Vertex);
  EXPECT_EQ(s.objective, 0.0);
  ASSERT_EQ(s.paths.size(), 1u);
  EXPECT_EQ(s.paths[0], (std::vector<std::int32_t>{0, 1, 2}));
}

TEST(Solve, TwoByTwoAssignment) {
  // vertices: v1 = 1, v2 = 2, r1 = 3, r2 = 4
  const DispatchGraph g = hand_graph(2, {VertexKind::Request, VertexKind::Request},
                                     {{1, 3, 5.0}, {2, 4, 4.0}, {1, 4, 6.0}, {2, 3, -1.0}});
  for (Disjointness mode : {Disjointness::Vertex, Disjointness::Arc}) {
    const PathSolution s = solve(g, 2, mode);
    EXPECT_NEAR(s.objective, 9.0, 1e-12);
    EXPECT_TRUE(s.arc_used[*g.find_arc(1, 3)]);
    EXPECT_TRUE(s.arc_used[*g.find_arc(2, 4)]);
    EXPECT_NEAR(brute_force_oracle(g, g.weights, 2, mode).objective, 9.0, 1e-12);
  }
}

TEST(Solve, JointOptimumBeatsSequentialGreedy) {
  // v1 -> r_b is the best single path but blocks v2's only option
  const DispatchGraph g = hand_graph(2, {VertexKind::Request, VertexKind::Request},
                                     {{1, 3, 6.0}, {1, 4, 10.0}, {2, 4, 6.0}});
  const double oracle = brute_force_oracle(g, g.weights, 2, Disjointness::Vertex).objective;
  EXPECT_NEAR(oracle, 12.0, 1e-12);
  EXPECT_NEAR(sequential_greedy(g, Disjointness::Vertex), 10.0, 1e-12);
  EXPECT_NEAR(solve(g, 2, Disjointness::Vertex).objective, 12.0, 1e-12);
}

TEST(Solve, ArcModeSharesRebalancingVertex) {
  // v1, v2 -> R (5) -> C1 / C2 (6, 7) -> sink
  const DispatchGraph g =
      hand_graph(2, {VertexKind::Rebalancing, VertexKind::Capacity, VertexKind::Capacity},
                 {{1, 3, 3.0}, {2, 3, 3.0}, {3, 4, 1.0}, {3, 5, 0.5}});
  const PathSolution arc = brute_force_oracle(g, g.weights, 2, Disjointness::Arc);
  EXPECT_NEAR(arc.objective, 7.5, 1e-12);
  EXPECT_NEAR(solve(g, 2, Disjointness::Arc).objective, 7.5, 1e-12);
  EXPECT_NEAR(solve(g, 2, Disjointness::Vertex).objective, 4.0, 1e-12);
  EXPECT_NEAR(brute_force_oracle(g, g.weights, 2, Disjointness::Vertex).objective, 4.0, 1e-12);
}

TEST(Solve, MatchesOraclesOnRandomDags) {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const int k = 1 + static_cast<int>(seed % 3);
    const DispatchGraph g = random_dag(seed, k, 12 - k, 0.35);
    for (Disjointness mode : {Disjointness::Vertex, Disjointness::Arc}) {
      const PathSolution s = solve(g, k, mode);
      const double lib = brute_force_oracle(g, g.weights, k, mode).objective;
      const double own = enumerate_k_paths(g, g.weights, mode).objective;
      ASSERT_NEAR(lib, own, 1e-9) << "seed " << seed;
      ASSERT_NEAR(s.objective, own, 1e-9 * std::max(1.0, std::abs(own))) << "seed " << seed;
      EXPECT_TRUE(is_feasible_solution(g, s.arc_used, k, mode));
      EXPECT_TRUE(has_optimality_certificate(g, g.weights, k, mode, s));
    }
  }
}

TEST(Solve, SolutionStructure) {
  const DispatchGraph g = random_dag(77, 3, 9, 0.4);
  const PathSolution s = solve(g, 3, Disjointness::Vertex);
  ASSERT_EQ(s.paths.size(), 3u);
  std::set<std::int32_t> inner;
  double sum = 0.0;
  for (std::size_t i = 0; i < g.arcs.size(); ++i) sum += s.arc_used[i] ? g.weights[i] : 0.0;
  EXPECT_NEAR(sum, s.objective, 1e-9);
  for (const auto& p : s.paths) {
    EXPECT_EQ(p.front(), g.source);
    EXPECT_EQ(g.vertices[p[1]].kind, VertexKind::Vehicle);
    EXPECT_EQ(p.back(), g.sink);
    for (std::size_t i = 1; i + 1 < p.size(); ++i) EXPECT_TRUE(inner.insert(p[i]).second);
  }
  EXPECT_EQ(decompose_paths(g, s.arc_used), s.paths);
}

TEST(Solve, ScalingKeepsTheArgmax) {
  for (std::uint64_t seed = 200; seed < 230; ++seed) {
    const DispatchGraph g = random_dag(seed, 2, 8, 0.4);
    const double best = brute_force_oracle(g, g.weights, 2, Disjointness::Vertex).objective;
    for (double c : {0.01, 3.0, 1000.0}) {
      std::vector<double> scaled = g.weights;
      for (double& w : scaled) w *= c;
      const PathSolution s = solve(g, scaled, 2, Disjointness::Vertex);
      double original = 0.0;
      for (std::size_t i = 0; i < g.arcs.size(); ++i) original += s.arc_used[i] ? g.weights[i] : 0.0;
      EXPECT_NEAR(original, best, 1e-9 * std::max(1.0, std::abs(best)));
      EXPECT_NEAR(s.objective, c * best, 1e-9 * std::max(1.0, std::abs(c * best)));
    }
  }
}

TEST(Solve, AllZeroWeightsGiveEmptyTrips) {
  DispatchGraph g = random_dag(5, 3, 6, 0.5);
  std::fill(g.weights.begin(), g.weights.end(), 0.0);
  const PathSolution s = solve(g, 3, Disjointness::Vertex);
  for (const auto& p : s.paths) EXPECT_EQ(p.size(), 3u);
}

TEST(Solve, CertificateRejectsSuboptimalSolution) {
  const DispatchGraph g = hand_graph(1, {VertexKind::Request}, {{1, 2, 4.0}});
  PathSolution empty;
  empty.arc_used.assign(g.arcs.size(), 0);
  empty.arc_used[*g.find_arc(0, 1)] = 1;
  empty.arc_used[*g.find_arc(1, 3)] = 1;
  EXPECT_TRUE(is_feasible_solution(g, empty.arc_used, 1, Disjointness::Vertex));
  EXPECT_FALSE(has_optimality_certificate(g, g.weights, 1, Disjointness::Vertex, empty));
}

TEST(Solve, RejectsMalformedCalls) {
  const DispatchGraph g = random_dag(1, 2, 4, 0.5);
  EXPECT_THROW(solve(g, 3, Disjointness::Vertex), SolverError);
  EXPECT_THROW(solve(g, std::vector<double>(1, 0.0), 2, Disjointness::Vertex), SolverError);
  const DispatchGraph big = random_dag(1, 2, 15, 0.2);
  EXPECT_THROW(brute_force_oracle(big, big.weights, 2, Disjointness::Vertex), SolverError);
}

TEST(Solve, SplitRequestsStayExclusiveInArcMode) {
  const TravelTimeProvider tt = testing::flat_world(36.0);
  SyntheticConfig syn = testing::small_synthetic(4, 600.0);
  const auto day = generate_synthetic_day(syn, 0, tt);
  SystemState s;
  s.epoch = 20;
  for (const Request& r : day) {
    if (r.start_time >= 1200.0 && r.start_time < 1260.0) s.batch.push_back(r);
  }
  for (int v = 0; v < 12; ++v) s.vehicles.push_back({v, {300.0 * v + 100, 2000.0}, {}});
  GraphParams p;
  p.mode = GraphMode::CellBased;
  p.grid = CellGrid(syn.area, 1000, 1000);
  p.horizon_end = 1860.0;
  DispatchGraph g = build_graph(s, p, tt);
  set_reward_weights(g, Objective::profit());
  for (std::size_t i = 0; i < g.arcs.size(); ++i) {
    if (g.vertices[g.arcs[i].head].kind == VertexKind::Capacity) g.weights[i] = 0.5;
  }
  const PathSolution sol = solve(g, 12, Disjointness::Arc);
  std::set<std::int32_t> requests;
  for (const auto& path : sol.paths) {
    for (std::int32_t v : path) {
      if (g.vertices[v].kind == VertexKind::Request) EXPECT_TRUE(requests.insert(g.vertices[v].ref).second);
    }
  }
  EXPECT_FALSE(requests.empty());
}

}  // namespace
}  // namespace amod
