#include "fixtures.hpp"

#include <random>

#include "amod/kdspp.hpp"

namespace amod::testing {

DispatchGraph random_dag(std::uint64_t seed, int k, int inner, double density) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(-5.0, 10.0);
  std::bernoulli_distribution coin(density);

  DispatchGraph g;
  g.mode = GraphMode::Base;
  g.vehicle_count = k;
  g.vertices.push_back({VertexKind::Source});
  for (int v = 0; v < k; ++v) {
    g.vertices.push_back({VertexKind::Vehicle, v});
    g.vehicle_ids.push_back(v);
  }
  for (int r = 0; r < inner; ++r) g.vertices.push_back({VertexKind::Request, r});
  g.vertices.push_back({VertexKind::Sink});
  g.source = 0;
  g.sink = static_cast<std::int32_t>(g.vertices.size()) - 1;

  auto add = [&](std::int32_t t, std::int32_t h, double w) {
    g.arcs.push_back({t, h});
    g.weights.push_back(w);
  };
  for (int v = 1; v <= k; ++v) add(0, v, 0.0);
  for (std::int32_t t = 1; t < g.sink; ++t) {
    for (std::int32_t h = std::max(t + 1, k + 1); h < g.sink; ++h) {
      if (coin(rng)) add(t, h, weight(rng));
    }
    add(t, g.sink, 0.0);
  }
  g.finalize();
  return g;
}

TrainingInstance random_instance(std::uint64_t seed, int k, int inner, std::size_t width, Disjointness mode) {
  TrainingInstance inst;
  inst.graph = random_dag(seed, k, inner, 0.45);
  inst.mode = mode;
  std::mt19937_64 rng(seed ^ 0xfeedULL);
  std::normal_distribution<double> normal(0.0, 1.0);

  const DispatchGraph& g = inst.graph;
  inst.phi.width = width;
  for (std::size_t a = 0; a < g.arcs.size(); ++a) {
    if (g.arcs[a].tail == g.source || g.arcs[a].head == g.sink) continue;
    inst.phi.arcs.push_back(static_cast<std::int32_t>(a));
    for (std::size_t j = 0; j < width; ++j) inst.phi.values.push_back(normal(rng));
  }
  std::vector<double> hidden(width);
  for (double& w : hidden) w = normal(rng);
  const std::vector<double> theta = weights_from_matrix(g, inst.phi, hidden);
  inst.target = solve(g, theta, k, mode).arc_used;
  return inst;
}

Area square_area() { return {0.0, 0.0, 4000.0, 4000.0}; }

TravelTimeProvider flat_world(double kmh) { return TravelTimeProvider::straight_line(square_area(), kmh); }

Request request_at(RequestId id, Location o, Location d, double start, double reward,
                   const TravelTimeProvider& tt) {
  return make_request(id, o, d, start, reward, tt);
}

SyntheticConfig small_synthetic(std::uint64_t seed, double requests_per_hour) {
  SyntheticConfig c;
  c.seed = seed;
  c.requests_per_hour = requests_per_hour;
  return c;
}

}  // namespace amod::testing
