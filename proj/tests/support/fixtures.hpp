#pragma once

#include <cstdint>
#include <vector>

#include "amod/demand.hpp"
#include "amod/digraph.hpp"
#include "amod/io.hpp"
#include "amod/learning.hpp"
#include "amod/model.hpp"
#include "amod/travel_time.hpp"

namespace amod::testing {

/// Random layered DAG shaped like a dispatch graph: source, `k` vehicle
/// vertices, `inner` request vertices, sink. Every vehicle and request has a
/// sink arc; other arcs appear with probability `density` and carry signed
/// weights (source and sink arcs stay at 0).
DispatchGraph random_dag(std::uint64_t seed, int k, int inner, double density);

/// Random training instance on a random DAG: `width` random features per
/// weighted arc and the optimal solution under a hidden weight vector as the
/// target.
TrainingInstance random_instance(std::uint64_t seed, int k, int inner, std::size_t width,
                                 Disjointness mode = Disjointness::Vertex);

/// Straight-line travel at `kmh` on a 4 km square.
TravelTimeProvider flat_world(double kmh = 36.0);
Area square_area();

Request request_at(RequestId id, Location o, Location d, double start, double reward,
                   const TravelTimeProvider& tt);

/// A small synthetic world (8 x 8 cells of 500 m) with the given rate.
SyntheticConfig small_synthetic(std::uint64_t seed, double requests_per_hour);

}  // namespace amod::testing
