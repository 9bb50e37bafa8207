#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "amod/digraph.hpp"

namespace amod {

enum class Disjointness { Vertex, Arc };

const char* to_string(Disjointness d);

/// k source-to-sink paths, one per vehicle vertex, as an arc indicator
/// vector plus the decomposed vertex sequences (ordered by vehicle vertex).
struct PathSolution {
  std::vector<std::uint8_t> arc_used;
  std::vector<std::vector<std::int32_t>> paths;
  double objective = 0.0;
  /// Augmenting paths found before no improving path remained.
  int augmentations = 0;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maximum-weight k disjoint paths on `graph` under `theta`.
///
/// Reduction: min-cost flow of value k with costs -theta and unit arc
/// capacities; in Vertex mode every non-terminal vertex is split with unit
/// capacity. Initial potentials come from one pass over the DAG in
/// topological order, after which successive shortest paths run Dijkstra on
/// non-negative reduced costs. Because every vehicle owns a zero-cost
/// source->vehicle->sink path, augmentation stops at the first shortest path
/// with non-negative cost and the remaining vehicles take their empty trip;
/// convexity of the min-cost curve makes this exact. Among equal-cost labels
/// Dijkstra keeps the first one found, scanning vertices in index order.
PathSolution solve(const DispatchGraph& graph, std::span<const double> theta, int k,
                   Disjointness mode);

inline PathSolution solve(const DispatchGraph& graph, int k, Disjointness mode) {
  return solve(graph, graph.weights, k, mode);
}

/// Exhaustive enumeration of all disjoint path tuples. Test oracle only;
/// rejects graphs with more than 16 non-terminal vertices.
PathSolution brute_force_oracle(const DispatchGraph& graph, std::span<const double> theta, int k,
                                 Disjointness mode);

/// True if `arc_used` decomposes into exactly k disjoint source-sink paths,
/// each starting with a vehicle vertex and using every vehicle once.
bool is_feasible_solution(const DispatchGraph& graph, std::span<const std::uint8_t> arc_used, int k,
                          Disjointness mode);

/// Optimality certificate: builds the residual network of `solution` and
/// checks that Bellman-Ford potentials exist with non-negative reduced costs
/// on every residual arc (no negative cycle).
bool has_optimality_certificate(const DispatchGraph& graph, std::span<const double> theta, int k,
                                Disjointness mode, const PathSolution& solution);

/// Decomposes an arc indicator vector into per-vehicle paths, following the
/// lowest-index arc with remaining flow at every vertex.
std::vector<std::vector<std::int32_t>> decompose_paths(const DispatchGraph& graph,
                                                       std::span<const std::uint8_t> arc_used);

}  // namespace amod
