#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "amod/geometry.hpp"
#include "amod/model.hpp"
#include "amod/travel_time.hpp"

namespace amod {

enum class VertexKind : std::uint8_t {
  Source,
  Sink,
  Vehicle,
  Request,      // real request; in cell-based graphs the entry half
  RequestExit,  // exit half of a split request (cell-based graphs only)
  Artificial,   // sampled request in the prediction horizon
  Rebalancing,  // one per rebalancing cell
  Capacity,     // capacity slot of a rebalancing cell
};

const char* to_string(VertexKind k);

enum class GraphMode { Base, SampleBased, CellBased };

const char* to_string(GraphMode m);

struct Vertex {
  VertexKind kind = VertexKind::Source;
  /// Vehicle: index into the state's vehicles. Request/RequestExit/Artificial:
  /// index into DispatchGraph::requests. Rebalancing/Capacity: cell id.
  std::int32_t ref = -1;
  /// Capacity vertices: 1-based slot within their cell.
  std::int32_t slot = 0;
  /// Where and when a path continues after visiting this vertex.
  Location location;
  double ready_time = 0.0;
};

struct Arc {
  std::int32_t tail = 0;
  std::int32_t head = 0;
  /// Empty driving from the tail's ready location to the head.
  double deadhead_km = 0.0;
  double deadhead_s = 0.0;
};

struct SparsifyCuts {
  double t_max_s = std::numeric_limits<double>::infinity();
  double d_max_km = std::numeric_limits<double>::infinity();
};

/// Weighted acyclic dispatching digraph. Vertex indices follow a topological
/// order: source, vehicles, requests by start time, artificial requests,
/// rebalancing vertices, capacity vertices, sink. Arcs are sorted by
/// (tail, head) and indexed by position.
struct DispatchGraph {
  GraphMode mode = GraphMode::Base;
  double decision_time = 0.0;
  double period_end = 0.0;
  double horizon_end = 0.0;
  int vehicle_count = 0;
  std::int32_t source = 0;
  std::int32_t sink = 0;

  std::vector<Vertex> vertices;
  std::vector<Arc> arcs;
  std::vector<double> weights;

  /// Real requests first (`real_request_count` of them), then artificial ones.
  std::vector<Request> requests;
  std::size_t real_request_count = 0;
  std::vector<VehicleId> vehicle_ids;
  std::optional<CellGrid> grid;

  /// CSR adjacency over `arcs`, filled by finalize().
  std::vector<std::int32_t> out_begin;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t arc_count() const { return arcs.size(); }

  std::span<const Arc> out_arcs(std::int32_t v) const {
    return {arcs.data() + out_begin[v], arcs.data() + out_begin[v + 1]};
  }
  std::int32_t out_arc_index(std::int32_t v, std::size_t i) const { return out_begin[v] + static_cast<std::int32_t>(i); }

  std::optional<std::int32_t> find_arc(std::int32_t tail, std::int32_t head) const;

  const Request& request_of(std::int32_t vertex) const { return requests[vertices[vertex].ref]; }

  /// Sorts arcs, sizes weights and rebuilds the adjacency index.
  void finalize();

  /// Throws std::logic_error if a structural invariant is broken.
  void check_invariants() const;
};

struct GraphParams {
  GraphMode mode = GraphMode::Base;
  /// End of the prediction horizon t^pred (absolute seconds).
  double horizon_end = 0.0;
  std::optional<CellGrid> grid;
  int n_capacity = 1;
  std::vector<Request> sampled;
  SparsifyCuts cuts;
};

DispatchGraph build_graph(const SystemState& state, const GraphParams& params,
                          const TravelTimeProvider& tt);

DispatchGraph sparsify(const DispatchGraph& graph, double t_max_s, double d_max_km);

/// Kahn topological order; empty if the graph has a cycle.
std::vector<std::int32_t> topological_order(const DispatchGraph& graph);

}  // namespace amod
