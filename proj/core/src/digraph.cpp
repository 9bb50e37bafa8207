#include "amod/digraph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>

namespace amod {

const char* to_string(VertexKind k) {
  switch (k) {
    case VertexKind::Source: return "source";
    case VertexKind::Sink: return "sink";
    case VertexKind::Vehicle: return "vehicle";
    case VertexKind::Request: return "request";
    case VertexKind::RequestExit: return "request-exit";
    case VertexKind::Artificial: return "artificial";
    case VertexKind::Rebalancing: return "rebalancing";
    case VertexKind::Capacity: return "capacity";
  }
  return "unknown";
}

const char* to_string(GraphMode m) {
  switch (m) {
    case GraphMode::Base: return "base";
    case GraphMode::SampleBased: return "sample-based";
    case GraphMode::CellBased: return "cell-based";
  }
  return "unknown";
}

void DispatchGraph::finalize() {
  std::vector<std::size_t> order(arcs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return arcs[a].tail != arcs[b].tail ? arcs[a].tail < arcs[b].tail : arcs[a].head < arcs[b].head;
  });
  std::vector<Arc> sorted_arcs;
  sorted_arcs.reserve(arcs.size());
  std::vector<double> sorted_weights;
  sorted_weights.reserve(arcs.size());
  weights.resize(arcs.size(), 0.0);
  for (std::size_t i : order) {
    sorted_arcs.push_back(arcs[i]);
    sorted_weights.push_back(weights[i]);
  }
  arcs = std::move(sorted_arcs);
  weights = std::move(sorted_weights);

  out_begin.assign(vertices.size() + 1, 0);
  for (const Arc& a : arcs) ++out_begin[a.tail + 1];
  for (std::size_t v = 0; v < vertices.size(); ++v) out_begin[v + 1] += out_begin[v];
}

std::optional<std::int32_t> DispatchGraph::find_arc(std::int32_t tail, std::int32_t head) const {
  const auto first = arcs.begin() + out_begin[tail];
  const auto last = arcs.begin() + out_begin[tail + 1];
  const auto it =
      std::lower_bound(first, last, head, [](const Arc& a, std::int32_t h) { return a.head < h; });
  if (it == last || it->head != head) return std::nullopt;
  return static_cast<std::int32_t>(it - arcs.begin());
}

std::vector<std::int32_t> topological_order(const DispatchGraph& graph) {
  const auto n = static_cast<std::int32_t>(graph.vertices.size());
  std::vector<int> indegree(n, 0);
  for (const Arc& a : graph.arcs) ++indegree[a.head];
  std::priority_queue<std::int32_t, std::vector<std::int32_t>, std::greater<>> ready;
  for (std::int32_t v = 0; v < n; ++v) {
    if (indegree[v] == 0) ready.push(v);
  }
  std::vector<std::int32_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const std::int32_t v = ready.top();
    ready.pop();
    order.push_back(v);
    for (const Arc& a : graph.out_arcs(v)) {
      if (--indegree[a.head] == 0) ready.push(a.head);
    }
  }
  if (static_cast<std::int32_t>(order.size()) != n) order.clear();
  return order;
}

void DispatchGraph::check_invariants() const {
  auto fail = [](const std::string& what) { throw std::logic_error("dispatch graph: " + what); };
  int sources = 0, sinks = 0;
  for (const Vertex& v : vertices) {
    sources += v.kind == VertexKind::Source;
    sinks += v.kind == VertexKind::Sink;
  }
  if (sources != 1 || sinks != 1) fail("needs exactly one source and one sink");
  if (vertices[source].kind != VertexKind::Source || vertices[sink].kind != VertexKind::Sink) {
    fail("source/sink indices do not match vertex kinds");
  }
  if (weights.size() != arcs.size()) fail("weight vector size differs from arc count");
  if (out_begin.size() != vertices.size() + 1) fail("adjacency index not built");

  std::vector<bool> reaches_sink(vertices.size(), false);
  for (std::size_t i = 0; i < arcs.size(); ++i) {
    const Arc& a = arcs[i];
    if (a.tail == source && vertices[a.head].kind != VertexKind::Vehicle) {
      fail("source arc into a non-vehicle vertex");
    }
    if ((a.tail == source || a.head == sink) && weights[i] != 0.0) {
      fail("source/sink arcs must carry weight 0");
    }
    if (a.head == sink) reaches_sink[a.tail] = true;
  }
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    const VertexKind k = vertices[v].kind;
    const bool needs_sink =
        k == VertexKind::Vehicle || k == VertexKind::Artificial || k == VertexKind::Capacity ||
        k == VertexKind::RequestExit || (k == VertexKind::Request && mode != GraphMode::CellBased);
    if (needs_sink && !reaches_sink[v]) fail(std::string(to_string(k)) + " vertex without sink arc");
  }
  if (topological_order(*this).empty()) fail("graph has a cycle");
}

namespace {

void require_finite(Location l, const char* what) {
  if (!std::isfinite(l.x) || !std::isfinite(l.y)) {
    throw std::invalid_argument(std::string("non-finite coordinates in ") + what);
  }
}

bool by_start(const Request& a, const Request& b) {
  return a.start_time != b.start_time ? a.start_time < b.start_time : a.id < b.id;
}

}  // namespace

DispatchGraph build_graph(const SystemState& state, const GraphParams& params,
                          const TravelTimeProvider& tt) {
  if (state.vehicles.empty()) throw std::invalid_argument("cannot build a dispatch graph for an empty fleet");
  for (const auto& v : state.vehicles) {
    require_finite(v.location, "vehicle location");
    if (v.pending) require_finite(v.pending->destination, "pending request");
  }
  for (const auto& r : state.batch) {
    require_finite(r.origin, "request origin");
    require_finite(r.destination, "request destination");
  }

  DispatchGraph g;
  g.mode = params.mode;
  g.decision_time = state.decision_time();
  g.period_end = state.period_end();
  g.horizon_end = params.mode == GraphMode::Base ? g.period_end : params.horizon_end;
  g.vehicle_count = static_cast<int>(state.vehicles.size());

  if (params.mode == GraphMode::SampleBased) {
    for (const auto& r : params.sampled) {
      require_finite(r.origin, "sampled request origin");
      require_finite(r.destination, "sampled request destination");
      if (r.start_time < g.period_end || r.start_time >= g.horizon_end) {
        throw std::invalid_argument("sampled request starts outside the prediction horizon");
      }
    }
  }
  if (params.mode == GraphMode::CellBased) {
    if (!params.grid) throw std::invalid_argument("cell-based graph requires a rebalancing grid");
    if (params.n_capacity < 1) throw std::invalid_argument("n_capacity must be at least 1");
    g.grid = params.grid;
  }
  if (params.mode != GraphMode::Base && !(g.horizon_end >= g.period_end)) {
    throw std::invalid_argument("prediction horizon ends before the system period");
  }

  g.requests = state.batch;
  std::sort(g.requests.begin(), g.requests.end(), by_start);
  g.real_request_count = g.requests.size();
  if (params.mode == GraphMode::SampleBased) {
    std::vector<Request> sampled = params.sampled;
    std::sort(sampled.begin(), sampled.end(), by_start);
    g.requests.insert(g.requests.end(), sampled.begin(), sampled.end());
  }

  const bool split = params.mode == GraphMode::CellBased;
  g.source = 0;
  g.vertices.push_back({VertexKind::Source, -1, 0, {}, g.decision_time});
  for (std::size_t i = 0; i < state.vehicles.size(); ++i) {
    const auto& v = state.vehicles[i];
    g.vertices.push_back({VertexKind::Vehicle, static_cast<std::int32_t>(i), 0, v.ready_location(),
                          v.ready_time(g.decision_time)});
    g.vehicle_ids.push_back(v.id);
  }

  // entry vertex of each request (into which dispatch arcs point) and the
  // vertex a path leaves it from
  std::vector<std::int32_t> entry(g.requests.size()), exit(g.requests.size());
  for (std::size_t j = 0; j < g.requests.size(); ++j) {
    const Request& r = g.requests[j];
    const bool artificial = j >= g.real_request_count;
    const auto idx = static_cast<std::int32_t>(g.vertices.size());
    g.vertices.push_back({artificial ? VertexKind::Artificial : VertexKind::Request,
                          static_cast<std::int32_t>(j), 0, r.destination, r.arrival_time});
    entry[j] = exit[j] = idx;
    if (split) {
      exit[j] = idx + 1;
      g.vertices.push_back(
          {VertexKind::RequestExit, static_cast<std::int32_t>(j), 0, r.destination, r.arrival_time});
    }
  }

  std::vector<std::int32_t> rebalancing;
  std::vector<std::vector<std::int32_t>> capacity;
  if (split) {
    const CellGrid& grid = *g.grid;
    for (int c = 0; c < grid.cell_count(); ++c) {
      rebalancing.push_back(static_cast<std::int32_t>(g.vertices.size()));
      g.vertices.push_back({VertexKind::Rebalancing, c, 0, grid.center(c), g.horizon_end});
    }
    capacity.resize(grid.cell_count());
    for (int c = 0; c < grid.cell_count(); ++c) {
      for (int s = 1; s <= params.n_capacity; ++s) {
        capacity[c].push_back(static_cast<std::int32_t>(g.vertices.size()));
        g.vertices.push_back({VertexKind::Capacity, c, s, grid.center(c), g.horizon_end});
      }
    }
  }
  g.sink = static_cast<std::int32_t>(g.vertices.size());
  g.vertices.push_back({VertexKind::Sink, -1, 0, {}, g.horizon_end});

  const SparsifyCuts& cuts = params.cuts;
  // Dispatch arcs from `tail` to requests with index >= `first_request`.
  // Real and artificial requests form two blocks, each sorted by start time.
  auto connect_block = [&](std::int32_t tail, std::size_t lo, std::size_t hi) {
    if (lo >= hi) return;
    const Vertex& u = g.vertices[tail];
    const auto first = g.requests.begin() + static_cast<std::ptrdiff_t>(lo);
    const auto last = g.requests.begin() + static_cast<std::ptrdiff_t>(hi);
    const auto begin = std::lower_bound(first, last, u.ready_time - 1e-9,
                                        [](const Request& r, double t) { return r.start_time < t; });
    for (auto it = begin; it != last; ++it) {
      const Request& r = *it;
      if (r.start_time - u.ready_time > cuts.t_max_s) break;
      const Leg leg = tt.travel(u.location, r.origin);
      if (!reaches_in_time(u.ready_time, leg.seconds, r.start_time)) continue;
      if (leg.km > cuts.d_max_km) continue;
      const auto j = static_cast<std::size_t>(it - g.requests.begin());
      g.arcs.push_back({tail, entry[j], leg.km, leg.seconds});
    }
  };
  auto connect = [&](std::int32_t tail, std::size_t first_request) {
    connect_block(tail, first_request, g.real_request_count);
    connect_block(tail, std::max(first_request, g.real_request_count), g.requests.size());
  };
  auto connect_rebalancing = [&](std::int32_t tail) {
    const Vertex& u = g.vertices[tail];
    for (std::size_t c = 0; c < rebalancing.size(); ++c) {
      const Vertex& cell = g.vertices[rebalancing[c]];
      const Leg leg = tt.travel(u.location, cell.location);
      if (reaches_in_time(u.ready_time, leg.seconds, g.horizon_end)) {
        g.arcs.push_back({tail, rebalancing[c], leg.km, leg.seconds});
      }
    }
  };

  for (int i = 0; i < g.vehicle_count; ++i) {
    const auto v = static_cast<std::int32_t>(1 + i);
    g.arcs.push_back({g.source, v, 0.0, 0.0});
    connect(v, 0);
    if (split) connect_rebalancing(v);
    g.arcs.push_back({v, g.sink, 0.0, 0.0});
  }
  for (std::size_t j = 0; j < g.requests.size(); ++j) {
    if (split) g.arcs.push_back({entry[j], exit[j], 0.0, 0.0});
    connect(exit[j], j + 1);
    if (split) connect_rebalancing(exit[j]);
    g.arcs.push_back({exit[j], g.sink, 0.0, 0.0});
  }
  for (std::size_t c = 0; c < capacity.size(); ++c) {
    for (std::int32_t cap : capacity[c]) {
      g.arcs.push_back({rebalancing[c], cap, 0.0, 0.0});
      g.arcs.push_back({cap, g.sink, 0.0, 0.0});
    }
  }

  g.finalize();
  return g;
}

DispatchGraph sparsify(const DispatchGraph& graph, double t_max_s, double d_max_km) {
  if (!(t_max_s > 0.0) || !(d_max_km > 0.0)) {
    throw std::invalid_argument("sparsification thresholds must be positive");
  }
  DispatchGraph out = graph;
  out.arcs.clear();
  out.weights.clear();
  for (std::size_t i = 0; i < graph.arcs.size(); ++i) {
    const Arc& a = graph.arcs[i];
    const Vertex& head = graph.vertices[a.head];
    if (head.kind == VertexKind::Request || head.kind == VertexKind::Artificial) {
      const Vertex& tail = graph.vertices[a.tail];
      const double gap = graph.request_of(a.head).start_time - tail.ready_time;
      if (gap > t_max_s || a.deadhead_km > d_max_km) continue;
    }
    out.arcs.push_back(a);
    out.weights.push_back(graph.weights[i]);
  }
  out.finalize();
  return out;
}

}  // namespace amod
