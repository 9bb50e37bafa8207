#include "amod/kdspp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <string>

namespace amod {

const char* to_string(Disjointness d) { return d == Disjointness::Vertex ? "vertex" : "arc"; }

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_terminal(VertexKind k) { return k == VertexKind::Source || k == VertexKind::Sink; }

int count_vehicles(const DispatchGraph& g) {
  int n = 0;
  for (const Vertex& v : g.vertices) n += v.kind == VertexKind::Vehicle;
  return n;
}

void check_preconditions(const DispatchGraph& g, std::span<const double> theta, int k) {
  if (g.vertices.empty() || g.source < 0 || g.sink < 0 ||
      static_cast<std::size_t>(std::max(g.source, g.sink)) >= g.vertices.size() ||
      g.vertices[g.source].kind != VertexKind::Source || g.vertices[g.sink].kind != VertexKind::Sink) {
    throw SolverError("graph has no source/sink");
  }
  if (theta.size() != g.arcs.size()) throw SolverError("weight vector does not match arc count");
  if (k != count_vehicles(g)) {
    throw SolverError("k = " + std::to_string(k) + " differs from the number of vehicle vertices");
  }
}

/// Residual network: vertex v becomes nodes 2v (in) and 2v+1 (out); edge e
/// and e^1 are a forward/backward pair.
struct FlowNetwork {
  std::vector<std::int32_t> to;
  std::vector<int> cap;
  std::vector<double> cost;
  std::vector<std::int32_t> adj_begin;
  std::vector<std::int32_t> adj;
  std::vector<std::int32_t> arc_edge;      // original arc -> forward edge
  std::vector<std::int32_t> internal_edge; // vertex -> in/out edge

  static std::int32_t in(std::int32_t v) { return 2 * v; }
  static std::int32_t out(std::int32_t v) { return 2 * v + 1; }
  std::size_t nodes() const { return adj_begin.size() - 1; }

  FlowNetwork(const DispatchGraph& g, std::span<const double> theta, int k, Disjointness mode) {
    const auto n = static_cast<std::int32_t>(g.vertices.size());
    std::vector<std::int32_t> from;
    auto add = [&](std::int32_t u, std::int32_t v, int c, double w) {
      const auto e = static_cast<std::int32_t>(to.size());
      from.push_back(u);
      to.push_back(v);
      cap.push_back(c);
      cost.push_back(w);
      from.push_back(v);
      to.push_back(u);
      cap.push_back(0);
      cost.push_back(-w);
      return e;
    };
    internal_edge.resize(n);
    for (std::int32_t v = 0; v < n; ++v) {
      const bool unit = mode == Disjointness::Vertex && !is_terminal(g.vertices[v].kind);
      internal_edge[v] = add(in(v), out(v), unit ? 1 : k, 0.0);
    }
    arc_edge.resize(g.arcs.size());
    for (std::size_t i = 0; i < g.arcs.size(); ++i) {
      arc_edge[i] = add(out(g.arcs[i].tail), in(g.arcs[i].head), 1, -theta[i]);
    }
    adj_begin.assign(2 * static_cast<std::size_t>(n) + 1, 0);
    for (std::int32_t u : from) ++adj_begin[u + 1];
    for (std::size_t u = 0; u + 1 < adj_begin.size(); ++u) adj_begin[u + 1] += adj_begin[u];
    adj.resize(from.size());
    std::vector<std::int32_t> fill(adj_begin.begin(), adj_begin.end() - 1);
    for (std::size_t e = 0; e < from.size(); ++e) adj[fill[from[e]]++] = static_cast<std::int32_t>(e);
  }

  void push(std::int32_t e) {
    --cap[e];
    ++cap[e ^ 1];
  }
};

}  // namespace

std::vector<std::vector<std::int32_t>> decompose_paths(const DispatchGraph& graph,
                                                       std::span<const std::uint8_t> arc_used) {
  std::vector<std::uint8_t> remaining(arc_used.begin(), arc_used.end());
  std::vector<std::vector<std::int32_t>> paths;
  for (std::size_t i = 0; i < graph.out_arcs(graph.source).size(); ++i) {
    const auto first = graph.out_arc_index(graph.source, i);
    if (!remaining[first]) continue;
    remaining[first] = 0;
    std::vector<std::int32_t> path{graph.source, graph.arcs[first].head};
    std::int32_t cur = graph.arcs[first].head;
    while (cur != graph.sink) {
      bool moved = false;
      for (std::size_t j = 0; j < graph.out_arcs(cur).size(); ++j) {
        const auto a = graph.out_arc_index(cur, j);
        if (remaining[a]) {
          remaining[a] = 0;
          cur = graph.arcs[a].head;
          path.push_back(cur);
          moved = true;
          break;
        }
      }
      if (!moved) throw SolverError("arc indicator does not decompose into source-sink paths");
    }
    paths.push_back(std::move(path));
  }
  return paths;
}

PathSolution solve(const DispatchGraph& graph, std::span<const double> theta, int k,
                   Disjointness mode) {
  check_preconditions(graph, theta, k);
  FlowNetwork net(graph, theta, k, mode);
  const auto node_count = static_cast<std::int32_t>(net.nodes());
  const std::int32_t s = FlowNetwork::out(graph.source);
  const std::int32_t t = FlowNetwork::in(graph.sink);

  double scale = 1.0;
  for (double w : theta) scale = std::max(scale, std::abs(w));
  const double tolerance = 1e-11 * scale;

  // Initial potentials: shortest distances over the acyclic forward network.
  const auto order = topological_order(graph);
  if (order.empty()) throw SolverError("graph is not acyclic");
  std::vector<double> pi(node_count, kInf);
  pi[s] = 0.0;
  for (std::int32_t v : order) {
    for (std::int32_t node : {FlowNetwork::in(v), FlowNetwork::out(v)}) {
      if (pi[node] == kInf) continue;
      for (std::int32_t i = net.adj_begin[node]; i < net.adj_begin[node + 1]; ++i) {
        const std::int32_t e = net.adj[i];
        if (net.cap[e] <= 0) continue;
        const double nd = pi[node] + net.cost[e];
        if (nd < pi[net.to[e]]) pi[net.to[e]] = nd;
      }
    }
  }

  PathSolution result;
  std::vector<double> dist(node_count);
  std::vector<std::int32_t> pred(node_count);
  std::vector<std::uint8_t> done(node_count);
  std::vector<std::int32_t> finalized;
  using Label = std::pair<double, std::int32_t>;
  std::priority_queue<Label, std::vector<Label>, std::greater<>> heap;

  for (int iter = 0; iter < k; ++iter) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), 0);
    finalized.clear();
    dist[s] = 0.0;
    pred[s] = -1;
    heap.push({0.0, s});
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (done[u] || d > dist[u]) continue;
      done[u] = 1;
      finalized.push_back(u);
      if (u == t) break;
      for (std::int32_t i = net.adj_begin[u]; i < net.adj_begin[u + 1]; ++i) {
        const std::int32_t e = net.adj[i];
        if (net.cap[e] <= 0) continue;
        const std::int32_t v = net.to[e];
        if (done[v] || pi[v] == kInf) continue;
        const double rc = std::max(0.0, net.cost[e] + pi[u] - pi[v]);
        const double nd = d + rc;
        if (nd < dist[v]) {
          dist[v] = nd;
          pred[v] = e;
          heap.push({nd, v});
        }
      }
    }
    while (!heap.empty()) heap.pop();
    if (!done[t]) break;

    const double path_cost = dist[t] + pi[t] - pi[s];
    if (path_cost >= -tolerance) break;

    for (std::int32_t v = t; v != s;) {
      const std::int32_t e = pred[v];
      net.push(e);
      v = net.to[e ^ 1];
    }
    ++result.augmentations;

    const double reach = dist[t];
    for (std::int32_t u = 0; u < node_count; ++u) {
      if (pi[u] == kInf) continue;
      pi[u] += done[u] ? dist[u] : reach;
    }
  }

  // Vehicles left without flow take their empty trip source -> v -> sink.
  for (std::size_t i = 0; i < graph.out_arcs(graph.source).size(); ++i) {
    const auto a = graph.out_arc_index(graph.source, i);
    const std::int32_t e = net.arc_edge[a];
    if (net.cap[e] == 0) continue;
    const std::int32_t v = graph.arcs[a].head;
    const auto back = graph.find_arc(v, graph.sink);
    if (!back) throw SolverError("vehicle vertex without a sink arc");
    if (net.cap[net.internal_edge[v]] <= 0 || net.cap[net.arc_edge[*back]] <= 0) {
      throw SolverError("empty trip unavailable for an unused vehicle");
    }
    net.push(e);
    net.push(net.internal_edge[v]);
    net.push(net.arc_edge[*back]);
  }

  result.arc_used.assign(graph.arcs.size(), 0);
  for (std::size_t i = 0; i < graph.arcs.size(); ++i) {
    if (net.cap[net.arc_edge[i]] == 0) {
      result.arc_used[i] = 1;
      result.objective += theta[i];
    }
  }
  result.paths = decompose_paths(graph, result.arc_used);
  return result;
}

bool is_feasible_solution(const DispatchGraph& graph, std::span<const std::uint8_t> arc_used, int k,
                          Disjointness mode) {
  if (arc_used.size() != graph.arcs.size()) return false;
  std::vector<int> in(graph.vertices.size(), 0), out(graph.vertices.size(), 0);
  for (std::size_t i = 0; i < graph.arcs.size(); ++i) {
    if (!arc_used[i]) continue;
    ++out[graph.arcs[i].tail];
    ++in[graph.arcs[i].head];
  }
  if (out[graph.source] != k || in[graph.sink] != k || in[graph.source] != 0) return false;
  int vehicles = 0;
  for (std::size_t v = 0; v < graph.vertices.size(); ++v) {
    const VertexKind kind = graph.vertices[v].kind;
    if (is_terminal(kind)) continue;
    if (in[v] != out[v]) return false;
    if (kind == VertexKind::Vehicle) {
      if (in[v] != 1) return false;
      ++vehicles;
    }
    if (mode == Disjointness::Vertex && in[v] > 1) return false;
  }
  if (vehicles != k) return false;
  try {
    const auto paths = decompose_paths(graph, arc_used);
    return static_cast<int>(paths.size()) == k;
  } catch (const SolverError&) {
    return false;
  }
}

bool has_optimality_certificate(const DispatchGraph& graph, std::span<const double> theta, int k,
                                Disjointness mode, const PathSolution& solution) {
  check_preconditions(graph, theta, k);
  if (!is_feasible_solution(graph, solution.arc_used, k, mode)) return false;
  FlowNetwork net(graph, theta, k, mode);
  std::vector<int> through(graph.vertices.size(), 0);
  for (std::size_t i = 0; i < graph.arcs.size(); ++i) {
    if (!solution.arc_used[i]) continue;
    net.push(net.arc_edge[i]);
    ++through[graph.arcs[i].head];
  }
  through[graph.source] = k;
  for (std::size_t v = 0; v < graph.vertices.size(); ++v) {
    for (int f = 0; f < through[v]; ++f) net.push(net.internal_edge[v]);
  }

  double scale = 1.0;
  for (double w : theta) scale = std::max(scale, std::abs(w));
  const double tolerance = 1e-9 * scale;

  const auto nodes = net.nodes();
  std::vector<double> potential(nodes, 0.0);
  for (std::size_t round = 0; round <= nodes; ++round) {
    bool changed = false;
    for (std::size_t u = 0; u < nodes; ++u) {
      for (std::int32_t i = net.adj_begin[u]; i < net.adj_begin[u + 1]; ++i) {
        const std::int32_t e = net.adj[i];
        if (net.cap[e] <= 0) continue;
        const double nd = potential[u] + net.cost[e];
        if (nd < potential[net.to[e]] - tolerance) {
          potential[net.to[e]] = nd;
          changed = true;
        }
      }
    }
    if (!changed) return true;
  }
  return false;
}

PathSolution brute_force_oracle(const DispatchGraph& graph, std::span<const double> theta, int k,
                                Disjointness mode) {
  check_preconditions(graph, theta, k);
  int non_terminal = 0;
  for (const Vertex& v : graph.vertices) non_terminal += !is_terminal(v.kind);
  if (non_terminal > 16) {
    throw SolverError("brute-force oracle limited to 16 non-terminal vertices");
  }

  struct Path {
    std::vector<std::int32_t> arcs;
    std::vector<std::int32_t> vertices;
    double value = 0.0;
  };
  std::vector<std::vector<Path>> candidates;
  for (std::size_t i = 0; i < graph.out_arcs(graph.source).size(); ++i) {
    const auto first = graph.out_arc_index(graph.source, i);
    std::vector<Path> found;
    Path current{{first}, {graph.source, graph.arcs[first].head}, theta[first]};
    std::function<void(std::int32_t)> extend = [&](std::int32_t v) {
      if (v == graph.sink) {
        found.push_back(current);
        return;
      }
      for (std::size_t j = 0; j < graph.out_arcs(v).size(); ++j) {
        const auto a = graph.out_arc_index(v, j);
        current.arcs.push_back(a);
        current.vertices.push_back(graph.arcs[a].head);
        current.value += theta[a];
        extend(graph.arcs[a].head);
        current.value -= theta[a];
        current.vertices.pop_back();
        current.arcs.pop_back();
      }
    };
    extend(graph.arcs[first].head);
    if (found.empty()) throw SolverError("vehicle without any path to the sink");
    candidates.push_back(std::move(found));
  }

  const std::size_t vehicles = candidates.size();
  std::vector<double> bound(vehicles + 1, 0.0);
  for (std::size_t i = vehicles; i-- > 0;) {
    double best = -kInf;
    for (const Path& p : candidates[i]) best = std::max(best, p.value);
    bound[i] = bound[i + 1] + best;
  }

  std::vector<std::uint8_t> vertex_used(graph.vertices.size(), 0), arc_used(graph.arcs.size(), 0);
  std::vector<std::size_t> choice(vehicles), best_choice;
  double best_value = -kInf;
  std::function<void(std::size_t, double)> search = [&](std::size_t i, double value) {
    if (i == vehicles) {
      if (value > best_value) {
        best_value = value;
        best_choice = choice;
      }
      return;
    }
    if (value + bound[i] <= best_value) return;
    for (std::size_t c = 0; c < candidates[i].size(); ++c) {
      const Path& p = candidates[i][c];
      bool clash = false;
      if (mode == Disjointness::Vertex) {
        for (std::size_t j = 1; j + 1 < p.vertices.size() && !clash; ++j) clash = vertex_used[p.vertices[j]];
      } else {
        for (std::int32_t a : p.arcs) clash = clash || arc_used[a];
      }
      if (clash) continue;
      for (std::size_t j = 1; j + 1 < p.vertices.size(); ++j) ++vertex_used[p.vertices[j]];
      for (std::int32_t a : p.arcs) ++arc_used[a];
      choice[i] = c;
      search(i + 1, value + p.value);
      for (std::size_t j = 1; j + 1 < p.vertices.size(); ++j) --vertex_used[p.vertices[j]];
      for (std::int32_t a : p.arcs) --arc_used[a];
    }
  };
  search(0, 0.0);
  if (best_choice.empty() && vehicles > 0) throw SolverError("no disjoint path tuple exists");

  PathSolution result;
  result.arc_used.assign(graph.arcs.size(), 0);
  for (std::size_t i = 0; i < vehicles; ++i) {
    for (std::int32_t a : candidates[i][best_choice[i]].arcs) result.arc_used[a] = 1;
  }
  for (std::size_t i = 0; i < graph.arcs.size(); ++i) {
    if (result.arc_used[i]) result.objective += theta[i];
  }
  for (std::size_t i = 0; i < vehicles; ++i) result.paths.push_back(candidates[i][best_choice[i]].vertices);
  return result;
}

}  // namespace amod
