#include "amod/policies.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>
#include <unordered_set>

namespace amod {

const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::Greedy: return "greedy";
    case PolicyKind::Sampling: return "sampling";
    case PolicyKind::SampleBased: return "sb";
    case PolicyKind::CellBased: return "cb";
    case PolicyKind::FullInformation: return "fi";
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "greedy") return PolicyKind::Greedy;
  if (name == "sampling") return PolicyKind::Sampling;
  if (name == "sb" || name == "sample-based") return PolicyKind::SampleBased;
  if (name == "cb" || name == "cell-based") return PolicyKind::CellBased;
  if (name == "fi" || name == "full-information") return PolicyKind::FullInformation;
  throw std::invalid_argument("unknown policy: " + name);
}

void PolicySpec::validate() const {
  if (!(discount > 0.0 && discount <= 1.0)) throw std::invalid_argument("discount must lie in (0, 1]");
  if (n_capacity < 1) throw std::invalid_argument("n_capacity must be at least 1");
  if (kind == PolicyKind::Sampling || kind == PolicyKind::SampleBased || kind == PolicyKind::CellBased) {
    if (!(horizon_s > 0.0)) throw std::invalid_argument("prediction horizon must be positive");
  }
  if (kind == PolicyKind::SampleBased || kind == PolicyKind::CellBased) {
    if (!model) throw std::invalid_argument(std::string(to_string(kind)) + " policy needs a model");
    model->validate();
    const GraphMode want = kind == PolicyKind::SampleBased ? GraphMode::SampleBased : GraphMode::CellBased;
    if (model->schema.mode != want) {
      throw std::invalid_argument("model schema " + model->schema.name + " does not fit policy " +
                                  to_string(kind));
    }
  }
}

void set_reward_weights(DispatchGraph& graph, const Objective& objective, double discount) {
  graph.weights.assign(graph.arcs.size(), 0.0);
  for (std::size_t a = 0; a < graph.arcs.size(); ++a) {
    const Arc& arc = graph.arcs[a];
    const VertexKind kind = graph.vertices[arc.head].kind;
    if (kind != VertexKind::Request && kind != VertexKind::Artificial) continue;
    const Request& r = graph.request_of(arc.head);
    const double factor = kind == VertexKind::Artificial ? discount : 1.0;
    graph.weights[a] =
        factor * objective.revenue(r) - objective.cost_per_km * (arc.deadhead_km + r.distance_km);
  }
}

std::uint64_t epoch_seed(std::uint64_t policy_seed, int epoch) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = policy_seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(epoch) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Disjointness disjointness_for(GraphMode mode) {
  return mode == GraphMode::CellBased ? Disjointness::Arc : Disjointness::Vertex;
}

DispatchGraph policy_graph(const PolicySpec& policy, const SystemState& state, const PolicyContext& ctx) {
  if (!ctx.tt) throw std::invalid_argument("policy context lacks a travel-time provider");
  GraphParams params;
  params.cuts = policy.cuts;
  params.horizon_end = state.period_end() + policy.horizon_s;
  const bool needs_demand = policy.kind != PolicyKind::Greedy;
  if (needs_demand && !ctx.demand) {
    throw std::invalid_argument(std::string(to_string(policy.kind)) + " policy needs a request distribution");
  }
  FeatureContext fctx{&state, ctx.demand, ctx.tt, policy.objective, policy.lookahead_s};

  switch (policy.kind) {
    case PolicyKind::Greedy: {
      params.mode = GraphMode::Base;
      DispatchGraph g = build_graph(state, params, *ctx.tt);
      set_reward_weights(g, policy.objective);
      return g;
    }
    case PolicyKind::Sampling:
    case PolicyKind::SampleBased: {
      params.mode = GraphMode::SampleBased;
      params.sampled = sample_artificial_requests(*ctx.demand, state.period_end(), params.horizon_end,
                                                  epoch_seed(policy.seed, state.epoch));
      DispatchGraph g = build_graph(state, params, *ctx.tt);
      if (policy.kind == PolicyKind::Sampling) {
        set_reward_weights(g, policy.objective, policy.discount);
      } else {
        predict_weights(*policy.model, g, fctx);
      }
      return g;
    }
    case PolicyKind::CellBased: {
      params.mode = GraphMode::CellBased;
      params.grid = policy.grid ? *policy.grid : ctx.demand->grid();
      params.n_capacity = policy.n_capacity;
      DispatchGraph g = build_graph(state, params, *ctx.tt);
      predict_weights(*policy.model, g, fctx);
      return g;
    }
    case PolicyKind::FullInformation:
      break;
  }
  throw std::invalid_argument("the full-information policy is offline; use full_information_bound");
}

FleetDecision decode(const PathSolution& solution, const DispatchGraph& graph, const SystemState& state) {
  FleetDecision out;
  out.vehicles.resize(state.vehicles.size());
  for (std::size_t i = 0; i < state.vehicles.size(); ++i) {
    out.vehicles[i].vehicle_id = state.vehicles[i].id;
    if (state.vehicles[i].pending) out.vehicles[i].trip.push_back(*state.vehicles[i].pending);
  }
  for (const auto& path : solution.paths) {
    if (path.size() < 2 || graph.vertices[path[1]].kind != VertexKind::Vehicle) {
      throw StructuralError("path does not start with a vehicle vertex");
    }
    const std::int32_t ref = graph.vertices[path[1]].ref;
    if (ref < 0 || static_cast<std::size_t>(ref) >= state.vehicles.size() ||
        graph.vehicle_ids[ref] != state.vehicles[ref].id) {
      throw StructuralError("graph vehicle does not belong to this state");
    }
    VehicleDecision& vd = out.vehicles[ref];
    for (std::size_t j = 2; j + 1 < path.size(); ++j) {
      const Vertex& v = graph.vertices[path[j]];
      if (v.kind == VertexKind::Request && !vd.rebalance_target) {
        vd.trip.push_back(graph.requests[v.ref]);
      } else if (v.kind == VertexKind::Artificial && !vd.rebalance_target) {
        vd.rebalance_target = graph.requests[v.ref].origin;
      } else if (v.kind == VertexKind::Rebalancing && !vd.rebalance_target) {
        vd.rebalance_target = v.location;
      }
    }
  }
  return out;
}

FleetDecision decide(const PolicySpec& policy, const SystemState& state, const PolicyContext& ctx) {
  const DispatchGraph g = policy_graph(policy, state, ctx);
  const PathSolution sol = solve(g, g.vehicle_count, disjointness_for(g.mode));
  return decode(sol, g, state);
}

FullInfoResult full_information_bound(std::span<const Request> requests,
                                      std::span<const VehicleState> fleet, const Objective& objective,
                                      const TravelTimeProvider& tt, double period_s, int first_epoch,
                                      const SparsifyCuts& cuts) {
  FullInfoResult out;
  out.trips.resize(fleet.size());
  if (fleet.empty()) return out;

  SystemState state;
  state.epoch = first_epoch;
  state.period_s = period_s;
  state.vehicles.assign(fleet.begin(), fleet.end());
  for (const Request& r : requests) {
    if (r.start_time < state.decision_time()) {
      throw std::invalid_argument("request starts before the first decision time");
    }
    state.batch.push_back(r);
  }
  GraphParams params;
  params.mode = GraphMode::Base;
  params.cuts = cuts;
  DispatchGraph g = build_graph(state, params, tt);
  set_reward_weights(g, objective);
  out.arc_count = g.arcs.size();

  const auto t0 = std::chrono::steady_clock::now();
  const PathSolution sol = solve(g, g.vehicle_count, Disjointness::Vertex);
  out.solve_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.bound = sol.objective;

  for (const auto& path : sol.paths) {
    const std::int32_t ref = g.vertices[path[1]].ref;
    Location cursor = fleet[ref].ready_location();
    for (std::size_t j = 2; j + 1 < path.size(); ++j) {
      const Request& r = g.request_of(path[j]);
      out.trips[ref].push_back(r);
      out.approach_km += tt.travel(cursor, r.origin).km;
      out.service_km += r.distance_km;
      cursor = r.destination;
      ++out.served;
    }
  }
  return out;
}

FleetDecision follow_trips(std::span<const std::vector<Request>> trips, const SystemState& state,
                           const TravelTimeProvider& tt, bool rebalance) {
  if (trips.size() != state.vehicles.size()) {
    throw std::invalid_argument("one offline trip per vehicle required");
  }
  std::unordered_set<RequestId> in_batch;
  for (const Request& r : state.batch) in_batch.insert(r.id);

  const double now = state.decision_time();
  const double end = state.period_end();
  FleetDecision out;
  for (std::size_t i = 0; i < state.vehicles.size(); ++i) {
    const VehicleState& v = state.vehicles[i];
    VehicleDecision vd;
    vd.vehicle_id = v.id;
    if (v.pending) vd.trip.push_back(*v.pending);
    Location cursor = v.ready_location();
    double cursor_time = v.ready_time(now);
    const Request* next = nullptr;
    for (const Request& r : trips[i]) {
      if (r.start_time >= end) {
        next = &r;
        break;
      }
      if (r.start_time < now || !in_batch.contains(r.id)) continue;
      if (!reaches_in_time(cursor_time, tt.travel(cursor, r.origin).seconds, r.start_time)) continue;
      vd.trip.push_back(r);
      cursor = r.destination;
      cursor_time = r.arrival_time;
    }
    if (rebalance && next && !(next->origin == cursor)) {
      // leave in the last period that still reaches the pickup on time
      const double latest_departure = next->start_time - tt.travel(cursor, next->origin).seconds;
      if (latest_departure < end + state.period_s) vd.rebalance_target = next->origin;
    }
    out.vehicles.push_back(std::move(vd));
  }
  return out;
}

}  // namespace amod
