#include "amod/model.hpp"

#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace amod {

Request make_request(RequestId id, Location origin, Location destination, double start_time,
                     double reward, const TravelTimeProvider& tt) {
  const Leg leg = tt.travel(origin, destination);
  Request r;
  r.id = id;
  r.origin = origin;
  r.destination = destination;
  r.start_time = start_time;
  r.arrival_time = start_time + leg.seconds;
  r.reward = reward;
  r.distance_km = leg.km;
  return r;
}

double trip_reward(std::span<const Request> trip, double deadhead_km, const Objective& objective) {
  if (trip.empty() && deadhead_km == 0.0) return 0.0;
  double served_km = 0.0;
  double revenue = 0.0;
  for (const Request& r : trip) {
    served_km += r.distance_km;
    revenue += objective.revenue(r);
  }
  if (objective.mode == ObjectiveMode::SatisfiedCustomers) {
    revenue = static_cast<double>(trip.size());
  }
  return revenue - objective.cost_per_km * (served_km + deadhead_km);
}

const char* to_string(Constraint c) {
  switch (c) {
    case Constraint::RequestDisjointness: return "request-disjointness";
    case Constraint::Chaining: return "chaining";
    case Constraint::Reachability: return "reachability";
    case Constraint::PendingOrder: return "pending-order";
  }
  return "unknown";
}

const char* to_string(VehicleStatus s) {
  switch (s) {
    case VehicleStatus::Idle: return "idle";
    case VehicleStatus::Serving: return "serving";
    case VehicleStatus::Rebalancing: return "rebalancing";
  }
  return "unknown";
}

std::string ValidationReport::summary() const {
  if (ok()) return "ok";
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    const auto& v = violations[i];
    if (i) out << "; ";
    out << to_string(v.constraint) << " (vehicle=" << v.vehicle_id << ", request=" << v.request_id
        << ")";
    if (!v.detail.empty()) out << ": " << v.detail;
  }
  return out.str();
}

ValidationReport validate_decision(const SystemState& state, const FleetDecision& decision,
                                   const TravelTimeProvider& tt) {
  std::unordered_map<VehicleId, std::size_t> vehicle_index;
  std::unordered_map<RequestId, VehicleId> pending_owner;
  for (std::size_t i = 0; i < state.vehicles.size(); ++i) {
    const auto& v = state.vehicles[i];
    vehicle_index.emplace(v.id, i);
    if (v.pending) pending_owner.emplace(v.pending->id, v.id);
  }
  std::unordered_map<RequestId, const Request*> batch;
  for (const Request& r : state.batch) batch.emplace(r.id, &r);

  ValidationReport report;
  auto violate = [&](Constraint c, VehicleId v, RequestId r, std::string detail) {
    report.violations.push_back({c, v, r, std::move(detail)});
  };

  std::vector<bool> seen_vehicle(state.vehicles.size(), false);
  std::unordered_set<RequestId> used;
  const double now = state.decision_time();

  for (const VehicleDecision& vd : decision.vehicles) {
    const auto it = vehicle_index.find(vd.vehicle_id);
    if (it == vehicle_index.end()) {
      throw StructuralError("decision references unknown vehicle " + std::to_string(vd.vehicle_id));
    }
    if (seen_vehicle[it->second]) {
      throw StructuralError("vehicle " + std::to_string(vd.vehicle_id) + " has two decisions");
    }
    seen_vehicle[it->second] = true;
    const VehicleState& vehicle = state.vehicles[it->second];

    std::size_t pos = 0;
    if (vehicle.pending) {
      if (vd.trip.empty() || vd.trip.front().id != vehicle.pending->id) {
        violate(Constraint::PendingOrder, vehicle.id, vehicle.pending->id,
                "pending request must lead the trip");
      } else {
        pos = 1;
        if (!used.insert(vehicle.pending->id).second) {
          violate(Constraint::RequestDisjointness, vehicle.id, vehicle.pending->id, "");
        }
      }
    }

    Location cursor = vehicle.ready_location();
    double cursor_time = vehicle.ready_time(now);
    bool first_new = !vehicle.pending.has_value();

    for (; pos < vd.trip.size(); ++pos) {
      const Request& r = vd.trip[pos];
      if (const auto b = batch.find(r.id); b != batch.end()) {
        if (!(*b->second == r)) {
          throw StructuralError("request " + std::to_string(r.id) + " differs from the batch record");
        }
      } else if (pending_owner.contains(r.id)) {
        violate(Constraint::PendingOrder, vehicle.id, r.id, "pending request out of place");
        continue;
      } else {
        throw StructuralError("decision references unknown request " + std::to_string(r.id));
      }

      if (!used.insert(r.id).second) {
        violate(Constraint::RequestDisjointness, vehicle.id, r.id, "request assigned twice");
      }
      const Leg leg = tt.travel(cursor, r.origin);
      if (!reaches_in_time(cursor_time, leg.seconds, r.start_time)) {
        std::ostringstream detail;
        detail << cursor_time << " + " << leg.seconds << " > " << r.start_time;
        violate(first_new ? Constraint::Reachability : Constraint::Chaining, vehicle.id, r.id,
                detail.str());
      }
      cursor = r.destination;
      cursor_time = r.arrival_time;
      first_new = false;
    }
  }
  return report;
}

VehicleMotion execute_vehicle(const VehicleState& vehicle, const VehicleDecision* decision,
                              double now, double next, const TravelTimeProvider& tt) {
  VehicleMotion m;
  m.next.id = vehicle.id;

  Location cursor = vehicle.ready_location();
  double cursor_time = vehicle.ready_time(now);
  const Request* last = vehicle.pending ? &*vehicle.pending : nullptr;

  if (decision) {
    std::size_t pos = 0;
    if (vehicle.pending && !decision->trip.empty() && decision->trip.front().id == vehicle.pending->id) {
      pos = 1;
    }
    for (; pos < decision->trip.size(); ++pos) {
      const Request& r = decision->trip[pos];
      m.approach_km += tt.travel(cursor, r.origin).km;
      m.service_km += r.distance_km;
      m.newly_served.push_back(r);
      cursor = r.destination;
      cursor_time = r.arrival_time;
      last = &r;
    }
  }

  if (last && last->arrival_time > next) {
    m.next.pending = *last;
    m.next.location = next >= last->start_time ? last->destination : last->origin;
    m.status = VehicleStatus::Serving;
    return m;
  }

  Location position = cursor;
  const double free_from = std::max(cursor_time, now);
  if (decision && decision->rebalance_target && !(*decision->rebalance_target == position)) {
    const Location target = *decision->rebalance_target;
    const Leg leg = tt.travel(position, target);
    const double available = std::max(0.0, next - free_from);
    if (leg.seconds <= available) {
      position = target;
      m.rebalance_km = leg.km;
    } else {
      const double fraction = available / leg.seconds;
      position = interpolate(position, target, fraction);
      m.rebalance_km = fraction * leg.km;
      m.status = VehicleStatus::Rebalancing;
    }
  }
  m.next.location = position;
  return m;
}

SystemState advance(const SystemState& state, const FleetDecision& decision,
                    std::vector<Request> new_requests, const TravelTimeProvider& tt) {
  std::unordered_map<VehicleId, const VehicleDecision*> by_vehicle;
  for (const auto& vd : decision.vehicles) by_vehicle.emplace(vd.vehicle_id, &vd);

  SystemState next;
  next.epoch = state.epoch + 1;
  next.period_s = state.period_s;
  next.batch = std::move(new_requests);
  next.vehicles.reserve(state.vehicles.size());
  for (const VehicleState& v : state.vehicles) {
    const auto it = by_vehicle.find(v.id);
    const VehicleDecision* vd = it == by_vehicle.end() ? nullptr : it->second;
    next.vehicles.push_back(
        execute_vehicle(v, vd, state.decision_time(), state.period_end(), tt).next);
  }
  return next;
}

}  // namespace amod
