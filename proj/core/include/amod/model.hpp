#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "amod/geometry.hpp"
#include "amod/travel_time.hpp"

namespace amod {

using RequestId = std::int64_t;
using VehicleId = std::int32_t;

/// A ride demand r = (origin, destination, start, arrival, reward).
/// Times are continuous seconds; `distance_km` is the served leg length.
struct Request {
  RequestId id = 0;
  Location origin;
  Location destination;
  double start_time = 0.0;
  double arrival_time = 0.0;
  double reward = 0.0;
  double distance_km = 0.0;

  double duration() const { return arrival_time - start_time; }

  friend bool operator==(const Request&, const Request&) = default;
};

/// Builds a request whose arrival time and distance come from `tt`.
Request make_request(RequestId id, Location origin, Location destination, double start_time,
                     double reward, const TravelTimeProvider& tt);

struct VehicleState {
  VehicleId id = 0;
  Location location;
  /// Unfinished request assigned earlier; at most one in this setting.
  std::optional<Request> pending;

  /// Where the vehicle becomes free: the pending drop-off, else its location.
  Location ready_location() const { return pending ? pending->destination : location; }
  /// When the vehicle becomes free given the current decision time.
  double ready_time(double decision_time) const {
    return pending ? pending->arrival_time : decision_time;
  }

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct SystemState {
  int epoch = 1;
  double period_s = 60.0;
  /// R_t: requests with start time in [epoch * period, (epoch + 1) * period).
  std::vector<Request> batch;
  std::vector<VehicleState> vehicles;

  double decision_time() const { return epoch * period_s; }
  double period_end() const { return (epoch + 1) * period_s; }

  friend bool operator==(const SystemState&, const SystemState&) = default;
};

struct VehicleDecision {
  VehicleId vehicle_id = 0;
  /// Pending requests first (in prior order), then newly assigned ones.
  std::vector<Request> trip;
  std::optional<Location> rebalance_target;

  friend bool operator==(const VehicleDecision&, const VehicleDecision&) = default;
};

/// One entry per vehicle; vehicles without an entry keep an empty trip.
struct FleetDecision {
  std::vector<VehicleDecision> vehicles;

  friend bool operator==(const FleetDecision&, const FleetDecision&) = default;
};

enum class ObjectiveMode { Profit, SatisfiedCustomers };

struct Objective {
  ObjectiveMode mode = ObjectiveMode::Profit;
  double cost_per_km = 0.45;

  static Objective profit(double cost_per_km = 0.45) { return {ObjectiveMode::Profit, cost_per_km}; }
  static Objective satisfied_customers() { return {ObjectiveMode::SatisfiedCustomers, 0.00001}; }

  /// Revenue earned for serving `r` before driving costs.
  double revenue(const Request& r) const { return mode == ObjectiveMode::Profit ? r.reward : 1.0; }

  friend bool operator==(const Objective&, const Objective&) = default;
};

/// Reward of a vehicle trip of newly served requests plus `deadhead_km` of
/// empty driving (approach legs and rebalancing).
double trip_reward(std::span<const Request> trip, double deadhead_km, const Objective& objective);

/// Arrival-on-time test shared by graph construction and validation.
inline bool reaches_in_time(double ready_time, double travel_s, double start_time) {
  return ready_time + travel_s <= start_time + 1e-9;
}

/// A decision that references unknown vehicles/requests or is otherwise
/// malformed, as opposed to one that breaks a feasibility constraint.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Constraint {
  RequestDisjointness,  // (i)
  Chaining,             // (ii)
  Reachability,         // (iii)
  PendingOrder,
};

const char* to_string(Constraint c);

struct Violation {
  Constraint constraint;
  VehicleId vehicle_id = 0;
  RequestId request_id = 0;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

ValidationReport validate_decision(const SystemState& state, const FleetDecision& decision,
                                   const TravelTimeProvider& tt);

enum class VehicleStatus { Idle, Serving, Rebalancing };

const char* to_string(VehicleStatus s);

/// Outcome of executing one vehicle decision over [now, next).
struct VehicleMotion {
  VehicleState next;
  VehicleStatus status = VehicleStatus::Idle;
  std::vector<Request> newly_served;
  double service_km = 0.0;
  double approach_km = 0.0;
  double rebalance_km = 0.0;

  double empty_km() const { return approach_km + rebalance_km; }
  double total_km() const { return service_km + approach_km + rebalance_km; }
};

VehicleMotion execute_vehicle(const VehicleState& vehicle, const VehicleDecision* decision,
                              double now, double next, const TravelTimeProvider& tt);

/// Deterministic evolution from epoch t to t + 1.
SystemState advance(const SystemState& state, const FleetDecision& decision,
                    std::vector<Request> new_requests, const TravelTimeProvider& tt);

}  // namespace amod
