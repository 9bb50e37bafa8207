#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amod/learning.hpp"
#include "amod/model.hpp"
#include "amod/policies.hpp"

namespace amod {

struct Scenario {
  /// All requests of the run, any order; each lands in the batch of the
  /// epoch containing its start time.
  std::vector<Request> requests;
  std::vector<VehicleState> fleet;
  int first_epoch = 1;
  int horizon_epochs = 60;
  double period_s = 60.0;
  PolicySpec policy;
  bool record_snapshots = false;
};

struct Snapshot {
  int epoch = 0;
  VehicleId vehicle_id = 0;
  Location location;
  VehicleStatus status = VehicleStatus::Idle;
};

struct Metrics {
  double reward = 0.0;
  double revenue = 0.0;
  std::size_t served = 0;
  std::size_t total_requests = 0;
  double service_ratio = 0.0;
  double km_total = 0.0;
  double km_empty = 0.0;
  double km_rebalancing = 0.0;
  double km_per_request = 0.0;
  double km_per_vehicle = 0.0;
  int epochs = 0;
  std::size_t violations = 0;
  /// Wall time of the policy's decide calls; not part of the deterministic output.
  double mean_decision_seconds = 0.0;
};

struct SimulationResult {
  Metrics metrics;
  std::vector<Snapshot> snapshots;
  std::vector<double> reward_per_epoch;
};

class InfeasibleDecision : public std::runtime_error {
 public:
  InfeasibleDecision(int epoch, const std::string& what);
  int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// Requests grouped into epoch batches [first, first + count).
std::vector<std::vector<Request>> batches_by_epoch(std::span<const Request> requests, double period_s,
                                                   int first_epoch, int count);

/// Closed-loop run: decide, validate, advance and account every epoch.
/// Throws InfeasibleDecision if the policy breaks a constraint.
SimulationResult run_simulation(const Scenario& scenario, const PolicyContext& ctx);

/// Metrics of the offline optimum, read off its trips; the reward is the
/// bound itself and the trips are validated against the full request set.
SimulationResult run_full_information(const Scenario& scenario, const TravelTimeProvider& tt);

struct ComparisonRow {
  std::string policy;
  Metrics metrics;
  double reward_ratio = 0.0;
  double served_ratio = 0.0;
  double km_per_request_ratio = 0.0;
  double km_per_vehicle_ratio = 0.0;
};

/// Runs each policy on the scenario's stream; ratios are relative to the
/// greedy row (computed if greedy is not in the list).
std::vector<ComparisonRow> compare_policies(const Scenario& base, std::span<const PolicySpec> policies,
                                            const PolicyContext& ctx);

struct CheckpointScore {
  int iteration = 0;
  /// Summed reward over the summed greedy reward.
  double reward_ratio = 0.0;
  double worst_day_ratio = 0.0;
};

struct CheckpointSelection {
  std::size_t best = 0;
  std::vector<CheckpointScore> scores;
};

/// Closed-loop validation of training checkpoints. Each candidate replaces
/// the weights of `model` and drives `policy` on every scenario; the highest
/// reward ratio over greedy wins, the earlier candidate on ties.
CheckpointSelection select_checkpoint(std::span<const Scenario> validation, const PolicySpec& policy,
                                      const ModelWeights& model, std::span<const Checkpoint> candidates,
                                      const PolicyContext& ctx);

/// Uniform draw of `fleet_size` positions among the given request origins.
std::vector<VehicleState> place_fleet(std::span<const Request> warmup, int fleet_size, std::uint64_t seed,
                                      const Area& fallback_area);

}  // namespace amod
