#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amod/demand.hpp"
#include "amod/digraph.hpp"
#include "amod/features.hpp"
#include "amod/kdspp.hpp"
#include "amod/model.hpp"

namespace amod {

enum class PolicyKind { Greedy, Sampling, SampleBased, CellBased, FullInformation };

const char* to_string(PolicyKind k);
/// Accepts "greedy", "sampling", "sb", "cb", "fi" and the long names.
PolicyKind policy_kind_from_string(const std::string& name);

struct PolicySpec {
  PolicyKind kind = PolicyKind::Greedy;
  Objective objective;
  SparsifyCuts cuts;
  std::uint64_t seed = 1;
  /// Sampling policy: multiplier on the revenue of sampled requests.
  double discount = 0.2;
  /// Prediction horizon length after the end of the system period (s).
  double horizon_s = 600.0;
  /// Window for the estimated-future features (s).
  double lookahead_s = 600.0;
  std::optional<ModelWeights> model;
  std::optional<CellGrid> grid;
  int n_capacity = 1;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

/// Shared inputs that do not change between epochs.
struct PolicyContext {
  const TravelTimeProvider* tt = nullptr;
  const RequestDistribution* demand = nullptr;
};

/// Reward-based weights: on arcs into real and sampled requests,
/// revenue * factor - cost_per_km * (deadhead_km + service_km), where factor
/// is `discount` for sampled requests and 1 otherwise. Other arcs get 0.
void set_reward_weights(DispatchGraph& graph, const Objective& objective, double discount = 1.0);

/// Seed of the artificial-request draw of `epoch` for a policy seed.
std::uint64_t epoch_seed(std::uint64_t policy_seed, int epoch);

/// Builds the policy's digraph for `state` with weights filled in.
DispatchGraph policy_graph(const PolicySpec& policy, const SystemState& state, const PolicyContext& ctx);

Disjointness disjointness_for(GraphMode mode);

FleetDecision decode(const PathSolution& solution, const DispatchGraph& graph, const SystemState& state);

/// One online decision. FullInformation is offline and rejected here.
FleetDecision decide(const PolicySpec& policy, const SystemState& state, const PolicyContext& ctx);

struct FullInfoResult {
  double bound = 0.0;
  /// Offline trip per vehicle, indexed like the initial fleet.
  std::vector<std::vector<Request>> trips;
  std::size_t served = 0;
  double service_km = 0.0;
  double approach_km = 0.0;
  std::size_t arc_count = 0;
  double solve_seconds = 0.0;
};

/// Offline optimum with every request known at the first decision time.
FullInfoResult full_information_bound(std::span<const Request> requests,
                                      std::span<const VehicleState> fleet, const Objective& objective,
                                      const TravelTimeProvider& tt, double period_s, int first_epoch,
                                      const SparsifyCuts& cuts = {});

/// Decision that follows precomputed offline trips from `state`: batch
/// requests of each vehicle's trip that are still feasible, then (if
/// `rebalance`) a move toward the origin of its next trip request, started
/// in the last period from which it is reached on time.
FleetDecision follow_trips(std::span<const std::vector<Request>> trips, const SystemState& state,
                           const TravelTimeProvider& tt, bool rebalance);

}  // namespace amod
