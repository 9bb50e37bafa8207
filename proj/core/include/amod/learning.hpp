#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "amod/digraph.hpp"
#include "amod/features.hpp"
#include "amod/kdspp.hpp"
#include "amod/policies.hpp"

namespace amod {

/// One imitation example: a policy digraph, its weighted-arc feature rows
/// (raw, unnormalized) and the arcs of the full-information target.
struct TrainingInstance {
  DispatchGraph graph;
  FeatureMatrix phi;
  std::vector<std::uint8_t> target;
  Disjointness mode = Disjointness::Vertex;
  int day = 0;
  int epoch = 0;

  int k() const { return graph.vehicle_count; }
};

/// Fixed Gaussian draws Z_1..Z_M added to w (common random numbers).
struct PerturbationSet {
  double sigma = 1.0;
  std::uint64_t seed = 0;
  std::vector<std::vector<double>> z;

  static PerturbationSet draw(std::size_t dim, int samples, double sigma, std::uint64_t seed);
  /// A single all-zero perturbation (plain Fenchel-Young loss).
  static PerturbationSet none(std::size_t dim);
  std::size_t size() const { return z.size(); }
};

struct LossGradient {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Phi^T y restricted to the weighted arcs of `phi`.
std::vector<double> solution_features(const FeatureMatrix& phi, std::span<const std::uint8_t> arc_used);

/// SAA perturbed loss (1/M) sum_m max_y theta(w + Z_m)^T y - theta(w)^T y*
/// and its gradient (1/M) sum_m Phi^T yhat_m - Phi^T y*.
LossGradient perturbed_loss_and_gradient(std::span<const double> w, const TrainingInstance& instance,
                                         const PerturbationSet& perturbations);

/// Mean over instances, summed in instance order.
LossGradient mean_loss_and_gradient(std::span<const double> w, std::span<const TrainingInstance> instances,
                                    const PerturbationSet& perturbations);

struct TrainConfig {
  int samples = 50;
  double sigma = 1.0;
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;
  std::uint64_t seed = 7;
  /// Divide features by their standard deviation over the training rows.
  bool normalize = false;
  /// Keep the iterate every this many iterations (0: none).
  int checkpoint_every = 0;
};

struct TraceRow {
  int iteration = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double seconds = 0.0;
};

struct Checkpoint {
  int iteration = 0;
  std::vector<double> w;
};

struct TrainResult {
  ModelWeights model;
  std::vector<Checkpoint> checkpoints;
  std::vector<TraceRow> trace;
  std::string stop_reason;
  int evaluations = 0;
};

/// Minimizes the mean SAA loss with BFGS from w = 0 (or `start`).
TrainResult train(std::span<const TrainingInstance> instances, const FeatureSchema& schema,
                  const TrainConfig& config, std::span<const double> start = {});

struct TrainingDay {
  std::vector<Request> requests;
  std::vector<VehicleState> fleet;
};

struct TrainingSetConfig {
  double period_s = 60.0;
  /// First decision time of the day's replay; requests before it are ignored.
  double window_begin_s = 0.0;
  double core_begin_s = 0.0;
  double core_end_s = 3600.0;
  double extraction_period_s = 225.0;
};

/// Replays each day's full-information solution through advance() and, every
/// extraction period within the core window, labels the policy digraph of
/// that epoch with the offline decisions. `variant` selects the digraph
/// (SampleBased or CellBased) and supplies horizon, cuts and seed.
std::vector<TrainingInstance> build_training_set(std::span<const TrainingDay> days,
                                                 const PolicySpec& variant, const PolicyContext& ctx,
                                                 const TrainingSetConfig& config);

/// Arc indicator of the offline decision `decision` on `graph`, with the
/// next offline pickup of each vehicle mapped onto the digraph's rebalancing
/// options: the artificial request nearest to it, or the rebalancing cell
/// containing it. Vehicles already nearer (or in that cell) stay put.
std::vector<std::uint8_t> label_decision(const DispatchGraph& graph, const SystemState& state,
                                         const FleetDecision& decision,
                                         std::span<const std::vector<Request>> trips);

}  // namespace amod
