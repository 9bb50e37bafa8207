#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "amod/demand.hpp"
#include "amod/digraph.hpp"
#include "amod/model.hpp"
#include "amod/travel_time.hpp"

namespace amod {

enum class FeatureGroupKind {
  OriginCell,           // cell where the path continues from (tail vertex)
  RequestCell,          // cell where the head request starts
  Request,              // head request descriptors (+ optional future-reward bins)
  Deadhead,             // empty drive to the head request (+ optional future-cost bins)
  RebalancingCell,      // head rebalancing cell state and expected tour
  RebalancingDeadhead,  // empty drive to the rebalancing cell center
  Capacity,             // capacity slot: cell state, expected tour, slot index
};

const char* to_string(FeatureGroupKind k);

struct FeatureGroup {
  FeatureGroupKind kind;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Ordered feature groups of one policy variant.
struct FeatureSchema {
  std::string name;
  GraphMode mode = GraphMode::SampleBased;
  std::vector<FeatureGroup> groups;
  bool time_bins = false;

  std::size_t size() const { return groups.empty() ? 0 : groups.back().offset + groups.back().size; }
  const FeatureGroup* group(FeatureGroupKind kind) const;
  std::vector<std::string> feature_names() const;

  /// 80 features: origin cell, request cell, request + 25 future-reward
  /// bins, deadhead + 25 future-cost bins.
  static FeatureSchema sample_based();
  /// 61 features: origin cell, request cell, request, deadhead, rebalancing
  /// cell, rebalancing deadhead, capacity slot.
  static FeatureSchema cell_based();
  /// Looks a schema up by name ("sb-v1", "cb-v1"); throws on unknown names.
  static FeatureSchema by_name(const std::string& name);

  friend bool operator==(const FeatureSchema& a, const FeatureSchema& b) { return a.name == b.name; }
};

inline constexpr int kCellStateFeatures = 8;
inline constexpr int kFutureBins = 25;
inline constexpr double kFutureBinWidth = 120.0;

/// Everything feature extraction needs besides the graph.
struct FeatureContext {
  const SystemState* state = nullptr;
  const RequestDistribution* demand = nullptr;
  const TravelTimeProvider* tt = nullptr;
  Objective objective;
  /// Window after the system period used for the estimated-future features.
  double lookahead_s = 600.0;
};

/// Computes arc features for one graph. Per-cell and per-request parts are
/// precomputed once, so repeated calls only pay for arc-specific entries.
class FeatureExtractor {
 public:
  FeatureExtractor(const FeatureSchema& schema, const DispatchGraph& graph, const FeatureContext& ctx);

  /// Arcs whose weight comes from the predictor: arcs into Request,
  /// Artificial, Rebalancing and Capacity vertices.
  bool weighted(std::size_t arc) const;
  /// Raw (unnormalized) features; `out` must have schema().size() entries.
  void compute(std::size_t arc, std::span<double> out) const;

  const FeatureSchema& schema() const { return schema_; }
  /// Locations that fell outside the demand grid (their cell features are zero).
  std::size_t outside_grid() const { return outside_grid_; }

 private:
  struct CellState {
    double values[kCellStateFeatures] = {};
  };
  struct Tour {
    double values[6] = {};
  };
  const CellState* cell_state(Location l) const;
  void fill_request(std::int32_t vertex, std::span<double> out) const;
  void fill_deadhead(const Arc& arc, std::span<double> out) const;

  FeatureSchema schema_;
  const DispatchGraph& graph_;
  FeatureContext ctx_;
  std::vector<CellState> cells_;
  std::vector<Tour> cell_tours_;
  std::vector<std::int32_t> request_cell_;  // per request index; -1 outside the grid
  std::vector<double> future_reward_;       // per request index x kFutureBins
  std::vector<double> future_cost_;
  mutable std::size_t outside_grid_ = 0;
};

/// Single-arc convenience wrapper around FeatureExtractor.
std::vector<double> compute_features(std::size_t arc, const DispatchGraph& graph,
                                     const FeatureContext& ctx, const FeatureSchema& schema);

/// Parameters of the generalized linear arc-weight model.
struct ModelWeights {
  FeatureSchema schema;
  std::vector<double> w;
  /// Per-feature divisors; empty means no normalization.
  std::vector<double> divisors;
  std::map<std::string, std::string> metadata;

  static ModelWeights zeros(const FeatureSchema& schema);
  bool normalized() const { return !divisors.empty(); }
  /// Throws std::invalid_argument if lengths or divisors are inconsistent.
  void validate() const;
  friend bool operator==(const ModelWeights&, const ModelWeights&) = default;
};

/// Feature rows of the weighted arcs of a graph, already divided by the
/// model's divisors (if any).
struct FeatureMatrix {
  std::size_t width = 0;
  std::vector<std::int32_t> arcs;
  std::vector<double> values;  // row-major, arcs.size() x width

  std::span<const double> row(std::size_t i) const { return {values.data() + i * width, width}; }
  std::size_t rows() const { return arcs.size(); }
};

FeatureMatrix feature_matrix(const DispatchGraph& graph, const FeatureContext& ctx,
                             const FeatureSchema& schema, std::span<const double> divisors = {});

/// theta_a = <w, phi(a) / divisors> on weighted arcs, 0 elsewhere.
void predict_weights(const ModelWeights& model, DispatchGraph& graph, const FeatureContext& ctx);

/// Weights from a precomputed matrix: theta_a = <w, row_a>.
std::vector<double> weights_from_matrix(const DispatchGraph& graph, const FeatureMatrix& phi,
                                        std::span<const double> w);

/// Per-feature standard deviation over the nonzero entries of several
/// matrices; features with fewer than two nonzero entries or a round-off
/// sized deviation get divisor 1.
std::vector<double> std_dev_divisors(std::span<const FeatureMatrix> matrices);

}  // namespace amod
