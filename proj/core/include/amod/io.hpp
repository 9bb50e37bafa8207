#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "amod/demand.hpp"
#include "amod/features.hpp"
#include "amod/geometry.hpp"
#include "amod/learning.hpp"
#include "amod/model.hpp"
#include "amod/policies.hpp"
#include "amod/simulator.hpp"
#include "amod/travel_time.hpp"

namespace amod {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

// ---- request records -------------------------------------------------------

struct LoadedRequests {
  std::vector<Request> requests;  // sorted by (start time, id)
  std::size_t rows = 0;
  std::size_t outside_area = 0;
  std::size_t thinned = 0;
};

/// Reads `id,pickup_x,pickup_y,dropoff_x,dropoff_y,start_time_s,revenue`.
/// Rows are kept with probability `density` (seeded Bernoulli thinning);
/// rows with a location outside `area` are skipped and counted. Rewards are
/// the revenue column for Profit and 1 for SatisfiedCustomers.
LoadedRequests load_requests(const std::filesystem::path& path, double density, std::uint64_t seed,
                             const Objective& objective, const TravelTimeProvider& tt, const Area& area);
LoadedRequests parse_requests(std::string_view text, double density, std::uint64_t seed,
                              const Objective& objective, const TravelTimeProvider& tt, const Area& area);

void save_requests(const std::filesystem::path& path, std::span<const Request> requests);

/// Seeded Bernoulli thinning with the same coin sequence as load_requests.
std::vector<Request> thin_requests(std::span<const Request> requests, double density, std::uint64_t seed);

// ---- structured files (JSON) -----------------------------------------------

void save_travel_times(const std::filesystem::path& path, const TravelTimeProvider& tt);
TravelTimeProvider load_travel_times(const std::filesystem::path& path);

void save_distribution(const std::filesystem::path& path, const RequestDistribution& dist);
RequestDistribution load_distribution(const std::filesystem::path& path);

void save_model(const std::filesystem::path& path, const ModelWeights& model);
ModelWeights load_model(const std::filesystem::path& path);

/// Iteration, loss and gradient norm; wall time is left out so the file is reproducible.
void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> trace);

// ---- synthetic world -------------------------------------------------------

struct SyntheticConfig {
  Area area{0.0, 0.0, 4000.0, 4000.0};
  double cell_m = 500.0;
  double speed_kmh = 20.0;
  /// Road distance over straight distance between cell centers.
  double detour = 1.3;
  double requests_per_hour = 240.0;
  double day_begin_s = 60.0;
  double day_end_s = 60.0 + 5400.0;
  double hot_cell_fraction = 0.2;
  double hot_demand_share = 0.8;
  /// Share of trips whose destination is drawn from the hot cells too.
  double hot_destination_share = 0.2;
  double base_fare = 2.5;
  double fare_per_km = 1.2;
  int days = 15;
  /// Leading days used for calibration and training; the rest are for evaluation.
  int training_days = 5;
  std::uint64_t seed = 1;
};

/// Cell-to-cell table of the synthetic world: detour * center distance at
/// `speed_kmh` for distinct cells; same-cell pairs use the fallback.
TravelTimeProvider synthetic_travel_times(const SyntheticConfig& config);
/// Cells holding `hot_demand_share` of the origins, fixed by the seed.
std::vector<int> synthetic_hot_cells(const SyntheticConfig& config);
std::vector<Request> generate_synthetic_day(const SyntheticConfig& config, int day,
                                            const TravelTimeProvider& tt);

// ---- scenario configuration ------------------------------------------------

struct TrainingBlock {
  int samples = 50;
  double sigma = 1.0;
  int max_iterations = 100;
  /// Checkpoint spacing for closed-loop selection on the training days (0: keep the last iterate).
  int checkpoint_every = 10;
  double extraction_period_s = 225.0;
  double window_begin_s = 60.0;
  double core_begin_s = 960.0;
  double core_end_s = 4560.0;
  std::optional<bool> normalize;  // default: true for cb, false for sb
};

struct ScenarioConfig {
  std::filesystem::path base_dir;  // relative paths resolve against this

  Area area{0.0, 0.0, 4000.0, 4000.0};
  double cell_m = 500.0;
  double fallback_speed_kmh = 20.0;
  double period_s = 60.0;
  int first_epoch = 16;
  int horizon_epochs = 60;
  int fleet_size = 50;
  double density = 1.0;
  Objective objective;
  std::uint64_t seed = 1;
  double distribution_bin_s = 300.0;

  std::string policy = "greedy";
  double discount = 0.2;
  double horizon_s = 600.0;
  double lookahead_s = 600.0;
  int n_capacity = 1;
  SparsifyCuts cuts;

  std::string travel_times;                   // empty: straight line at the fallback speed
  std::vector<std::string> requests;          // evaluation days
  std::vector<std::string> training_requests; // calibration and training days
  std::string distribution;
  std::string model;

  TrainingBlock training;
  std::vector<int> fleet_sizes;          // evaluate grid; empty: fleet_size
  std::vector<double> densities;         // evaluate grid; empty: density
  std::vector<std::string> policies;     // evaluate rows
  std::optional<SyntheticConfig> synthetic;

  std::filesystem::path resolve(const std::string& p) const;
  std::string canonical_json() const;
};

ScenarioConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

/// 64-bit FNV-1a over a byte string, printed as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

// ---- run outputs -----------------------------------------------------------

void write_metrics_csv(const std::filesystem::path& path, std::span<const std::string> labels,
                       std::span<const Metrics> metrics);
void write_comparison_csv(const std::filesystem::path& path, std::span<const std::string> labels,
                          std::span<const ComparisonRow> rows);
void write_snapshots_csv(const std::filesystem::path& path, std::span<const Snapshot> snapshots);

struct Manifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> entries;
};
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace amod
