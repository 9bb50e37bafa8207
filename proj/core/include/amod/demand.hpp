#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "amod/geometry.hpp"
#include "amod/model.hpp"

namespace amod {

/// One historical request, stored relative to its origin cell.
struct DemandSample {
  Location origin_offset;  // origin minus the origin cell's lower-left corner
  Location destination;
  double duration_s = 0.0;
  double distance_km = 0.0;
  double reward = 0.0;

  friend bool operator==(const DemandSample&, const DemandSample&) = default;
};

/// Expected demand aggregated over a cell and a time window.
struct DemandWindow {
  double count = 0.0;     // expected number of starting requests
  double reward = 0.0;    // expected summed reward
  double duration = 0.0;  // expected summed duration (s)
  double distance = 0.0;  // expected summed distance (km)
  Location origin;        // expectation-weighted mean origin (cell center if count == 0)

  double mean_reward() const { return count > 0.0 ? reward / count : 0.0; }
  double mean_duration() const { return count > 0.0 ? duration / count : 0.0; }
  double mean_distance() const { return count > 0.0 ? distance / count : 0.0; }
};

/// Empirical per-(cell, time bin) request histograms calibrated from
/// historical days. Arrival counts are Poisson with the per-day mean of the
/// bin; attributes are drawn from the bin's stored samples. Times past the
/// last bin reuse the last bin.
class RequestDistribution {
 public:
  struct Bin {
    std::int64_t total_count = 0;  // over all calibration days
    std::vector<DemandSample> samples;

    friend bool operator==(const Bin&, const Bin&) = default;
  };

  RequestDistribution() = default;
  RequestDistribution(CellGrid grid, double bin_width_s, int bin_count, int days);

  const CellGrid& grid() const { return grid_; }
  double bin_width() const { return bin_width_; }
  int bin_count() const { return bin_count_; }
  int days() const { return days_; }

  const Bin& bin(int cell, int bin) const;
  Bin& bin(int cell, int bin);

  /// Mean number of requests per day starting in (cell, bin).
  double rate(int cell, int bin) const;

  int clamp_bin(double time) const;

  DemandWindow window(int cell, double t0, double t1) const;
  /// Expected number of requests ending in `cell` among those starting in [t0, t1).
  double expected_arrivals(int cell, double t0, double t1) const;

  /// Recomputes the cached per-bin summaries; call after editing bins.
  void refresh();

  friend bool operator==(const RequestDistribution& a, const RequestDistribution& b) {
    return a.grid_ == b.grid_ && a.bin_width_ == b.bin_width_ && a.bin_count_ == b.bin_count_ &&
           a.days_ == b.days_ && a.bins_ == b.bins_;
  }

 private:
  struct Summary {
    double rate = 0.0;
    double mean_reward = 0.0;
    double mean_duration = 0.0;
    double mean_distance = 0.0;
    Location mean_origin;
  };

  template <typename Fn>
  void for_each_overlap(double t0, double t1, Fn&& fn) const;

  CellGrid grid_;
  double bin_width_ = 300.0;
  int bin_count_ = 0;
  int days_ = 0;
  std::vector<Bin> bins_;              // cell-major
  std::vector<Summary> summary_;       // cell-major
  std::vector<double> arrival_rate_;   // bin-major over destination cells
};

struct CalibrationResult {
  RequestDistribution distribution;
  std::size_t rejected = 0;  // requests whose origin lies outside the grid
};

/// Builds histograms from historical days; each inner vector is one day.
CalibrationResult calibrate_distribution(std::span<const std::vector<Request>> days,
                                         const CellGrid& grid, double bin_width_s);

/// Draws artificial requests with start times in [t_lo, t_hi). Artificial
/// request ids are negative and count down from -1.
std::vector<Request> sample_artificial_requests(const RequestDistribution& dist, double t_lo,
                                                double t_hi, std::uint64_t seed);

}  // namespace amod
