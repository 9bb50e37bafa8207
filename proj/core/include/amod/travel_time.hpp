#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "amod/geometry.hpp"

namespace amod {

struct Leg {
  double seconds = 0.0;
  double km = 0.0;

  friend bool operator==(const Leg&, const Leg&) = default;
};

/// Cell-to-cell driving time/distance lookup table. Pairs inside one lookup
/// cell, pairs without a table entry, and locations outside the lookup grid
/// use the straight-line distance at the fallback speed; the latter two are
/// counted as fallbacks.
class TravelTimeProvider {
 public:
  TravelTimeProvider(CellGrid lookup, double fallback_speed_kmh);

  /// A provider whose lookup grid is a single cell, so every query is the
  /// straight-line distance at `speed_kmh`.
  static TravelTimeProvider straight_line(Area area, double speed_kmh);

  void set_entry(int from_cell, int to_cell, Leg leg);
  std::optional<Leg> entry(int from_cell, int to_cell) const;

  Leg travel(Location from, Location to) const;

  const CellGrid& grid() const { return grid_; }
  double fallback_speed_kmh() const { return fallback_speed_kmh_; }
  std::size_t entry_count() const;

  /// Number of queries answered by the fallback because the table had no entry.
  std::uint64_t fallback_count() const { return missing_->load(std::memory_order_relaxed); }

  bool same_table(const TravelTimeProvider& other) const;

 private:
  Leg straight(Location from, Location to) const;

  CellGrid grid_;
  double fallback_speed_kmh_;
  std::vector<double> seconds_;  // NaN marks a missing entry
  std::vector<double> km_;
  std::shared_ptr<std::atomic<std::uint64_t>> missing_;
};

}  // namespace amod
