#include "amod/travel_time.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace amod {

namespace {
constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
}

TravelTimeProvider::TravelTimeProvider(CellGrid lookup, double fallback_speed_kmh)
    : grid_(lookup),
      fallback_speed_kmh_(fallback_speed_kmh),
      missing_(std::make_shared<std::atomic<std::uint64_t>>(0)) {
  if (!(fallback_speed_kmh > 0.0)) throw std::invalid_argument("fallback speed must be positive");
  const auto n = static_cast<std::size_t>(grid_.cell_count());
  seconds_.assign(n * n, kMissing);
  km_.assign(n * n, kMissing);
}

TravelTimeProvider TravelTimeProvider::straight_line(Area area, double speed_kmh) {
  return TravelTimeProvider(CellGrid(area, area.width(), area.height()), speed_kmh);
}

void TravelTimeProvider::set_entry(int from_cell, int to_cell, Leg leg) {
  const int n = grid_.cell_count();
  if (from_cell < 0 || to_cell < 0 || from_cell >= n || to_cell >= n) {
    throw std::out_of_range("travel-time cell index out of range");
  }
  if (!(leg.seconds >= 0.0) || !(leg.km >= 0.0)) {
    throw std::invalid_argument("travel-time entries must be non-negative");
  }
  const auto idx = static_cast<std::size_t>(from_cell) * n + to_cell;
  seconds_[idx] = leg.seconds;
  km_[idx] = leg.km;
}

std::optional<Leg> TravelTimeProvider::entry(int from_cell, int to_cell) const {
  const int n = grid_.cell_count();
  const auto idx = static_cast<std::size_t>(from_cell) * n + to_cell;
  if (std::isnan(seconds_[idx])) return std::nullopt;
  return Leg{seconds_[idx], km_[idx]};
}

std::size_t TravelTimeProvider::entry_count() const {
  std::size_t count = 0;
  for (double s : seconds_) count += std::isnan(s) ? 0 : 1;
  return count;
}

Leg TravelTimeProvider::straight(Location from, Location to) const {
  const double km = distance_m(from, to) / 1000.0;
  return {km / fallback_speed_kmh_ * 3600.0, km};
}

Leg TravelTimeProvider::travel(Location from, Location to) const {
  if (from == to) return {};
  const auto a = grid_.cell_of(from);
  const auto b = grid_.cell_of(to);
  if (!a || !b) {
    missing_->fetch_add(1, std::memory_order_relaxed);
    return straight(from, to);
  }
  if (*a == *b) return straight(from, to);
  const auto idx = static_cast<std::size_t>(*a) * grid_.cell_count() + *b;
  if (std::isnan(seconds_[idx])) {
    missing_->fetch_add(1, std::memory_order_relaxed);
    return straight(from, to);
  }
  return {seconds_[idx], km_[idx]};
}

bool TravelTimeProvider::same_table(const TravelTimeProvider& other) const {
  if (!(grid_ == other.grid_) || fallback_speed_kmh_ != other.fallback_speed_kmh_) return false;
  if (seconds_.size() != other.seconds_.size()) return false;
  for (std::size_t i = 0; i < seconds_.size(); ++i) {
    const bool a_missing = std::isnan(seconds_[i]);
    const bool b_missing = std::isnan(other.seconds_[i]);
    if (a_missing != b_missing) return false;
    if (!a_missing && (seconds_[i] != other.seconds_[i] || km_[i] != other.km_[i])) return false;
  }
  return true;
}

}  // namespace amod
