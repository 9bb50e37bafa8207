#include "amod/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace amod {

double distance_m(Location a, Location b) { return std::hypot(a.x - b.x, a.y - b.y); }

Location interpolate(Location a, Location b, double fraction) {
  return {a.x + (b.x - a.x) * fraction, a.y + (b.y - a.y) * fraction};
}

bool Area::contains(Location l) const {
  return std::isfinite(l.x) && std::isfinite(l.y) && l.x >= x_min && l.x <= x_max && l.y >= y_min &&
         l.y <= y_max;
}

CellGrid::CellGrid(Area area, double cell_width_m, double cell_height_m)
    : area_(area), cell_width_(cell_width_m), cell_height_(cell_height_m) {
  if (!(cell_width_m > 0.0) || !(cell_height_m > 0.0)) {
    throw std::invalid_argument("cell dimensions must be positive");
  }
  if (!(area.width() > 0.0) || !(area.height() > 0.0)) {
    throw std::invalid_argument("operating area must have positive extent");
  }
  columns_ = static_cast<int>(std::ceil(area.width() / cell_width_m - 1e-9));
  rows_ = static_cast<int>(std::ceil(area.height() / cell_height_m - 1e-9));
  if (columns_ < 1) columns_ = 1;
  if (rows_ < 1) rows_ = 1;
}

std::optional<int> CellGrid::cell_of(Location l) const {
  if (!area_.contains(l)) return std::nullopt;
  int col = static_cast<int>(std::floor((l.x - area_.x_min) / cell_width_));
  int row = static_cast<int>(std::floor((l.y - area_.y_min) / cell_height_));
  if (col >= columns_) col = columns_ - 1;
  if (row >= rows_) row = rows_ - 1;
  return row * columns_ + col;
}

Location CellGrid::center(int cell) const {
  const int col = cell % columns_;
  const int row = cell / columns_;
  return {area_.x_min + (col + 0.5) * cell_width_, area_.y_min + (row + 0.5) * cell_height_};
}

}  // namespace amod
