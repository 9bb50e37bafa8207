#pragma once

#include <optional>

namespace amod {

/// Planar position in meters (x east, y north) inside the operating area.
struct Location {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Location&, const Location&) = default;
};

double distance_m(Location a, Location b);

/// Point reached after covering `fraction` of the straight segment a -> b.
Location interpolate(Location a, Location b, double fraction);

struct Area {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  bool contains(Location l) const;

  friend bool operator==(const Area&, const Area&) = default;
};

/// Equally sized rectangular cells covering an Area. Cells are numbered
/// row-major from (x_min, y_min). Membership uses half-open intervals
/// [lo, hi); points on the outer max edge belong to the last row/column.
class CellGrid {
 public:
  CellGrid() = default;
  CellGrid(Area area, double cell_width_m, double cell_height_m);

  const Area& area() const { return area_; }
  double cell_width() const { return cell_width_; }
  double cell_height() const { return cell_height_; }
  int columns() const { return columns_; }
  int rows() const { return rows_; }
  int cell_count() const { return columns_ * rows_; }

  std::optional<int> cell_of(Location l) const;
  Location center(int cell) const;

  friend bool operator==(const CellGrid&, const CellGrid&) = default;

 private:
  Area area_{};
  double cell_width_ = 1.0;
  double cell_height_ = 1.0;
  int columns_ = 0;
  int rows_ = 0;
};

using RebalancingGrid = CellGrid;

}  // namespace amod
