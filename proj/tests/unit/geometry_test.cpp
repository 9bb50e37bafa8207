#include <gtest/gtest.h>

#include "amod/geometry.hpp"
#include "amod/travel_time.hpp"

namespace amod {
namespace {

TEST(Geometry, DistanceAndInterpolation) {
  EXPECT_DOUBLE_EQ(distance_m({0, 0}, {300, 400}), 500.0);
  const Location mid = interpolate({0, 0}, {100, 200}, 0.25);
  EXPECT_DOUBLE_EQ(mid.x, 25.0);
  EXPECT_DOUBLE_EQ(mid.y, 50.0);
}

TEST(CellGrid, RowMajorHalfOpenCells) {
  const CellGrid grid({0, 0, 2000, 1000}, 500, 500);
  EXPECT_EQ(grid.columns(), 4);
  EXPECT_EQ(grid.rows(), 2);
  EXPECT_EQ(grid.cell_of({0, 0}), 0);
  EXPECT_EQ(grid.cell_of({499.999, 0}), 0);
  EXPECT_EQ(grid.cell_of({500, 0}), 1);
  EXPECT_EQ(grid.cell_of({10, 500}), 4);
  // the outer max edge belongs to the last row and column
  EXPECT_EQ(grid.cell_of({2000, 1000}), 7);
  EXPECT_FALSE(grid.cell_of({2000.5, 10}).has_value());
  EXPECT_FALSE(grid.cell_of({-1, 10}).has_value());
  const Location c = grid.center(5);
  EXPECT_DOUBLE_EQ(c.x, 750.0);
  EXPECT_DOUBLE_EQ(c.y, 750.0);
}

TEST(TravelTime, SameLocationIsFree) {
  const TravelTimeProvider tt(CellGrid({0, 0, 4000, 4000}, 500, 500), 20.0);
  const Leg leg = tt.travel({1234, 567}, {1234, 567});
  EXPECT_EQ(leg.seconds, 0.0);
  EXPECT_EQ(leg.km, 0.0);
}

TEST(TravelTime, SameCellUsesFallbackSpeed) {
  const TravelTimeProvider tt(CellGrid({0, 0, 4000, 4000}, 2000, 2000), 20.0);
  const Leg leg = tt.travel({100, 100}, {1100, 100});
  EXPECT_NEAR(leg.km, 1.0, 1e-12);
  EXPECT_NEAR(leg.seconds, 180.0, 1e-9);
  EXPECT_EQ(tt.fallback_count(), 0u);
}

TEST(TravelTime, TableEntryAndMissingFallback) {
  TravelTimeProvider tt(CellGrid({0, 0, 1000, 1000}, 500, 500), 36.0);
  tt.set_entry(0, 3, {321.5, 2.75});
  const Leg hit = tt.travel({10, 10}, {900, 900});
  EXPECT_EQ(hit.seconds, 321.5);
  EXPECT_EQ(hit.km, 2.75);
  EXPECT_EQ(tt.entry_count(), 1u);

  const Leg miss = tt.travel({10, 10}, {900, 10});
  EXPECT_NEAR(miss.km, 0.89, 1e-12);
  EXPECT_NEAR(miss.seconds, 89.0, 1e-9);
  EXPECT_EQ(tt.fallback_count(), 1u);
}

TEST(TravelTime, StraightLineProvider) {
  const auto tt = TravelTimeProvider::straight_line({0, 0, 4000, 4000}, 36.0);
  const Leg leg = tt.travel({0, 0}, {3000, 4000});
  EXPECT_NEAR(leg.km, 5.0, 1e-12);
  EXPECT_NEAR(leg.seconds, 500.0, 1e-9);
}

}  // namespace
}  // namespace amod
