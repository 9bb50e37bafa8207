#include <gtest/gtest.h>

#include <map>
#include <random>

#include "amod/demand.hpp"
#include "fixtures.hpp"

namespace amod {
namespace {

using testing::flat_world;
using testing::request_at;

const TravelTimeProvider kTT = flat_world(36.0);

// five 500 m cells in a row, 60 s bins, five bins, one day
RequestDistribution uniform_rate(double per_bin) {
  RequestDistribution d(CellGrid({0, 0, 2500, 500}, 500, 500), 60.0, 5, 1);
  for (int c = 0; c < 5; ++c) {
    for (int b = 0; b < 5; ++b) {
      auto& bin = d.bin(c, b);
      bin.total_count = static_cast<std::int64_t>(per_bin);
      bin.samples.push_back({{250, 250}, {1250, 250}, 100.0, 1.0, 4.0});
    }
  }
  d.refresh();
  return d;
}

TEST(SampleArtificial, EmptyHistogramGivesNothing) {
  RequestDistribution d(CellGrid({0, 0, 2500, 500}, 500, 500), 60.0, 5, 1);
  d.refresh();
  EXPECT_TRUE(sample_artificial_requests(d, 0.0, 300.0, 1).empty());
}

TEST(SampleArtificial, FixedSeedIsReproducible) {
  const RequestDistribution d = uniform_rate(3);
  EXPECT_EQ(sample_artificial_requests(d, 30.0, 250.0, 42), sample_artificial_requests(d, 30.0, 250.0, 42));
}

TEST(SampleArtificial, MeanCountMatchesRates) {
  const RequestDistribution d = uniform_rate(3);
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    total += static_cast<double>(sample_artificial_requests(d, 0.0, 300.0, seed).size());
  }
  EXPECT_NEAR(total / 1000.0, 75.0, 7.5);
}

TEST(SampleArtificial, AttributesAndWindow) {
  const RequestDistribution d = uniform_rate(3);
  const auto sampled = sample_artificial_requests(d, 45.0, 200.0, 9);
  ASSERT_FALSE(sampled.empty());
  RequestId expected_id = -1;
  for (const Request& r : sampled) {
    EXPECT_EQ(r.id, expected_id--);
    EXPECT_GE(r.start_time, 45.0);
    EXPECT_LT(r.start_time, 200.0);
    EXPECT_DOUBLE_EQ(r.arrival_time - r.start_time, 100.0);
    EXPECT_EQ(r.reward, 4.0);
    EXPECT_EQ(std::fmod(r.origin.x, 500.0), 250.0);
  }
  EXPECT_THROW(sample_artificial_requests(d, 10.0, 10.0, 1), std::invalid_argument);
}

TEST(Calibrate, SingleRequestIsOneUnitOfMass) {
  const CellGrid grid({0, 0, 1000, 1000}, 500, 500);
  const Request r = request_at(1, {700, 600}, {100, 100}, 30.0, 6.0, kTT);
  const std::vector<std::vector<Request>> days{{r}};
  const CalibrationResult cal = calibrate_distribution(days, grid, 60.0);
  EXPECT_EQ(cal.rejected, 0u);
  EXPECT_EQ(cal.distribution.bin(3, 0).total_count, 1);
  EXPECT_DOUBLE_EQ(cal.distribution.rate(3, 0), 1.0);
  EXPECT_DOUBLE_EQ(cal.distribution.rate(0, 0), 0.0);
  const DemandWindow w = cal.distribution.window(3, 0.0, 60.0);
  EXPECT_DOUBLE_EQ(w.count, 1.0);
  EXPECT_DOUBLE_EQ(w.mean_reward(), 6.0);
}

TEST(Calibrate, RepeatedDayDoublesCountsNotRates) {
  const CellGrid grid({0, 0, 1000, 1000}, 500, 500);
  std::vector<Request> day;
  for (int i = 0; i < 20; ++i) {
    day.push_back(request_at(i, {50.0 * i, 300.0 + 20 * i}, {900, 900}, 15.0 * i, 5.0, kTT));
  }
  const std::vector<std::vector<Request>> one{day};
  const std::vector<std::vector<Request>> two{day, day};
  const RequestDistribution a = calibrate_distribution(one, grid, 60.0).distribution;
  const RequestDistribution b = calibrate_distribution(two, grid, 60.0).distribution;
  ASSERT_EQ(a.bin_count(), b.bin_count());
  for (int c = 0; c < grid.cell_count(); ++c) {
    for (int t = 0; t < a.bin_count(); ++t) {
      EXPECT_EQ(b.bin(c, t).total_count, 2 * a.bin(c, t).total_count);
      EXPECT_DOUBLE_EQ(b.rate(c, t), a.rate(c, t));
    }
  }
}

TEST(Calibrate, OutsideOriginsAreRejected) {
  const CellGrid grid({0, 0, 1000, 1000}, 500, 500);
  const std::vector<std::vector<Request>> days{
      {request_at(1, {100, 100}, {200, 200}, 10.0, 1.0, kTT), request_at(2, {1500, 100}, {200, 200}, 10.0, 1.0, kTT)}};
  EXPECT_EQ(calibrate_distribution(days, grid, 60.0).rejected, 1u);
}

TEST(Calibrate, SampledOriginFrequenciesFollowHistory) {
  const CellGrid grid({0, 0, 1000, 1000}, 500, 500);
  const double weights[4] = {0.1, 0.2, 0.3, 0.4};
  std::mt19937_64 rng(5);
  std::discrete_distribution<int> cell(std::begin(weights), std::end(weights));
  std::uniform_real_distribution<double> inside(0.0, 500.0);
  std::uniform_real_distribution<double> when(0.0, 600.0);
  std::vector<Request> history;
  double seen[4] = {};
  for (int i = 0; i < 4000; ++i) {
    const int c = cell(rng);
    seen[c] += 1.0;
    const Location o{(c % 2) * 500.0 + inside(rng), (c / 2) * 500.0 + inside(rng)};
    history.push_back(request_at(i, o, {500, 500}, when(rng), 5.0, kTT));
  }
  const std::vector<std::vector<Request>> days{history};
  const RequestDistribution d = calibrate_distribution(days, grid, 600.0).distribution;

  std::map<int, double> counts;
  double n = 0.0;
  for (std::uint64_t seed = 0; n < 10000.0; ++seed) {
    for (const Request& r : sample_artificial_requests(d, 0.0, 600.0, seed)) {
      counts[*grid.cell_of(r.origin)] += 1.0;
      n += 1.0;
    }
  }
  double chi2 = 0.0;
  for (int c = 0; c < 4; ++c) {
    const double expected = seen[c] / 4000.0 * n;
    chi2 += (counts[c] - expected) * (counts[c] - expected) / expected;
  }
  // 3 degrees of freedom; 16.3 is the 0.999 quantile
  EXPECT_LT(chi2, 16.3);
}

}  // namespace
}  // namespace amod
