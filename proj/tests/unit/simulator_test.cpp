#include <gtest/gtest.h>

#include "amod/io.hpp"
#include "amod/simulator.hpp"
#include "fixtures.hpp"

namespace amod {
namespace {

using testing::request_at;

struct World {
  SyntheticConfig syn;
  TravelTimeProvider tt;
  RequestDistribution demand;
  std::vector<Request> day;

  World() : syn(testing::small_synthetic(9, 150.0)), tt(TravelTimeProvider::straight_line(syn.area, 20.0)) {
    syn.day_end_s = 60.0 + 1800.0;
    tt = synthetic_travel_times(syn);
    std::vector<std::vector<Request>> hist{generate_synthetic_day(syn, 0, tt), generate_synthetic_day(syn, 1, tt)};
    demand = calibrate_distribution(hist, CellGrid(syn.area, 500, 500), 300.0).distribution;
    day = generate_synthetic_day(syn, 2, tt);
  }

  Scenario scenario(PolicyKind kind, int fleet = 8) const {
    Scenario s;
    s.requests = day;
    s.fleet = place_fleet(day, fleet, 4, syn.area);
    s.first_epoch = 1;
    s.horizon_epochs = 30;
    s.policy.kind = kind;
    if (kind == PolicyKind::SampleBased) {
      ModelWeights m = ModelWeights::zeros(FeatureSchema::sample_based());
      const auto names = m.schema.feature_names();
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == "request.reward") m.w[i] = 1.0;
        if (names[i] == "deadhead.distance") m.w[i] = -0.45;
      }
      s.policy.model = m;
    }
    return s;
  }

  PolicyContext ctx() const { return {&tt, &demand}; }
};

const World& world() {
  static const World w;
  return w;
}

TEST(Batches, GroupedByStartEpoch) {
  const auto tt = testing::flat_world();
  const std::vector<Request> reqs{request_at(2, {0, 0}, {10, 0}, 130.0, 1.0, tt),
                                  request_at(1, {0, 0}, {10, 0}, 130.0, 1.0, tt),
                                  request_at(3, {0, 0}, {10, 0}, 59.0, 1.0, tt),
                                  request_at(4, {0, 0}, {10, 0}, 250.0, 1.0, tt)};
  const auto b = batches_by_epoch(reqs, 60.0, 1, 3);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_TRUE(b[0].empty());
  ASSERT_EQ(b[1].size(), 2u);
  EXPECT_EQ(b[1][0].id, 1);
  EXPECT_TRUE(b[2].empty());
}

TEST(Simulation, EmptyStream) {
  Scenario s = world().scenario(PolicyKind::Greedy);
  s.requests.clear();
  const SimulationResult r = run_simulation(s, world().ctx());
  EXPECT_EQ(r.metrics.reward, 0.0);
  EXPECT_EQ(r.metrics.served, 0u);
  EXPECT_EQ(r.metrics.km_total, 0.0);
  EXPECT_EQ(r.metrics.epochs, 30);
  EXPECT_EQ(r.reward_per_epoch.size(), 30u);
}

TEST(Simulation, SingleEpochGreedyMatchesFullInformation) {
  const World& w = world();
  Scenario s = w.scenario(PolicyKind::Greedy, 4);
  s.requests.clear();
  for (const Request& r : w.day) {
    if (r.start_time >= 60.0 && r.start_time < 120.0) s.requests.push_back(r);
  }
  ASSERT_FALSE(s.requests.empty());
  const double greedy = run_simulation(s, w.ctx()).metrics.reward;
  s.policy.kind = PolicyKind::FullInformation;
  EXPECT_NEAR(run_simulation(s, w.ctx()).metrics.reward, greedy, 1e-9);
}

TEST(Simulation, FullInformationBoundsEveryPolicy) {
  const World& w = world();
  const double fi = run_simulation(w.scenario(PolicyKind::FullInformation), w.ctx()).metrics.reward;
  for (PolicyKind k : {PolicyKind::Greedy, PolicyKind::Sampling, PolicyKind::SampleBased}) {
    const Metrics m = run_simulation(w.scenario(k), w.ctx()).metrics;
    EXPECT_LE(m.reward, fi + 1e-9) << to_string(k);
    EXPECT_EQ(m.violations, 0u);
  }
}

TEST(Simulation, RewardAccounting) {
  const World& w = world();
  for (PolicyKind k : {PolicyKind::Greedy, PolicyKind::Sampling, PolicyKind::FullInformation}) {
    const SimulationResult r = run_simulation(w.scenario(k), w.ctx());
    const Metrics& m = r.metrics;
    EXPECT_NEAR(m.reward, m.revenue - 0.45 * m.km_total, 1e-6) << to_string(k);
    double sum = 0.0;
    for (double x : r.reward_per_epoch) sum += x;
    EXPECT_NEAR(sum, m.reward, 1e-6);
    EXPECT_LE(m.served, m.total_requests);
    EXPECT_LE(m.km_rebalancing, m.km_empty + 1e-9);
  }
}

TEST(Simulation, Deterministic) {
  const World& w = world();
  Scenario s = w.scenario(PolicyKind::Sampling);
  s.record_snapshots = true;
  const SimulationResult a = run_simulation(s, w.ctx());
  const SimulationResult b = run_simulation(s, w.ctx());
  EXPECT_EQ(a.metrics.reward, b.metrics.reward);
  EXPECT_EQ(a.metrics.km_total, b.metrics.km_total);
  EXPECT_EQ(a.reward_per_epoch, b.reward_per_epoch);
  ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
  EXPECT_EQ(a.snapshots.size(), 30u * s.fleet.size());
}

TEST(Compare, GreedyRatioIsOne) {
  const World& w = world();
  const std::vector<PolicySpec> policies{PolicySpec{}, w.scenario(PolicyKind::Sampling).policy};
  const auto rows = compare_policies(w.scenario(PolicyKind::Greedy), policies, w.ctx());
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].policy, "greedy");
  EXPECT_EQ(rows[0].reward_ratio, 1.0);
  EXPECT_EQ(rows[0].served_ratio, 1.0);
}

TEST(Checkpoints, PicksTheBestClosedLoopCandidate) {
  const World& w = world();
  const Scenario sb = w.scenario(PolicyKind::SampleBased);
  const std::vector<Scenario> validation{sb};
  const ModelWeights& good = *sb.policy.model;
  const std::vector<Checkpoint> candidates{{1, good.w}, {2, std::vector<double>(good.w.size(), 0.0)}, {3, good.w}};
  const CheckpointSelection sel = select_checkpoint(validation, sb.policy, good, candidates, w.ctx());
  ASSERT_EQ(sel.scores.size(), 3u);
  // all-zero weights leave every vehicle idle
  EXPECT_EQ(sel.scores[1].reward_ratio, 0.0);
  EXPECT_EQ(sel.scores[0].reward_ratio, sel.scores[2].reward_ratio);
  EXPECT_EQ(sel.best, sel.scores[1].reward_ratio > sel.scores[0].reward_ratio ? 1u : 0u);
  EXPECT_LE(sel.scores[0].worst_day_ratio, sel.scores[0].reward_ratio + 1e-12);
  EXPECT_THROW(select_checkpoint(validation, sb.policy, good, {}, w.ctx()), std::invalid_argument);
}

TEST(PlaceFleet, DrawsFromOrigins) {
  const World& w = world();
  const auto a = place_fleet(w.day, 10, 1, w.syn.area);
  EXPECT_EQ(a, place_fleet(w.day, 10, 1, w.syn.area));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].id, static_cast<VehicleId>(i));
    EXPECT_TRUE(std::any_of(w.day.begin(), w.day.end(), [&](const Request& r) { return r.origin == a[i].location; }));
  }
  EXPECT_THROW(place_fleet(w.day, 0, 1, w.syn.area), std::invalid_argument);
}

}  // namespace
}  // namespace amod
