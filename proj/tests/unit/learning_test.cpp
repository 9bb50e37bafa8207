#include <gtest/gtest.h>

#include <cmath>

#include "amod/io.hpp"
#include "amod/learning.hpp"
#include "amod/simulator.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace amod {
namespace {

using testing::random_instance;

double loss_at(std::span<const double> w, const TrainingInstance& inst, const PerturbationSet& z) {
  return perturbed_loss_and_gradient(w, inst, z).loss;
}

std::vector<double> some_w(std::size_t n, double shift) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = std::sin(1.7 * static_cast<double>(i) + shift);
  return w;
}

TEST(PerturbedLoss, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const TrainingInstance inst = random_instance(seed, 3, 9, 4);
    const PerturbationSet z = PerturbationSet::draw(4, 6, 0.5, seed);
    const std::vector<double> w = some_w(4, static_cast<double>(seed));
    const LossGradient lg = perturbed_loss_and_gradient(w, inst, z);
    const auto fd = testing::central_differences([&](std::span<const double> x) { return loss_at(x, inst, z); }, w, 1e-5);
    EXPECT_LT(testing::max_relative_error(lg.grad, fd), 1e-4) << "seed " << seed;
  }
}

TEST(PerturbedLoss, UnperturbedLossIsNonNegativeAndZeroWhenRealized) {
  TrainingInstance inst = random_instance(11, 3, 10, 5);
  const PerturbationSet none = PerturbationSet::none(5);
  const std::vector<double> w = some_w(5, 0.3);
  EXPECT_GE(loss_at(w, inst, none), 0.0);
  inst.target = solve(inst.graph, weights_from_matrix(inst.graph, inst.phi, w), inst.k(), inst.mode).arc_used;
  EXPECT_NEAR(loss_at(w, inst, none), 0.0, 1e-12);
}

TEST(PerturbedLoss, ConvexAlongSegments) {
  const TrainingInstance inst = random_instance(4, 2, 10, 3, Disjointness::Arc);
  const PerturbationSet z = PerturbationSet::draw(3, 8, 1.0, 4);
  for (int t = 0; t < 20; ++t) {
    const auto a = some_w(3, t);
    const auto b = some_w(3, 100.0 + 3.0 * t);
    std::vector<double> mid(3);
    for (int i = 0; i < 3; ++i) mid[i] = 0.5 * (a[i] + b[i]);
    EXPECT_LE(loss_at(mid, inst, z), 0.5 * (loss_at(a, inst, z) + loss_at(b, inst, z)) + 1e-12);
  }
}

TEST(PerturbedLoss, ZeroWeightsWithNoiseArePositive) {
  const TrainingInstance inst = random_instance(8, 3, 10, 4);
  const std::vector<double> w(4, 0.0);
  EXPECT_GT(loss_at(w, inst, PerturbationSet::draw(4, 10, 1.0, 1)), 0.0);
}

TEST(PerturbedLoss, MeanAveragesInstances) {
  std::vector<TrainingInstance> set;
  for (std::uint64_t s = 20; s < 24; ++s) set.push_back(random_instance(s, 2, 8, 3));
  const PerturbationSet z = PerturbationSet::draw(3, 4, 1.0, 9);
  const auto w = some_w(3, 2.0);
  const LossGradient mean = mean_loss_and_gradient(w, set, z);
  double total = 0.0;
  std::vector<double> g(3, 0.0);
  for (const auto& inst : set) {
    const LossGradient one = perturbed_loss_and_gradient(w, inst, z);
    total += one.loss;
    for (int i = 0; i < 3; ++i) g[i] += one.grad[i];
  }
  EXPECT_NEAR(mean.loss, total / 4.0, 1e-12);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(mean.grad[i], g[i] / 4.0, 1e-12);
}

TEST(PerturbationSet, CommonRandomNumbers) {
  const auto a = PerturbationSet::draw(5, 3, 2.0, 77);
  const auto b = PerturbationSet::draw(5, 3, 2.0, 77);
  EXPECT_EQ(a.z, b.z);
  EXPECT_NE(a.z, PerturbationSet::draw(5, 3, 2.0, 78).z);
  ASSERT_EQ(a.size(), 3u);
  EXPECT_EQ(a.z[0].size(), 5u);
}

FeatureSchema toy_schema(std::size_t width) {
  FeatureSchema s;
  s.name = "toy";
  s.mode = GraphMode::Base;
  s.groups.push_back({FeatureGroupKind::Request, 0, width});
  return s;
}

TEST(Train, ReproducibleWithCheckpoints) {
  std::vector<TrainingInstance> set;
  for (std::uint64_t s = 30; s < 33; ++s) set.push_back(random_instance(s, 2, 8, 3));
  TrainConfig cfg;
  cfg.samples = 5;
  cfg.max_iterations = 9;
  cfg.checkpoint_every = 4;
  const TrainResult a = train(set, toy_schema(3), cfg);
  const TrainResult b = train(set, toy_schema(3), cfg);
  EXPECT_EQ(a.model.w, b.model.w);
  ASSERT_FALSE(a.trace.empty());
  for (std::size_t i = 1; i < a.trace.size(); ++i) EXPECT_LE(a.trace[i].loss, a.trace[i - 1].loss);
  ASSERT_GE(a.checkpoints.size(), 1u);
  EXPECT_EQ(a.checkpoints.back().w, a.model.w);
  for (std::size_t i = 0; i + 1 < a.checkpoints.size(); ++i) {
    EXPECT_EQ(a.checkpoints[i].iteration, 4 * static_cast<int>(i + 1));
  }
  EXPECT_LT(a.trace.back().loss, a.trace.front().loss);
}

TEST(TrainingSet, LabelsAreFeasibleSolutions) {
  SyntheticConfig syn = testing::small_synthetic(5, 120.0);
  syn.day_end_s = 60.0 + 1800.0;
  const TravelTimeProvider tt = synthetic_travel_times(syn);
  std::vector<std::vector<Request>> hist{generate_synthetic_day(syn, 0, tt), generate_synthetic_day(syn, 1, tt)};
  const RequestDistribution dist = calibrate_distribution(hist, CellGrid(syn.area, 500, 500), 300.0).distribution;
  std::vector<TrainingDay> days;
  for (std::size_t d = 0; d < hist.size(); ++d) days.push_back({hist[d], place_fleet(hist[d], 6, d, syn.area)});
  TrainingSetConfig tc;
  tc.window_begin_s = 60.0;
  tc.core_begin_s = 360.0;
  tc.core_end_s = 1500.0;
  const PolicyContext ctx{&tt, &dist};
  for (PolicyKind kind : {PolicyKind::SampleBased, PolicyKind::CellBased}) {
    PolicySpec v;
    v.kind = kind;
    if (kind == PolicyKind::CellBased) v.grid = CellGrid(syn.area, 500, 500);
    const auto set = build_training_set(days, v, ctx, tc);
    ASSERT_FALSE(set.empty());
    for (const TrainingInstance& inst : set) {
      EXPECT_TRUE(is_feasible_solution(inst.graph, inst.target, inst.k(), inst.mode));
      EXPECT_EQ(inst.phi.width, kind == PolicyKind::CellBased ? 61u : 80u);
      EXPECT_GE(inst.epoch, 6);
    }
  }
}

}  // namespace
}  // namespace amod
