#include <benchmark/benchmark.h>

#include <random>

#include "amod/digraph.hpp"
#include "amod/io.hpp"
#include "amod/kdspp.hpp"
#include "amod/policies.hpp"

namespace {

using namespace amod;

SystemState random_state(int vehicles, int requests, std::uint64_t seed, const TravelTimeProvider& tt) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, 4000.0);
  std::uniform_real_distribution<double> start(960.0, 1020.0);
  SystemState s;
  s.epoch = 16;
  s.period_s = 60.0;
  for (int v = 0; v < vehicles; ++v) s.vehicles.push_back({v, {pos(rng), pos(rng)}, {}});
  for (int r = 0; r < requests; ++r) {
    s.batch.push_back(make_request(r + 1, {pos(rng), pos(rng)}, {pos(rng), pos(rng)}, start(rng), 8.0, tt));
  }
  return s;
}

void BM_BuildGraph(benchmark::State& state) {
  const SyntheticConfig syn;
  const TravelTimeProvider tt = synthetic_travel_times(syn);
  const SystemState s = random_state(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 1, tt);
  for (auto _ : state) {
    DispatchGraph g = build_graph(s, {}, tt);
    benchmark::DoNotOptimize(g.arcs.data());
  }
}
BENCHMARK(BM_BuildGraph)->Args({100, 50})->Args({500, 200})->Args({2000, 600})->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State& state) {
  const SyntheticConfig syn;
  const TravelTimeProvider tt = synthetic_travel_times(syn);
  const SystemState s = random_state(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 2, tt);
  DispatchGraph g = build_graph(s, {}, tt);
  set_reward_weights(g, Objective::profit());
  const auto mode = state.range(2) ? Disjointness::Arc : Disjointness::Vertex;
  for (auto _ : state) {
    PathSolution sol = solve(g, g.vehicle_count, mode);
    benchmark::DoNotOptimize(sol.objective);
  }
  state.counters["arcs"] = static_cast<double>(g.arc_count());
}
BENCHMARK(BM_Solve)
    ->Args({100, 50, 0})
    ->Args({500, 200, 0})
    ->Args({2000, 600, 0})
    ->Args({2000, 600, 1})
    ->Unit(benchmark::kMillisecond);

void BM_FullInformationDay(benchmark::State& state) {
  SyntheticConfig syn;
  syn.seed = 3;
  const TravelTimeProvider tt = synthetic_travel_times(syn);
  std::vector<Request> day;
  for (const Request& r : generate_synthetic_day(syn, 5, tt)) {
    if (r.start_time >= 960.0) day.push_back(r);
  }
  const auto fleet = place_fleet(day, 100, 5, syn.area);
  const SparsifyCuts cuts{state.range(0) ? 600.0 : 1e18, state.range(0) ? 1.5 : 1e18};
  for (auto _ : state) {
    FullInfoResult fi = full_information_bound(day, fleet, Objective::profit(), tt, 60.0, 16, cuts);
    benchmark::DoNotOptimize(fi.bound);
  }
}
BENCHMARK(BM_FullInformationDay)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
