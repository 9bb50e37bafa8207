#include <benchmark/benchmark.h>

#include "amod/io.hpp"
#include "amod/policies.hpp"
#include "amod/simulator.hpp"

namespace {

using namespace amod;

SyntheticConfig busy_city() {
  SyntheticConfig syn;
  syn.seed = 8;
  syn.requests_per_hour = 3300.0;
  return syn;
}

// One epoch of a busy synthetic day, roughly 600 batch plus sampled requests.
struct Epoch {
  SyntheticConfig syn = busy_city();
  TravelTimeProvider tt = synthetic_travel_times(syn);
  RequestDistribution demand;
  SystemState state;

  explicit Epoch(int fleet) {
    std::vector<std::vector<Request>> history{generate_synthetic_day(syn, 0, tt), generate_synthetic_day(syn, 1, tt)};
    demand = calibrate_distribution(history, CellGrid(syn.area, syn.cell_m, syn.cell_m), 300.0).distribution;
    const auto day = generate_synthetic_day(syn, 2, tt);
    state.epoch = 16;
    state.period_s = 60.0;
    state.batch = batches_by_epoch(day, state.period_s, state.epoch, 1).front();
    state.vehicles = place_fleet(day, fleet, 8, syn.area);
  }
};

PolicySpec spec(PolicyKind kind) {
  PolicySpec p;
  p.kind = kind;
  p.seed = 8;
  if (kind == PolicyKind::SampleBased || kind == PolicyKind::CellBased) {
    ModelWeights m = ModelWeights::zeros(kind == PolicyKind::SampleBased ? FeatureSchema::sample_based()
                                                                         : FeatureSchema::cell_based());
    const auto names = m.schema.feature_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (names[i] == "request.reward") m.w[i] = 1.0;
      if (names[i] == "deadhead.distance" || names[i] == "rebalancing_deadhead.distance") m.w[i] = -0.45;
    }
    p.model = m;
  }
  return p;
}

void BM_Decide(benchmark::State& state) {
  const Epoch e(static_cast<int>(state.range(1)));
  const PolicySpec p = spec(static_cast<PolicyKind>(state.range(0)));
  const PolicyContext ctx{&e.tt, &e.demand};
  for (auto _ : state) {
    FleetDecision d = decide(p, e.state, ctx);
    benchmark::DoNotOptimize(d.vehicles.data());
  }
  state.SetLabel(to_string(p.kind));
}
BENCHMARK(BM_Decide)
    ->Args({static_cast<int>(PolicyKind::Greedy), 2000})
    ->Args({static_cast<int>(PolicyKind::Sampling), 2000})
    ->Args({static_cast<int>(PolicyKind::SampleBased), 500})
    ->Args({static_cast<int>(PolicyKind::SampleBased), 2000})
    ->Args({static_cast<int>(PolicyKind::CellBased), 2000})
    ->Unit(benchmark::kMillisecond);

void BM_FeatureMatrix(benchmark::State& state) {
  const Epoch e(500);
  const PolicySpec p = spec(PolicyKind::SampleBased);
  const PolicyContext ctx{&e.tt, &e.demand};
  const DispatchGraph g = policy_graph(p, e.state, ctx);
  const FeatureContext fctx{&e.state, &e.demand, &e.tt, p.objective, p.lookahead_s};
  for (auto _ : state) {
    FeatureMatrix m = feature_matrix(g, fctx, FeatureSchema::sample_based());
    benchmark::DoNotOptimize(m.values.data());
  }
  state.counters["rows"] = static_cast<double>(feature_matrix(g, fctx, FeatureSchema::sample_based()).rows());
}
BENCHMARK(BM_FeatureMatrix)->Unit(benchmark::kMillisecond);

}  // namespace
