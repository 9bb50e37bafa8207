#include "amod/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace amod {

InfeasibleDecision::InfeasibleDecision(int epoch, const std::string& what)
    : std::runtime_error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}

std::vector<std::vector<Request>> batches_by_epoch(std::span<const Request> requests, double period_s,
                                                   int first_epoch, int count) {
  std::vector<std::vector<Request>> out(std::max(count, 0));
  for (const Request& r : requests) {
    const auto e = static_cast<long long>(std::floor(r.start_time / period_s)) - first_epoch;
    if (e >= 0 && e < count) out[e].push_back(r);
  }
  for (auto& batch : out) {
    std::sort(batch.begin(), batch.end(), [](const Request& a, const Request& b) {
      return a.start_time != b.start_time ? a.start_time < b.start_time : a.id < b.id;
    });
  }
  return out;
}

namespace {

void validate_scenario(const Scenario& s) {
  if (s.horizon_epochs < 1) throw std::invalid_argument("horizon must cover at least one epoch");
  if (!(s.period_s > 0.0)) throw std::invalid_argument("system period must be positive");
  if (s.fleet.empty()) throw std::invalid_argument("scenario has no vehicles");
}

template <typename Decide>
SimulationResult closed_loop(const Scenario& scenario, const TravelTimeProvider& tt, Decide&& decide) {
  validate_scenario(scenario);
  const auto batches = batches_by_epoch(scenario.requests, scenario.period_s, scenario.first_epoch,
                                        scenario.horizon_epochs);
  const Objective& objective = scenario.policy.objective;

  SimulationResult out;
  Metrics& m = out.metrics;
  SystemState state;
  state.epoch = scenario.first_epoch;
  state.period_s = scenario.period_s;
  state.vehicles = scenario.fleet;
  state.batch = batches[0];
  double decision_seconds = 0.0;

  for (int e = 0; e < scenario.horizon_epochs; ++e) {
    m.total_requests += state.batch.size();
    const auto t0 = std::chrono::steady_clock::now();
    const FleetDecision decision = decide(state);
    decision_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const ValidationReport report = validate_decision(state, decision, tt);
    if (!report.ok()) {
      m.violations += report.violations.size();
      throw InfeasibleDecision(state.epoch, report.summary());
    }

    std::unordered_map<VehicleId, const VehicleDecision*> by_id;
    for (const auto& vd : decision.vehicles) by_id.emplace(vd.vehicle_id, &vd);

    SystemState next;
    next.epoch = state.epoch + 1;
    next.period_s = state.period_s;
    next.batch = e + 1 < scenario.horizon_epochs ? batches[e + 1] : std::vector<Request>{};
    next.vehicles.reserve(state.vehicles.size());
    double epoch_reward = 0.0;
    for (std::size_t i = 0; i < state.vehicles.size(); ++i) {
      const auto it = by_id.find(state.vehicles[i].id);
      const VehicleDecision* vd = it == by_id.end() ? nullptr : it->second;
      VehicleMotion motion = execute_vehicle(state.vehicles[i], vd, state.decision_time(), state.period_end(), tt);
      epoch_reward += trip_reward(motion.newly_served, motion.empty_km(), objective);
      for (const Request& r : motion.newly_served) m.revenue += objective.revenue(r);
      m.served += motion.newly_served.size();
      m.km_total += motion.total_km();
      m.km_empty += motion.empty_km();
      m.km_rebalancing += motion.rebalance_km;
      if (scenario.record_snapshots) {
        out.snapshots.push_back({state.epoch, motion.next.id, motion.next.location, motion.status});
      }
      next.vehicles.push_back(std::move(motion.next));
    }
    m.reward += epoch_reward;
    out.reward_per_epoch.push_back(epoch_reward);
    state = std::move(next);
    ++m.epochs;
  }

  m.service_ratio = m.total_requests ? static_cast<double>(m.served) / m.total_requests : 0.0;
  m.km_per_request = m.served ? m.km_total / m.served : 0.0;
  m.km_per_vehicle = m.km_total / static_cast<double>(scenario.fleet.size());
  m.mean_decision_seconds = m.epochs ? decision_seconds / m.epochs : 0.0;
  return out;
}

std::vector<Request> requests_in_window(const Scenario& s) {
  std::vector<Request> out;
  for (const auto& batch : batches_by_epoch(s.requests, s.period_s, s.first_epoch, s.horizon_epochs)) {
    out.insert(out.end(), batch.begin(), batch.end());
  }
  return out;
}

}  // namespace

SimulationResult run_simulation(const Scenario& scenario, const PolicyContext& ctx) {
  if (!ctx.tt) throw std::invalid_argument("simulation needs a travel-time provider");
  if (scenario.policy.kind == PolicyKind::FullInformation) return run_full_information(scenario, *ctx.tt);
  scenario.policy.validate();
  return closed_loop(scenario, *ctx.tt,
                     [&](const SystemState& state) { return decide(scenario.policy, state, ctx); });
}

SimulationResult run_full_information(const Scenario& scenario, const TravelTimeProvider& tt) {
  validate_scenario(scenario);
  const std::vector<Request> requests = requests_in_window(scenario);
  const FullInfoResult fi = full_information_bound(requests, scenario.fleet, scenario.policy.objective, tt,
                                                   scenario.period_s, scenario.first_epoch,
                                                   scenario.policy.cuts);

  // The offline trips as one decision over a state that knows every request.
  SystemState all;
  all.epoch = scenario.first_epoch;
  all.period_s = scenario.period_s;
  all.vehicles = scenario.fleet;
  all.batch = requests;
  FleetDecision offline;
  for (std::size_t i = 0; i < scenario.fleet.size(); ++i) {
    VehicleDecision vd{scenario.fleet[i].id, {}, std::nullopt};
    if (scenario.fleet[i].pending) vd.trip.push_back(*scenario.fleet[i].pending);
    vd.trip.insert(vd.trip.end(), fi.trips[i].begin(), fi.trips[i].end());
    offline.vehicles.push_back(std::move(vd));
  }
  const ValidationReport report = validate_decision(all, offline, tt);
  if (!report.ok()) throw InfeasibleDecision(all.epoch, "offline solution: " + report.summary());

  SimulationResult out;
  Metrics& m = out.metrics;
  const Objective& objective = scenario.policy.objective;
  out.reward_per_epoch.assign(scenario.horizon_epochs, 0.0);
  for (std::size_t i = 0; i < scenario.fleet.size(); ++i) {
    Location cursor = scenario.fleet[i].ready_location();
    for (const Request& r : fi.trips[i]) {
      const double approach = tt.travel(cursor, r.origin).km;
      const auto e = static_cast<long long>(std::floor(r.start_time / scenario.period_s)) - scenario.first_epoch;
      out.reward_per_epoch[e] += trip_reward(std::span<const Request>(&r, 1), approach, objective);
      m.revenue += objective.revenue(r);
      m.km_empty += approach;
      m.km_total += approach + r.distance_km;
      cursor = r.destination;
    }
  }
  m.reward = fi.bound;
  m.served = fi.served;
  m.total_requests = requests.size();
  m.epochs = scenario.horizon_epochs;
  m.service_ratio = m.total_requests ? static_cast<double>(m.served) / m.total_requests : 0.0;
  m.km_per_request = m.served ? m.km_total / m.served : 0.0;
  m.km_per_vehicle = m.km_total / static_cast<double>(scenario.fleet.size());
  m.mean_decision_seconds = fi.solve_seconds;
  return out;
}

std::vector<ComparisonRow> compare_policies(const Scenario& base, std::span<const PolicySpec> policies,
                                            const PolicyContext& ctx) {
  std::vector<ComparisonRow> rows;
  std::optional<Metrics> greedy;
  for (const PolicySpec& p : policies) {
    Scenario s = base;
    s.policy = p;
    s.record_snapshots = false;
    rows.push_back({to_string(p.kind), run_simulation(s, ctx).metrics});
    if (p.kind == PolicyKind::Greedy && !greedy) greedy = rows.back().metrics;
  }
  if (!greedy) {
    Scenario s = base;
    s.policy.kind = PolicyKind::Greedy;
    s.record_snapshots = false;
    greedy = run_simulation(s, ctx).metrics;
  }
  auto ratio = [](double a, double b) { return b != 0.0 ? a / b : (a == 0.0 ? 1.0 : 0.0); };
  for (ComparisonRow& row : rows) {
    row.reward_ratio = ratio(row.metrics.reward, greedy->reward);
    row.served_ratio = ratio(static_cast<double>(row.metrics.served), static_cast<double>(greedy->served));
    row.km_per_request_ratio = ratio(row.metrics.km_per_request, greedy->km_per_request);
    row.km_per_vehicle_ratio = ratio(row.metrics.km_per_vehicle, greedy->km_per_vehicle);
  }
  return rows;
}

CheckpointSelection select_checkpoint(std::span<const Scenario> validation, const PolicySpec& policy,
                                      const ModelWeights& model, std::span<const Checkpoint> candidates,
                                      const PolicyContext& ctx) {
  if (candidates.empty()) throw std::invalid_argument("no checkpoints to select from");
  if (validation.empty()) throw std::invalid_argument("no validation scenarios");
  std::vector<double> greedy;
  greedy.reserve(validation.size());
  double greedy_total = 0.0;
  for (const Scenario& base : validation) {
    Scenario s = base;
    s.policy = policy;
    s.policy.kind = PolicyKind::Greedy;
    s.policy.model.reset();
    s.record_snapshots = false;
    greedy.push_back(run_simulation(s, ctx).metrics.reward);
    greedy_total += greedy.back();
  }
  auto ratio = [](double a, double b) { return b != 0.0 ? a / b : (a == 0.0 ? 1.0 : 0.0); };

  CheckpointSelection out;
  for (const Checkpoint& c : candidates) {
    PolicySpec p = policy;
    p.model = model;
    p.model->w = c.w;
    double total = 0.0;
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < validation.size(); ++d) {
      Scenario s = validation[d];
      s.policy = p;
      s.record_snapshots = false;
      const double r = run_simulation(s, ctx).metrics.reward;
      total += r;
      worst = std::min(worst, ratio(r, greedy[d]));
    }
    out.scores.push_back({c.iteration, ratio(total, greedy_total), worst});
    if (out.scores.back().reward_ratio > out.scores[out.best].reward_ratio) out.best = out.scores.size() - 1;
  }
  return out;
}

std::vector<VehicleState> place_fleet(std::span<const Request> warmup, int fleet_size, std::uint64_t seed,
                                      const Area& fallback_area) {
  if (fleet_size < 1) throw std::invalid_argument("fleet size must be positive");
  std::mt19937_64 rng(seed);
  std::vector<VehicleState> fleet(fleet_size);
  for (int i = 0; i < fleet_size; ++i) {
    fleet[i].id = i;
    if (!warmup.empty()) {
      std::uniform_int_distribution<std::size_t> pick(0, warmup.size() - 1);
      fleet[i].location = warmup[pick(rng)].origin;
    } else {
      std::uniform_real_distribution<double> ux(fallback_area.x_min, fallback_area.x_max);
      std::uniform_real_distribution<double> uy(fallback_area.y_min, fallback_area.y_max);
      fleet[i].location = {ux(rng), uy(rng)};
    }
  }
  return fleet;
}

}  // namespace amod
