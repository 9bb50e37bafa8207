#include "amod/learning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "amod/optimizer.hpp"

namespace amod {

PerturbationSet PerturbationSet::draw(std::size_t dim, int samples, double sigma, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("at least one perturbation sample required");
  if (!(sigma > 0.0)) throw std::invalid_argument("perturbation scale must be positive");
  PerturbationSet p;
  p.sigma = sigma;
  p.seed = seed;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  p.z.assign(samples, std::vector<double>(dim));
  for (auto& z : p.z) {
    for (double& v : z) v = normal(rng);
  }
  return p;
}

PerturbationSet PerturbationSet::none(std::size_t dim) {
  PerturbationSet p;
  p.sigma = 0.0;
  p.z.assign(1, std::vector<double>(dim, 0.0));
  return p;
}

std::vector<double> solution_features(const FeatureMatrix& phi, std::span<const std::uint8_t> arc_used) {
  std::vector<double> out(phi.width, 0.0);
  for (std::size_t r = 0; r < phi.rows(); ++r) {
    if (!arc_used[phi.arcs[r]]) continue;
    const auto row = phi.row(r);
    for (std::size_t j = 0; j < phi.width; ++j) out[j] += row[j];
  }
  return out;
}

LossGradient perturbed_loss_and_gradient(std::span<const double> w, const TrainingInstance& instance,
                                         const PerturbationSet& perturbations) {
  const FeatureMatrix& phi = instance.phi;
  if (w.size() != phi.width) throw std::invalid_argument("weight vector does not match feature width");
  const std::size_t m = perturbations.size();
  if (m == 0) throw std::invalid_argument("empty perturbation set");

  LossGradient out;
  out.grad.assign(phi.width, 0.0);
  std::vector<double> wm(phi.width);
  for (const auto& z : perturbations.z) {
    if (z.size() != phi.width) throw std::invalid_argument("perturbation dimension mismatch");
    for (std::size_t j = 0; j < wm.size(); ++j) wm[j] = w[j] + z[j];
    const std::vector<double> theta = weights_from_matrix(instance.graph, phi, wm);
    const PathSolution sol = solve(instance.graph, theta, instance.k(), instance.mode);
    out.loss += sol.objective;
    const std::vector<double> f = solution_features(phi, sol.arc_used);
    for (std::size_t j = 0; j < f.size(); ++j) out.grad[j] += f[j];
  }
  const std::vector<double> target = solution_features(phi, instance.target);
  double target_value = 0.0;
  for (std::size_t j = 0; j < target.size(); ++j) target_value += w[j] * target[j];
  const double inv = 1.0 / static_cast<double>(m);
  out.loss = out.loss * inv - target_value;
  for (std::size_t j = 0; j < out.grad.size(); ++j) out.grad[j] = out.grad[j] * inv - target[j];
  return out;
}

LossGradient mean_loss_and_gradient(std::span<const double> w, std::span<const TrainingInstance> instances,
                                    const PerturbationSet& perturbations) {
  if (instances.empty()) throw std::invalid_argument("no training instances");
  LossGradient out;
  out.grad.assign(w.size(), 0.0);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const LossGradient one = perturbed_loss_and_gradient(w, instances[i], perturbations);
    if (!std::isfinite(one.loss)) {
      throw std::runtime_error("non-finite loss on training instance " + std::to_string(i) + " (day " +
                               std::to_string(instances[i].day) + ", epoch " +
                               std::to_string(instances[i].epoch) + ")");
    }
    out.loss += one.loss;
    for (std::size_t j = 0; j < w.size(); ++j) out.grad[j] += one.grad[j];
  }
  const double inv = 1.0 / static_cast<double>(instances.size());
  out.loss *= inv;
  for (double& g : out.grad) g *= inv;
  return out;
}

TrainResult train(std::span<const TrainingInstance> instances, const FeatureSchema& schema,
                  const TrainConfig& config, std::span<const double> start) {
  if (instances.empty()) throw std::invalid_argument("no training instances");
  for (const TrainingInstance& inst : instances) {
    if (inst.phi.width != schema.size()) throw std::invalid_argument("instance features do not match schema");
  }

  std::vector<TrainingInstance> scaled;
  std::vector<double> divisors;
  std::span<const TrainingInstance> data = instances;
  if (config.normalize) {
    std::vector<FeatureMatrix> mats;
    mats.reserve(instances.size());
    for (const TrainingInstance& inst : instances) mats.push_back(inst.phi);
    divisors = std_dev_divisors(mats);
    scaled.assign(instances.begin(), instances.end());
    for (TrainingInstance& inst : scaled) {
      for (std::size_t r = 0; r < inst.phi.rows(); ++r) {
        for (std::size_t j = 0; j < inst.phi.width; ++j) inst.phi.values[r * inst.phi.width + j] /= divisors[j];
      }
    }
    data = scaled;
  }

  const PerturbationSet z = PerturbationSet::draw(schema.size(), config.samples, config.sigma, config.seed);
  const auto t0 = std::chrono::steady_clock::now();
  TrainResult result;
  auto objective = [&](std::span<const double> w, std::span<double> grad) {
    const LossGradient lg = mean_loss_and_gradient(w, data, z);
    std::copy(lg.grad.begin(), lg.grad.end(), grad.begin());
    return lg.loss;
  };
  BfgsOptions opts;
  opts.max_iterations = config.max_iterations;
  opts.gradient_tolerance = config.gradient_tolerance;
  std::vector<double> w0(schema.size(), 0.0);
  if (!start.empty()) {
    if (start.size() != w0.size()) throw std::invalid_argument("start vector does not match schema");
    w0.assign(start.begin(), start.end());
  }
  const BfgsResult fit = minimize_bfgs(objective, std::move(w0), opts, [&](const BfgsIterate& it, std::span<const double> x) {
    if (config.checkpoint_every > 0 && it.iteration > 0 && it.iteration % config.checkpoint_every == 0) {
      result.checkpoints.push_back({it.iteration, std::vector<double>(x.begin(), x.end())});
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.trace.push_back({it.iteration, it.value, it.grad_norm, s});
  });

  if (config.checkpoint_every > 0 &&
      (result.checkpoints.empty() || result.checkpoints.back().iteration != fit.iterations)) {
    result.checkpoints.push_back({fit.iterations, fit.x});
  }
  result.model.schema = schema;
  result.model.w = fit.x;
  result.model.divisors = divisors;
  result.model.metadata = {
      {"seed", std::to_string(config.seed)},
      {"instances", std::to_string(instances.size())},
      {"samples", std::to_string(config.samples)},
      {"sigma", std::to_string(config.sigma)},
      {"iterations", std::to_string(fit.iterations)},
      {"stop_reason", fit.stop_reason},
  };
  result.stop_reason = fit.stop_reason;
  result.evaluations = fit.evaluations;
  return result;
}

std::vector<std::uint8_t> label_decision(const DispatchGraph& graph, const SystemState& state,
                                         const FleetDecision& decision,
                                         std::span<const std::vector<Request>> trips) {
  if (decision.vehicles.size() != state.vehicles.size() || trips.size() != state.vehicles.size()) {
    throw std::invalid_argument("decision, trips and state disagree on the fleet");
  }
  std::unordered_map<RequestId, std::int32_t> entry;
  std::vector<std::int32_t> rebalancing_of_cell;
  for (std::size_t v = 0; v < graph.vertices.size(); ++v) {
    const Vertex& vx = graph.vertices[v];
    if (vx.kind == VertexKind::Request) entry.emplace(graph.requests[vx.ref].id, static_cast<std::int32_t>(v));
    if (vx.kind == VertexKind::Rebalancing) {
      if (rebalancing_of_cell.size() <= static_cast<std::size_t>(vx.ref)) rebalancing_of_cell.resize(vx.ref + 1, -1);
      rebalancing_of_cell[vx.ref] = static_cast<std::int32_t>(v);
    }
  }

  std::vector<std::uint8_t> used(graph.arcs.size(), 0);
  std::vector<std::uint8_t> vertex_taken(graph.vertices.size(), 0);
  auto take = [&](std::int32_t tail, std::int32_t head) -> bool {
    const auto a = graph.find_arc(tail, head);
    if (!a || used[*a]) return false;
    used[*a] = 1;
    return true;
  };

  for (std::size_t i = 0; i < state.vehicles.size(); ++i) {
    const VehicleState& vs = state.vehicles[i];
    const auto vertex = static_cast<std::int32_t>(1 + i);
    if (graph.vertices[vertex].kind != VertexKind::Vehicle || graph.vertices[vertex].ref != static_cast<std::int32_t>(i)) {
      throw std::logic_error("vehicle vertices out of state order");
    }
    take(graph.source, vertex);
    std::int32_t cur = vertex;

    const VehicleDecision& vd = decision.vehicles[i];
    std::size_t pos = vs.pending && !vd.trip.empty() && vd.trip.front().id == vs.pending->id ? 1 : 0;
    for (; pos < vd.trip.size(); ++pos) {
      const auto it = entry.find(vd.trip[pos].id);
      if (it == entry.end() || vertex_taken[it->second]) break;
      if (!graph.find_arc(cur, it->second)) break;
      take(cur, it->second);
      vertex_taken[it->second] = 1;
      cur = it->second;
      if (graph.mode == GraphMode::CellBased) {
        take(cur, cur + 1);
        cur = cur + 1;
      }
    }

    // next offline pickup after this period, if it falls in the horizon
    const Request* next = nullptr;
    for (const Request& r : trips[i]) {
      if (r.start_time >= graph.period_end) {
        next = &r;
        break;
      }
    }
    if (next && next->start_time < graph.horizon_end && graph.mode != GraphMode::Base) {
      const Location here = graph.vertices[cur].location;
      if (graph.mode == GraphMode::SampleBased) {
        std::int32_t best = -1;
        const double stay_d = distance_m(here, next->origin);
        double best_d = stay_d;
        for (std::size_t k = 0; k < graph.out_arcs(cur).size(); ++k) {
          const auto a = graph.out_arc_index(cur, k);
          const std::int32_t h = graph.arcs[a].head;
          if (graph.vertices[h].kind != VertexKind::Artificial || vertex_taken[h]) continue;
          const Location o = graph.request_of(h).origin;
          const double d = distance_m(o, next->origin);
          if (d < best_d && distance_m(here, o) <= stay_d) {
            best_d = d;
            best = h;
          }
        }
        if (best >= 0) {
          take(cur, best);
          vertex_taken[best] = 1;
          cur = best;
        }
      } else if (const auto cell = graph.grid->cell_of(next->origin); cell && cell != graph.grid->cell_of(here)) {
        const std::int32_t reb = rebalancing_of_cell[*cell];
        if (graph.find_arc(cur, reb)) {
          for (std::size_t k = 0; k < graph.out_arcs(reb).size(); ++k) {
            const auto a = graph.out_arc_index(reb, k);
            if (used[a]) continue;
            take(cur, reb);
            used[a] = 1;
            cur = graph.arcs[a].head;
            break;
          }
        }
      }
    }
    if (!take(cur, graph.sink)) throw std::logic_error("label path cannot reach the sink");
  }
  return used;
}

std::vector<TrainingInstance> build_training_set(std::span<const TrainingDay> days,
                                                 const PolicySpec& variant, const PolicyContext& ctx,
                                                 const TrainingSetConfig& config) {
  if (variant.kind != PolicyKind::SampleBased && variant.kind != PolicyKind::CellBased) {
    throw std::invalid_argument("training targets the sb or cb digraph");
  }
  if (!ctx.tt || !ctx.demand) throw std::invalid_argument("training needs travel times and a distribution");
  if (!(config.extraction_period_s > 0.0) || !(config.period_s > 0.0)) {
    throw std::invalid_argument("periods must be positive");
  }
  const TravelTimeProvider& tt = *ctx.tt;
  const FeatureSchema schema =
      variant.kind == PolicyKind::SampleBased ? FeatureSchema::sample_based() : FeatureSchema::cell_based();
  const int first_epoch = static_cast<int>(std::floor(config.window_begin_s / config.period_s));

  std::vector<int> extraction;
  for (double t = config.core_begin_s; t < config.core_end_s - 1e-9; t += config.extraction_period_s) {
    const int e = static_cast<int>(std::floor(t / config.period_s + 1e-9));
    if (extraction.empty() || extraction.back() != e) extraction.push_back(e);
  }
  if (extraction.empty()) return {};

  std::vector<TrainingInstance> out;
  for (std::size_t d = 0; d < days.size(); ++d) {
    std::vector<Request> requests;
    for (const Request& r : days[d].requests) {
      if (r.start_time >= first_epoch * config.period_s) requests.push_back(r);
    }
    std::sort(requests.begin(), requests.end(), [](const Request& a, const Request& b) {
      return a.start_time != b.start_time ? a.start_time < b.start_time : a.id < b.id;
    });
    const FullInfoResult fi = full_information_bound(requests, days[d].fleet, variant.objective, tt,
                                                     config.period_s, first_epoch, variant.cuts);

    auto batch_of = [&](int epoch) {
      std::vector<Request> batch;
      const double lo = epoch * config.period_s, hi = (epoch + 1) * config.period_s;
      for (const Request& r : requests) {
        if (r.start_time >= lo && r.start_time < hi) batch.push_back(r);
      }
      return batch;
    };

    SystemState state;
    state.epoch = first_epoch;
    state.period_s = config.period_s;
    state.vehicles = days[d].fleet;
    state.batch = batch_of(first_epoch);
    PolicySpec day_variant = variant;
    day_variant.seed = epoch_seed(variant.seed, static_cast<int>(d) + 1000003);

    std::size_t next_extraction = 0;
    while (next_extraction < extraction.size() && extraction[next_extraction] < first_epoch) ++next_extraction;
    while (next_extraction < extraction.size()) {
      const FleetDecision decision = follow_trips(fi.trips, state, tt, true);
      const ValidationReport report = validate_decision(state, decision, tt);
      if (!report.ok()) throw std::logic_error("offline replay produced an infeasible decision: " + report.summary());

      if (state.epoch == extraction[next_extraction]) {
        TrainingInstance inst;
        GraphParams params;
        params.cuts = variant.cuts;
        params.horizon_end = state.period_end() + variant.horizon_s;
        if (variant.kind == PolicyKind::SampleBased) {
          params.mode = GraphMode::SampleBased;
          params.sampled = sample_artificial_requests(*ctx.demand, state.period_end(), params.horizon_end,
                                                      epoch_seed(day_variant.seed, state.epoch));
        } else {
          params.mode = GraphMode::CellBased;
          params.grid = variant.grid ? *variant.grid : ctx.demand->grid();
          params.n_capacity = variant.n_capacity;
        }
        inst.graph = build_graph(state, params, tt);
        const FeatureContext fctx{&state, ctx.demand, &tt, variant.objective, variant.lookahead_s};
        inst.phi = feature_matrix(inst.graph, fctx, schema);
        inst.mode = disjointness_for(params.mode);
        inst.target = label_decision(inst.graph, state, decision, fi.trips);
        inst.day = static_cast<int>(d);
        inst.epoch = state.epoch;
        if (!is_feasible_solution(inst.graph, inst.target, inst.k(), inst.mode)) {
          throw std::logic_error("training label is not a feasible path set");
        }
        out.push_back(std::move(inst));
        ++next_extraction;
        if (next_extraction == extraction.size()) break;
      }
      state = advance(state, decision, batch_of(state.epoch + 1), tt);
    }
  }
  return out;
}

}  // namespace amod
