#include "amod/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amod {

const char* to_string(FeatureGroupKind k) {
  switch (k) {
    case FeatureGroupKind::OriginCell: return "origin_cell";
    case FeatureGroupKind::RequestCell: return "request_cell";
    case FeatureGroupKind::Request: return "request";
    case FeatureGroupKind::Deadhead: return "deadhead";
    case FeatureGroupKind::RebalancingCell: return "rebalancing_cell";
    case FeatureGroupKind::RebalancingDeadhead: return "rebalancing_deadhead";
    case FeatureGroupKind::Capacity: return "capacity";
  }
  return "unknown";
}

namespace {

constexpr const char* kCellNames[kCellStateFeatures] = {
    "vehicles",          "requests",           "requests_per_vehicle",     "vehicles_per_request",
    "future_start_req",  "future_arrive_req",  "future_start_veh",         "future_arrive_veh"};
constexpr const char* kRequestNames[9] = {
    "duration",         "reward_per_duration", "distance",          "reward_per_distance",
    "reward_per_pickup_wait", "reward_per_dropoff_wait", "cost_per_duration", "cost_per_dropoff_wait",
    "reward"};
constexpr const char* kDeadheadNames[5] = {"distance", "duration", "cost_per_duration",
                                           "cost_per_dropoff_wait", "cost_per_distance"};
constexpr const char* kTourNames[6] = {"duration", "reward_per_duration", "distance",
                                       "reward_per_distance", "cost_per_duration", "reward"};

double ratio(double num, double den) { return den != 0.0 ? num / den : 0.0; }

// Feature times are in minutes; waits are floored at one minute.
double minutes(double seconds) { return seconds / 60.0; }
double wait_minutes(double seconds) { return std::max(1.0, seconds / 60.0); }

FeatureSchema make_schema(std::string name, GraphMode mode, bool bins,
                          std::initializer_list<std::pair<FeatureGroupKind, std::size_t>> groups) {
  FeatureSchema s;
  s.name = std::move(name);
  s.mode = mode;
  s.time_bins = bins;
  std::size_t offset = 0;
  for (const auto& [kind, size] : groups) {
    s.groups.push_back({kind, offset, size});
    offset += size;
  }
  return s;
}

}  // namespace

const FeatureGroup* FeatureSchema::group(FeatureGroupKind kind) const {
  for (const FeatureGroup& g : groups) {
    if (g.kind == kind) return &g;
  }
  return nullptr;
}

FeatureSchema FeatureSchema::sample_based() {
  return make_schema("sb-v1", GraphMode::SampleBased, true,
                     {{FeatureGroupKind::OriginCell, kCellStateFeatures},
                      {FeatureGroupKind::RequestCell, kCellStateFeatures},
                      {FeatureGroupKind::Request, 9 + kFutureBins},
                      {FeatureGroupKind::Deadhead, 5 + kFutureBins}});
}

FeatureSchema FeatureSchema::cell_based() {
  return make_schema("cb-v1", GraphMode::CellBased, false,
                     {{FeatureGroupKind::OriginCell, kCellStateFeatures},
                      {FeatureGroupKind::RequestCell, kCellStateFeatures},
                      {FeatureGroupKind::Request, 9},
                      {FeatureGroupKind::Deadhead, 5},
                      {FeatureGroupKind::RebalancingCell, kCellStateFeatures + 6},
                      {FeatureGroupKind::RebalancingDeadhead, 2},
                      {FeatureGroupKind::Capacity, kCellStateFeatures + 7}});
}

FeatureSchema FeatureSchema::by_name(const std::string& name) {
  if (name == "sb-v1") return sample_based();
  if (name == "cb-v1") return cell_based();
  throw std::invalid_argument("unknown feature schema: " + name);
}

std::vector<std::string> FeatureSchema::feature_names() const {
  std::vector<std::string> names;
  for (const FeatureGroup& g : groups) {
    const std::string prefix = std::string(to_string(g.kind)) + ".";
    auto bins = [&](const char* what) {
      for (int b = 0; b < kFutureBins; ++b) {
        names.push_back(prefix + what + "_" + std::to_string(2 * b) + "_" + std::to_string(2 * b + 2) + "min");
      }
    };
    switch (g.kind) {
      case FeatureGroupKind::OriginCell:
      case FeatureGroupKind::RequestCell:
        for (const char* n : kCellNames) names.push_back(prefix + n);
        break;
      case FeatureGroupKind::Request:
        for (const char* n : kRequestNames) names.push_back(prefix + n);
        if (time_bins) bins("future_reward");
        break;
      case FeatureGroupKind::Deadhead:
        for (const char* n : kDeadheadNames) names.push_back(prefix + n);
        if (time_bins) bins("future_cost");
        break;
      case FeatureGroupKind::RebalancingCell:
      case FeatureGroupKind::Capacity:
        for (const char* n : kCellNames) names.push_back(prefix + n);
        for (const char* n : kTourNames) names.push_back(prefix + "tour_" + n);
        if (g.kind == FeatureGroupKind::Capacity) names.push_back(prefix + "slot_index");
        break;
      case FeatureGroupKind::RebalancingDeadhead:
        names.push_back(prefix + "distance");
        names.push_back(prefix + "duration");
        break;
    }
  }
  return names;
}

FeatureExtractor::FeatureExtractor(const FeatureSchema& schema, const DispatchGraph& graph,
                                   const FeatureContext& ctx)
    : schema_(schema), graph_(graph), ctx_(ctx) {
  if (!ctx.state || !ctx.demand || !ctx.tt) throw std::invalid_argument("incomplete feature context");
  const CellGrid& grid = ctx.demand->grid();
  const int n_cells = grid.cell_count();
  const double t0 = graph.period_end;
  const double t1 = t0 + ctx.lookahead_s;
  const bool profit = ctx.objective.mode == ObjectiveMode::Profit;

  std::vector<double> available(n_cells, 0.0), requests(n_cells, 0.0), idle(n_cells, 0.0),
      arriving(n_cells, 0.0);
  for (const VehicleState& v : ctx.state->vehicles) {
    const auto c = grid.cell_of(v.ready_location());
    if (!c) continue;
    if (v.ready_time(graph.decision_time) <= graph.period_end) available[*c] += 1.0;
    if (v.pending) {
      arriving[*c] += 1.0;
    } else {
      idle[*c] += 1.0;
    }
  }
  for (const Request& r : ctx.state->batch) {
    if (const auto c = grid.cell_of(r.origin)) requests[*c] += 1.0;
  }

  cells_.resize(n_cells);
  cell_tours_.resize(n_cells);
  for (int c = 0; c < n_cells; ++c) {
    const DemandWindow w = ctx.demand->window(c, t0, t1);
    double* s = cells_[c].values;
    s[0] = available[c];
    s[1] = requests[c];
    s[2] = ratio(requests[c], available[c]);
    s[3] = ratio(available[c], requests[c]);
    s[4] = w.count;
    s[5] = ctx.demand->expected_arrivals(c, t0, t1);
    s[6] = idle[c];
    s[7] = arriving[c];

    const double reward = profit ? w.mean_reward() : (w.count > 0.0 ? 1.0 : 0.0);
    const double cost = ctx.objective.cost_per_km * w.mean_distance();
    double* tour = cell_tours_[c].values;
    tour[0] = minutes(w.mean_duration());
    tour[1] = ratio(reward, minutes(w.mean_duration()));
    tour[2] = w.mean_distance();
    tour[3] = ratio(reward, w.mean_distance());
    tour[4] = ratio(cost, minutes(w.mean_duration()));
    tour[5] = reward;
  }

  request_cell_.assign(graph.requests.size(), -1);
  for (std::size_t j = 0; j < graph.requests.size(); ++j) {
    if (const auto c = grid.cell_of(graph.requests[j].origin)) request_cell_[j] = *c;
  }

  if (schema_.time_bins) {
    future_reward_.assign(graph.requests.size() * kFutureBins, 0.0);
    future_cost_.assign(graph.requests.size() * kFutureBins, 0.0);
    for (std::size_t j = 0; j < graph.requests.size(); ++j) {
      const Request& r = graph.requests[j];
      const auto c = grid.cell_of(r.destination);
      if (!c) continue;
      for (int b = 0; b < kFutureBins; ++b) {
        const double lo = r.arrival_time + b * kFutureBinWidth;
        const DemandWindow w = ctx.demand->window(*c, lo, lo + kFutureBinWidth);
        future_reward_[j * kFutureBins + b] = profit ? w.reward : w.count;
        if (w.count > 0.0) {
          const double km = ctx.tt->travel(r.destination, w.origin).km;
          future_cost_[j * kFutureBins + b] = w.count * ctx.objective.cost_per_km * km;
        }
      }
    }
  }
}

bool FeatureExtractor::weighted(std::size_t arc) const {
  switch (graph_.vertices[graph_.arcs[arc].head].kind) {
    case VertexKind::Request:
    case VertexKind::Artificial:
    case VertexKind::Rebalancing:
    case VertexKind::Capacity:
      return true;
    default:
      return false;
  }
}

const FeatureExtractor::CellState* FeatureExtractor::cell_state(Location l) const {
  const auto c = ctx_.demand->grid().cell_of(l);
  if (!c) {
    ++outside_grid_;
    return nullptr;
  }
  return &cells_[*c];
}

void FeatureExtractor::fill_request(std::int32_t vertex, std::span<double> out) const {
  const Request& r = graph_.request_of(vertex);
  const double reward = ctx_.objective.revenue(r);
  const double cost = ctx_.objective.cost_per_km * r.distance_km;
  const double to_pickup = r.start_time - graph_.decision_time;
  const double to_dropoff = r.arrival_time - graph_.decision_time;
  out[0] = minutes(r.duration());
  out[1] = ratio(reward, minutes(r.duration()));
  out[2] = r.distance_km;
  out[3] = ratio(reward, r.distance_km);
  out[4] = reward / wait_minutes(to_pickup);
  out[5] = reward / wait_minutes(to_dropoff);
  out[6] = ratio(cost, minutes(r.duration()));
  out[7] = cost / wait_minutes(to_dropoff);
  out[8] = reward;
  if (schema_.time_bins) {
    const auto j = static_cast<std::size_t>(graph_.vertices[vertex].ref);
    std::copy_n(future_reward_.begin() + j * kFutureBins, kFutureBins, out.begin() + 9);
  }
}

void FeatureExtractor::fill_deadhead(const Arc& arc, std::span<double> out) const {
  const Request& r = graph_.request_of(arc.head);
  const double cost = ctx_.objective.cost_per_km * arc.deadhead_km;
  out[0] = arc.deadhead_km;
  out[1] = minutes(arc.deadhead_s);
  out[2] = ratio(cost, minutes(r.duration()));
  out[3] = cost / wait_minutes(r.arrival_time - graph_.decision_time);
  out[4] = ratio(cost, arc.deadhead_km);
  if (schema_.time_bins) {
    const auto j = static_cast<std::size_t>(graph_.vertices[arc.head].ref);
    std::copy_n(future_cost_.begin() + j * kFutureBins, kFutureBins, out.begin() + 5);
  }
}

void FeatureExtractor::compute(std::size_t arc_index, std::span<double> out) const {
  if (out.size() != schema_.size()) throw std::invalid_argument("feature buffer has the wrong size");
  std::fill(out.begin(), out.end(), 0.0);
  if (!weighted(arc_index)) return;
  const Arc& arc = graph_.arcs[arc_index];
  const Vertex& head = graph_.vertices[arc.head];
  const Vertex& tail = graph_.vertices[arc.tail];

  for (const FeatureGroup& g : schema_.groups) {
    const auto slot = out.subspan(g.offset, g.size);
    const bool to_request = head.kind == VertexKind::Request || head.kind == VertexKind::Artificial;
    switch (g.kind) {
      case FeatureGroupKind::OriginCell:
        if (head.kind == VertexKind::Capacity) break;
        if (const CellState* s = cell_state(tail.location)) std::copy_n(s->values, kCellStateFeatures, slot.begin());
        break;
      case FeatureGroupKind::RequestCell:
        if (!to_request) break;
        if (const std::int32_t c = request_cell_[head.ref]; c >= 0) {
          std::copy_n(cells_[c].values, kCellStateFeatures, slot.begin());
        } else {
          ++outside_grid_;
        }
        break;
      case FeatureGroupKind::Request:
        if (to_request) fill_request(arc.head, slot);
        break;
      case FeatureGroupKind::Deadhead:
        if (to_request) fill_deadhead(arc, slot);
        break;
      case FeatureGroupKind::RebalancingCell:
        if (head.kind != VertexKind::Rebalancing) break;
        std::copy_n(cells_[head.ref].values, kCellStateFeatures, slot.begin());
        std::copy_n(cell_tours_[head.ref].values, 6, slot.begin() + kCellStateFeatures);
        break;
      case FeatureGroupKind::RebalancingDeadhead:
        if (head.kind != VertexKind::Rebalancing) break;
        slot[0] = arc.deadhead_km;
        slot[1] = minutes(arc.deadhead_s);
        break;
      case FeatureGroupKind::Capacity:
        if (head.kind != VertexKind::Capacity) break;
        std::copy_n(cells_[head.ref].values, kCellStateFeatures, slot.begin());
        std::copy_n(cell_tours_[head.ref].values, 6, slot.begin() + kCellStateFeatures);
        slot[kCellStateFeatures + 6] = head.slot;
        break;
    }
  }
}

std::vector<double> compute_features(std::size_t arc, const DispatchGraph& graph,
                                     const FeatureContext& ctx, const FeatureSchema& schema) {
  FeatureExtractor fx(schema, graph, ctx);
  std::vector<double> out(schema.size());
  fx.compute(arc, out);
  return out;
}

ModelWeights ModelWeights::zeros(const FeatureSchema& schema) {
  ModelWeights m;
  m.schema = schema;
  m.w.assign(schema.size(), 0.0);
  return m;
}

void ModelWeights::validate() const {
  if (w.size() != schema.size()) {
    throw std::invalid_argument("weight vector length " + std::to_string(w.size()) +
                                " does not match schema " + schema.name);
  }
  if (!divisors.empty()) {
    if (divisors.size() != w.size()) throw std::invalid_argument("divisor vector length mismatch");
    for (double d : divisors) {
      if (!(d > 0.0) || !std::isfinite(d)) throw std::invalid_argument("divisors must be positive");
    }
  }
  for (double x : w) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite model weight");
  }
}

FeatureMatrix feature_matrix(const DispatchGraph& graph, const FeatureContext& ctx,
                             const FeatureSchema& schema, std::span<const double> divisors) {
  if (!divisors.empty() && divisors.size() != schema.size()) {
    throw std::invalid_argument("divisor vector length mismatch");
  }
  FeatureExtractor fx(schema, graph, ctx);
  FeatureMatrix m;
  m.width = schema.size();
  for (std::size_t a = 0; a < graph.arcs.size(); ++a) {
    if (!fx.weighted(a)) continue;
    m.arcs.push_back(static_cast<std::int32_t>(a));
    const std::size_t at = m.values.size();
    m.values.resize(at + m.width);
    const std::span<double> row(m.values.data() + at, m.width);
    fx.compute(a, row);
    for (std::size_t i = 0; i < divisors.size(); ++i) row[i] /= divisors[i];
  }
  return m;
}

void predict_weights(const ModelWeights& model, DispatchGraph& graph, const FeatureContext& ctx) {
  model.validate();
  if (model.schema.mode != graph.mode) {
    throw std::invalid_argument("model schema " + model.schema.name + " does not fit a " +
                                to_string(graph.mode) + " graph");
  }
  FeatureExtractor fx(model.schema, graph, ctx);
  std::vector<double> scaled = model.w;
  for (std::size_t i = 0; i < model.divisors.size(); ++i) scaled[i] = model.w[i] / model.divisors[i];
  std::vector<double> phi(model.schema.size());
  graph.weights.assign(graph.arcs.size(), 0.0);
  for (std::size_t a = 0; a < graph.arcs.size(); ++a) {
    if (!fx.weighted(a)) continue;
    fx.compute(a, phi);
    double theta = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) theta += scaled[i] * phi[i];
    graph.weights[a] = theta;
  }
}

std::vector<double> weights_from_matrix(const DispatchGraph& graph, const FeatureMatrix& phi,
                                        std::span<const double> w) {
  if (w.size() != phi.width) throw std::invalid_argument("weight vector does not match feature width");
  std::vector<double> theta(graph.arcs.size(), 0.0);
  for (std::size_t i = 0; i < phi.rows(); ++i) {
    const auto row = phi.row(i);
    double t = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) t += w[j] * row[j];
    theta[phi.arcs[i]] = t;
  }
  return theta;
}

std::vector<double> std_dev_divisors(std::span<const FeatureMatrix> matrices) {
  if (matrices.empty()) return {};
  const std::size_t width = matrices.front().width;
  std::vector<double> mean(width, 0.0), m2(width, 0.0), n(width, 0.0);
  for (const FeatureMatrix& m : matrices) {
    if (m.width != width) throw std::invalid_argument("feature matrices of different widths");
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const auto row = m.row(r);
      for (std::size_t j = 0; j < width; ++j) {
        if (row[j] == 0.0) continue;
        n[j] += 1.0;
        const double delta = row[j] - mean[j];
        mean[j] += delta / n[j];
        m2[j] += delta * (row[j] - mean[j]);
      }
    }
  }
  std::vector<double> div(width, 1.0);
  for (std::size_t j = 0; j < width; ++j) {
    const double sd = n[j] > 1.0 ? std::sqrt(m2[j] / (n[j] - 1.0)) : 0.0;
    div[j] = sd > 1e-9 * std::max(1.0, std::abs(mean[j])) ? sd : 1.0;
  }
  return div;
}

}  // namespace amod
