#include "amod/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

namespace amod {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line, const char* column) {
  field = trim(field);
  T value{};
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw IoError("line " + std::to_string(line) + ": malformed " + column + " '" + std::string(field) + "'");
  }
  return value;
}

constexpr const char* kRequestColumns[] = {"id",        "pickup_x",     "pickup_y", "dropoff_x",
                                           "dropoff_y", "start_time_s", "revenue"};

json area_json(const Area& a) {
  return {{"x_min", a.x_min}, {"y_min", a.y_min}, {"x_max", a.x_max}, {"y_max", a.y_max}};
}

Area area_from(const json& j) {
  return {j.at("x_min").get<double>(), j.at("y_min").get<double>(), j.at("x_max").get<double>(),
          j.at("y_max").get<double>()};
}

json grid_json(const CellGrid& g) {
  return {{"area", area_json(g.area())}, {"cell_width_m", g.cell_width()}, {"cell_height_m", g.cell_height()}};
}

CellGrid grid_from(const json& j) {
  return CellGrid(area_from(j.at("area")), j.at("cell_width_m").get<double>(), j.at("cell_height_m").get<double>());
}

json parse_json(std::string_view text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(what + ": " + e.what());
  }
}

}  // namespace

LoadedRequests parse_requests(std::string_view text, double density, std::uint64_t seed,
                              const Objective& objective, const TravelTimeProvider& tt, const Area& area) {
  if (!(density > 0.0 && density <= 1.0)) throw IoError("density must lie in (0, 1]");
  LoadedRequests out;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(density);

  std::size_t line_no = 0;
  bool header_seen = false;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const auto fields = split(line, ',');
    if (!header_seen) {
      if (fields.size() != std::size(kRequestColumns)) throw IoError("line 1: expected 7 header columns");
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (trim(fields[i]) != kRequestColumns[i]) {
          throw IoError("line " + std::to_string(line_no) + ": unexpected header column '" +
                        std::string(trim(fields[i])) + "'");
        }
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != std::size(kRequestColumns)) {
      throw IoError("line " + std::to_string(line_no) + ": expected 7 fields, got " + std::to_string(fields.size()));
    }
    ++out.rows;
    const auto id = parse_number<std::int64_t>(fields[0], line_no, "id");
    const Location origin{parse_number<double>(fields[1], line_no, "pickup_x"),
                          parse_number<double>(fields[2], line_no, "pickup_y")};
    const Location destination{parse_number<double>(fields[3], line_no, "dropoff_x"),
                               parse_number<double>(fields[4], line_no, "dropoff_y")};
    const double start = parse_number<double>(fields[5], line_no, "start_time_s");
    const double revenue = parse_number<double>(fields[6], line_no, "revenue");
    if (!std::isfinite(start) || !std::isfinite(revenue) || revenue < 0.0) {
      throw IoError("line " + std::to_string(line_no) + ": start time must be finite and revenue non-negative");
    }
    if (!keep(rng)) {
      ++out.thinned;
      continue;
    }
    if (!area.contains(origin) || !area.contains(destination)) {
      ++out.outside_area;
      continue;
    }
    const double reward = objective.mode == ObjectiveMode::Profit ? revenue : 1.0;
    out.requests.push_back(make_request(id, origin, destination, start, reward, tt));
    if (end == text.size()) break;
  }
  if (!header_seen) throw IoError("request file has no header");
  std::sort(out.requests.begin(), out.requests.end(), [](const Request& a, const Request& b) {
    return a.start_time != b.start_time ? a.start_time < b.start_time : a.id < b.id;
  });
  return out;
}

LoadedRequests load_requests(const fs::path& path, double density, std::uint64_t seed,
                             const Objective& objective, const TravelTimeProvider& tt, const Area& area) {
  try {
    return parse_requests(read_file(path), density, seed, objective, tt, area);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void save_requests(const fs::path& path, std::span<const Request> requests) {
  std::string out = "id,pickup_x,pickup_y,dropoff_x,dropoff_y,start_time_s,revenue\n";
  for (const Request& r : requests) {
    out += std::to_string(r.id) + ',' + format_double(r.origin.x) + ',' + format_double(r.origin.y) + ',' +
           format_double(r.destination.x) + ',' + format_double(r.destination.y) + ',' +
           format_double(r.start_time) + ',' + format_double(r.reward) + '\n';
  }
  write_file(path, out);
}

void save_travel_times(const fs::path& path, const TravelTimeProvider& tt) {
  json entries = json::array();
  const int n = tt.grid().cell_count();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (const auto leg = tt.entry(i, j)) entries.push_back({i, j, leg->seconds, leg->km});
    }
  }
  const json j = {{"format", "amod-travel-times"},
                  {"grid", grid_json(tt.grid())},
                  {"fallback_speed_kmh", tt.fallback_speed_kmh()},
                  {"entries", entries}};
  write_file(path, j.dump(1) + "\n");
}

TravelTimeProvider load_travel_times(const fs::path& path) {
  const json j = parse_json(read_file(path), path.string());
  try {
    TravelTimeProvider tt(grid_from(j.at("grid")), j.at("fallback_speed_kmh").get<double>());
    for (const json& e : j.at("entries")) {
      tt.set_entry(e.at(0).get<int>(), e.at(1).get<int>(), {e.at(2).get<double>(), e.at(3).get<double>()});
    }
    return tt;
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void save_distribution(const fs::path& path, const RequestDistribution& dist) {
  json bins = json::array();
  for (int c = 0; c < dist.grid().cell_count(); ++c) {
    for (int b = 0; b < dist.bin_count(); ++b) {
      const auto& bin = dist.bin(c, b);
      if (bin.total_count == 0 && bin.samples.empty()) continue;
      json samples = json::array();
      for (const DemandSample& s : bin.samples) {
        samples.push_back({s.origin_offset.x, s.origin_offset.y, s.destination.x, s.destination.y, s.duration_s,
                           s.distance_km, s.reward});
      }
      bins.push_back({{"cell", c}, {"bin", b}, {"count", bin.total_count}, {"samples", samples}});
    }
  }
  const json j = {{"format", "amod-request-distribution"},
                  {"grid", grid_json(dist.grid())},
                  {"bin_width_s", dist.bin_width()},
                  {"bin_count", dist.bin_count()},
                  {"days", dist.days()},
                  {"bins", bins}};
  write_file(path, j.dump() + "\n");
}

RequestDistribution load_distribution(const fs::path& path) {
  const json j = parse_json(read_file(path), path.string());
  try {
    RequestDistribution dist(grid_from(j.at("grid")), j.at("bin_width_s").get<double>(),
                             j.at("bin_count").get<int>(), j.at("days").get<int>());
    for (const json& b : j.at("bins")) {
      const int c = b.at("cell").get<int>(), k = b.at("bin").get<int>();
      if (c < 0 || c >= dist.grid().cell_count() || k < 0 || k >= dist.bin_count()) {
        throw IoError(path.string() + ": bin index out of range");
      }
      auto& bin = dist.bin(c, k);
      bin.total_count = b.at("count").get<std::int64_t>();
      if (bin.total_count < 0) throw IoError(path.string() + ": negative bin count");
      for (const json& s : b.at("samples")) {
        bin.samples.push_back({{s.at(0).get<double>(), s.at(1).get<double>()},
                               {s.at(2).get<double>(), s.at(3).get<double>()},
                               s.at(4).get<double>(),
                               s.at(5).get<double>(),
                               s.at(6).get<double>()});
      }
    }
    dist.refresh();
    return dist;
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void save_model(const fs::path& path, const ModelWeights& model) {
  model.validate();
  const json j = {{"format", "amod-model"},
                  {"schema", model.schema.name},
                  {"feature_names", model.schema.feature_names()},
                  {"w", model.w},
                  {"normalization", model.normalized() ? "std-dev" : "none"},
                  {"divisors", model.divisors},
                  {"metadata", model.metadata}};
  write_file(path, j.dump(1) + "\n");
}

ModelWeights load_model(const fs::path& path) {
  const json j = parse_json(read_file(path), path.string());
  try {
    ModelWeights m;
    m.schema = FeatureSchema::by_name(j.at("schema").get<std::string>());
    m.w = j.at("w").get<std::vector<double>>();
    m.divisors = j.value("divisors", std::vector<double>{});
    m.metadata = j.value("metadata", std::map<std::string, std::string>{});
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_trace_csv(const fs::path& path, std::span<const TraceRow> trace) {
  std::string out = "iteration,loss,grad_norm\n";
  for (const TraceRow& r : trace) {
    out += std::to_string(r.iteration) + ',' + format_double(r.loss) + ',' + format_double(r.grad_norm) + '\n';
  }
  write_file(path, out);
}

std::vector<Request> thin_requests(std::span<const Request> requests, double density, std::uint64_t seed) {
  if (!(density > 0.0 && density <= 1.0)) throw IoError("density must lie in (0, 1]");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution keep(density);
  std::vector<Request> out;
  for (const Request& r : requests) {
    if (keep(rng)) out.push_back(r);
  }
  return out;
}

TravelTimeProvider synthetic_travel_times(const SyntheticConfig& config) {
  TravelTimeProvider tt(CellGrid(config.area, config.cell_m, config.cell_m), config.speed_kmh);
  const CellGrid& g = tt.grid();
  for (int i = 0; i < g.cell_count(); ++i) {
    for (int j = 0; j < g.cell_count(); ++j) {
      if (i == j) continue;
      const double km = config.detour * distance_m(g.center(i), g.center(j)) / 1000.0;
      tt.set_entry(i, j, {km / config.speed_kmh * 3600.0, km});
    }
  }
  return tt;
}

std::vector<int> synthetic_hot_cells(const SyntheticConfig& config) {
  const CellGrid grid(config.area, config.cell_m, config.cell_m);
  std::vector<int> cells(grid.cell_count());
  std::iota(cells.begin(), cells.end(), 0);
  std::mt19937_64 rng(config.seed ^ 0x5eedce11ULL);
  std::shuffle(cells.begin(), cells.end(), rng);
  const auto hot = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(config.hot_cell_fraction * grid.cell_count())));
  cells.resize(std::min(hot, cells.size()));
  std::sort(cells.begin(), cells.end());
  return cells;
}

std::vector<Request> generate_synthetic_day(const SyntheticConfig& config, int day, const TravelTimeProvider& tt) {
  const CellGrid grid(config.area, config.cell_m, config.cell_m);
  const std::vector<int> hot = synthetic_hot_cells(config);
  std::vector<int> cold;
  for (int c = 0; c < grid.cell_count(); ++c) {
    if (!std::binary_search(hot.begin(), hot.end(), c)) cold.push_back(c);
  }
  const double length = config.day_end_s - config.day_begin_s;
  const double mean = config.requests_per_hour * length / 3600.0;
  std::vector<Request> out;
  if (!(mean > 0.0)) return out;

  std::mt19937_64 rng(config.seed * 1000003ULL + static_cast<std::uint64_t>(day) * 7919ULL + 17ULL);
  const int n = std::poisson_distribution<int>(mean)(rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto point_in = [&](int cell) {
    const Location c = grid.center(cell);
    return Location{c.x + (unit(rng) - 0.5) * grid.cell_width(), c.y + (unit(rng) - 0.5) * grid.cell_height()};
  };
  auto pick = [&](const std::vector<int>& cells) {
    return cells[std::min(cells.size() - 1, static_cast<std::size_t>(unit(rng) * cells.size()))];
  };
  auto any_cell = [&]() { return std::min(grid.cell_count() - 1, static_cast<int>(unit(rng) * grid.cell_count())); };

  for (int i = 0; i < n; ++i) {
    const double start = config.day_begin_s + unit(rng) * length;
    const bool hot_origin = cold.empty() || unit(rng) < config.hot_demand_share;
    const Location origin = point_in(hot_origin ? pick(hot) : pick(cold));
    const bool hot_dest = unit(rng) < config.hot_destination_share;
    Location destination = point_in(hot_dest ? pick(hot) : any_cell());
    if (destination == origin) destination.x += 1.0;
    const Leg leg = tt.travel(origin, destination);
    const double fare = config.base_fare + config.fare_per_km * leg.km;
    out.push_back(make_request(0, origin, destination, start, std::round(fare * 100.0) / 100.0, tt));
  }
  std::sort(out.begin(), out.end(), [](const Request& a, const Request& b) { return a.start_time < b.start_time; });
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].id = static_cast<RequestId>(day) * 1000000 + static_cast<RequestId>(i);
  }
  return out;
}

fs::path ScenarioConfig::resolve(const std::string& p) const {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
}

namespace {

json synthetic_json(const SyntheticConfig& s) {
  return {{"area", area_json(s.area)},
          {"cell_m", s.cell_m},
          {"speed_kmh", s.speed_kmh},
          {"detour", s.detour},
          {"requests_per_hour", s.requests_per_hour},
          {"day_begin_s", s.day_begin_s},
          {"day_end_s", s.day_end_s},
          {"hot_cell_fraction", s.hot_cell_fraction},
          {"hot_demand_share", s.hot_demand_share},
          {"hot_destination_share", s.hot_destination_share},
          {"base_fare", s.base_fare},
          {"fare_per_km", s.fare_per_km},
          {"days", s.days},
          {"training_days", s.training_days},
          {"seed", s.seed}};
}

SyntheticConfig synthetic_from(const json& j) {
  SyntheticConfig s;
  if (j.contains("area")) s.area = area_from(j.at("area"));
  s.cell_m = j.value("cell_m", s.cell_m);
  s.speed_kmh = j.value("speed_kmh", s.speed_kmh);
  s.detour = j.value("detour", s.detour);
  s.requests_per_hour = j.value("requests_per_hour", s.requests_per_hour);
  s.day_begin_s = j.value("day_begin_s", s.day_begin_s);
  s.day_end_s = j.value("day_end_s", s.day_end_s);
  s.hot_cell_fraction = j.value("hot_cell_fraction", s.hot_cell_fraction);
  s.hot_demand_share = j.value("hot_demand_share", s.hot_demand_share);
  s.hot_destination_share = j.value("hot_destination_share", s.hot_destination_share);
  s.base_fare = j.value("base_fare", s.base_fare);
  s.fare_per_km = j.value("fare_per_km", s.fare_per_km);
  s.days = j.value("days", s.days);
  s.training_days = j.value("training_days", s.training_days);
  s.seed = j.value("seed", s.seed);
  return s;
}

json optional_number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_or_inf(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::infinity();
  return j.at(key).get<double>();
}

json config_json(const ScenarioConfig& c) {
  json j = {{"area", area_json(c.area)},
            {"cell_m", c.cell_m},
            {"fallback_speed_kmh", c.fallback_speed_kmh},
            {"period_s", c.period_s},
            {"first_epoch", c.first_epoch},
            {"horizon_epochs", c.horizon_epochs},
            {"fleet_size", c.fleet_size},
            {"density", c.density},
            {"objective", c.objective.mode == ObjectiveMode::Profit ? "profit" : "satisfied-customers"},
            {"cost_per_km", c.objective.cost_per_km},
            {"seed", c.seed},
            {"distribution_bin_s", c.distribution_bin_s},
            {"policy",
             {{"kind", c.policy},
              {"discount", c.discount},
              {"horizon_s", c.horizon_s},
              {"lookahead_s", c.lookahead_s},
              {"n_capacity", c.n_capacity}}},
            {"sparsification", {{"t_max_s", optional_number(c.cuts.t_max_s)}, {"d_max_km", optional_number(c.cuts.d_max_km)}}},
            {"travel_times", c.travel_times},
            {"requests", c.requests},
            {"training_requests", c.training_requests},
            {"distribution", c.distribution},
            {"model", c.model},
            {"training",
             {{"samples", c.training.samples},
              {"sigma", c.training.sigma},
              {"max_iterations", c.training.max_iterations},
              {"checkpoint_every", c.training.checkpoint_every},
              {"extraction_period_s", c.training.extraction_period_s},
              {"window_begin_s", c.training.window_begin_s},
              {"core_begin_s", c.training.core_begin_s},
              {"core_end_s", c.training.core_end_s},
              {"normalize", c.training.normalize ? json(*c.training.normalize) : json(nullptr)}}},
            {"evaluate", {{"fleet_sizes", c.fleet_sizes}, {"densities", c.densities}, {"policies", c.policies}}}};
  if (c.synthetic) j["synthetic"] = synthetic_json(*c.synthetic);
  return j;
}

std::vector<std::string> string_list(const json& j, const char* key) {
  if (!j.contains(key)) return {};
  if (j.at(key).is_string()) return {j.at(key).get<std::string>()};
  return j.at(key).get<std::vector<std::string>>();
}

// Rejects keys the canonical form of a default config does not have.
void check_keys(const json& given, const json& known, const std::string& where) {
  for (const auto& [key, value] : given.items()) {
    const auto it = known.find(key);
    if (it == known.end()) throw IoError("config: unknown key '" + where + key + "'");
    if (value.is_object() && it->is_object()) check_keys(value, *it, where + key + ".");
  }
}

}  // namespace

std::string ScenarioConfig::canonical_json() const { return config_json(*this).dump(); }

ScenarioConfig parse_config(std::string_view text, const fs::path& base_dir) {
  const json j = parse_json(text, "config");
  if (!j.is_object()) throw IoError("config: expected a JSON object");
  json known = config_json(ScenarioConfig{});
  known["synthetic"] = synthetic_json(SyntheticConfig{});
  check_keys(j, known, "");
  ScenarioConfig c;
  c.base_dir = base_dir;
  try {
    if (j.contains("area")) c.area = area_from(j.at("area"));
    c.cell_m = j.value("cell_m", c.cell_m);
    c.fallback_speed_kmh = j.value("fallback_speed_kmh", c.fallback_speed_kmh);
    c.period_s = j.value("period_s", c.period_s);
    c.first_epoch = j.value("first_epoch", c.first_epoch);
    c.horizon_epochs = j.value("horizon_epochs", c.horizon_epochs);
    c.fleet_size = j.value("fleet_size", c.fleet_size);
    c.density = j.value("density", c.density);
    const std::string objective = j.value("objective", std::string("profit"));
    if (objective == "profit") {
      c.objective = Objective::profit(j.value("cost_per_km", 0.45));
    } else if (objective == "satisfied-customers") {
      c.objective = Objective::satisfied_customers();
    } else {
      throw IoError("config: unknown objective '" + objective + "'");
    }
    c.seed = j.value("seed", c.seed);
    c.distribution_bin_s = j.value("distribution_bin_s", c.distribution_bin_s);
    if (j.contains("policy")) {
      const json& p = j.at("policy");
      c.policy = p.value("kind", c.policy);
      c.discount = p.value("discount", c.discount);
      c.horizon_s = p.value("horizon_s", c.horizon_s);
      c.lookahead_s = p.value("lookahead_s", c.lookahead_s);
      c.n_capacity = p.value("n_capacity", c.n_capacity);
    }
    if (j.contains("sparsification")) {
      c.cuts.t_max_s = number_or_inf(j.at("sparsification"), "t_max_s");
      c.cuts.d_max_km = number_or_inf(j.at("sparsification"), "d_max_km");
    }
    c.travel_times = j.value("travel_times", std::string());
    c.requests = string_list(j, "requests");
    c.training_requests = string_list(j, "training_requests");
    c.distribution = j.value("distribution", std::string());
    c.model = j.value("model", std::string());
    if (j.contains("training")) {
      const json& t = j.at("training");
      c.training.samples = t.value("samples", c.training.samples);
      c.training.sigma = t.value("sigma", c.training.sigma);
      c.training.max_iterations = t.value("max_iterations", c.training.max_iterations);
      c.training.checkpoint_every = t.value("checkpoint_every", c.training.checkpoint_every);
      c.training.extraction_period_s = t.value("extraction_period_s", c.training.extraction_period_s);
      c.training.window_begin_s = t.value("window_begin_s", c.training.window_begin_s);
      c.training.core_begin_s = t.value("core_begin_s", c.training.core_begin_s);
      c.training.core_end_s = t.value("core_end_s", c.training.core_end_s);
      if (t.contains("normalize") && !t.at("normalize").is_null()) c.training.normalize = t.at("normalize").get<bool>();
    }
    if (j.contains("evaluate")) {
      const json& e = j.at("evaluate");
      c.fleet_sizes = e.value("fleet_sizes", std::vector<int>{});
      c.densities = e.value("densities", std::vector<double>{});
      c.policies = e.value("policies", std::vector<std::string>{});
    }
    if (j.contains("synthetic")) {
      c.synthetic = synthetic_from(j.at("synthetic"));
      if (!j.contains("area")) c.area = c.synthetic->area;
    }
  } catch (const json::exception& e) {
    throw IoError(std::string("config: ") + e.what());
  }
  if (!(c.period_s > 0.0)) throw IoError("config: period_s must be positive");
  if (c.horizon_epochs < 1) throw IoError("config: horizon_epochs must be at least 1");
  if (c.fleet_size < 1) throw IoError("config: fleet_size must be at least 1");
  if (!(c.density > 0.0 && c.density <= 1.0)) throw IoError("config: density must lie in (0, 1]");
  return c;
}

ScenarioConfig load_config(const fs::path& path) {
  return parse_config(read_file(path), path.has_parent_path() ? path.parent_path() : fs::path("."));
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = kHex[h & 0xf];
  return out;
}

void write_metrics_csv(const fs::path& path, std::span<const std::string> labels, std::span<const Metrics> metrics) {
  std::string out =
      "label,reward,revenue,served,total_requests,service_ratio,km_total,km_empty,km_rebalancing,km_per_request,"
      "km_per_vehicle,epochs\n";
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const Metrics& m = metrics[i];
    out += labels[i] + ',' + format_double(m.reward) + ',' + format_double(m.revenue) + ',' + std::to_string(m.served) +
           ',' + std::to_string(m.total_requests) + ',' + format_double(m.service_ratio) + ',' +
           format_double(m.km_total) + ',' + format_double(m.km_empty) + ',' + format_double(m.km_rebalancing) + ',' +
           format_double(m.km_per_request) + ',' + format_double(m.km_per_vehicle) + ',' + std::to_string(m.epochs) +
           '\n';
  }
  write_file(path, out);
}

void write_comparison_csv(const fs::path& path, std::span<const std::string> labels,
                          std::span<const ComparisonRow> rows) {
  std::string out =
      "scenario,policy,reward,served,km_per_request,km_per_vehicle,reward_ratio,served_ratio,km_per_request_ratio,"
      "km_per_vehicle_ratio\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ComparisonRow& r = rows[i];
    out += labels[i] + ',' + r.policy + ',' + format_double(r.metrics.reward) + ',' + std::to_string(r.metrics.served) +
           ',' + format_double(r.metrics.km_per_request) + ',' + format_double(r.metrics.km_per_vehicle) + ',' +
           format_double(r.reward_ratio) + ',' + format_double(r.served_ratio) + ',' +
           format_double(r.km_per_request_ratio) + ',' + format_double(r.km_per_vehicle_ratio) + '\n';
  }
  write_file(path, out);
}

void write_snapshots_csv(const fs::path& path, std::span<const Snapshot> snapshots) {
  std::string out = "epoch,vehicle_id,x,y,status\n";
  for (const Snapshot& s : snapshots) {
    out += std::to_string(s.epoch) + ',' + std::to_string(s.vehicle_id) + ',' + format_double(s.location.x) + ',' +
           format_double(s.location.y) + ',' + to_string(s.status) + '\n';
  }
  write_file(path, out);
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
  json entries = json::object();
  for (const auto& [k, v] : manifest.entries) entries[k] = v;
  const json j = {{"command", manifest.command},
                  {"config_hash", manifest.config_hash},
                  {"seed", manifest.seed},
                  {"version", AMOD_VERSION_STRING},
                  {"entries", entries}};
  write_file(path, j.dump(1) + "\n");
}

}  // namespace amod
