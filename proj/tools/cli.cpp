#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "amod/demand.hpp"
#include "amod/io.hpp"
#include "amod/learning.hpp"
#include "amod/policies.hpp"
#include "amod/simulator.hpp"

namespace amod::cli {

namespace fs = std::filesystem;

unsigned worker_count() {
  const char* env = std::getenv("AMOD_WORKERS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  const unsigned long n = std::strtoul(env, &end, 10);
  if (*end != '\0') throw std::invalid_argument("AMOD_WORKERS must be a non-negative integer");
  if (n == 0) return std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<unsigned long>(n, 256));
}

namespace {

struct Flags {
  std::string config;
  std::string out = "out";
  std::string policy;
  std::optional<std::uint64_t> seed;
  std::optional<int> fleet;
  std::optional<double> density;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "Scenario configuration (JSON)")->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "Output directory")->capture_default_str();
  sub->add_option("--seed", f.seed, "Master seed");
  sub->add_option("--policy", f.policy, "greedy | sampling | sb | cb | fi");
  sub->add_option("--fleet", f.fleet, "Fleet size")->check(CLI::PositiveNumber);
  sub->add_option("--density", f.density, "Request density in (0, 1]")->check(CLI::Range(0.0, 1.0));
}

ScenarioConfig load_with_overrides(const Flags& f) {
  ScenarioConfig c = f.config.empty() ? parse_config("{}") : load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (!f.policy.empty()) {
    policy_kind_from_string(f.policy);
    c.policy = f.policy;
  }
  if (f.fleet) c.fleet_size = *f.fleet;
  if (f.density) {
    if (!(*f.density > 0.0)) throw std::invalid_argument("density must lie in (0, 1]");
    c.density = *f.density;
  }
  return c;
}

struct Day {
  std::string label;
  std::vector<Request> requests;
};

struct World {
  ScenarioConfig config;
  TravelTimeProvider tt;
  std::optional<RequestDistribution> demand;
  std::optional<ModelWeights> model;

  explicit World(ScenarioConfig c) : config(std::move(c)), tt(make_tt(config)) {}

  static TravelTimeProvider make_tt(const ScenarioConfig& c) {
    if (!c.travel_times.empty()) return load_travel_times(c.resolve(c.travel_times));
    if (c.synthetic) return synthetic_travel_times(*c.synthetic);
    return TravelTimeProvider::straight_line(c.area, c.fallback_speed_kmh);
  }

  std::vector<Day> days(bool training, double density) const {
    std::vector<Day> out;
    const std::uint64_t salt = training ? 0x7261696eULL : 0x74657374ULL;
    const auto& files = training ? config.training_requests : config.requests;
    for (std::size_t i = 0; i < files.size(); ++i) {
      const LoadedRequests loaded = load_requests(config.resolve(files[i]), density,
                                                  epoch_seed(config.seed ^ salt, static_cast<int>(i)),
                                                  config.objective, tt, config.area);
      out.push_back({fs::path(files[i]).stem().string(), loaded.requests});
    }
    if (config.synthetic && files.empty()) {
      const SyntheticConfig& s = *config.synthetic;
      const int lo = training ? 0 : s.training_days;
      const int hi = training ? std::min(s.training_days, s.days) : s.days;
      for (int d = lo; d < hi; ++d) {
        const auto raw = generate_synthetic_day(s, d, tt);
        out.push_back({"day" + std::to_string(d), thin_requests(raw, density, epoch_seed(config.seed ^ salt, d))});
      }
    }
    if (!training && out.empty()) out.push_back({"empty", {}});
    return out;
  }

  std::vector<VehicleState> fleet(const Day& day, int size, int index) const {
    const double t0 = config.first_epoch * config.period_s;
    std::vector<Request> warmup;
    for (const Request& r : day.requests) {
      if (r.start_time < t0) warmup.push_back(r);
    }
    return place_fleet(warmup, size, epoch_seed(config.seed ^ 0x666c6565ULL, index), config.area);
  }

  void load_demand(double density) {
    if (!config.distribution.empty()) {
      demand = load_distribution(config.resolve(config.distribution));
      return;
    }
    std::vector<std::vector<Request>> history;
    for (Day& d : days(true, density)) history.push_back(std::move(d.requests));
    if (history.empty()) return;
    demand = calibrate_distribution(history, CellGrid(config.area, config.cell_m, config.cell_m),
                                    config.distribution_bin_s)
                 .distribution;
  }

  void load_model() {
    if (!config.model.empty()) model = amod::load_model(config.resolve(config.model));
  }

  PolicySpec policy(PolicyKind kind) const {
    PolicySpec p;
    p.kind = kind;
    p.objective = config.objective;
    p.cuts = config.cuts;
    p.seed = config.seed;
    p.discount = config.discount;
    p.horizon_s = config.horizon_s;
    p.lookahead_s = config.lookahead_s;
    p.n_capacity = config.n_capacity;
    if (kind == PolicyKind::SampleBased || kind == PolicyKind::CellBased) {
      if (!model) throw std::invalid_argument(std::string(to_string(kind)) + " policy needs \"model\" in the config");
      p.model = model;
    }
    return p;
  }

  Scenario scenario(const Day& day, int fleet_size, int index, PolicyKind kind) const {
    Scenario s;
    s.requests = day.requests;
    s.fleet = fleet(day, fleet_size, index);
    s.first_epoch = config.first_epoch;
    s.horizon_epochs = config.horizon_epochs;
    s.period_s = config.period_s;
    s.policy = policy(kind);
    return s;
  }

  PolicyContext context() const { return {&tt, demand ? &*demand : nullptr}; }
};

Manifest manifest(const std::string& command, const ScenarioConfig& c) {
  const std::string canonical = c.canonical_json();
  Manifest m;
  m.command = command;
  m.config_hash = fnv1a_hex(canonical);
  m.seed = c.seed;
  m.entries = {{"config", canonical},
               {"lookup_cell_m", format_double(c.cell_m)},
               {"fallback_speed_kmh", format_double(c.fallback_speed_kmh)}};
  return m;
}

void finish(const fs::path& dir, const Manifest& m, const ScenarioConfig& c) {
  write_file(dir / "config.resolved.json", c.canonical_json() + "\n");
  write_manifest(dir / "manifest.json", m);
}

bool needs_demand(PolicyKind k) { return k != PolicyKind::Greedy && k != PolicyKind::FullInformation; }

int cmd_simulate(const Flags& f, std::ostream& out) {
  const ScenarioConfig cfg = load_with_overrides(f);
  World world(cfg);
  const PolicyKind kind = policy_kind_from_string(cfg.policy);
  if (needs_demand(kind)) world.load_demand(cfg.density);
  world.load_model();
  const std::vector<Day> days = world.days(false, cfg.density);

  const fs::path dir(f.out);
  std::vector<std::string> labels;
  std::vector<Metrics> metrics;
  std::string timing = "label,mean_decision_s\n";
  for (std::size_t i = 0; i < days.size(); ++i) {
    Scenario s = world.scenario(days[i], cfg.fleet_size, static_cast<int>(i), kind);
    s.record_snapshots = i == 0;
    const SimulationResult r = days[i].requests.empty() && kind != PolicyKind::FullInformation
                                   ? SimulationResult{}
                                   : run_simulation(s, world.context());
    if (i == 0) write_snapshots_csv(dir / "snapshots.csv", r.snapshots);
    labels.push_back(days[i].label);
    metrics.push_back(r.metrics);
    timing += days[i].label + ',' + format_double(r.metrics.mean_decision_seconds) + '\n';
    out << days[i].label << ": reward " << format_double(r.metrics.reward) << ", served " << r.metrics.served
        << '/' << r.metrics.total_requests << '\n';
  }
  write_metrics_csv(dir / "metrics.csv", labels, metrics);
  write_file(dir / "timing.csv", timing);
  finish(dir, manifest("simulate", cfg), cfg);
  return 0;
}

int cmd_full_info(const Flags& f, std::ostream& out) {
  ScenarioConfig cfg = load_with_overrides(f);
  cfg.policy = "fi";
  World world(cfg);
  const std::vector<Day> days = world.days(false, cfg.density);
  const fs::path dir(f.out);
  std::vector<std::string> labels;
  std::vector<Metrics> metrics;
  for (std::size_t i = 0; i < days.size(); ++i) {
    const Scenario s = world.scenario(days[i], cfg.fleet_size, static_cast<int>(i), PolicyKind::FullInformation);
    const SimulationResult r = run_full_information(s, world.tt);
    labels.push_back(days[i].label);
    metrics.push_back(r.metrics);
    out << days[i].label << ": bound " << format_double(r.metrics.reward) << ", served " << r.metrics.served << '/'
        << r.metrics.total_requests << '\n';
  }
  write_metrics_csv(dir / "metrics.csv", labels, metrics);
  finish(dir, manifest("full-info", cfg), cfg);
  return 0;
}

struct TrainOptions {
  std::optional<int> iterations;
  std::optional<int> samples;
};

int cmd_train(const Flags& f, const TrainOptions& opts, std::ostream& out) {
  ScenarioConfig cfg = load_with_overrides(f);
  if (f.policy.empty() && cfg.policy != "sb" && cfg.policy != "cb") cfg.policy = "sb";
  const PolicyKind kind = policy_kind_from_string(cfg.policy);
  if (kind != PolicyKind::SampleBased && kind != PolicyKind::CellBased) {
    throw std::invalid_argument("train expects --policy sb or cb");
  }
  if (opts.iterations) cfg.training.max_iterations = *opts.iterations;
  if (opts.samples) cfg.training.samples = *opts.samples;

  World world(cfg);
  world.load_demand(cfg.density);
  if (!world.demand) throw std::invalid_argument("train needs training days or a distribution file");
  const std::vector<Day> history = world.days(true, cfg.density);
  if (history.empty()) throw std::invalid_argument("train needs \"training_requests\" or a synthetic world");

  std::vector<TrainingDay> days;
  for (std::size_t i = 0; i < history.size(); ++i) {
    days.push_back({history[i].requests, world.fleet(history[i], cfg.fleet_size, 100000 + static_cast<int>(i))});
  }
  const FeatureSchema schema =
      kind == PolicyKind::SampleBased ? FeatureSchema::sample_based() : FeatureSchema::cell_based();
  PolicySpec variant = world.policy(PolicyKind::Greedy);
  variant.kind = kind;
  TrainingSetConfig tc;
  tc.period_s = cfg.period_s;
  tc.window_begin_s = cfg.training.window_begin_s;
  tc.core_begin_s = cfg.training.core_begin_s;
  tc.core_end_s = cfg.training.core_end_s;
  tc.extraction_period_s = cfg.training.extraction_period_s;

  const auto t0 = std::chrono::steady_clock::now();
  const auto instances = build_training_set(days, variant, world.context(), tc);
  if (instances.empty()) throw std::invalid_argument("the core window produced no training instances");
  TrainConfig train_cfg;
  train_cfg.samples = cfg.training.samples;
  train_cfg.sigma = cfg.training.sigma;
  train_cfg.max_iterations = cfg.training.max_iterations;
  train_cfg.seed = cfg.seed;
  train_cfg.normalize = cfg.training.normalize.value_or(kind == PolicyKind::CellBased);
  train_cfg.checkpoint_every = cfg.training.checkpoint_every;
  TrainResult result = train(instances, schema, train_cfg);
  std::string validation = "iteration,reward_ratio,worst_day_ratio\n";
  if (!result.checkpoints.empty()) {
    std::vector<Scenario> scenarios;
    for (std::size_t i = 0; i < history.size(); ++i) {
      scenarios.push_back(world.scenario(history[i], cfg.fleet_size, 200000 + static_cast<int>(i), PolicyKind::Greedy));
    }
    const CheckpointSelection sel = select_checkpoint(scenarios, variant, result.model, result.checkpoints, world.context());
    for (const CheckpointScore& c : sel.scores) {
      validation += std::to_string(c.iteration) + "," + format_double(c.reward_ratio) + "," +
                    format_double(c.worst_day_ratio) + "\n";
    }
    result.model.w = result.checkpoints[sel.best].w;
    result.model.metadata["selected_iteration"] = std::to_string(result.checkpoints[sel.best].iteration);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const fs::path dir(f.out);
  save_model(dir / "model.json", result.model);
  write_trace_csv(dir / "trace.csv", result.trace);
  if (!result.checkpoints.empty()) write_file(dir / "validation.csv", validation);
  write_file(dir / "timing.csv", "label,wall_s\ntrain," + format_double(seconds) + "\n");
  out << "trained " << schema.name << " on " << instances.size() << " instances: loss "
      << format_double(result.trace.empty() ? 0.0 : result.trace.back().loss) << " (" << result.stop_reason
      << ")\n";
  Manifest m = manifest("train", cfg);
  m.entries.emplace_back("instances", std::to_string(instances.size()));
  finish(dir, m, cfg);
  return 0;
}

struct EvalTask {
  int fleet = 0;
  double density = 1.0;
  std::size_t day = 0;
};

int cmd_evaluate(const Flags& f, std::ostream& out) {
  const ScenarioConfig cfg = load_with_overrides(f);
  World world(cfg);
  world.load_model();

  std::vector<PolicyKind> kinds;
  if (!f.policy.empty()) {
    kinds = {policy_kind_from_string(f.policy)};
  } else if (!cfg.policies.empty()) {
    for (const auto& p : cfg.policies) kinds.push_back(policy_kind_from_string(p));
  } else {
    kinds = {PolicyKind::Greedy, PolicyKind::Sampling, PolicyKind::FullInformation};
    if (world.model) {
      kinds.insert(kinds.begin() + 2, world.model->schema.mode == GraphMode::CellBased ? PolicyKind::CellBased
                                                                                       : PolicyKind::SampleBased);
    }
  }
  const std::vector<int> fleets = f.fleet || cfg.fleet_sizes.empty() ? std::vector<int>{cfg.fleet_size}
                                                                     : cfg.fleet_sizes;
  const std::vector<double> densities =
      f.density || cfg.densities.empty() ? std::vector<double>{cfg.density} : cfg.densities;

  // One world view per density: thinning changes both the test days and the calibrated demand.
  std::vector<World> views;
  std::vector<std::vector<Day>> days;
  for (double d : densities) {
    ScenarioConfig c = cfg;
    c.density = d;
    World w(c);
    w.model = world.model;
    if (std::any_of(kinds.begin(), kinds.end(), needs_demand)) w.load_demand(d);
    days.push_back(w.days(false, d));
    views.push_back(std::move(w));
  }
  std::vector<EvalTask> tasks;
  std::vector<std::size_t> view_of;
  for (int fleet : fleets) {
    for (std::size_t v = 0; v < densities.size(); ++v) {
      for (std::size_t d = 0; d < days[v].size(); ++d) {
        tasks.push_back({fleet, densities[v], d});
        view_of.push_back(v);
      }
    }
  }

  std::vector<std::vector<ComparisonRow>> results(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) {
      try {
        const World& w = views[view_of[i]];
        const Day& day = days[view_of[i]][tasks[i].day];
        const Scenario base = w.scenario(day, tasks[i].fleet, static_cast<int>(tasks[i].day), PolicyKind::Greedy);
        std::vector<PolicySpec> specs;
        for (PolicyKind k : kinds) specs.push_back(w.policy(k));
        results[i] = compare_policies(base, specs, w.context());
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(std::max<std::size_t>(tasks.size(), 1)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<std::string> row_labels, metric_labels;
  std::vector<ComparisonRow> rows;
  std::vector<Metrics> metrics;
  std::string summary = "fleet,density,policy,days,mean_reward,mean_reward_ratio,mean_served_ratio\n";
  std::size_t i = 0;
  for (int fleet : fleets) {
    for (std::size_t v = 0; v < densities.size(); ++v) {
      std::vector<double> reward(kinds.size(), 0.0), ratio(kinds.size(), 0.0), served(kinds.size(), 0.0);
      for (std::size_t d = 0; d < days[v].size(); ++d, ++i) {
        const std::string label = "f" + std::to_string(fleet) + "_d" + format_double(densities[v]) + "_" +
                                  days[v][d].label;
        for (std::size_t k = 0; k < kinds.size(); ++k) {
          const ComparisonRow& row = results[i][k];
          row_labels.push_back(label);
          rows.push_back(row);
          metric_labels.push_back(label + "_" + row.policy);
          metrics.push_back(row.metrics);
          reward[k] += row.metrics.reward;
          ratio[k] += row.reward_ratio;
          served[k] += row.served_ratio;
        }
      }
      const double n = static_cast<double>(days[v].size());
      for (std::size_t k = 0; k < kinds.size(); ++k) {
        summary += std::to_string(fleet) + ',' + format_double(densities[v]) + ',' + to_string(kinds[k]) + ',' +
                   std::to_string(days[v].size()) + ',' + format_double(reward[k] / n) + ',' +
                   format_double(ratio[k] / n) + ',' + format_double(served[k] / n) + '\n';
        out << "fleet " << fleet << " density " << format_double(densities[v]) << ' ' << to_string(kinds[k])
            << ": mean reward " << format_double(reward[k] / n) << ", vs greedy " << format_double(ratio[k] / n)
            << '\n';
      }
    }
  }
  const fs::path dir(f.out);
  write_comparison_csv(dir / "comparison.csv", row_labels, rows);
  write_metrics_csv(dir / "metrics.csv", metric_labels, metrics);
  write_file(dir / "summary.csv", summary);
  Manifest m = manifest("evaluate", cfg);
  m.entries.emplace_back("scenarios", std::to_string(tasks.size()));
  finish(dir, m, cfg);
  return 0;
}

int cmd_generate(const Flags& f, std::optional<int> n_days, std::ostream& out) {
  ScenarioConfig cfg = load_with_overrides(f);
  SyntheticConfig syn = cfg.synthetic.value_or(SyntheticConfig{});
  if (f.seed) syn.seed = *f.seed;
  if (n_days) syn.days = *n_days;
  if (syn.days < 1) throw std::invalid_argument("generate needs at least one day");
  const TravelTimeProvider tt = synthetic_travel_times(syn);
  const fs::path dir(f.out);
  save_travel_times(dir / "travel_times.json", tt);

  ScenarioConfig scenario = cfg;
  scenario.synthetic.reset();
  scenario.area = syn.area;
  scenario.cell_m = syn.cell_m;
  scenario.fallback_speed_kmh = syn.speed_kmh;
  scenario.travel_times = "travel_times.json";
  scenario.requests.clear();
  scenario.training_requests.clear();
  std::size_t total = 0;
  for (int d = 0; d < syn.days; ++d) {
    const auto requests = generate_synthetic_day(syn, d, tt);
    total += requests.size();
    char name[32];
    std::snprintf(name, sizeof(name), "requests/day_%03d.csv", d);
    save_requests(dir / name, requests);
    (d < syn.training_days ? scenario.training_requests : scenario.requests).push_back(name);
  }
  if (total == 0) std::cerr << "warning: the demand pattern produced no requests\n";
  write_file(dir / "scenario.json", scenario.canonical_json() + "\n");
  out << "generated " << syn.days << " days, " << total << " requests, hot cells";
  for (int c : synthetic_hot_cells(syn)) out << ' ' << c;
  out << '\n';
  cfg.synthetic = syn;
  finish(dir, manifest("generate", cfg), cfg);
  return 0;
}

int cmd_calibrate(const Flags& f, std::ostream& out) {
  const ScenarioConfig cfg = load_with_overrides(f);
  World world(cfg);
  std::vector<std::vector<Request>> history;
  for (Day& d : world.days(true, cfg.density)) history.push_back(std::move(d.requests));
  if (history.empty()) throw std::invalid_argument("calibrate needs \"training_requests\" or a synthetic world");
  const CalibrationResult cal =
      calibrate_distribution(history, CellGrid(cfg.area, cfg.cell_m, cfg.cell_m), cfg.distribution_bin_s);
  const fs::path dir(f.out);
  save_distribution(dir / "distribution.json", cal.distribution);
  out << "calibrated " << history.size() << " days on " << cal.distribution.grid().cell_count() << " cells x "
      << cal.distribution.bin_count() << " bins; " << cal.rejected << " requests outside the grid\n";
  Manifest m = manifest("calibrate", cfg);
  m.entries.emplace_back("rejected", std::to_string(cal.rejected));
  finish(dir, m, cfg);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fleet dispatching and rebalancing for ride-hailing"};
  app.require_subcommand(1);
  Flags flags;
  TrainOptions train_opts;
  std::optional<int> gen_days;

  auto* simulate = app.add_subcommand("simulate", "Run one policy over the evaluation days");
  auto* train_cmd = app.add_subcommand("train", "Build the imitation set and fit model weights");
  auto* evaluate = app.add_subcommand("evaluate", "Compare policies over a fleet and density grid");
  auto* full_info = app.add_subcommand("full-info", "Offline full-information bound per day");
  auto* generate = app.add_subcommand("generate", "Write a synthetic hot-cell world");
  auto* calibrate = app.add_subcommand("calibrate", "Fit the empirical request distribution");
  for (auto* sub : {simulate, train_cmd, evaluate, full_info, generate, calibrate}) add_common(sub, flags);
  train_cmd->add_option("--iterations", train_opts.iterations, "BFGS iteration limit")->check(CLI::PositiveNumber);
  train_cmd->add_option("--samples", train_opts.samples, "Perturbation samples")->check(CLI::PositiveNumber);
  generate->add_option("--days", gen_days, "Number of days")->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    const auto sub = app.get_subcommands();
    err << (sub.empty() ? app.help() : sub.front()->help());
    return 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(flags, out);
    if (train_cmd->parsed()) return cmd_train(flags, train_opts, out);
    if (evaluate->parsed()) return cmd_evaluate(flags, out);
    if (full_info->parsed()) return cmd_full_info(flags, out);
    if (generate->parsed()) return cmd_generate(flags, gen_days, out);
    if (calibrate->parsed()) return cmd_calibrate(flags, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace amod::cli
