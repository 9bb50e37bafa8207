#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "amod/io.hpp"
#include "amod/learning.hpp"
#include "cli.hpp"
#include "criteria.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace amod::acceptance {

namespace fs = std::filesystem;

Outcome toy_training(Context&) {
  Stopwatch clock;
  // two small instances whose targets come from different hidden weights
  std::vector<TrainingInstance> toy{testing::random_instance(41, 2, 5, 3), testing::random_instance(57, 2, 5, 3)};
  FeatureSchema schema;
  schema.name = "toy";
  schema.mode = GraphMode::Base;
  schema.groups.push_back({FeatureGroupKind::Request, 0, 3});

  TrainConfig cfg;
  cfg.samples = 10;
  cfg.sigma = 1.0;
  cfg.max_iterations = 200;
  cfg.seed = 5;
  const TrainResult fit = train(toy, schema, cfg);

  const PerturbationSet z = PerturbationSet::draw(3, cfg.samples, cfg.sigma, cfg.seed);
  const auto loss = [&](std::span<const double> w) { return mean_loss_and_gradient(w, toy, z).loss; };
  const testing::GridMinimum grid = testing::refined_grid_minimum(loss, 3, -4.0, 4.0, 33, 3);
  const double trained = loss(fit.model.w);

  bool monotone = true;
  for (std::size_t i = 1; i < fit.trace.size(); ++i) monotone = monotone && fit.trace[i].loss <= fit.trace[i - 1].loss;
  const double t = clock.seconds();
  std::ostringstream d;
  d.precision(10);
  d << "trained loss " << trained << " vs grid minimum " << grid.value << " (" << grid.points << " points), gap " << trained - grid.value << ", trace "
    << (monotone ? "non-increasing" : "increases") << " over " << fit.trace.size() << " rows, " << t << " s";
  return {std::abs(trained - grid.value) <= 1e-6 && monotone && t < 30.0, d.str()};
}

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<std::map<std::string, std::string>> read_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::vector<std::string> header;
  std::vector<std::map<std::string, std::string>> rows;
  auto split = [](const std::string& s) {
    std::vector<std::string> f;
    std::stringstream ss(s);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    return f;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header.empty()) {
      header = split(line);
      continue;
    }
    const auto f = split(line);
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size() && i < f.size(); ++i) row[header[i]] = f[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

constexpr const char* kHotCellWorld = R"({
  "seed": 3,
  "fleet_size": 100,
  "first_epoch": 16,
  "horizon_epochs": 60,
  "synthetic": {"seed": 3, "requests_per_hour": 240, "days": 15, "training_days": 5},
  "training": {"samples": 10, "sigma": 1.0, "max_iterations": 60, "checkpoint_every": 10,
               "window_begin_s": 60, "core_begin_s": 960, "core_end_s": 4560, "extraction_period_s": 225}
})";

struct PolicyResult {
  double ratio = 0.0;
  double worst_day = 0.0;
  double fi_service = 0.0;
  std::size_t days = 0;
  std::string selected;
  std::string error;
};

PolicyResult train_and_evaluate(Context& ctx, const std::string& policy) {
  PolicyResult out;
  const fs::path dir = ctx.work_dir / "learning" / policy;
  fs::create_directories(dir);
  write_file(dir / "world.json", kHotCellWorld);
  const CliRun t = run_cli({"train", "--config", (dir / "world.json").string(), "--policy", policy, "--out",
                            (dir / "model").string()});
  if (t.code != 0) {
    if (t.err.find("epoch ") != std::string::npos) ctx.record_violation();
    out.error = "train failed: " + t.err;
    return out;
  }
  const ModelWeights model = load_model(dir / "model" / "model.json");
  out.selected = model.metadata.contains("selected_iteration") ? model.metadata.at("selected_iteration") : "last";
  if (policy == "sb") ctx.sb_model = model;

  std::string eval = kHotCellWorld;
  eval.insert(1, "\"model\": \"model/model.json\", \"evaluate\": {\"policies\": [\"greedy\", \"" + policy + "\", \"fi\"]},");
  write_file(dir / "evaluate.json", eval);
  const CliRun e = run_cli({"evaluate", "--config", (dir / "evaluate.json").string(), "--out", (dir / "eval").string()});
  if (e.code != 0) {
    if (e.err.find("epoch ") != std::string::npos) ctx.record_violation();
    out.error = "evaluate failed: " + e.err;
    return out;
  }
  double greedy = 0.0, learned = 0.0, fi_served = 0.0, fi_total = 0.0;
  out.worst_day = 1e300;
  std::map<std::string, double> greedy_by_day;
  for (const auto& row : read_csv(dir / "eval" / "comparison.csv")) {
    ++ctx.simulations;
    const double reward = std::stod(row.at("reward"));
    if (row.at("policy") == "greedy") {
      greedy += reward;
      greedy_by_day[row.at("scenario")] = reward;
    } else if (row.at("policy") == policy) {
      learned += reward;
      out.worst_day = std::min(out.worst_day, std::stod(row.at("reward_ratio")));
      ++out.days;
    }
  }
  for (const auto& row : read_csv(dir / "eval" / "metrics.csv")) {
    const std::string& label = row.at("label");
    if (label.size() > 3 && label.substr(label.size() - 3) == "_fi") {
      fi_served += std::stod(row.at("served"));
      fi_total += std::stod(row.at("total_requests"));
    }
  }
  out.ratio = greedy > 0.0 ? learned / greedy : 0.0;
  out.fi_service = fi_total > 0.0 ? fi_served / fi_total : 0.0;
  return out;
}

}  // namespace

Outcome learning_benefit(Context& ctx) {
  Stopwatch clock;
  const PolicyResult sb = train_and_evaluate(ctx, "sb");
  const PolicyResult cb = train_and_evaluate(ctx, "cb");
  const double t = clock.seconds();
  std::ostringstream d;
  d.precision(4);
  bool pass = sb.error.empty() && cb.error.empty();
  if (!pass) {
    d << sb.error << cb.error;
    return {false, d.str()};
  }
  pass = sb.ratio >= 1.02 && cb.ratio >= 1.01 && sb.worst_day >= 0.995 && cb.worst_day >= 0.995 &&
         sb.days == 10 && cb.days == 10 && t < 1800.0;
  d << "SB/greedy " << sb.ratio << " (worst day " << sb.worst_day << ", iteration " << sb.selected << "), CB/greedy "
    << cb.ratio << " (worst day " << cb.worst_day << ", iteration " << cb.selected << "), " << sb.days
    << " test days, FI serves " << 100.0 * sb.fi_service << "%, " << t << " s";
  return {pass, d.str()};
}

}  // namespace amod::acceptance
