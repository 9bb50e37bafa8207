#include <algorithm>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "criteria.hpp"

namespace amod::acceptance {

std::optional<SimulationResult> Context::simulate(const Scenario& scenario, const PolicyContext& ctx) {
  ++simulations;
  try {
    return run_simulation(scenario, ctx);
  } catch (const InfeasibleDecision& e) {
    std::cerr << "  infeasible decision: " << e.what() << '\n';
    ++violations;
    return std::nullopt;
  }
}

}  // namespace amod::acceptance

namespace {

struct Criterion {
  int id;
  const char* name;
  std::function<amod::acceptance::Outcome(amod::acceptance::Context&)> check;
};

void usage() {
  std::cerr << "usage: amod_acceptance [--work-dir DIR] [--only N[,N...]]\n";
}

}  // namespace

int main(int argc, char** argv) {
  using namespace amod::acceptance;
  Context ctx;
  ctx.work_dir = std::filesystem::temp_directory_path() / "amod_acceptance";
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--work-dir" && i + 1 < argc) {
      ctx.work_dir = argv[++i];
    } else if (arg == "--only" && i + 1 < argc) {
      std::string list = argv[++i];
      for (std::size_t pos = 0; pos <= list.size();) {
        const std::size_t comma = std::min(list.find(',', pos), list.size());
        only.insert(std::atoi(list.substr(pos, comma - pos).c_str()));
        pos = comma + 1;
      }
    } else {
      usage();
      return 2;
    }
  }
  std::filesystem::create_directories(ctx.work_dir);

  // Feasibility reads the ledger filled by 3-7, so it runs last.
  const std::vector<Criterion> order{
      {1, "solver exactness", solver_exactness},
      {2, "gradient vs finite differences", gradient_check},
      {3, "toy training reaches the grid minimum", toy_training},
      {4, "full-information dominance", full_information_dominance},
      {6, "learning benefit over greedy", learning_benefit},
      {7, "sparsification neutrality", sparsification},
      {8, "SB epoch at fleet 2000", performance},
      {9, "CLI determinism", determinism},
      {5, "feasibility of every decision", feasibility},
  };
  std::vector<std::pair<int, std::string>> lines;
  bool all = true;
  for (const Criterion& c : order) {
    if (!only.empty() && !only.contains(c.id)) continue;
    std::cerr << "criterion " << c.id << ": " << c.name << " ..." << std::endl;
    Outcome o;
    Stopwatch clock;
    try {
      o = c.check(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cerr << "  done in " << clock.seconds() << " s" << std::endl;
    all = all && o.pass;
    lines.emplace_back(c.id, std::string(o.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(c.id) + " (" +
                                 c.name + "): " + o.detail);
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [id, line] : lines) std::cout << line << '\n';
  return all ? 0 : 1;
}
