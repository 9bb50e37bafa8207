#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace amod {

/// f(x, grad) -> value; writes the (sub)gradient into `grad`.
using DifferentiableFunction = std::function<double(std::span<const double>, std::span<double>)>;

struct BfgsOptions {
  int max_iterations = 200;
  int max_line_search = 60;
  double gradient_tolerance = 1e-8;
  double step_tolerance = 1e-14;
  double c1 = 1e-4;  // sufficient decrease
  double c2 = 0.9;   // weak curvature
};

struct BfgsIterate {
  int iteration = 0;
  double value = 0.0;
  double grad_norm = 0.0;
  int evaluations = 0;
};

struct BfgsResult {
  std::vector<double> x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  std::string stop_reason;
  std::vector<BfgsIterate> trace;  // entry 0 is the starting point
};

/// Full-matrix BFGS on the inverse Hessian with a bisection weak-Wolfe line
/// search, which also behaves on piecewise-linear convex objectives. Only
/// steps satisfying sufficient decrease are accepted, so trace values are
/// non-increasing.
BfgsResult minimize_bfgs(const DifferentiableFunction& f, std::vector<double> x0,
                         const BfgsOptions& options = {},
                         const std::function<void(const BfgsIterate&, std::span<const double> x)>& on_iterate = {});

}  // namespace amod
