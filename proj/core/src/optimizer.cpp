#include "amod/optimizer.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace amod {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace

BfgsResult minimize_bfgs(const DifferentiableFunction& f, std::vector<double> x0,
                         const BfgsOptions& options,
                         const std::function<void(const BfgsIterate&, std::span<const double>)>& on_iterate) {
  const std::size_t n = x0.size();
  BfgsResult out;
  out.x = std::move(x0);
  std::vector<double> g(n), d(n), xn(n), gn(n), s(n), y(n), hy(n);
  std::vector<double> h(n * n, 0.0);
  auto reset_h = [&](double scale) {
    std::fill(h.begin(), h.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) h[i * n + i] = scale;
  };
  reset_h(1.0);
  bool scaled = false;

  double fx = f(out.x, g);
  out.evaluations = 1;
  auto record = [&](int iteration) {
    BfgsIterate it{iteration, fx, norm(g), out.evaluations};
    out.trace.push_back(it);
    if (on_iterate) on_iterate(it, out.x);
  };
  record(0);
  out.stop_reason = "max iterations";

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const double gnorm = norm(g);
    if (gnorm <= options.gradient_tolerance) {
      out.stop_reason = "gradient tolerance";
      break;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc -= h[i * n + j] * g[j];
      d[i] = acc;
    }
    double gd = dot(g, d);
    if (!(gd < 0.0)) {
      reset_h(1.0);
      scaled = false;
      for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
      gd = -gnorm * gnorm;
    }

    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    double alpha = scaled ? 1.0 : std::min(1.0, 1.0 / gnorm);
    bool wolfe = false;
    double best_f = fx;
    std::vector<double> best_x, best_g;
    for (int ls = 0; ls < options.max_line_search; ++ls) {
      for (std::size_t i = 0; i < n; ++i) xn[i] = out.x[i] + alpha * d[i];
      const double fn = f(xn, gn);
      ++out.evaluations;
      if (!std::isfinite(fn) || fn > fx + options.c1 * alpha * gd) {
        hi = alpha;
      } else {
        if (fn < best_f) {
          best_f = fn;
          best_x = xn;
          best_g = gn;
        }
        if (dot(gn, d) < options.c2 * gd) {
          lo = alpha;
        } else {
          wolfe = true;
          best_f = fn;
          best_x = xn;
          best_g = gn;
          break;
        }
      }
      alpha = std::isinf(hi) ? 2.0 * alpha : 0.5 * (lo + hi);
    }
    if (best_x.empty()) {
      if (scaled) {
        reset_h(1.0);
        scaled = false;
        continue;
      }
      out.stop_reason = "line search failed";
      break;
    }

    double step = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = best_x[i] - out.x[i];
      y[i] = best_g[i] - g[i];
      step = std::max(step, std::abs(s[i]));
    }
    const double sy = dot(s, y);
    if (sy > 1e-12 * norm(s) * norm(y) && sy > 0.0) {
      if (!scaled) {
        reset_h(sy / dot(y, y));
        scaled = true;
      }
      const double rho = 1.0 / sy;
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += h[i * n + j] * y[j];
        hy[i] = acc;
      }
      const double yhy = dot(y, hy);
      const double ss = rho * rho * yhy + rho;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          h[i * n + j] += ss * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
        }
      }
    }

    out.x = std::move(best_x);
    g = std::move(best_g);
    fx = best_f;
    out.iterations = iter;
    record(iter);
    if (!wolfe && step <= options.step_tolerance * (1.0 + norm(out.x))) {
      out.stop_reason = "step tolerance";
      break;
    }
  }
  out.value = fx;
  out.grad_norm = norm(g);
  return out;
}

}  // namespace amod
