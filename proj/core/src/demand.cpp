#include "amod/demand.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace amod {

RequestDistribution::RequestDistribution(CellGrid grid, double bin_width_s, int bin_count, int days)
    : grid_(grid), bin_width_(bin_width_s), bin_count_(bin_count), days_(days) {
  if (!(bin_width_s > 0.0)) throw std::invalid_argument("bin width must be positive");
  if (bin_count < 1) throw std::invalid_argument("distribution needs at least one time bin");
  if (days < 1) throw std::invalid_argument("distribution needs at least one day");
  bins_.resize(static_cast<std::size_t>(grid_.cell_count()) * bin_count_);
  refresh();
}

const RequestDistribution::Bin& RequestDistribution::bin(int cell, int b) const {
  return bins_[static_cast<std::size_t>(cell) * bin_count_ + b];
}

RequestDistribution::Bin& RequestDistribution::bin(int cell, int b) {
  return bins_[static_cast<std::size_t>(cell) * bin_count_ + b];
}

double RequestDistribution::rate(int cell, int b) const {
  return static_cast<double>(bin(cell, b).total_count) / days_;
}

int RequestDistribution::clamp_bin(double time) const {
  const auto b = static_cast<long long>(std::floor(time / bin_width_));
  return static_cast<int>(std::clamp<long long>(b, 0, bin_count_ - 1));
}

void RequestDistribution::refresh() {
  const int cells = grid_.cell_count();
  summary_.assign(bins_.size(), Summary{});
  arrival_rate_.assign(static_cast<std::size_t>(bin_count_) * cells, 0.0);
  for (int c = 0; c < cells; ++c) {
    const Location corner{grid_.area().x_min + (c % grid_.columns()) * grid_.cell_width(),
                          grid_.area().y_min + (c / grid_.columns()) * grid_.cell_height()};
    for (int b = 0; b < bin_count_; ++b) {
      const Bin& src = bin(c, b);
      Summary& s = summary_[static_cast<std::size_t>(c) * bin_count_ + b];
      s.rate = static_cast<double>(src.total_count) / days_;
      s.mean_origin = grid_.center(c);
      if (src.samples.empty()) continue;
      const double n = static_cast<double>(src.samples.size());
      double ox = 0.0, oy = 0.0;
      for (const DemandSample& d : src.samples) {
        s.mean_reward += d.reward / n;
        s.mean_duration += d.duration_s / n;
        s.mean_distance += d.distance_km / n;
        ox += (corner.x + d.origin_offset.x) / n;
        oy += (corner.y + d.origin_offset.y) / n;
        if (const auto dc = grid_.cell_of(d.destination)) {
          arrival_rate_[static_cast<std::size_t>(b) * cells + *dc] += s.rate / n;
        }
      }
      s.mean_origin = {ox, oy};
    }
  }
}

template <typename Fn>
void RequestDistribution::for_each_overlap(double t0, double t1, Fn&& fn) const {
  if (!(t1 > t0)) return;
  auto b = static_cast<long long>(std::floor(t0 / bin_width_));
  for (;; ++b) {
    const double lo = std::max(t0, static_cast<double>(b) * bin_width_);
    const double hi = std::min(t1, static_cast<double>(b + 1) * bin_width_);
    if (lo >= t1) break;
    if (hi > lo) {
      const int clamped = static_cast<int>(std::clamp<long long>(b, 0, bin_count_ - 1));
      fn(clamped, lo, hi, (hi - lo) / bin_width_);
    }
  }
}

DemandWindow RequestDistribution::window(int cell, double t0, double t1) const {
  DemandWindow w;
  double ox = 0.0, oy = 0.0;
  for_each_overlap(t0, t1, [&](int b, double, double, double fraction) {
    const Summary& s = summary_[static_cast<std::size_t>(cell) * bin_count_ + b];
    const double count = s.rate * fraction;
    w.count += count;
    w.reward += count * s.mean_reward;
    w.duration += count * s.mean_duration;
    w.distance += count * s.mean_distance;
    ox += count * s.mean_origin.x;
    oy += count * s.mean_origin.y;
  });
  w.origin = w.count > 0.0 ? Location{ox / w.count, oy / w.count} : grid_.center(cell);
  return w;
}

double RequestDistribution::expected_arrivals(int cell, double t0, double t1) const {
  double total = 0.0;
  const int cells = grid_.cell_count();
  for_each_overlap(t0, t1, [&](int b, double, double, double fraction) {
    total += arrival_rate_[static_cast<std::size_t>(b) * cells + cell] * fraction;
  });
  return total;
}

CalibrationResult calibrate_distribution(std::span<const std::vector<Request>> days,
                                         const CellGrid& grid, double bin_width_s) {
  if (days.empty()) throw std::invalid_argument("calibration needs at least one day");
  std::size_t total = 0;
  double latest = 0.0;
  for (const auto& day : days) {
    total += day.size();
    for (const Request& r : day) latest = std::max(latest, r.start_time);
  }
  if (total == 0) throw std::invalid_argument("calibration needs at least one request");

  const int bin_count = static_cast<int>(std::floor(latest / bin_width_s)) + 1;
  CalibrationResult result{RequestDistribution(grid, bin_width_s, bin_count,
                                               static_cast<int>(days.size())),
                           0};
  for (const auto& day : days) {
    for (const Request& r : day) {
      const auto cell = grid.cell_of(r.origin);
      if (!cell || !std::isfinite(r.start_time) || r.start_time < 0.0) {
        ++result.rejected;
        continue;
      }
      const int col = *cell % grid.columns();
      const int row = *cell / grid.columns();
      DemandSample s;
      s.origin_offset = {r.origin.x - (grid.area().x_min + col * grid.cell_width()),
                         r.origin.y - (grid.area().y_min + row * grid.cell_height())};
      s.destination = r.destination;
      s.duration_s = r.duration();
      s.distance_km = r.distance_km;
      s.reward = r.reward;
      auto& bin = result.distribution.bin(*cell, result.distribution.clamp_bin(r.start_time));
      ++bin.total_count;
      bin.samples.push_back(s);
    }
  }
  result.distribution.refresh();
  return result;
}

std::vector<Request> sample_artificial_requests(const RequestDistribution& dist, double t_lo,
                                                double t_hi, std::uint64_t seed) {
  if (!(t_hi > t_lo)) throw std::invalid_argument("sampling horizon must be non-empty");
  std::mt19937_64 rng(seed);
  std::vector<Request> out;
  const CellGrid& grid = dist.grid();
  RequestId next_id = -1;
  const double w = dist.bin_width();
  for (int c = 0; c < grid.cell_count(); ++c) {
    const Location corner{grid.area().x_min + (c % grid.columns()) * grid.cell_width(),
                          grid.area().y_min + (c / grid.columns()) * grid.cell_height()};
    auto b = static_cast<long long>(std::floor(t_lo / w));
    for (;; ++b) {
      const double lo = std::max(t_lo, static_cast<double>(b) * w);
      const double hi = std::min(t_hi, static_cast<double>(b + 1) * w);
      if (lo >= t_hi) break;
      if (!(hi > lo)) continue;
      const int clamped = static_cast<int>(std::clamp<long long>(b, 0, dist.bin_count() - 1));
      const auto& bin = dist.bin(c, clamped);
      if (bin.samples.empty()) continue;
      const double mean = dist.rate(c, clamped) * (hi - lo) / w;
      if (!(mean > 0.0)) continue;
      const int n = std::poisson_distribution<int>(mean)(rng);
      std::uniform_int_distribution<std::size_t> pick(0, bin.samples.size() - 1);
      std::uniform_real_distribution<double> when(lo, hi);
      for (int i = 0; i < n; ++i) {
        const DemandSample& s = bin.samples[pick(rng)];
        Request r;
        r.id = next_id--;
        r.origin = {corner.x + s.origin_offset.x, corner.y + s.origin_offset.y};
        r.destination = s.destination;
        r.start_time = when(rng);
        r.arrival_time = r.start_time + s.duration_s;
        r.reward = s.reward;
        r.distance_km = s.distance_km;
        out.push_back(r);
      }
    }
  }
  return out;
}

}  // namespace amod
