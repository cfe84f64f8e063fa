#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace sbmem {

struct CellFailure {
  std::size_t realization;
  std::string reason;
};

// One grid point of a disorder-averaged sweep. `control` is eta for the
// spin-boson model and T for the Hopfield baseline.
struct SweepPoint {
  double control = 0.0;
  double coupling_width = 0.0;
  double mean_M = 0.0;
  double std_M = 0.0;  // population std across realizations
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  std::vector<double> t_ends;
  std::vector<CellFailure> failures;

  // Standard error of mean_M.
  double standard_error() const {
    return values.size() > 1 ? std_M / std::sqrt(static_cast<double>(values.size() - 1)) : 0.0;
  }
};

struct SweepResult {
  std::vector<SweepPoint> points;
};

// Fills mean_M / std_M from values (population formula).
inline void summarize(SweepPoint& point) {
  const auto n = static_cast<double>(point.values.size());
  if (point.values.empty()) {
    point.mean_M = std::nan("");
    point.std_M = std::nan("");
    return;
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : point.values) {
    sum += v;
    sum_sq += v * v;
  }
  point.mean_M = sum / n;
  point.std_M = std::sqrt(std::max(0.0, sum_sq / n - point.mean_M * point.mean_M));
}

}  // namespace sbmem
