#pragma once

// Single-spin-flip rate of the dissipative spin-boson model,
//
//   W(dE, g^2) = (2 Omega^2 / omega) * int_0^inf dt exp{-(2 g^2 nu / omega^2) [f(t) + t]}
//                * cos[16 (dE t - g^2 s(t)) / (omega^2 (eta^2 + 4))],
//
// evaluated by panelled adaptive quadrature, plus per-spin interpolation
// tables used in the kinetic Monte Carlo inner loop.

#include <cmath>
#include <span>
#include <vector>

#include "sbmem/model.hpp"
#include "sbmem/types.hpp"

namespace sbmem {

struct KernelParams {
  double eta = 1.0;
  double theta = 0.9;
  double omega = 1.0;
  double drive_sq = 1.0;
  double nu = 0.0;  // derived, see make_kernel_params

  static double nu_of(double eta, double theta) {
    return 4.0 * (1.0 + theta) * eta / ((eta * eta + 4.0) * (1.0 - theta));
  }
};

KernelParams make_kernel_params(double eta, double theta, double omega = 1.0, double drive_sq = 1.0);
KernelParams make_kernel_params(const ModelParams& params);

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-6;
  int panels_per_period = 8;
  unsigned max_depth = 12;
  // The integrand envelope is below exp(-truncation_exponent) past T_max.
  double truncation_exponent = 32.0;
};

template <typename Scalar>
Scalar envelope_f(Scalar t, Scalar eta) {
  using std::cos;
  using std::exp;
  using std::sin;
  const Scalar d = eta * eta + Scalar(4);
  const Scalar decay = exp(-eta * t / Scalar(2));
  return (Scalar(8) - Scalar(2) * eta * eta) / (eta * d) * (Scalar(1) - decay * cos(t)) -
         Scalar(8) * decay * sin(t) / d;
}

template <typename Scalar>
Scalar phase_s(Scalar t, Scalar eta) {
  using std::cos;
  using std::exp;
  using std::sin;
  const Scalar d = eta * eta + Scalar(4);
  const Scalar decay = exp(-eta * t / Scalar(2));
  return (Scalar(4) * eta * (decay * cos(t) - Scalar(1)) + (eta * eta - Scalar(4)) * decay * sin(t)) / d;
}

// t -> infinity limits.
template <typename Scalar>
Scalar envelope_f_limit(Scalar eta) {
  return (Scalar(8) - Scalar(2) * eta * eta) / (eta * (eta * eta + Scalar(4)));
}

template <typename Scalar>
Scalar phase_s_limit(Scalar eta) {
  return Scalar(-4) * eta / (eta * eta + Scalar(4));
}

// A lower bound on f(t) valid for every t >= 0.
double envelope_f_lower_bound(double eta);

// Envelope decay coefficient 2 g^2 nu / omega^2.
double envelope_rate(double g_sq, const KernelParams& kp);

// Truncation point of the semi-infinite integral.
double truncation_time(double g_sq, const KernelParams& kp, const QuadratureConfig& quad = {});

// Integrand without the 2 Omega^2 / omega prefactor.
double rate_integrand(double t, double delta_e, double g_sq, const KernelParams& kp);

double rate_direct(double delta_e, double g_sq, const KernelParams& kp, const QuadratureConfig& quad = {});

struct TableConfig {
  double rel_tol = 1e-4;
  // Absolute slack in the midpoint criterion: |interp - W| <= rel_tol |W| + abs_floor.
  double abs_floor = 1e-10;
  double initial_step = 1.0;
  double min_step = 1e-4;
  // Midpoints spot-checked against rate_direct after refinement.
  int verify_samples = 12;
};

// Rates on a uniform delta-E grid, linearly interpolated.
class RateTable {
 public:
  RateTable() = default;
  RateTable(double g_sq, double lower, double step, VectorXd rates);

  double g_sq() const { return g_sq_; }
  double lower() const { return lower_; }
  double upper() const { return lower_ + step_ * static_cast<double>(rates_.size() - 1); }
  double step() const { return step_; }
  Index size() const { return rates_.size(); }
  const VectorXd& rates() const { return rates_; }
  double grid_point(Index k) const { return lower_ + step_ * static_cast<double>(k); }
  VectorXd grid() const;

  // Throws OutOfBounds outside [lower, upper]; never extrapolates.
  double lookup(double delta_e) const {
    const double x = (delta_e - lower_) / step_;
    const double last = static_cast<double>(rates_.size() - 1);
    if (!(x >= 0.0 && x <= last)) throw_out_of_bounds(delta_e);
    auto k = static_cast<Index>(x);
    if (k >= rates_.size() - 1) k = rates_.size() - 2;
    const double frac = x - static_cast<double>(k);
    return rates_(k) + frac * (rates_(k + 1) - rates_(k));
  }

  // Largest midpoint deviation seen during construction (mixed criterion ratio).
  double midpoint_error() const { return midpoint_error_; }
  void set_midpoint_error(double e) { midpoint_error_ = e; }

 private:
  [[noreturn]] void throw_out_of_bounds(double delta_e) const;

  double g_sq_ = 0.0;
  double lower_ = 0.0;
  double step_ = 1.0;
  VectorXd rates_;
  double midpoint_error_ = 0.0;
};

struct Bounds {
  double lower;
  double upper;
};

RateTable build_rate_table(double g_sq, const KernelParams& kp, Bounds bounds,
                           const QuadratureConfig& quad = {}, const TableConfig& cfg = {});

inline double lookup_rate(const RateTable& table, double delta_e) { return table.lookup(delta_e); }

// One table per spin, bounds from flip_cost_bound with a small margin.
std::vector<RateTable> build_rate_tables(const CouplingMatrixd& c, const KernelParams& kp,
                                         const QuadratureConfig& quad = {}, const TableConfig& cfg = {},
                                         unsigned threads = 0);

}  // namespace sbmem
