#include "sbmem/rate_kernel.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "sbmem/parallel.hpp"

namespace sbmem {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double phase_coefficient(const KernelParams& kp) {
  return 16.0 / (kp.omega * kp.omega * (kp.eta * kp.eta + 4.0));
}

double prefactor(const KernelParams& kp) { return 2.0 * kp.drive_sq / kp.omega; }

// Upper bound on the angular frequency of the integrand's phase; |s'(t)| <= 1 + eta/2.
double phase_frequency_bound(double max_abs_delta_e, double g_sq, const KernelParams& kp) {
  const double b = phase_coefficient(kp);
  return std::max(b * (max_abs_delta_e + g_sq * (1.0 + kp.eta / 2.0)), 1.0);
}

void check_inputs(double g_sq, const KernelParams& kp) {
  if (!(g_sq > 0.0)) throw ValidationError("rate kernel: g_sq must be > 0");
  if (!(kp.nu > 0.0)) throw ValidationError("rate kernel: nu must be > 0");
}

double clamp_rate(double w, double abs_tol, double delta_e, double g_sq) {
  if (w >= 0.0) return w;
  if (-w <= abs_tol) return 0.0;
  std::ostringstream msg;
  msg << "negative rate " << w << " at delta_e = " << delta_e << ", g_sq = " << g_sq;
  throw NegativeRate(msg.str(), w);
}

// Composite Gauss-Legendre nodes on [0, T_max] with the delta-E independent
// part of the integrand folded into complex weights:
//   W(dE) = pref * Re sum_n c_n exp(i b dE t_n),  c_n = w_n env(t_n) exp(-i b g^2 s(t_n)).
class KernelNodes {
 public:
  KernelNodes(double g_sq, const KernelParams& kp, double max_abs_delta_e, const QuadratureConfig& quad)
      : b_(phase_coefficient(kp)), pref_(prefactor(kp)) {
    using Rule = boost::math::quadrature::gauss<double, 20>;
    const double t_max = truncation_time(g_sq, kp, quad);
    const double freq = phase_frequency_bound(max_abs_delta_e, g_sq, kp);
    const double width = std::min({kTwoPi / freq, t_max / 32.0, kTwoPi / 8.0});
    const auto panels = static_cast<Index>(std::ceil(t_max / width));
    const double h = t_max / static_cast<double>(panels);

    const auto& x = Rule::abscissa();
    const auto& w = Rule::weights();
    const auto per_panel = static_cast<Index>(2 * x.size());
    t_.resize(panels * per_panel);
    c_.resize(panels * per_panel);
    const double a_env = envelope_rate(g_sq, kp);
    Index n = 0;
    for (Index p = 0; p < panels; ++p) {
      const double mid = (static_cast<double>(p) + 0.5) * h;
      for (std::size_t k = 0; k < x.size(); ++k) {
        for (double side : {-1.0, 1.0}) {
          const double t = mid + side * 0.5 * h * x[k];
          const double env = std::exp(-a_env * (envelope_f(t, kp.eta) + t));
          const double phase = -b_ * g_sq * phase_s(t, kp.eta);
          t_(n) = t;
          c_(n) = 0.5 * h * w[k] * env * std::complex<double>(std::cos(phase), std::sin(phase));
          ++n;
        }
      }
    }
  }

  // W at start + k * step for k in [0, count).
  VectorXd evaluate_grid(double start, double step, Index count) const {
    VectorXd out(count);
    Eigen::ArrayXcd z(t_.size());
    Eigen::ArrayXcd rot(t_.size());
    for (Index n = 0; n < t_.size(); ++n) rot(n) = std::polar(1.0, b_ * step * t_(n));
    constexpr Index kReanchor = 256;
    for (Index k = 0; k < count; ++k) {
      if (k % kReanchor == 0) {
        const double x = start + step * static_cast<double>(k);
        for (Index n = 0; n < t_.size(); ++n) z(n) = c_(n) * std::polar(1.0, b_ * x * t_(n));
      }
      out(k) = pref_ * z.real().sum();
      z *= rot;
    }
    return out;
  }

  Index size() const { return t_.size(); }

 private:
  double b_;
  double pref_;
  Eigen::ArrayXd t_;
  Eigen::ArrayXcd c_;
};

struct PanelResult {
  double value;
  double error;
};

// Bisects until the embedded Gauss-Kronrod error estimate meets
// max(density * length, rel_tol * |value|).
template <typename F>
PanelResult integrate_panel(const F& f, double a, double b, double density, double rel_tol, unsigned depth) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  double err = 0.0;
  const double value = Rule::integrate(f, a, b, 0, 0.0, &err);
  if (err <= std::max(density * (b - a), rel_tol * std::abs(value)) || depth == 0) return {value, err};
  const double mid = 0.5 * (a + b);
  const PanelResult left = integrate_panel(f, a, mid, density, rel_tol, depth - 1);
  const PanelResult right = integrate_panel(f, mid, b, density, rel_tol, depth - 1);
  return {left.value + right.value, left.error + right.error};
}

}  // namespace

KernelParams make_kernel_params(double eta, double theta, double omega, double drive_sq) {
  std::vector<std::string> v;
  if (!(eta >= kEtaMin)) v.emplace_back("eta: must be >= eta_min = 0.001");
  if (!(theta >= 0.0 && theta < 1.0)) v.emplace_back("theta: must satisfy 0 <= theta < 1");
  if (!(omega > 0.0)) v.emplace_back("omega: must be > 0");
  if (!(drive_sq >= 0.0) || !std::isfinite(drive_sq)) v.emplace_back("drive_sq: must be finite and >= 0");
  if (!v.empty()) throw ConfigError(std::move(v));
  KernelParams kp{eta, theta, omega, drive_sq, KernelParams::nu_of(eta, theta)};
  return kp;
}

KernelParams make_kernel_params(const ModelParams& params) {
  return make_kernel_params(params.eta, params.theta, params.omega, params.drive * params.drive);
}

double envelope_f_lower_bound(double eta) {
  const double c1 = envelope_f_limit(eta);
  const double d = 8.0 / (eta * eta + 4.0);
  return c1 - std::hypot(c1, d);
}

double envelope_rate(double g_sq, const KernelParams& kp) {
  return 2.0 * g_sq * kp.nu / (kp.omega * kp.omega);
}

double truncation_time(double g_sq, const KernelParams& kp, const QuadratureConfig& quad) {
  check_inputs(g_sq, kp);
  return quad.truncation_exponent / envelope_rate(g_sq, kp) - envelope_f_lower_bound(kp.eta);
}

double rate_integrand(double t, double delta_e, double g_sq, const KernelParams& kp) {
  const double env = std::exp(-envelope_rate(g_sq, kp) * (envelope_f(t, kp.eta) + t));
  return env * std::cos(phase_coefficient(kp) * (delta_e * t - g_sq * phase_s(t, kp.eta)));
}

double rate_direct(double delta_e, double g_sq, const KernelParams& kp, const QuadratureConfig& quad) {
  check_inputs(g_sq, kp);
  const double t_max = truncation_time(g_sq, kp, quad);
  const double freq = phase_frequency_bound(std::abs(delta_e), g_sq, kp);
  const double width =
      std::min(kTwoPi / (static_cast<double>(quad.panels_per_period) * freq), t_max / 16.0);
  const auto panels = static_cast<long>(std::ceil(t_max / width));
  const double h = t_max / static_cast<double>(panels);

  auto integrand = [&](double t) { return rate_integrand(t, delta_e, g_sq, kp); };
  const double pref = prefactor(kp);
  // Absolute error budget of the bare integral, shared in proportion to length.
  const double density = 0.5 * quad.abs_tol / (pref * t_max);
  double total = 0.0;
  double total_error = 0.0;
  for (long p = 0; p < panels; ++p) {
    const double a = h * static_cast<double>(p);
    const PanelResult r = integrate_panel(integrand, a, a + h, density, quad.rel_tol * 1e-2, quad.max_depth);
    total += r.value;
    total_error += r.error;
  }
  const double w = pref * total;
  const double w_err = pref * total_error;
  if (!(w_err <= std::max(quad.abs_tol, quad.rel_tol * std::abs(w)))) {
    std::ostringstream msg;
    msg << "rate quadrature did not converge at delta_e = " << delta_e << ", g_sq = " << g_sq
        << " (estimate " << w << ", error " << w_err << ")";
    throw NonConvergedQuadrature(msg.str(), w, w_err);
  }
  return clamp_rate(w, quad.abs_tol, delta_e, g_sq);
}

RateTable::RateTable(double g_sq, double lower, double step, VectorXd rates)
    : g_sq_(g_sq), lower_(lower), step_(step), rates_(std::move(rates)) {
  if (rates_.size() < 2) throw ValidationError("rate table needs at least two grid points");
  if (!(step_ > 0.0)) throw ValidationError("rate table step must be > 0");
  if ((rates_.array() < 0.0).any()) throw ValidationError("rate table entries must be >= 0");
}

VectorXd RateTable::grid() const {
  return VectorXd::LinSpaced(rates_.size(), lower_, upper());
}

void RateTable::throw_out_of_bounds(double delta_e) const {
  std::ostringstream msg;
  msg << "delta_e = " << delta_e << " outside rate table bounds [" << lower_ << ", " << upper() << "]";
  throw OutOfBounds(msg.str());
}

RateTable build_rate_table(double g_sq, const KernelParams& kp, Bounds bounds, const QuadratureConfig& quad,
                           const TableConfig& cfg) {
  check_inputs(g_sq, kp);
  if (!(bounds.upper > bounds.lower)) throw ValidationError("rate table bounds must satisfy lower < upper");
  const double max_abs = std::max(std::abs(bounds.lower), std::abs(bounds.upper)) + cfg.initial_step;
  const KernelNodes nodes(g_sq, kp, max_abs, quad);

  double step = cfg.initial_step;
  auto count = static_cast<Index>(std::ceil((bounds.upper - bounds.lower) / step)) + 1;
  count = std::max<Index>(count, 2);
  VectorXd values = nodes.evaluate_grid(bounds.lower, step, count);

  auto check_sign = [&](const VectorXd& v, double start, double h) {
    for (Index k = 0; k < v.size(); ++k) {
      if (v(k) < 0.0) clamp_rate(v(k), quad.abs_tol, start + h * static_cast<double>(k), g_sq);
    }
  };
  auto ratio = [&](double interp, double exact) {
    return std::abs(interp - exact) / (cfg.rel_tol * std::abs(exact) + cfg.abs_floor);
  };

  VectorXd mids;
  double worst = 0.0;
  Index worst_index = 0;
  for (;;) {
    mids = nodes.evaluate_grid(bounds.lower + 0.5 * step, step, count - 1);
    worst = 0.0;
    for (Index k = 0; k + 1 < count; ++k) {
      const double r = ratio(0.5 * (values(k) + values(k + 1)), mids(k));
      if (r > worst) {
        worst = r;
        worst_index = k;
      }
    }
    if (worst <= 1.0) break;
    if (step / 2.0 < cfg.min_step) {
      std::ostringstream msg;
      msg << "rate table refinement hit min_step " << cfg.min_step << " for g_sq = " << g_sq;
      throw NonConvergedQuadrature(msg.str(), worst, step);
    }
    VectorXd merged(2 * count - 1);
    for (Index k = 0; k < count; ++k) merged(2 * k) = values(k);
    for (Index k = 0; k + 1 < count; ++k) merged(2 * k + 1) = mids(k);
    values = std::move(merged);
    count = values.size();
    step /= 2.0;
  }
  check_sign(values, bounds.lower, step);
  values = values.cwiseMax(0.0);

  RateTable table(g_sq, bounds.lower, step, values);
  table.set_midpoint_error(worst);

  // Spot-check the cached evaluation against the adaptive integrator.
  Index peak = 0;
  values.maxCoeff(&peak);
  std::vector<Index> probes{worst_index, std::min(peak, count - 2)};
  for (int s = 0; s < cfg.verify_samples; ++s) {
    probes.push_back(static_cast<Index>((static_cast<double>(s) + 0.5) / cfg.verify_samples *
                                        static_cast<double>(count - 1)));
  }
  for (Index k : probes) {
    const double x = bounds.lower + (static_cast<double>(k) + 0.5) * step;
    const double exact = rate_direct(x, g_sq, kp, quad);
    if (ratio(table.lookup(x), exact) > 1.0) {
      std::ostringstream msg;
      msg << "rate table verification failed at delta_e = " << x << ": table " << table.lookup(x)
          << " vs direct " << exact;
      throw NonConvergedQuadrature(msg.str(), table.lookup(x), std::abs(table.lookup(x) - exact));
    }
  }
  return table;
}

std::vector<RateTable> build_rate_tables(const CouplingMatrixd& c, const KernelParams& kp,
                                         const QuadratureConfig& quad, const TableConfig& cfg, unsigned threads) {
  std::vector<RateTable> tables(static_cast<std::size_t>(c.num_spins()));
  parallel_for(tables.size(), [&](std::size_t i) {
    const auto site = static_cast<Index>(i);
    const double bound = flip_cost_bound(c, site);
    const double margin = 1e-9 * std::max(1.0, bound);
    tables[i] = build_rate_table(c.squared_norms()(site), kp, {-bound - margin, bound + margin}, quad, cfg);
  }, threads);
  return tables;
}

}  // namespace sbmem
