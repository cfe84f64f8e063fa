#pragma once

// Hopfield network with (optionally noisy) stored patterns and heat-bath
// Monte Carlo. J_ij = (1/N) sum_mu xi_{i mu} xi_{j mu}, diagonal excluded.

#include <cmath>
#include <cstdint>
#include <vector>

#include "sbmem/model.hpp"
#include "sbmem/random.hpp"
#include "sbmem/sweep.hpp"

namespace sbmem {

template <typename Scalar>
struct HopfieldModel {
  Matrix<Scalar> xi;  // N x p
  Matrix<Scalar> sign_patterns;

  HopfieldModel() = default;
  explicit HopfieldModel(Matrix<Scalar> patterns)
      : xi(std::move(patterns)), sign_patterns(sbmem::sign_patterns(xi).patterns) {}

  Index num_spins() const { return xi.rows(); }
  Index num_patterns() const { return xi.cols(); }
};

using HopfieldModeld = HopfieldModel<double>;

enum class OverlapMode { Sign, Raw };

struct ThermalChainConfig {
  double beta = 1.0;
  std::uint64_t sweeps = 2000;
  double burn_in = 0.5;
  std::uint64_t seed = 0;

  void validate() const {
    std::vector<std::string> v;
    if (!(beta >= 0.0)) v.emplace_back("beta: must be >= 0");
    if (sweeps == 0) v.emplace_back("sweeps: must be > 0");
    if (!(burn_in >= 0.0 && burn_in < 1.0)) v.emplace_back("burn_in: must lie in [0, 1)");
    if (!v.empty()) throw ConfigError(std::move(v));
  }
};

template <typename Scalar = double>
HopfieldModel<Scalar> sample_noisy_patterns(Index n, Index p, double width, std::uint64_t seed) {
  if (n < 2 || p < 1 || !(width >= 0.0)) throw ValidationError("sample_noisy_patterns: need N >= 2, p >= 1, s >= 0");
  auto rng = make_rng(seed);
  return HopfieldModel<Scalar>(sample_bimodal<Scalar>(n, p, width, rng));
}

// J with zero diagonal, for reference computations.
template <typename Scalar>
Matrix<Scalar> connectivity(const HopfieldModel<Scalar>& m) {
  Matrix<Scalar> j = m.xi * m.xi.transpose() / static_cast<Scalar>(m.num_spins());
  j.diagonal().setZero();
  return j;
}

// -(N/2) sum_mu zeta_mu^2 + (1/2N) sum_{mu,i} xi_{i mu}^2 with zeta_mu = xi_mu . sigma / N.
template <typename Scalar, typename Derived>
Scalar hopfield_energy(const HopfieldModel<Scalar>& m, const Eigen::MatrixBase<Derived>& sigma) {
  const auto n = static_cast<Scalar>(m.num_spins());
  const Vector<Scalar> zeta = m.xi.transpose() * sigma / n;
  return -n / Scalar(2) * zeta.squaredNorm() + m.xi.squaredNorm() / (Scalar(2) * n);
}

// Probability of setting sigma_i = +1 in a heat-bath update with local field h.
inline double heat_bath_up_probability(double beta, double h) {
  const double x = 2.0 * beta * h;
  if (h == 0.0 || std::isnan(x)) return 0.5;
  return 1.0 / (1.0 + std::exp(-x));
}

// N heat-bath updates at uniformly random sites, in place.
template <typename Scalar, typename Engine>
void glauber_sweep(const HopfieldModel<Scalar>& m, SpinVector<Scalar>& sigma, double beta, Engine& rng) {
  const Index n = m.num_spins();
  const auto inv_n = Scalar(1) / static_cast<Scalar>(n);
  Vector<Scalar> psi = m.xi.transpose() * sigma;
  for (Index step = 0; step < n; ++step) {
    const auto i = static_cast<Index>(uniform_index(rng, static_cast<std::uint64_t>(n)));
    const auto row = m.xi.row(i);
    const Scalar h = inv_n * (row.dot(psi) - row.squaredNorm() * sigma(i));
    const Scalar next = uniform01(rng) < heat_bath_up_probability(static_cast<double>(beta), static_cast<double>(h))
                            ? Scalar(1)
                            : Scalar(-1);
    if (next != sigma(i)) {
      psi += (Scalar(2) * next) * row.transpose();
      sigma(i) = next;
    }
  }
}

template <typename Scalar, typename Derived>
Scalar overlap_zeta(const HopfieldModel<Scalar>& m, const Eigen::MatrixBase<Derived>& sigma, Index mu,
                    OverlapMode mode = OverlapMode::Sign) {
  detail::check_index(mu, m.num_patterns(), "pattern");
  const auto& source = mode == OverlapMode::Sign ? m.sign_patterns : m.xi;
  return source.col(mu).dot(sigma) / static_cast<Scalar>(m.num_spins());
}

struct ChainSummary {
  VectorXd mean_abs_overlap;  // time average of |zeta_mu| after burn-in
  double order_parameter = 0.0;
};

// Random start, `sweeps` sweeps, |zeta_mu| measured after every post-burn-in sweep.
ChainSummary run_chain(const HopfieldModeld& m, const ThermalChainConfig& cfg, OverlapMode mode = OverlapMode::Sign);

struct TemperatureSweepSpec {
  Index num_spins = 50;
  Index num_patterns = 2;
  double coupling_width = 0.0;
  std::vector<double> temperatures{0.5, 0.8, 1.0, 1.3, 2.0};
  ThermalChainConfig chain;
  Index n_disorder = 20;
  std::uint64_t seed = 1;
  OverlapMode mode = OverlapMode::Sign;
};

SweepResult temperature_sweep(const TemperatureSweepSpec& spec, unsigned threads = 0);

// exp(-beta E) / Z over all 2^N configurations (index convention of kmc.hpp).
VectorXd boltzmann_distribution(const HopfieldModeld& m, double beta);

// Empirical distribution of the chain state, recorded after every sweep.
VectorXd heat_bath_histogram(const HopfieldModeld& m, double beta, std::uint64_t samples, std::uint64_t seed,
                             std::uint64_t burn_in_sweeps = 100);

}  // namespace sbmem
