#pragma once

// Disordered spin-boson model: couplings, sign patterns, configurations and
// the pure functions of spin state (energy, flip costs, overlaps).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "sbmem/errors.hpp"
#include "sbmem/random.hpp"
#include "sbmem/types.hpp"

namespace sbmem {

inline constexpr double kEtaMin = 1e-3;

struct ModelParams {
  Index num_spins = 50;
  Index num_patterns = 2;
  double eta = 1.0;
  double theta = 0.9;
  double omega = 1.0;
  double coupling_width = 0.25;
  double drive = 1.0;

  std::vector<std::string> violations() const {
    std::vector<std::string> out;
    if (num_spins < 2) out.emplace_back("num_spins: must be >= 2");
    if (num_patterns < 1) out.emplace_back("num_patterns: must be >= 1");
    if (!(eta >= kEtaMin)) out.emplace_back("eta: must be >= eta_min = 0.001");
    if (!(theta >= 0.0 && theta < 1.0)) out.emplace_back("theta: must satisfy 0 <= theta < 1");
    if (!(omega > 0.0)) out.emplace_back("omega: must be > 0");
    if (!(coupling_width >= 0.0)) out.emplace_back("coupling_width: must be >= 0");
    if (!std::isfinite(drive)) out.emplace_back("drive: must be finite");
    return out;
  }

  void validate() const {
    if (auto v = violations(); !v.empty()) throw ConfigError(std::move(v));
  }
};

// sign with sign(0) := +1.
template <typename Scalar>
Scalar sign_of(Scalar x) {
  return x < Scalar(0) ? Scalar(-1) : Scalar(1);
}

// N x M real couplings g_{i mu}; caches the per-spin norms g_i^2.
template <typename Scalar>
class CouplingMatrix {
 public:
  CouplingMatrix() = default;

  explicit CouplingMatrix(Matrix<Scalar> values) : values_(std::move(values)) {
    squared_norms_ = values_.rowwise().squaredNorm();
    for (Index i = 0; i < squared_norms_.size(); ++i) {
      if (!(squared_norms_(i) > Scalar(0))) {
        throw ValidationError("coupling matrix: spin " + std::to_string(i) + " has g_i^2 = 0");
      }
    }
  }

  const Matrix<Scalar>& values() const { return values_; }
  const Vector<Scalar>& squared_norms() const { return squared_norms_; }
  Index num_spins() const { return values_.rows(); }
  Index num_patterns() const { return values_.cols(); }
  Scalar operator()(Index i, Index mu) const { return values_(i, mu); }

 private:
  Matrix<Scalar> values_;
  Vector<Scalar> squared_norms_;
};

using CouplingMatrixd = CouplingMatrix<double>;

// Noiseless patterns, one column per pattern, entries +-1.
template <typename Scalar>
struct PatternSet {
  Matrix<Scalar> patterns;

  Index num_spins() const { return patterns.rows(); }
  Index num_patterns() const { return patterns.cols(); }
  auto pattern(Index mu) const { return patterns.col(mu); }
};

using PatternSetd = PatternSet<double>;

// Entries drawn i.i.d. from (N(+1, w^2) + N(-1, w^2)) / 2: a fair peak choice
// followed by additive noise. The noise is drawn even for w = 0 so that
// realizations with different widths share their sign structure.
template <typename Scalar, typename Engine>
Matrix<Scalar> sample_bimodal(Index rows, Index cols, double width, Engine& rng) {
  Matrix<Scalar> out(rows, cols);
  for (Index mu = 0; mu < cols; ++mu) {
    for (Index i = 0; i < rows; ++i) {
      const double peak = (rng() >> 63) ? 1.0 : -1.0;
      const double noise = standard_normal(rng);
      out(i, mu) = static_cast<Scalar>(peak + width * noise);
    }
  }
  return out;
}

template <typename Scalar = double, typename Engine>
CouplingMatrix<Scalar> sample_couplings(const ModelParams& params, Engine& rng) {
  params.validate();
  return CouplingMatrix<Scalar>(
      sample_bimodal<Scalar>(params.num_spins, params.num_patterns, params.coupling_width, rng));
}

template <typename Scalar = double>
CouplingMatrix<Scalar> sample_couplings(const ModelParams& params, std::uint64_t seed) {
  auto rng = make_rng(seed);
  return sample_couplings<Scalar>(params, rng);
}

template <typename Derived>
PatternSet<typename Derived::Scalar> sign_patterns(const Eigen::MatrixBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  return {values.unaryExpr([](Scalar x) { return sign_of(x); }).eval()};
}

template <typename Scalar>
PatternSet<Scalar> extract_patterns(const CouplingMatrix<Scalar>& c) {
  return sign_patterns(c.values());
}

namespace detail {
inline void check_index(Index i, Index n, const char* what) {
  if (i < 0 || i >= n) {
    throw OutOfBounds(std::string(what) + " index " + std::to_string(i) + " out of range [0, " +
                      std::to_string(n) + ")");
  }
}
}  // namespace detail

template <typename Scalar, typename Derived>
Scalar overlap(const PatternSet<Scalar>& p, const Eigen::MatrixBase<Derived>& sigma, Index mu) {
  detail::check_index(mu, p.num_patterns(), "pattern");
  return p.pattern(mu).dot(sigma) / static_cast<Scalar>(p.num_spins());
}

// All M overlaps at once.
template <typename Scalar, typename Derived>
Vector<Scalar> overlaps(const PatternSet<Scalar>& p, const Eigen::MatrixBase<Derived>& sigma) {
  return (p.patterns.transpose() * sigma) / static_cast<Scalar>(p.num_spins());
}

// h_mu = sum_j g_{j mu} sigma_j.
template <typename Scalar, typename Derived>
Vector<Scalar> pattern_fields(const CouplingMatrix<Scalar>& c, const Eigen::MatrixBase<Derived>& sigma) {
  return c.values().transpose() * sigma;
}

// E(sigma) = -1/4 sum_mu sum_{i != j} g_{i mu} g_{j mu} sigma_i sigma_j
//          = -1/4 sum_mu [h_mu^2 - sum_i g_{i mu}^2].
template <typename Scalar, typename Derived>
Scalar interaction_energy(const CouplingMatrix<Scalar>& c, const Eigen::MatrixBase<Derived>& sigma) {
  const Vector<Scalar> h = pattern_fields(c, sigma);
  return Scalar(-0.25) * (h.squaredNorm() - c.values().squaredNorm());
}

// Delta E_i = E(sigma with i flipped) - E(sigma) = sigma_i sum_mu g_{i mu} (h_mu - g_{i mu} sigma_i).
template <typename Scalar, typename Derived>
Scalar flip_cost(const CouplingMatrix<Scalar>& c, const Eigen::MatrixBase<Derived>& sigma, Index i) {
  detail::check_index(i, c.num_spins(), "site");
  const Vector<Scalar> h = pattern_fields(c, sigma);
  const Scalar s = sigma(i);
  return s * (c.values().row(i).dot(h - c.values().row(i).transpose() * s));
}

// Every flip cost in O(NM): sigma .* (G h) - g^2.
template <typename Scalar, typename Derived, typename FieldDerived>
Vector<Scalar> flip_costs(const CouplingMatrix<Scalar>& c, const Eigen::MatrixBase<Derived>& sigma,
                          const Eigen::MatrixBase<FieldDerived>& fields) {
  return (sigma.cwiseProduct(c.values() * fields) - c.squared_norms()).eval();
}

template <typename Scalar, typename Derived>
Vector<Scalar> flip_costs(const CouplingMatrix<Scalar>& c, const Eigen::MatrixBase<Derived>& sigma) {
  return flip_costs(c, sigma, pattern_fields(c, sigma));
}

// Largest |Delta E_i| reachable by spin i over all configurations.
template <typename Scalar>
Scalar flip_cost_bound(const CouplingMatrix<Scalar>& c, Index i) {
  detail::check_index(i, c.num_spins(), "site");
  const Vector<Scalar> column_sums = c.values().cwiseAbs().colwise().sum().transpose();
  const Vector<Scalar> own = c.values().row(i).cwiseAbs().transpose();
  return own.dot(column_sums - own);
}

// Exactly k = (1 + target) N / 2 uniformly chosen sites aligned with pattern mu,
// the rest anti-aligned.
template <typename Scalar, typename Engine>
SpinVector<Scalar> prepare_initial_configuration(const PatternSet<Scalar>& p, Index mu,
                                                 double target_overlap, Engine& rng) {
  detail::check_index(mu, p.num_patterns(), "pattern");
  if (!(target_overlap >= -1.0 && target_overlap <= 1.0)) {
    throw ValidationError("initial overlap must lie in [-1, 1]");
  }
  const Index n = p.num_spins();
  const double k_real = (1.0 + target_overlap) * static_cast<double>(n) / 2.0;
  const double k_round = std::round(k_real);
  if (std::abs(k_real - k_round) > 1e-9) {
    const auto lo = static_cast<Index>(std::floor(k_real));
    const Index hi = lo + 1;
    std::ostringstream msg;
    msg << "initial overlap " << target_overlap << " is not reachable with N = " << n
        << "; nearest achievable overlaps are " << static_cast<double>(2 * lo - n) / static_cast<double>(n)
        << " and " << static_cast<double>(2 * hi - n) / static_cast<double>(n);
    throw ValidationError(msg.str());
  }
  const auto k = static_cast<Index>(k_round);

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[uniform_index(rng, i)]);
  }
  SpinVector<Scalar> sigma = -p.pattern(mu);
  for (Index a = 0; a < k; ++a) {
    const Index i = order[static_cast<std::size_t>(a)];
    sigma(i) = p.patterns(i, mu);
  }
  return sigma;
}

template <typename Scalar = double, typename Engine>
SpinVector<Scalar> random_configuration(Index n, Engine& rng) {
  SpinVector<Scalar> sigma(n);
  for (Index i = 0; i < n; ++i) sigma(i) = (rng() >> 63) ? Scalar(1) : Scalar(-1);
  return sigma;
}

// Site-wise sign change eps_i = G_{i,1} followed by a permutation placing the
// +1 block of the (transformed) second pattern first.
template <typename Scalar>
struct Gauge {
  Vector<Scalar> signs;
  std::vector<Index> order;  // order[k] = original site shown at position k

  template <typename Derived>
  SpinVector<Scalar> apply(const Eigen::MatrixBase<Derived>& sigma) const {
    SpinVector<Scalar> out(sigma.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
      const Index i = order[k];
      out(static_cast<Index>(k)) = signs(i) * sigma(i);
    }
    return out;
  }

  PatternSet<Scalar> apply(const PatternSet<Scalar>& p) const {
    PatternSet<Scalar> out{Matrix<Scalar>(p.num_spins(), p.num_patterns())};
    for (Index mu = 0; mu < p.num_patterns(); ++mu) out.patterns.col(mu) = apply(p.pattern(mu));
    return out;
  }
};

template <typename Scalar>
Gauge<Scalar> gauge_for(const PatternSet<Scalar>& p) {
  Gauge<Scalar> g;
  g.signs = p.pattern(0);
  g.order.resize(static_cast<std::size_t>(p.num_spins()));
  std::iota(g.order.begin(), g.order.end(), Index{0});
  if (p.num_patterns() >= 2) {
    std::stable_partition(g.order.begin(), g.order.end(), [&](Index i) {
      return g.signs(i) * p.patterns(i, 1) > Scalar(0);
    });
  }
  return g;
}

}  // namespace sbmem
