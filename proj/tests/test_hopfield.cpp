#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sbmem/hopfield.hpp"
#include "sbmem/kmc.hpp"

using namespace sbmem;

TEST_CASE("energy, hand examples") {
  Eigen::MatrixXd xi(2, 1);
  xi << 1.0, 1.0;
  const HopfieldModeld two(xi);
  CHECK(hopfield_energy(two, Spins::Ones(2)) == doctest::Approx(-0.5));
  Spins anti(2);
  anti << 1.0, -1.0;
  CHECK(hopfield_energy(two, anti) == doctest::Approx(0.5));

  const HopfieldModeld m = sample_noisy_patterns(30, 1, 0.0, 3);
  const Spins xi1 = m.xi.col(0);
  CHECK(hopfield_energy(m, xi1) == doctest::Approx(-(30.0 - 1.0) / 2.0));
}

TEST_CASE("energy against the double-loop oracle") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const HopfieldModeld m = sample_noisy_patterns(10, 1 + static_cast<Index>(seed % 3), 0.3, seed);
    Rng rng = make_rng(seed + 50);
    const Spins s = random_configuration(10, rng);
    CHECK(std::abs(hopfield_energy(m, s) - oracle::brute_hopfield_energy(m.xi, s)) < 1e-9);
    const MatrixXd j = connectivity(m);
    CHECK(j.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::abs(-0.5 * s.dot(j * s) - hopfield_energy(m, s)) < 1e-9);
  }
}

TEST_CASE("noiseless patterns have self-coupling p / N") {
  const HopfieldModeld m = sample_noisy_patterns(40, 3, 0.0, 8);
  const MatrixXd full = m.xi * m.xi.transpose() / 40.0;
  CHECK((full.diagonal().array() - 3.0 / 40.0).abs().maxCoeff() < 1e-15);
  CHECK(m.sign_patterns == m.xi);
}

TEST_CASE("heat-bath probability") {
  CHECK(heat_bath_up_probability(0.0, 3.0) == 0.5);
  CHECK(heat_bath_up_probability(1.0, 0.0) == 0.5);
  CHECK(heat_bath_up_probability(1.0, 0.5) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  CHECK(heat_bath_up_probability(1e300, 1.0) == 1.0);
  CHECK(heat_bath_up_probability(1e300, -1.0) == 0.0);
}

TEST_CASE("infinite temperature is equiprobable") {
  const HopfieldModeld m = sample_noisy_patterns(3, 2, 0.25, 1);
  const std::uint64_t samples = 80000;
  const VectorXd h = heat_bath_histogram(m, 0.0, samples, 5);
  const double p = 1.0 / 8.0;
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(samples));
  for (Index k = 0; k < 8; ++k) CHECK(std::abs(h(k) - p) < 3.0 * se);
}

TEST_CASE("low temperature keeps a stored pattern") {
  const HopfieldModeld m = sample_noisy_patterns(50, 2, 0.0, 4);
  Spins s = m.xi.col(0);
  Rng rng = make_rng(2);
  for (int k = 0; k < 50; ++k) glauber_sweep(m, s, 20.0, rng);
  CHECK(overlap_zeta(m, s, 0) == doctest::Approx(1.0));
}

TEST_CASE("zero-temperature sweeps never raise the energy") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const HopfieldModeld m = sample_noisy_patterns(40, 3, 0.2, seed);
    Rng rng = make_rng(seed);
    Spins s = random_configuration(40, rng);
    double e = hopfield_energy(m, s);
    for (int k = 0; k < 20; ++k) {
      glauber_sweep(m, s, 1e12, rng);
      const double next = hopfield_energy(m, s);
      CHECK(next <= e + 1e-12);
      e = next;
    }
  }
}

TEST_CASE("heat-bath chain samples the Boltzmann law") {
  const HopfieldModeld m = sample_noisy_patterns(8, 2, 0.25, 17);
  const VectorXd exact = boltzmann_distribution(m, 1.0);
  CHECK(exact.sum() == doctest::Approx(1.0));
  for (Index k = 0; k < 256; ++k) {
    const Spins s = configuration_from_index(static_cast<std::uint64_t>(k), 8);
    CHECK(std::abs(exact(k) / exact(0) - std::exp(-(hopfield_energy(m, s) - hopfield_energy(m, Spins::Ones(8))))) <
          1e-10 * (exact(k) / exact(0)));
  }
  const VectorXd empirical = heat_bath_histogram(m, 1.0, 1000000, 23);
  CHECK(total_variation(empirical, exact) < 0.02);
}

TEST_CASE("overlap_zeta") {
  Eigen::MatrixXd xi(4, 1);
  xi << 1.2, -0.8, 0.9, -1.1;
  const HopfieldModeld m(xi);
  Spins s(4);
  s << 1, -1, 1, -1;
  CHECK(overlap_zeta(m, s, 0) == doctest::Approx(1.0));
  CHECK(overlap_zeta(m, Spins(-s), 0) == doctest::Approx(-1.0));
  CHECK(overlap_zeta(m, s, 0, OverlapMode::Raw) == doctest::Approx(1.0));
  CHECK(overlap_zeta(m, Spins::Ones(4), 0, OverlapMode::Raw) == doctest::Approx(0.05));
  CHECK_THROWS_AS(overlap_zeta(m, s, 1), OutOfBounds);
}

TEST_CASE("chains and sweeps") {
  const HopfieldModeld m = sample_noisy_patterns(50, 2, 0.0, 6);
  ThermalChainConfig cfg;
  cfg.beta = 2.0;
  cfg.sweeps = 400;
  cfg.seed = 9;
  const ChainSummary a = run_chain(m, cfg);
  const ChainSummary b = run_chain(m, cfg);
  CHECK(a.mean_abs_overlap == b.mean_abs_overlap);
  CHECK(a.order_parameter == doctest::Approx(a.mean_abs_overlap.maxCoeff()));
  CHECK(a.order_parameter > 0.8);

  cfg.burn_in = 1.0;
  CHECK_THROWS_AS(run_chain(m, cfg), ConfigError);

  TemperatureSweepSpec spec;
  spec.num_spins = 20;
  spec.temperatures = {0.5, 2.0};
  spec.chain.sweeps = 200;
  spec.n_disorder = 4;
  spec.seed = 3;
  const SweepResult r1 = temperature_sweep(spec, 1);
  const SweepResult r2 = temperature_sweep(spec, 3);
  REQUIRE(r1.points.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(r1.points[k].values == r2.points[k].values);
    CHECK(r1.points[k].values.size() == 4);
  }
  CHECK(r1.points[0].control == 0.5);
  CHECK(r1.points[0].mean_M > r1.points[1].mean_M);
}
