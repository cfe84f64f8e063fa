#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "sbmem/rate_kernel.hpp"

using namespace sbmem;

namespace {

// W(0, g^2 = 2, eta = 1, theta = 0.9, omega = Omega = 1), from a 30-digit
// adaptive quadrature of the same integral.
constexpr double kPinnedW0 = 0.1790993429874954;

struct Probe {
  double eta;
  double delta_e;
  double g_sq;
};

const std::vector<Probe> kProbeGrid = {
    {0.25, 0, 0.5}, {0.25, -1, 1}, {0.5, 2, 1},   {0.5, -4, 2},  {1, 0, 2},     {1, -3, 1},    {1, 5, 4},
    {1, -8, 3},     {2, 1, 0.5},   {2, -6, 2},    {2, 10, 4},    {3, -2, 1.5},  {4, 4, 2},     {4, -12, 3},
    {6, 0, 1},      {8, 7, 2},     {10, -15, 2.5}, {20, 20, 3},  {50, 10, 2},   {50, -10, 2},
};

double rel_diff(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("envelope and phase functions") {
  for (double eta : {0.25, 1.0, 2.0, 5.0, 50.0}) {
    CHECK(envelope_f(0.0, eta) == 0.0);
    CHECK(phase_s(0.0, eta) == 0.0);
  }
  CHECK(envelope_f(1.0, 2.0) == doctest::Approx(-std::exp(-1.0) * std::sin(1.0)).epsilon(1e-14));
  CHECK(envelope_f(1.0, 2.0) == doctest::Approx(-0.30956).epsilon(1e-5));
  CHECK(phase_s(1.0, 2.0) == doctest::Approx(-0.80122).epsilon(1e-5));
  CHECK(envelope_f_limit(1.0) == doctest::Approx(1.2));
  CHECK(phase_s_limit(1.0) == doctest::Approx(-0.8));
  CHECK(envelope_f(60.0, 1.0) == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(phase_s(60.0, 1.0) == doctest::Approx(-0.8).epsilon(1e-12));

  SUBCASE("eta = 2 closed forms") {
    for (double t = 0.0; t <= 20.0; t += 0.01) {
      CHECK(std::abs(envelope_f(t, 2.0) + std::exp(-t) * std::sin(t)) <= 1e-12);
      CHECK(std::abs(phase_s(t, 2.0) - (std::exp(-t) * std::cos(t) - 1.0)) <= 1e-12);
    }
  }

  SUBCASE("exponential approach to the limits") {
    for (double eta : {0.25, 0.5, 1.0, 3.0, 10.0, 50.0}) {
      const double d = eta * eta + 4.0;
      const double c_f = (std::abs(8.0 - 2.0 * eta * eta) / eta + 8.0) / d;
      const double c_s = (4.0 * eta + std::abs(eta * eta - 4.0)) / d;
      const double lb = envelope_f_lower_bound(eta);
      for (double t = 0.0; t <= 40.0; t += 0.037) {
        const double decay = std::exp(-eta * t / 2.0);
        CHECK(std::abs(envelope_f(t, eta) - envelope_f_limit(eta)) <= c_f * decay * (1 + 1e-12) + 1e-15);
        CHECK(std::abs(phase_s(t, eta) - phase_s_limit(eta)) <= c_s * decay * (1 + 1e-12) + 1e-15);
        CHECK(envelope_f(t, eta) >= lb - 1e-14);
      }
    }
  }
}

TEST_CASE("kernel parameters") {
  const KernelParams kp = make_kernel_params(1.0, 0.9);
  CHECK(kp.nu == doctest::Approx(15.2).epsilon(1e-14));
  for (double eta : {0.25, 1.0, 7.0}) {
    for (double theta : {0.0, 0.5, 0.9}) {
      const KernelParams k = make_kernel_params(eta, theta);
      CHECK(std::abs(k.nu - 4.0 * (1.0 + theta) * eta / ((eta * eta + 4.0) * (1.0 - theta))) <= 1e-14 * k.nu);
    }
  }
  CHECK_THROWS_AS(make_kernel_params(0.0, 0.9), ConfigError);
  CHECK_THROWS_AS(make_kernel_params(1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(rate_direct(0.0, 0.0, kp), ValidationError);
}

TEST_CASE("truncation point leaves a negligible envelope") {
  for (double eta : {0.25, 1.0, 4.0, 50.0}) {
    for (double g_sq : {0.5, 2.0, 4.0}) {
      const KernelParams kp = make_kernel_params(eta, 0.9);
      const double t_max = truncation_time(g_sq, kp);
      const double env = std::exp(-envelope_rate(g_sq, kp) * (envelope_f(t_max, eta) + t_max));
      CHECK(env <= std::exp(-32.0) * (1 + 1e-9));
      CHECK(std::abs(rate_integrand(t_max, 3.0, g_sq, kp)) <= std::exp(-32.0) * (1 + 1e-9));
    }
  }
}

TEST_CASE("pinned rate at zero flip cost") {
  const KernelParams kp = make_kernel_params(1.0, 0.9);
  CHECK(rel_diff(rate_direct(0.0, 2.0, kp), kPinnedW0) <= 1e-6);
  CHECK(rel_diff(oracle::trapezoid_rate(0.0, 2.0, 1.0, 0.9), kPinnedW0) <= 1e-7);
}

TEST_CASE("adaptive quadrature matches the trapezoid oracle on the probe grid") {
  REQUIRE(kProbeGrid.size() == 20);
  for (const auto& p : kProbeGrid) {
    CAPTURE(p.eta);
    CAPTURE(p.delta_e);
    CAPTURE(p.g_sq);
    const KernelParams kp = make_kernel_params(p.eta, 0.9);
    const double expected = oracle::trapezoid_rate(p.delta_e, p.g_sq, p.eta, 0.9);
    REQUIRE(expected > 1e-3);
    CHECK(rel_diff(rate_direct(p.delta_e, p.g_sq, kp), expected) <= 1e-6);
  }
}

TEST_CASE("omega and drive enter as stated") {
  const double base = rate_direct(1.5, 2.0, make_kernel_params(1.0, 0.9));
  CHECK(rate_direct(1.5, 2.0, make_kernel_params(1.0, 0.9, 1.0, 4.0)) == doctest::Approx(4.0 * base).epsilon(1e-6));
  const double w = rate_direct(1.5, 2.0, make_kernel_params(1.0, 0.9, 1.7, 1.0));
  CHECK(rel_diff(w, oracle::trapezoid_rate(1.5, 2.0, 1.0, 0.9, 1.7, 1.0)) <= 1e-6);
}

TEST_CASE("large-eta symmetry") {
  const KernelParams kp = make_kernel_params(50.0, 0.9);
  for (double de = 0.5; de <= 10.0; de += 0.5) {
    const double ratio = rate_direct(de, 2.0, kp) / rate_direct(-de, 2.0, kp);
    CHECK(ratio >= 0.99);
    CHECK(ratio <= 1.01);
  }
}

TEST_CASE("large-eta pure exponential limit") {
  // W -> 2 Omega^2 / (omega A) once A |f(inf)| is small; A f(inf) ~ -608 / eta^2 here.
  double previous = 1.0;
  for (double eta : {50.0, 100.0, 200.0, 400.0}) {
    const KernelParams kp = make_kernel_params(eta, 0.9);
    const double limit = 2.0 / envelope_rate(2.0, kp);
    const double dev = rel_diff(rate_direct(0.0, 2.0, kp), limit);
    CHECK(dev < previous);
    previous = dev;
    if (eta >= 200.0) CHECK(dev < 0.05);
  }
}

TEST_CASE("no negative rates across the exercised range") {
  for (double eta : {0.25, 0.5, 1.0, 3.0, 8.0, 50.0}) {
    const KernelParams kp = make_kernel_params(eta, 0.9);
    for (double g_sq : {0.5, 1.0, 2.0, 4.0}) {
      for (double de = -120.0; de <= 120.0; de += 7.5) {
        double w = -1.0;
        CHECK_NOTHROW(w = rate_direct(de, g_sq, kp));
        CHECK(w >= 0.0);
      }
    }
  }
}

TEST_CASE("quadrature failure is reported") {
  QuadratureConfig quad;
  quad.abs_tol = 1e-30;
  quad.rel_tol = 1e-16;
  quad.max_depth = 0;
  try {
    rate_direct(3.0, 2.0, make_kernel_params(1.0, 0.9), quad);
    FAIL("expected NonConvergedQuadrature");
  } catch (const NonConvergedQuadrature& e) {
    CHECK(e.estimate() > 0.0);
    CHECK(e.error() > 0.0);
  }
}

TEST_CASE("rate tables") {
  const KernelParams kp = make_kernel_params(1.0, 0.9);
  const RateTable table = build_rate_table(2.0, kp, {-30.0, 30.0});
  REQUIRE(table.size() >= 2);
  CHECK(table.lower() <= -30.0);
  CHECK(table.upper() >= 30.0);
  CHECK((table.rates().array() >= 0.0).all());
  const VectorXd grid = table.grid();
  for (Index k = 1; k < grid.size(); ++k) CHECK(grid(k) > grid(k - 1));

  SUBCASE("grid points and midpoints") {
    for (Index k = 0; k + 1 < table.size(); k += 7) {
      CHECK(table.lookup(table.grid_point(k)) == doctest::Approx(table.rates()(k)).epsilon(1e-12));
      const double mid = 0.5 * (table.grid_point(k) + table.grid_point(k + 1));
      CHECK(table.lookup(mid) ==
            doctest::Approx(0.5 * (table.rates()(k) + table.rates()(k + 1))).epsilon(1e-12));
    }
    CHECK(table.lookup(table.upper()) == table.rates()(table.size() - 1));
  }

  SUBCASE("bounds are enforced") {
    CHECK_THROWS_AS(table.lookup(table.upper() + 1e-6), OutOfBounds);
    CHECK_THROWS_AS(table.lookup(table.lower() - 1e-6), OutOfBounds);
    CHECK_THROWS_AS(lookup_rate(table, std::nan("")), OutOfBounds);
  }

  SUBCASE("random probes against direct evaluation") {
    const TableConfig cfg;
    Rng rng = make_rng(4);
    for (int k = 0; k < 200; ++k) {
      const double x = -30.0 + 60.0 * uniform01(rng);
      const double exact = rate_direct(x, 2.0, kp);
      CHECK(std::abs(table.lookup(x) - exact) <= cfg.rel_tol * exact + cfg.abs_floor);
    }
  }

  CHECK_THROWS_AS(build_rate_table(2.0, kp, {1.0, -1.0}), ValidationError);
  CHECK_THROWS_AS(RateTable(2.0, 0.0, 1.0, VectorXd::Constant(3, -1.0)), ValidationError);
}
