#include <doctest.h>

#include <cmath>
#include <vector>

#include "sbmem/ensemble.hpp"

using namespace sbmem;

namespace {

EnsembleSpec small_spec() {
  EnsembleSpec spec;
  spec.model.num_spins = 20;
  spec.model.num_patterns = 2;
  spec.model.coupling_width = 0.25;
  spec.n_traj = 4;
  spec.n_distr = 3;
  spec.eta_grid = {1.0, 4.0};
  spec.n_samples = 40;
  spec.t_end_multiple = 5.0;
  spec.pilot_sweeps = 10;
  spec.drift_tol = 1.0;
  spec.master_seed = 11;
  return spec;
}

TrajectoryRecord fake_record(std::initializer_list<double> m1, std::initializer_list<double> m2) {
  TrajectoryRecord r;
  const auto n = static_cast<Index>(m1.size());
  r.overlaps = MatrixXd(n, 2);
  Index k = 0;
  for (double v : m1) r.overlaps(k++, 0) = v;
  k = 0;
  for (double v : m2) r.overlaps(k++, 1) = v;
  for (Index t = 0; t < n; ++t) r.sample_times.push_back(static_cast<double>(t));
  r.flip_count = 3;
  return r;
}

}  // namespace

TEST_CASE("absolute values are taken per trajectory before averaging") {
  // one trajectory retrieves +pattern 1, the other -pattern 2
  const std::vector<TrajectoryRecord> records{fake_record({0.8, 0.8}, {0.0, 0.1}),
                                              fake_record({0.0, -0.1}, {-0.8, -0.8})};
  const EnsembleCurves curves = average_records(records);
  CHECK(curves.order_parameter(0) == doctest::Approx(0.8));
  CHECK(curves.order_parameter(1) == doctest::Approx(0.8));
  CHECK(curves.mean_abs_overlap(0, 0) == doctest::Approx(0.4));
  CHECK(curves.mean_abs_overlap(1, 1) == doctest::Approx(0.45));
  CHECK(curves.flips == 6);
  CHECK(curves.t_end == 1.0);

  // a pattern and its negative cancel in a signed average but not here
  const std::vector<TrajectoryRecord> mirrored{fake_record({0.9}, {0.0}), fake_record({-0.9}, {0.0})};
  CHECK(average_records(mirrored).order_parameter(0) == doctest::Approx(0.9));

  CHECK_THROWS_AS(average_records(std::span<const TrajectoryRecord>{}), ValidationError);
  const std::vector<TrajectoryRecord> ragged{fake_record({0.1, 0.2}, {0.1, 0.2}), fake_record({0.1}, {0.1})};
  CHECK_THROWS_AS(average_records(ragged), ValidationError);
}

TEST_CASE("stationary_estimate") {
  std::vector<double> times;
  for (int k = 0; k <= 100; ++k) times.push_back(k * 0.1);
  SUBCASE("constant curve") {
    const VectorXd curve = VectorXd::Constant(101, 0.42);
    const StationaryEstimate e = stationary_estimate(times, curve, 0.25, 0.01);
    CHECK(e.value == doctest::Approx(0.42));
    CHECK(e.first_half == doctest::Approx(0.42));
  }
  SUBCASE("window is the tail") {
    VectorXd curve(101);
    for (int k = 0; k <= 100; ++k) curve(k) = k < 75 ? 0.0 : 1.0;
    CHECK(stationary_estimate(times, curve, 0.25, 0.01).value == doctest::Approx(1.0));
  }
  SUBCASE("drift is rejected") {
    VectorXd curve(101);
    for (int k = 0; k <= 100; ++k) curve(k) = 0.01 * k;
    CHECK_THROWS_AS(stationary_estimate(times, curve, 0.25, 0.05), NotConverged);
    CHECK_NOTHROW(stationary_estimate(times, curve, 0.25, 0.2));
  }
  CHECK_THROWS_AS(stationary_estimate(times, VectorXd::Zero(5), 0.25, 0.1), ValidationError);
}

TEST_CASE("initial configurations") {
  ModelParams p;
  p.num_spins = 50;
  const PatternSetd patterns = extract_patterns(sample_couplings(p, 1));
  InitialCondition init{InitialKind::Pattern, 1, 0.6};
  const auto a = initial_configurations(patterns, init, 5, 99);
  const auto b = initial_configurations(patterns, init, 5, 99);
  REQUIRE(a.size() == 5);
  for (std::size_t k = 0; k < 5; ++k) {
    CHECK(a[k] == b[k]);
    CHECK(overlap(patterns, a[k], 1) == doctest::Approx(0.6));
  }
  CHECK(a[0] != a[1]);
}

TEST_CASE("trajectory ensemble") {
  EnsembleSpec spec = small_spec();
  spec.n_traj = 1;
  const CouplingMatrixd c = sample_couplings(spec.model, coupling_seed(spec.master_seed, 0));
  const std::uint64_t rseed = realization_seed(spec.master_seed, 0);
  const auto tables = build_rate_tables(c, make_kernel_params(spec.model));

  SUBCASE("a single trajectory is reproduced exactly") {
    const EnsembleCurves curves = trajectory_ensemble(c, tables, spec, rseed, 1);
    const PatternSetd patterns = extract_patterns(c);
    const auto init = initial_configurations(patterns, spec.initial, 1, rseed);
    const VectorXd grid = VectorXd::LinSpaced(spec.n_samples, 0.0, curves.t_end);
    const TrajectoryRecord r =
        run_trajectory(c, patterns, init[0], tables, curves.t_end,
                       std::span<const double>(grid.data(), static_cast<std::size_t>(grid.size())),
                       stream_seed(rseed, {0x6b6d63ULL, 0}));
    CHECK(curves.order_parameter == r.overlaps.cwiseAbs().rowwise().maxCoeff());
    CHECK(curves.mean_abs_overlap == r.overlaps.cwiseAbs());
    CHECK(curves.t_end == doctest::Approx(resolve_t_end(spec, c, tables, init, rseed)));
  }

  SUBCASE("order parameter dominates every mean overlap") {
    spec.n_traj = 16;
    const EnsembleCurves curves = trajectory_ensemble(c, tables, spec, rseed, 1);
    for (Index t = 0; t < curves.order_parameter.size(); ++t) {
      CHECK(curves.order_parameter(t) >= curves.mean_abs_overlap.row(t).maxCoeff() - 1e-15);
      CHECK(curves.order_parameter(t) <= 1.0);
    }
  }

  SUBCASE("pattern start gives the prepared overlap at t = 0") {
    spec.n_traj = 8;
    spec.initial = {InitialKind::Pattern, 0, 0.6};
    const EnsembleCurves curves = trajectory_ensemble(c, tables, spec, rseed, 1);
    CHECK(curves.mean_abs_overlap(0, 0) == doctest::Approx(0.6));
  }

  SUBCASE("a fixed horizon is used as given") {
    spec.t_end = 3.5;
    CHECK(trajectory_ensemble(c, tables, spec, rseed, 1).t_end == 3.5);
  }
}

TEST_CASE("pilot flip rate and horizon") {
  ModelParams p;
  p.num_spins = 20;
  const CouplingMatrixd c = sample_couplings(p, 2);
  const auto tables = build_rate_tables(c, make_kernel_params(p));
  Rng rng = make_rng(1);
  const Spins s0 = random_configuration(20, rng);
  const double r = pilot_flip_rate(c, tables, s0, 50, 7);
  CHECK(r > 0.0);
  CHECK(r == pilot_flip_rate(c, tables, s0, 50, 7));
  CHECK(relaxation_time(20, 4.0) == doctest::Approx(5.0));
  // uniform rates: total rate 10, estimated from 500 exponential waits
  const std::vector<RateTable> flat(20, RateTable(1.0, -100.0, 200.0, VectorXd::Constant(2, 0.5)));
  CHECK(std::abs(pilot_flip_rate(c, flat, s0, 50, 7) - 10.0) < 4.0 * 10.0 / std::sqrt(500.0));
}

TEST_CASE("seeds are shared across the sweep grid") {
  CHECK(coupling_seed(5, 0) == coupling_seed(5, 0));
  CHECK(coupling_seed(5, 0) != coupling_seed(5, 1));
  CHECK(coupling_seed(5, 0) != realization_seed(5, 0));
  CHECK(coupling_seed(5, 0) != coupling_seed(6, 0));
}

TEST_CASE("disorder_sweep") {
  const EnsembleSpec spec = small_spec();
  const SweepResult a = disorder_sweep(spec, 1);
  const SweepResult b = disorder_sweep(spec, 2);
  REQUIRE(a.points.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    const SweepPoint& pt = a.points[k];
    CHECK(pt.control == spec.eta_grid[k]);
    CHECK(pt.values == b.points[k].values);
    CHECK(pt.t_ends == b.points[k].t_ends);
    REQUIRE(pt.values.size() == 3);
    CHECK(pt.failures.empty());
    double mean = 0.0;
    for (double v : pt.values) mean += v / 3.0;
    double var = 0.0;
    for (double v : pt.values) var += (v - mean) * (v - mean) / 3.0;
    CHECK(pt.mean_M == doctest::Approx(mean));
    CHECK(pt.std_M == doctest::Approx(std::sqrt(var)));
    CHECK(pt.standard_error() == doctest::Approx(std::sqrt(var / 2.0)));
  }
  // the same couplings at every eta
  CHECK(a.points[0].seeds == a.points[1].seeds);

  SUBCASE("cells that fail the drift check are excluded and reported") {
    EnsembleSpec strict = spec;
    strict.drift_tol = 1e-12;
    strict.eta_grid = {1.0};
    const SweepResult r = disorder_sweep(strict, 1);
    REQUIRE(r.points.size() == 1);
    CHECK(r.points[0].failures.size() + r.points[0].values.size() == 3);
    CHECK(!r.points[0].failures.empty());
    CHECK(r.points[0].failures[0].reason.find("not stationary") != std::string::npos);
  }

  SUBCASE("width grid") {
    EnsembleSpec w = spec;
    w.eta_grid = {2.0};
    w.width_grid = {0.0, 0.25};
    const SweepResult r = disorder_sweep(w, 1);
    REQUIRE(r.points.size() == 2);
    CHECK(r.points[0].coupling_width == 0.0);
    CHECK(r.points[1].coupling_width == 0.25);
  }

  SUBCASE("invalid specs are rejected before any work") {
    EnsembleSpec bad = spec;
    bad.n_traj = 0;
    bad.eta_grid = {0.0};
    try {
      disorder_sweep(bad, 1);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("n_traj") != std::string::npos);
      CHECK(msg.find("eta_min") != std::string::npos);
    }
  }
}
