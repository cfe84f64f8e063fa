#include "sbmem/ensemble.hpp"

#include <cmath>
#include <sstream>

#include "sbmem/parallel.hpp"

namespace sbmem {

std::vector<std::string> EnsembleSpec::violations() const {
  std::vector<std::string> v = model.violations();
  if (n_traj < 1) v.emplace_back("n_traj: must be >= 1");
  if (n_distr < 1) v.emplace_back("n_distr: must be >= 1");
  if (eta_grid.empty()) v.emplace_back("eta_grid: must not be empty");
  for (double e : eta_grid) {
    if (!(e >= kEtaMin)) {
      v.emplace_back("eta_grid: every eta must be >= eta_min = 0.001");
      break;
    }
  }
  for (double s : width_grid) {
    if (!(s >= 0.0)) {
      v.emplace_back("width_grid: widths must be >= 0");
      break;
    }
  }
  if (initial.kind == InitialKind::Pattern) {
    if (initial.pattern < 0 || initial.pattern >= model.num_patterns) {
      v.emplace_back("initial_pattern: must index an existing pattern");
    }
    if (!(initial.overlap >= -1.0 && initial.overlap <= 1.0)) v.emplace_back("initial_overlap: must lie in [-1, 1]");
  }
  if (!(t_end >= 0.0)) v.emplace_back("t_end: must be >= 0 (0 selects the automatic horizon)");
  if (!(t_end_multiple > 0.0)) v.emplace_back("t_end_multiple: must be > 0");
  if (pilot_sweeps < 1) v.emplace_back("pilot_sweeps: must be >= 1");
  if (n_samples < 2) v.emplace_back("n_samples: must be >= 2");
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) v.emplace_back("burn_in_fraction: must lie in [0, 1)");
  if (!(window_fraction > 0.0 && window_fraction <= 1.0)) v.emplace_back("window_fraction: must lie in (0, 1]");
  if (!(burn_in_fraction + window_fraction <= 1.0 + 1e-12)) {
    v.emplace_back("window_fraction: burn_in_fraction + window_fraction must not exceed 1");
  }
  if (!(drift_tol > 0.0)) v.emplace_back("drift_tol: must be > 0");
  return v;
}

void EnsembleSpec::validate() const {
  if (auto v = violations(); !v.empty()) throw ConfigError(std::move(v));
}

double relaxation_time(Index num_spins, double mean_total_rate) {
  if (!(mean_total_rate > 0.0)) throw ZeroTotalRate("cannot estimate relaxation time from a zero total rate");
  return static_cast<double>(num_spins) / mean_total_rate;
}

std::vector<Spins> initial_configurations(const PatternSetd& patterns, const InitialCondition& init, Index n_traj,
                                          std::uint64_t realization_seed) {
  std::vector<Spins> out;
  out.reserve(static_cast<std::size_t>(n_traj));
  for (Index k = 0; k < n_traj; ++k) {
    Rng rng = make_rng(stream_seed(realization_seed, {0x696e6974ULL, static_cast<std::uint64_t>(k)}));
    if (init.kind == InitialKind::Random) {
      out.push_back(random_configuration(patterns.num_spins(), rng));
    } else {
      out.push_back(prepare_initial_configuration(patterns, init.pattern, init.overlap, rng));
    }
  }
  return out;
}

double pilot_flip_rate(const CouplingMatrixd& c, std::span<const RateTable> tables, const Spins& sigma0,
                       std::uint64_t pilot_sweeps, std::uint64_t seed) {
  const auto flips = std::max<std::uint64_t>(2, pilot_sweeps * static_cast<std::uint64_t>(c.num_spins()));
  DynamicalState state = init_state(c, sigma0, tables);
  Rng rng = make_rng(seed);
  for (std::uint64_t k = 0; k < flips / 2; ++k) kmc_step(c, tables, state, rng);
  const double t_half = state.time;
  const std::uint64_t counted = flips - flips / 2;
  for (std::uint64_t k = 0; k < counted; ++k) kmc_step(c, tables, state, rng);
  return static_cast<double>(counted) / (state.time - t_half);
}

double resolve_t_end(const EnsembleSpec& spec, const CouplingMatrixd& c, std::span<const RateTable> tables,
                     std::span<const Spins> initial, std::uint64_t realization_seed) {
  if (spec.t_end > 0.0) return spec.t_end;
  if (initial.empty()) throw ValidationError("resolve_t_end: no initial configurations");
  const double rate = pilot_flip_rate(c, tables, initial.front(), spec.pilot_sweeps,
                                      stream_seed(realization_seed, {0x70696c6f74ULL}));
  return spec.t_end_multiple * relaxation_time(c.num_spins(), rate);
}

EnsembleCurves average_records(std::span<const TrajectoryRecord> records) {
  if (records.empty()) throw ValidationError("average_records: no trajectories");
  EnsembleCurves out;
  out.times = records.front().sample_times;
  const Index samples = records.front().num_samples();
  const Index m = records.front().overlaps.cols();
  out.mean_abs_overlap = MatrixXd::Zero(samples, m);
  out.order_parameter = VectorXd::Zero(samples);
  for (const auto& r : records) {
    if (r.num_samples() != samples || r.overlaps.cols() != m) {
      throw ValidationError("average_records: trajectories use different sample grids");
    }
    const MatrixXd a = r.overlaps.cwiseAbs();
    out.mean_abs_overlap += a;
    out.order_parameter += a.rowwise().maxCoeff();
    out.flips += r.flip_count;
  }
  const auto n = static_cast<double>(records.size());
  out.mean_abs_overlap /= n;
  out.order_parameter /= n;
  if (!out.times.empty()) out.t_end = out.times.back();
  return out;
}

EnsembleCurves trajectory_ensemble(const CouplingMatrixd& c, std::span<const RateTable> tables,
                                   const EnsembleSpec& spec, std::uint64_t realization_seed, unsigned threads) {
  const PatternSetd patterns = extract_patterns(c);
  const std::vector<Spins> initial = initial_configurations(patterns, spec.initial, spec.n_traj, realization_seed);
  const double t_end = resolve_t_end(spec, c, tables, initial, realization_seed);
  const VectorXd grid = VectorXd::LinSpaced(spec.n_samples, 0.0, t_end);
  const std::span<const double> sample_grid(grid.data(), static_cast<std::size_t>(grid.size()));

  std::vector<TrajectoryRecord> records(initial.size());
  parallel_for(
      records.size(),
      [&](std::size_t k) {
        const std::uint64_t seed = stream_seed(realization_seed, {0x6b6d63ULL, k});
        records[k] = run_trajectory(c, patterns, initial[k], tables, t_end, sample_grid, seed);
      },
      threads);
  EnsembleCurves out = average_records(records);
  out.t_end = t_end;
  return out;
}

EnsembleCurves trajectory_ensemble(const CouplingMatrixd& c, const EnsembleSpec& spec, double eta,
                                   std::uint64_t realization_seed, unsigned threads) {
  ModelParams params = spec.model;
  params.eta = eta;
  const KernelParams kp = make_kernel_params(params);
  const std::vector<RateTable> tables = build_rate_tables(c, kp, spec.quad, spec.table, threads);
  return trajectory_ensemble(c, tables, spec, realization_seed, threads);
}

StationaryEstimate stationary_estimate(std::span<const double> times, const VectorXd& curve, double window_fraction,
                                       double drift_tol) {
  if (times.size() != static_cast<std::size_t>(curve.size()) || times.size() < 2) {
    throw ValidationError("stationary_estimate: need matching times and curve with at least two samples");
  }
  const double t_end = times.back();
  const double start = t_end * (1.0 - window_fraction);
  const double mid = 0.5 * (start + t_end);
  double sum = 0.0, first = 0.0, second = 0.0;
  std::size_t n = 0, n_first = 0, n_second = 0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (times[k] < start) continue;
    const double v = curve(static_cast<Index>(k));
    sum += v;
    ++n;
    if (times[k] < mid) {
      first += v;
      ++n_first;
    } else {
      second += v;
      ++n_second;
    }
  }
  if (n_first == 0 || n_second == 0) {
    throw ValidationError("stationary_estimate: window holds too few samples to split in halves");
  }
  StationaryEstimate est{sum / static_cast<double>(n), first / static_cast<double>(n_first),
                         second / static_cast<double>(n_second)};
  if (std::abs(est.first_half - est.second_half) > drift_tol) {
    std::ostringstream msg;
    msg << "order parameter not stationary: window halves " << est.first_half << " vs " << est.second_half;
    throw NotConverged(msg.str(), est.first_half, est.second_half);
  }
  return est;
}

std::uint64_t coupling_seed(std::uint64_t master, std::size_t realization) {
  return stream_seed(master, {0x636f75706cULL, realization});
}

std::uint64_t realization_seed(std::uint64_t master, std::size_t realization) {
  return stream_seed(master, {0x7472616aULL, realization});
}

SweepResult disorder_sweep(const EnsembleSpec& spec, unsigned threads) {
  spec.validate();
  const std::vector<double> widths = spec.widths();
  const std::size_t n_w = widths.size();
  const std::size_t n_e = spec.eta_grid.size();
  const auto n_d = static_cast<std::size_t>(spec.n_distr);

  struct Cell {
    double value = 0.0;
    double t_end = 0.0;
    bool ok = false;
    std::string error;
  };
  std::vector<Cell> cells(n_w * n_e * n_d);
  parallel_for(cells.size(), [&](std::size_t idx) {
    const std::size_t r = idx % n_d;
    const std::size_t ei = (idx / n_d) % n_e;
    const std::size_t wi = idx / (n_d * n_e);
    Cell& cell = cells[idx];
    try {
      ModelParams params = spec.model;
      params.coupling_width = widths[wi];
      params.eta = spec.eta_grid[ei];
      const CouplingMatrixd c = sample_couplings(params, coupling_seed(spec.master_seed, r));
      const EnsembleCurves curves = trajectory_ensemble(c, spec, params.eta, realization_seed(spec.master_seed, r), 1);
      cell.t_end = curves.t_end;
      cell.value = stationary_estimate(curves.times, curves.order_parameter, spec.window_fraction, spec.drift_tol).value;
      cell.ok = true;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  }, threads);

  SweepResult result;
  for (std::size_t wi = 0; wi < n_w; ++wi) {
    for (std::size_t ei = 0; ei < n_e; ++ei) {
      SweepPoint point;
      point.control = spec.eta_grid[ei];
      point.coupling_width = widths[wi];
      for (std::size_t r = 0; r < n_d; ++r) {
        const Cell& cell = cells[(wi * n_e + ei) * n_d + r];
        point.seeds.push_back(coupling_seed(spec.master_seed, r));
        point.t_ends.push_back(cell.t_end);
        if (cell.ok) {
          point.values.push_back(cell.value);
        } else {
          point.failures.push_back({r, cell.error});
        }
      }
      summarize(point);
      result.points.push_back(std::move(point));
    }
  }
  return result;
}

}  // namespace sbmem
