#pragma once

// Trajectory ensembles, the retrieval order parameter M(t) and
// disorder-averaged sweeps over eta.

#include <cstdint>
#include <span>
#include <vector>

#include "sbmem/kmc.hpp"
#include "sbmem/model.hpp"
#include "sbmem/rate_kernel.hpp"
#include "sbmem/sweep.hpp"

namespace sbmem {

enum class InitialKind { Random, Pattern };

struct InitialCondition {
  InitialKind kind = InitialKind::Random;
  Index pattern = 0;
  double overlap = 0.6;
};

struct EnsembleSpec {
  ModelParams model;
  Index n_traj = 200;
  Index n_distr = 30;
  std::vector<double> eta_grid{0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0};
  // Coupling widths to sweep; empty means {model.coupling_width}.
  std::vector<double> width_grid;
  InitialCondition initial;
  std::uint64_t master_seed = 1;
  // Fixed horizon; 0 selects t_end_multiple * N / (pilot flip rate).
  double t_end = 0.0;
  double t_end_multiple = 50.0;
  std::uint64_t pilot_sweeps = 100;
  Index n_samples = 200;
  double burn_in_fraction = 0.5;
  double window_fraction = 0.25;
  double drift_tol = 0.05;
  QuadratureConfig quad;
  TableConfig table;

  std::vector<std::string> violations() const;
  void validate() const;
  std::vector<double> widths() const {
    return width_grid.empty() ? std::vector<double>{model.coupling_width} : width_grid;
  }
};

struct EnsembleCurves {
  std::vector<double> times;
  MatrixXd mean_abs_overlap;  // rows: samples, cols: patterns
  VectorXd order_parameter;   // M(t) = mean over trajectories of max_mu |m_mu(t)|
  double t_end = 0.0;
  std::uint64_t flips = 0;
};

// Time for every spin to flip once on average at the given total rate, N / R.
double relaxation_time(Index num_spins, double mean_total_rate);

// Per-trajectory initial configurations, derived from (realization_seed, trajectory index).
std::vector<Spins> initial_configurations(const PatternSetd& patterns, const InitialCondition& init, Index n_traj,
                                          std::uint64_t realization_seed);

// Mean flip rate over the second half of a pilot run of pilot_sweeps * N flips.
double pilot_flip_rate(const CouplingMatrixd& c, std::span<const RateTable> tables, const Spins& sigma0,
                       std::uint64_t pilot_sweeps, std::uint64_t seed);

double resolve_t_end(const EnsembleSpec& spec, const CouplingMatrixd& c, std::span<const RateTable> tables,
                     std::span<const Spins> initial, std::uint64_t realization_seed);

// Averages of |m_mu(t)| and max_mu |m_mu(t)| over n_traj trajectories; absolute
// values are taken per trajectory before averaging.
EnsembleCurves trajectory_ensemble(const CouplingMatrixd& c, std::span<const RateTable> tables,
                                   const EnsembleSpec& spec, std::uint64_t realization_seed, unsigned threads = 0);

// Builds the rate tables for spec.model with eta replaced.
EnsembleCurves trajectory_ensemble(const CouplingMatrixd& c, const EnsembleSpec& spec, double eta,
                                   std::uint64_t realization_seed, unsigned threads = 0);

// Averages order parameters of individual trajectories already reduced to
// max_mu |m_mu|; exposed for the mixture bookkeeping in tests.
EnsembleCurves average_records(std::span<const TrajectoryRecord> records);

struct StationaryEstimate {
  double value = 0.0;
  double first_half = 0.0;
  double second_half = 0.0;
};

// Mean of the curve over the final window_fraction of [0, t_end]; throws
// NotConverged if the two halves of that window differ by more than drift_tol.
StationaryEstimate stationary_estimate(std::span<const double> times, const VectorXd& curve, double window_fraction,
                                       double drift_tol);

// Seeds shared across eta and width so sweeps use common random numbers.
std::uint64_t coupling_seed(std::uint64_t master, std::size_t realization);
std::uint64_t realization_seed(std::uint64_t master, std::size_t realization);

// Results do not depend on the thread count.
SweepResult disorder_sweep(const EnsembleSpec& spec, unsigned threads = 0);

}  // namespace sbmem
