#pragma once

// Rejection-free continuous-time kinetic Monte Carlo over single spin flips,
// and the exact 2^N-state generator used as an oracle for small systems.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sbmem/model.hpp"
#include "sbmem/random.hpp"
#include "sbmem/rate_kernel.hpp"
#include "sbmem/trajectory.hpp"

namespace sbmem {

inline constexpr std::uint64_t kRecomputeInterval = 10000;

struct DynamicalState {
  Spins sigma;
  VectorXd fields;      // h_mu
  VectorXd flip_costs;  // Delta E_i
  VectorXd rates;       // W_i
  double total_rate = 0.0;
  double time = 0.0;
  std::uint64_t steps = 0;
};

struct FlipEvent {
  Index site;
  double waiting_time;
};

DynamicalState init_state(const CouplingMatrixd& c, const Spins& sigma0, std::span<const RateTable> tables);

// Recomputes fields, flip costs and rates from sigma.
void refresh_state(const CouplingMatrixd& c, std::span<const RateTable> tables, DynamicalState& state);

// Draws the next event without applying it.
FlipEvent draw_event(const DynamicalState& state, Rng& rng);

void apply_flip(const CouplingMatrixd& c, std::span<const RateTable> tables, DynamicalState& state,
                const FlipEvent& event);

FlipEvent kmc_step(const CouplingMatrixd& c, std::span<const RateTable> tables, DynamicalState& state, Rng& rng);

struct TrajectoryOptions {
  bool record_snapshots = false;
};

// Overlaps at each sample time are those of the state occupied at that time.
TrajectoryRecord run_trajectory(const CouplingMatrixd& c, const PatternSetd& patterns, const Spins& sigma0,
                                std::span<const RateTable> tables, double t_end,
                                std::span<const double> sample_grid, std::uint64_t seed,
                                const TrajectoryOptions& opts = {});

// --- small-N exact oracle -------------------------------------------------

inline constexpr Index kMaxExactSpins = 12;

// Configuration index convention: bit i set <=> sigma_i = -1.
Spins configuration_from_index(std::uint64_t index, Index n);
std::uint64_t index_from_configuration(const Spins& sigma);

using SiteRate = std::function<double(Index site, double delta_e)>;

// Column sigma, row sigma': entry W_{sigma -> sigma'}; diagonal makes columns sum to zero.
MatrixXd exact_generator(const CouplingMatrixd& c, const SiteRate& rate);
MatrixXd exact_generator(const CouplingMatrixd& c, std::span<const RateTable> tables);

VectorXd stationary_distribution(const MatrixXd& generator);

// Fraction of time spent in each of the 2^N configurations over n_jumps events.
VectorXd occupation_distribution(const CouplingMatrixd& c, std::span<const RateTable> tables, const Spins& sigma0,
                                 std::uint64_t n_jumps, std::uint64_t seed, std::uint64_t burn_in_jumps = 0);

double total_variation(const VectorXd& p, const VectorXd& q);

}  // namespace sbmem
