#include "sbmem/kmc.hpp"

#include <cmath>
#include <sstream>

namespace sbmem {

namespace {

void refresh_rates(std::span<const RateTable> tables, DynamicalState& state) {
  double total = 0.0;
  for (Index i = 0; i < state.sigma.size(); ++i) {
    const double w = tables[static_cast<std::size_t>(i)].lookup(state.flip_costs(i));
    state.rates(i) = w;
    total += w;
  }
  state.total_rate = total;
}

void check_dimensions(const CouplingMatrixd& c, const Spins& sigma, std::span<const RateTable> tables) {
  if (sigma.size() != c.num_spins()) throw ValidationError("initial configuration size does not match couplings");
  if (static_cast<Index>(tables.size()) != c.num_spins()) {
    throw ValidationError("need exactly one rate table per spin");
  }
}

}  // namespace

void refresh_state(const CouplingMatrixd& c, std::span<const RateTable> tables, DynamicalState& state) {
  state.fields = pattern_fields(c, state.sigma);
  state.flip_costs = flip_costs(c, state.sigma, state.fields);
  refresh_rates(tables, state);
}

DynamicalState init_state(const CouplingMatrixd& c, const Spins& sigma0, std::span<const RateTable> tables) {
  check_dimensions(c, sigma0, tables);
  DynamicalState state;
  state.sigma = sigma0;
  state.rates.resize(sigma0.size());
  refresh_state(c, tables, state);
  return state;
}

FlipEvent draw_event(const DynamicalState& state, Rng& rng) {
  const double total = state.total_rate;
  if (!(total > 0.0)) {
    std::ostringstream msg;
    msg << "total flip rate vanished at t = " << state.time;
    throw ZeroTotalRate(msg.str());
  }
  const double wait = -std::log1p(-uniform01(rng)) / total;
  const double target = uniform01(rng) * total;
  double acc = 0.0;
  Index chosen = -1;
  const Index n = state.rates.size();
  for (Index i = 0; i < n; ++i) {
    acc += state.rates(i);
    if (acc > target) {
      chosen = i;
      break;
    }
  }
  if (chosen < 0) {
    // Rounding pushed target past the running sum; take the last live site.
    for (Index i = n - 1; i >= 0; --i) {
      if (state.rates(i) > 0.0) {
        chosen = i;
        break;
      }
    }
  }
  return {chosen, wait};
}

void apply_flip(const CouplingMatrixd& c, std::span<const RateTable> tables, DynamicalState& state,
                const FlipEvent& event) {
  const Index i = event.site;
  state.sigma(i) = -state.sigma(i);
  state.time += event.waiting_time;
  ++state.steps;
  if (state.steps % kRecomputeInterval == 0) {
    refresh_state(c, tables, state);
    return;
  }
  state.fields += (2.0 * state.sigma(i)) * c.values().row(i).transpose();
  state.flip_costs = flip_costs(c, state.sigma, state.fields);
  refresh_rates(tables, state);
}

FlipEvent kmc_step(const CouplingMatrixd& c, std::span<const RateTable> tables, DynamicalState& state, Rng& rng) {
  const FlipEvent event = draw_event(state, rng);
  apply_flip(c, tables, state, event);
  return event;
}

TrajectoryRecord run_trajectory(const CouplingMatrixd& c, const PatternSetd& patterns, const Spins& sigma0,
                                std::span<const RateTable> tables, double t_end,
                                std::span<const double> sample_grid, std::uint64_t seed,
                                const TrajectoryOptions& opts) {
  for (std::size_t k = 0; k < sample_grid.size(); ++k) {
    if (sample_grid[k] < 0.0 || sample_grid[k] > t_end || (k > 0 && !(sample_grid[k] > sample_grid[k - 1]))) {
      throw ValidationError("sample grid must be strictly increasing within [0, t_end]");
    }
  }
  if (patterns.num_spins() != c.num_spins()) throw ValidationError("pattern set does not match couplings");

  TrajectoryRecord record;
  record.seed = seed;
  record.sample_times.assign(sample_grid.begin(), sample_grid.end());
  record.overlaps.resize(static_cast<Index>(sample_grid.size()), patterns.num_patterns());
  if (opts.record_snapshots) record.snapshots.reserve(sample_grid.size());

  DynamicalState state = init_state(c, sigma0, tables);
  Rng rng = make_rng(seed);
  std::size_t next_sample = 0;
  auto record_until = [&](double horizon, bool inclusive) {
    while (next_sample < sample_grid.size() &&
           (sample_grid[next_sample] < horizon || (inclusive && sample_grid[next_sample] <= horizon))) {
      record.overlaps.row(static_cast<Index>(next_sample)) = overlaps(patterns, state.sigma).transpose();
      if (opts.record_snapshots) record.snapshots.push_back(state.sigma);
      ++next_sample;
    }
  };

  while (state.time < t_end) {
    const FlipEvent event = draw_event(state, rng);
    // An event past the horizon is not applied: the state at t_end is the current one.
    if (state.time + event.waiting_time > t_end) break;
    record_until(state.time + event.waiting_time, false);
    apply_flip(c, tables, state, event);
  }
  record_until(t_end, true);

  record.final_state = state.sigma;
  record.flip_count = state.steps;
  return record;
}

Spins configuration_from_index(std::uint64_t index, Index n) {
  Spins sigma(n);
  for (Index i = 0; i < n; ++i) sigma(i) = ((index >> i) & 1u) ? -1.0 : 1.0;
  return sigma;
}

std::uint64_t index_from_configuration(const Spins& sigma) {
  std::uint64_t index = 0;
  for (Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) < 0.0) index |= (std::uint64_t{1} << i);
  }
  return index;
}

MatrixXd exact_generator(const CouplingMatrixd& c, const SiteRate& rate) {
  const Index n = c.num_spins();
  if (n > kMaxExactSpins) {
    throw ValidationError("exact generator limited to N <= " + std::to_string(kMaxExactSpins));
  }
  const auto states = static_cast<Index>(std::uint64_t{1} << n);
  MatrixXd q = MatrixXd::Zero(states, states);
  for (Index from = 0; from < states; ++from) {
    const Spins sigma = configuration_from_index(static_cast<std::uint64_t>(from), n);
    const VectorXd costs = flip_costs(c, sigma);
    double out = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double w = rate(i, costs(i));
      const Index to = from ^ (Index{1} << i);
      q(to, from) = w;
      out += w;
    }
    q(from, from) = -out;
  }
  return q;
}

MatrixXd exact_generator(const CouplingMatrixd& c, std::span<const RateTable> tables) {
  if (static_cast<Index>(tables.size()) != c.num_spins()) throw ValidationError("need one rate table per spin");
  return exact_generator(c, [&](Index i, double de) { return tables[static_cast<std::size_t>(i)].lookup(de); });
}

VectorXd stationary_distribution(const MatrixXd& generator) {
  if (generator.rows() != generator.cols() || generator.rows() == 0) {
    throw ValidationError("generator must be a non-empty square matrix");
  }
  Eigen::FullPivLU<MatrixXd> lu(generator);
  lu.setThreshold(1e-10);
  const MatrixXd kernel = lu.kernel();
  if (kernel.cols() != 1) {
    throw std::runtime_error("generator null space has dimension " + std::to_string(kernel.cols()) +
                             ", expected 1");
  }
  VectorXd p = kernel.col(0);
  p /= p.sum();
  if (p.minCoeff() < -1e-10) throw std::runtime_error("stationary vector has negative entries");
  p = p.cwiseMax(0.0);
  p /= p.sum();
  return p;
}

VectorXd occupation_distribution(const CouplingMatrixd& c, std::span<const RateTable> tables, const Spins& sigma0,
                                 std::uint64_t n_jumps, std::uint64_t seed, std::uint64_t burn_in_jumps) {
  const Index n = c.num_spins();
  if (n > kMaxExactSpins) throw ValidationError("occupation histogram limited to small N");
  VectorXd occupation = VectorXd::Zero(static_cast<Index>(std::uint64_t{1} << n));
  DynamicalState state = init_state(c, sigma0, tables);
  Rng rng = make_rng(seed);
  for (std::uint64_t k = 0; k < burn_in_jumps; ++k) kmc_step(c, tables, state, rng);
  std::uint64_t index = index_from_configuration(state.sigma);
  for (std::uint64_t k = 0; k < n_jumps; ++k) {
    const FlipEvent event = draw_event(state, rng);
    occupation(static_cast<Index>(index)) += event.waiting_time;
    apply_flip(c, tables, state, event);
    index ^= (std::uint64_t{1} << event.site);
  }
  return occupation / occupation.sum();
}

double total_variation(const VectorXd& p, const VectorXd& q) {
  if (p.size() != q.size()) throw ValidationError("total_variation: size mismatch");
  return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace sbmem
