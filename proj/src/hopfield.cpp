#include "sbmem/hopfield.hpp"

#include "sbmem/kmc.hpp"
#include "sbmem/parallel.hpp"

namespace sbmem {

ChainSummary run_chain(const HopfieldModeld& m, const ThermalChainConfig& cfg, OverlapMode mode) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed);
  Spins sigma = random_configuration(m.num_spins(), rng);
  const auto burn = static_cast<std::uint64_t>(cfg.burn_in * static_cast<double>(cfg.sweeps));
  const MatrixXd& source = mode == OverlapMode::Sign ? m.sign_patterns : m.xi;
  const double inv_n = 1.0 / static_cast<double>(m.num_spins());

  VectorXd acc = VectorXd::Zero(m.num_patterns());
  std::uint64_t measured = 0;
  for (std::uint64_t sweep = 0; sweep < cfg.sweeps; ++sweep) {
    glauber_sweep(m, sigma, cfg.beta, rng);
    if (sweep >= burn) {
      acc += (source.transpose() * sigma * inv_n).cwiseAbs();
      ++measured;
    }
  }
  ChainSummary out;
  out.mean_abs_overlap = acc / static_cast<double>(std::max<std::uint64_t>(measured, 1));
  out.order_parameter = out.mean_abs_overlap.maxCoeff();
  return out;
}

SweepResult temperature_sweep(const TemperatureSweepSpec& spec, unsigned threads) {
  spec.chain.validate();
  if (spec.n_disorder < 1) throw ValidationError("n_disorder must be >= 1");
  for (double t : spec.temperatures) {
    if (!(t > 0.0)) throw ValidationError("temperatures must be > 0");
  }
  const auto n_t = spec.temperatures.size();
  const auto n_d = static_cast<std::size_t>(spec.n_disorder);

  std::vector<HopfieldModeld> models(n_d);
  std::vector<std::uint64_t> model_seeds(n_d);
  for (std::size_t r = 0; r < n_d; ++r) {
    model_seeds[r] = stream_seed(spec.seed, {0x6d6f64656cULL, r});
    models[r] = sample_noisy_patterns(spec.num_spins, spec.num_patterns, spec.coupling_width, model_seeds[r]);
  }

  std::vector<double> values(n_t * n_d);
  std::vector<std::uint64_t> chain_seeds(n_t * n_d);
  parallel_for(n_t * n_d, [&](std::size_t cell) {
    const std::size_t ti = cell / n_d;
    const std::size_t r = cell % n_d;
    ThermalChainConfig cfg = spec.chain;
    cfg.beta = 1.0 / spec.temperatures[ti];
    cfg.seed = stream_seed(spec.seed, {0x636861696eULL, r, ti});
    chain_seeds[cell] = cfg.seed;
    values[cell] = run_chain(models[r], cfg, spec.mode).order_parameter;
  }, threads);

  SweepResult result;
  for (std::size_t ti = 0; ti < n_t; ++ti) {
    SweepPoint point;
    point.control = spec.temperatures[ti];
    point.coupling_width = spec.coupling_width;
    for (std::size_t r = 0; r < n_d; ++r) {
      point.values.push_back(values[ti * n_d + r]);
      point.seeds.push_back(chain_seeds[ti * n_d + r]);
    }
    summarize(point);
    result.points.push_back(std::move(point));
  }
  return result;
}

VectorXd boltzmann_distribution(const HopfieldModeld& m, double beta) {
  const Index n = m.num_spins();
  if (n > kMaxExactSpins) throw ValidationError("exact enumeration limited to N <= 12");
  const auto states = static_cast<Index>(std::uint64_t{1} << n);
  VectorXd energy(states);
  for (Index k = 0; k < states; ++k) {
    energy(k) = hopfield_energy(m, configuration_from_index(static_cast<std::uint64_t>(k), n));
  }
  VectorXd weights = (-beta * (energy.array() - energy.minCoeff())).exp().matrix();
  return weights / weights.sum();
}

VectorXd heat_bath_histogram(const HopfieldModeld& m, double beta, std::uint64_t samples, std::uint64_t seed,
                             std::uint64_t burn_in_sweeps) {
  const Index n = m.num_spins();
  if (n > kMaxExactSpins) throw ValidationError("exact enumeration limited to N <= 12");
  Rng rng = make_rng(seed);
  Spins sigma = random_configuration(n, rng);
  for (std::uint64_t s = 0; s < burn_in_sweeps; ++s) glauber_sweep(m, sigma, beta, rng);

  VectorXd counts = VectorXd::Zero(static_cast<Index>(std::uint64_t{1} << n));
  for (std::uint64_t k = 0; k < samples; ++k) {
    glauber_sweep(m, sigma, beta, rng);
    counts(static_cast<Index>(index_from_configuration(sigma))) += 1.0;
  }
  return counts / counts.sum();
}

}  // namespace sbmem
