#include "sbmem/cli.hpp"

#include <chrono>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "sbmem/config.hpp"
#include "sbmem/io.hpp"
#include "sbmem/parallel.hpp"
#include "sbmem/trajectory.hpp"

namespace sbmem {

namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Invocation {
  std::string command;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

struct Outcome {
  Json results = Json::object();
  Json seeds = Json::object();
  std::vector<std::string> outputs;
  int exit_code = kExitOk;
};

std::string output_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output_dir) / name).string();
}

Json sweep_points_json(const SweepResult& result) {
  Json points = Json::array();
  for (const auto& p : result.points) {
    Json failures = Json::array();
    for (const auto& f : p.failures) failures.push_back({{"realization", f.realization}, {"reason", f.reason}});
    points.push_back({{"control", p.control},
                      {"coupling_width", p.coupling_width},
                      {"mean_M", p.mean_M},
                      {"std_M", p.std_M},
                      {"values", p.values},
                      {"seeds", p.seeds},
                      {"t_ends", p.t_ends},
                      {"failures", failures}});
  }
  return points;
}

Outcome run_rates(const RunConfig& cfg) {
  const KernelParams kp = make_kernel_params(cfg.model());
  const auto& r = cfg.rates;
  const auto n = static_cast<std::size_t>(std::llround((r.delta_e_max - r.delta_e_min) / r.delta_e_step)) + 1;
  std::vector<std::vector<double>> rows(n);
  parallel_for(
      n,
      [&](std::size_t k) {
        const double de = r.delta_e_min + static_cast<double>(k) * r.delta_e_step;
        rows[k] = {de, rate_direct(de, r.g_sq, kp, cfg.ensemble.quad)};
      },
      cfg.threads);
  Outcome o;
  o.outputs.push_back(output_path(cfg, "rates.csv"));
  write_csv(o.outputs.back(), {"delta_e", "rate"}, rows);
  o.results = {{"nu", kp.nu}, {"points", n}};
  return o;
}

Outcome run_simulate(const RunConfig& cfg, std::ostream& out) {
  const EnsembleSpec& spec = cfg.ensemble;
  const std::uint64_t cseed = coupling_seed(spec.master_seed, cfg.realization);
  const std::uint64_t rseed = realization_seed(spec.master_seed, cfg.realization);
  const CouplingMatrixd c = sample_couplings(cfg.model(), cseed);
  const PatternSetd patterns = extract_patterns(c);
  const std::vector<RateTable> tables =
      build_rate_tables(c, make_kernel_params(cfg.model()), spec.quad, spec.table, cfg.threads);

  const std::vector<Spins> initial = initial_configurations(patterns, spec.initial, 1, rseed);
  const double t_end = resolve_t_end(spec, c, tables, initial, rseed);
  const VectorXd grid = VectorXd::LinSpaced(spec.n_samples, 0.0, t_end);
  const std::span<const double> sample_grid(grid.data(), static_cast<std::size_t>(grid.size()));
  const std::uint64_t tseed = stream_seed(rseed, {0x6b6d63ULL, 0});
  TrajectoryOptions opts;
  opts.record_snapshots = cfg.record_spins;
  const TrajectoryRecord rec = run_trajectory(c, patterns, initial.front(), tables, t_end, sample_grid, tseed, opts);

  Outcome o;
  const Index m = patterns.num_patterns();
  std::vector<std::string> header{"t"};
  for (Index mu = 0; mu < m; ++mu) header.push_back("m_" + std::to_string(mu + 1));
  std::vector<std::vector<double>> rows;
  for (Index k = 0; k < rec.num_samples(); ++k) {
    std::vector<double> row{rec.sample_times[static_cast<std::size_t>(k)]};
    for (Index mu = 0; mu < m; ++mu) row.push_back(rec.overlaps(k, mu));
    rows.push_back(std::move(row));
  }
  o.outputs.push_back(output_path(cfg, "simulate.csv"));
  write_csv(o.outputs.back(), header, rows);

  if (cfg.record_spins) {
    const TrajectoryRecord aligned = gauge_align(patterns, rec);
    std::vector<std::string> sh{"t"};
    for (Index i = 0; i < patterns.num_spins(); ++i) sh.push_back("s_" + std::to_string(i + 1));
    std::vector<std::vector<double>> srows;
    for (std::size_t k = 0; k < aligned.snapshots.size(); ++k) {
      std::vector<double> row{aligned.sample_times[k]};
      for (Index i = 0; i < patterns.num_spins(); ++i) row.push_back(aligned.snapshots[k](i));
      srows.push_back(std::move(row));
    }
    o.outputs.push_back(output_path(cfg, "simulate_spins.csv"));
    write_csv(o.outputs.back(), sh, srows);
  }

  // Ensemble curves on the same realization and horizon: |m_mu| averages and M(t).
  EnsembleSpec ens = spec;
  ens.t_end = t_end;
  const EnsembleCurves curves = trajectory_ensemble(c, tables, ens, rseed, cfg.threads);
  std::vector<std::string> eh{"t", "M"};
  for (Index mu = 0; mu < m; ++mu) eh.push_back("abs_m_" + std::to_string(mu + 1));
  std::vector<std::vector<double>> erows;
  for (std::size_t k = 0; k < curves.times.size(); ++k) {
    const auto row_index = static_cast<Index>(k);
    std::vector<double> row{curves.times[k], curves.order_parameter(row_index)};
    for (Index mu = 0; mu < m; ++mu) row.push_back(curves.mean_abs_overlap(row_index, mu));
    erows.push_back(std::move(row));
  }
  o.outputs.push_back(output_path(cfg, "simulate_ensemble.csv"));
  write_csv(o.outputs.back(), eh, erows);

  o.seeds = {{"coupling", cseed}, {"realization", rseed}, {"trajectory", tseed}};
  o.results = {{"t_end", t_end}, {"flip_count", rec.flip_count}, {"ensemble_flips", curves.flips}};
  out << "t_end " << format_double(t_end) << ", " << rec.flip_count << " flips\n";
  return o;
}

Outcome run_sweep(const RunConfig& cfg, std::ostream& out) {
  const EnsembleSpec& spec = cfg.ensemble;
  const SweepResult result = disorder_sweep(spec, cfg.threads);
  std::vector<std::vector<double>> rows;
  std::size_t failed = 0;
  for (const auto& p : result.points) {
    double t_sum = 0.0;
    std::size_t t_n = 0;
    for (double t : p.t_ends) {
      if (t > 0.0) {
        t_sum += t;
        ++t_n;
      }
    }
    failed += p.failures.size();
    rows.push_back({p.control, p.coupling_width, p.mean_M, p.std_M, static_cast<double>(spec.n_traj),
                    static_cast<double>(p.values.size()), t_n > 0 ? t_sum / static_cast<double>(t_n) : 0.0});
  }
  Outcome o;
  o.outputs.push_back(output_path(cfg, "sweep.csv"));
  write_csv(o.outputs.back(), {"eta", "s", "mean_M", "std_M", "n_traj", "n_distr", "t_end"}, rows);
  Json coupling = Json::array();
  Json trajectories = Json::array();
  for (std::size_t r = 0; r < static_cast<std::size_t>(spec.n_distr); ++r) {
    coupling.push_back(coupling_seed(spec.master_seed, r));
    trajectories.push_back(realization_seed(spec.master_seed, r));
  }
  o.seeds = {{"coupling", coupling}, {"realization", trajectories}};
  o.results = {{"points", sweep_points_json(result)}, {"failed_cells", failed}};
  if (failed > 0) out << failed << " sweep cell(s) failed; see manifest\n";
  return o;
}

Outcome run_hopfield(const RunConfig& cfg) {
  std::vector<double> widths = cfg.ensemble.widths();
  std::vector<std::vector<double>> rows;
  Json points = Json::array();
  for (double w : widths) {
    TemperatureSweepSpec spec = cfg.hopfield_spec();
    spec.coupling_width = w;
    const SweepResult result = temperature_sweep(spec, cfg.threads);
    for (const auto& p : result.points) {
      rows.push_back({p.control, p.coupling_width, p.mean_M, p.std_M, static_cast<double>(p.values.size())});
    }
    for (auto& j : sweep_points_json(result)) points.push_back(j);
  }
  Outcome o;
  o.outputs.push_back(output_path(cfg, "hopfield.csv"));
  write_csv(o.outputs.back(), {"T", "s", "mean_M", "std_M", "n_disorder"}, rows);
  o.seeds = {{"master", cfg.ensemble.master_seed}};
  o.results = {{"points", points}};
  return o;
}

Outcome run_oracle(const RunConfig& cfg, std::ostream& out) {
  if (cfg.model().num_spins > kMaxExactSpins) {
    throw ValidationError("num_spins: oracle enumerates all states and needs num_spins <= " +
                          std::to_string(kMaxExactSpins));
  }
  const std::uint64_t cseed = coupling_seed(cfg.ensemble.master_seed, cfg.realization);
  const std::uint64_t rseed = realization_seed(cfg.ensemble.master_seed, cfg.realization);
  const CouplingMatrixd c = sample_couplings(cfg.model(), cseed);
  const std::vector<RateTable> tables =
      build_rate_tables(c, make_kernel_params(cfg.model()), cfg.ensemble.quad, cfg.ensemble.table, cfg.threads);
  const VectorXd exact = stationary_distribution(exact_generator(c, tables));
  Rng init_rng = make_rng(stream_seed(rseed, {0x696e6974ULL, 0}));
  const Spins sigma0 = random_configuration(c.num_spins(), init_rng);
  const std::uint64_t kseed = stream_seed(rseed, {0x6b6d63ULL, 0});
  const VectorXd empirical = occupation_distribution(c, tables, sigma0, cfg.oracle.jumps, kseed, cfg.oracle.burn_in);
  const double tv = total_variation(exact, empirical);

  std::vector<std::vector<double>> rows;
  for (Index k = 0; k < exact.size(); ++k) rows.push_back({static_cast<double>(k), exact(k), empirical(k)});
  Outcome o;
  o.outputs.push_back(output_path(cfg, "oracle.csv"));
  write_csv(o.outputs.back(), {"state", "exact", "empirical"}, rows);
  o.seeds = {{"coupling", cseed}, {"realization", rseed}, {"trajectory", kseed}};
  const bool pass = tv < cfg.oracle.tv_threshold;
  o.results = {{"total_variation", tv}, {"threshold", cfg.oracle.tv_threshold}, {"pass", pass}};
  out << "total variation distance: " << format_double(tv) << "\n";
  o.exit_code = pass ? kExitOk : kExitFailure;
  return o;
}

int execute(const Invocation& inv, std::ostream& out) {
  RunConfig cfg = inv.config_path.empty() ? RunConfig{} : load_config(inv.config_path);
  if (inv.seed) cfg.ensemble.master_seed = *inv.seed;
  if (inv.out_dir) cfg.output_dir = *inv.out_dir;
  cfg.validate();
  fs::create_directories(cfg.output_dir);

  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  if (inv.command == "rates") {
    o = run_rates(cfg);
  } else if (inv.command == "simulate") {
    o = run_simulate(cfg, out);
  } else if (inv.command == "sweep") {
    o = run_sweep(cfg, out);
  } else if (inv.command == "hopfield") {
    o = run_hopfield(cfg);
  } else {
    o = run_oracle(cfg, out);
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  Json manifest = Json::object();
  manifest["format_version"] = cfg.format_version;
  manifest["command"] = inv.command;
  manifest["version"] = version_string();
  manifest["config"] = config_to_json(cfg);
  manifest["seeds"] = o.seeds;
  manifest["wall_time_seconds"] = wall;
  manifest["outputs"] = o.outputs;
  manifest["results"] = o.results;
  const std::string manifest_path = output_path(cfg, inv.command + ".manifest.json");
  write_json(manifest_path, manifest);
  for (const auto& p : o.outputs) out << "wrote " << p << "\n";
  out << "wrote " << manifest_path << "\n";
  return o.exit_code;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Driven-dissipative spin-boson associative memory simulator", "sbmem"};
  app.set_version_flag("--version", std::string(version_string()));
  Invocation inv;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"rates", "tabulate the flip rate W(delta_e) for one (eta, theta, g_sq)"},
      {"simulate", "run one KMC trajectory (and its ensemble curves) for one coupling realization"},
      {"sweep", "disorder-averaged stationary order parameter over eta (and coupling widths)"},
      {"hopfield", "Hopfield heat-bath temperature sweep"},
      {"oracle", "small-N comparison of KMC occupation against the exact stationary distribution"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", inv.config_path, "configuration file or run manifest")->check(CLI::ExistingFile);
    sub->add_option_function<std::uint64_t>("--seed", [&inv](const std::uint64_t& s) { inv.seed = s; },
                                            "override master_seed");
    sub->add_option_function<std::string>("--out", [&inv](const std::string& d) { inv.out_dir = d; },
                                          "output directory");
    sub->callback([&inv, n = name] { inv.command = n; });
  }
  app.require_subcommand(0, 1);

  if (argc <= 1) {
    err << app.help();
    return kExitInvalid;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version_string() << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitInvalid;
  }
  if (inv.command.empty()) {
    err << app.help();
    return kExitInvalid;
  }

  try {
    return execute(inv, out);
  } catch (const ConfigError& e) {
    err << "invalid configuration:\n";
    for (const auto& v : e.violations()) err << "  " << v << "\n";
    return kExitInvalid;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace sbmem
