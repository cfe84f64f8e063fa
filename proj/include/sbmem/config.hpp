#pragma once

// Flat key = value run configuration shared by all subcommands.
//
//   # comment
//   [model]            section headers are accepted and ignored
//   eta = 1
//   eta_grid = 0.25, 0.5, 1, 2
//
// A JSON run manifest is also accepted; its "config" object is read with the
// same keys, which is how runs are replayed.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sbmem/ensemble.hpp"
#include "sbmem/hopfield.hpp"

namespace sbmem {

inline constexpr int kFormatVersion = 1;

struct RateScanSpec {
  double g_sq = 2.0;
  double delta_e_min = -20.0;
  double delta_e_max = 20.0;
  double delta_e_step = 0.1;
};

struct OracleSpec {
  std::uint64_t jumps = 1000000;
  std::uint64_t burn_in = 10000;
  double tv_threshold = 0.02;
};

struct RunConfig {
  EnsembleSpec ensemble;  // also owns model, quadrature and table settings
  RateScanSpec rates;
  OracleSpec oracle;
  // Hopfield chain settings; N, p, width and seed come from the model keys.
  std::vector<double> temperatures{0.5, 0.8, 1.0, 1.3, 2.0};
  std::uint64_t sweeps = 2000;
  double burn_in = 0.5;
  Index n_disorder = 20;
  OverlapMode overlap_mode = OverlapMode::Sign;
  // Coupling realization used by simulate and oracle.
  std::uint64_t realization = 0;
  bool record_spins = false;
  std::string output_dir = ".";
  int format_version = kFormatVersion;
  unsigned threads = 0;  // 0: hardware concurrency; results do not depend on it

  ModelParams& model() { return ensemble.model; }
  const ModelParams& model() const { return ensemble.model; }
  TemperatureSweepSpec hopfield_spec() const;

  std::vector<std::string> violations() const;
  void validate() const;
};

// Throws ConfigError listing every parse and validation problem.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

// Every key with its current value, in a fixed order.
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

// Names of all accepted keys.
std::vector<std::string> config_keys();

}  // namespace sbmem
