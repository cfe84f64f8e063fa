#include "sbmem/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "sbmem/io.hpp"

namespace sbmem {

namespace {

using Json = nlohmann::ordered_json;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

template <typename Int>
Int to_integer(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  Int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

std::vector<double> to_list(std::string_view s) {
  std::vector<double> out;
  s = trim(s);
  if (s.empty()) return out;
  while (true) {
    const auto comma = s.find(',');
    out.push_back(to_double(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

bool to_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("expected true or false, got '" + std::string(s) + "'");
}

struct Key {
  const char* name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<Json(const RunConfig&)> get;
};

template <typename Get>
Key real_key(const char* name, Get field) {
  return {name, [field](RunConfig& c, std::string_view v) { field(c) = to_double(v); },
          [field](const RunConfig& c) { return Json(field(c)); }};
}

template <typename Int, typename Get>
Key int_key(const char* name, Get field) {
  return {name, [field](RunConfig& c, std::string_view v) { field(c) = to_integer<Int>(v); },
          [field](const RunConfig& c) { return Json(field(c)); }};
}

template <typename Get>
Key list_key(const char* name, Get field) {
  return {name, [field](RunConfig& c, std::string_view v) { field(c) = to_list(v); },
          [field](const RunConfig& c) { return Json(field(c)); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      // model
      int_key<Index>("num_spins", [](auto& c) -> auto& { return c.model().num_spins; }),
      int_key<Index>("num_patterns", [](auto& c) -> auto& { return c.model().num_patterns; }),
      real_key("eta", [](auto& c) -> auto& { return c.model().eta; }),
      real_key("theta", [](auto& c) -> auto& { return c.model().theta; }),
      real_key("omega", [](auto& c) -> auto& { return c.model().omega; }),
      real_key("coupling_width", [](auto& c) -> auto& { return c.model().coupling_width; }),
      real_key("drive", [](auto& c) -> auto& { return c.model().drive; }),
      // ensemble
      int_key<Index>("n_traj", [](auto& c) -> auto& { return c.ensemble.n_traj; }),
      int_key<Index>("n_distr", [](auto& c) -> auto& { return c.ensemble.n_distr; }),
      list_key("eta_grid", [](auto& c) -> auto& { return c.ensemble.eta_grid; }),
      list_key("width_grid", [](auto& c) -> auto& { return c.ensemble.width_grid; }),
      {"initial",
       [](RunConfig& c, std::string_view v) {
         v = trim(v);
         if (v == "random") {
           c.ensemble.initial.kind = InitialKind::Random;
         } else if (v == "pattern") {
           c.ensemble.initial.kind = InitialKind::Pattern;
         } else {
           throw std::invalid_argument("expected random or pattern, got '" + std::string(v) + "'");
         }
       },
       [](const RunConfig& c) {
         return Json(c.ensemble.initial.kind == InitialKind::Random ? "random" : "pattern");
       }},
      int_key<Index>("initial_pattern", [](auto& c) -> auto& { return c.ensemble.initial.pattern; }),
      real_key("initial_overlap", [](auto& c) -> auto& { return c.ensemble.initial.overlap; }),
      int_key<std::uint64_t>("master_seed", [](auto& c) -> auto& { return c.ensemble.master_seed; }),
      real_key("t_end", [](auto& c) -> auto& { return c.ensemble.t_end; }),
      real_key("t_end_multiple", [](auto& c) -> auto& { return c.ensemble.t_end_multiple; }),
      int_key<std::uint64_t>("pilot_sweeps", [](auto& c) -> auto& { return c.ensemble.pilot_sweeps; }),
      int_key<Index>("n_samples", [](auto& c) -> auto& { return c.ensemble.n_samples; }),
      real_key("burn_in_fraction", [](auto& c) -> auto& { return c.ensemble.burn_in_fraction; }),
      real_key("window_fraction", [](auto& c) -> auto& { return c.ensemble.window_fraction; }),
      real_key("drift_tol", [](auto& c) -> auto& { return c.ensemble.drift_tol; }),
      // quadrature and tables
      real_key("abs_tol", [](auto& c) -> auto& { return c.ensemble.quad.abs_tol; }),
      real_key("rel_tol", [](auto& c) -> auto& { return c.ensemble.quad.rel_tol; }),
      int_key<int>("panels_per_period", [](auto& c) -> auto& { return c.ensemble.quad.panels_per_period; }),
      int_key<unsigned>("max_depth", [](auto& c) -> auto& { return c.ensemble.quad.max_depth; }),
      real_key("truncation_exponent", [](auto& c) -> auto& { return c.ensemble.quad.truncation_exponent; }),
      real_key("table_rel_tol", [](auto& c) -> auto& { return c.ensemble.table.rel_tol; }),
      real_key("table_abs_floor", [](auto& c) -> auto& { return c.ensemble.table.abs_floor; }),
      real_key("table_initial_step", [](auto& c) -> auto& { return c.ensemble.table.initial_step; }),
      real_key("table_min_step", [](auto& c) -> auto& { return c.ensemble.table.min_step; }),
      int_key<int>("table_verify_samples", [](auto& c) -> auto& { return c.ensemble.table.verify_samples; }),
      // rates
      real_key("g_sq", [](auto& c) -> auto& { return c.rates.g_sq; }),
      real_key("delta_e_min", [](auto& c) -> auto& { return c.rates.delta_e_min; }),
      real_key("delta_e_max", [](auto& c) -> auto& { return c.rates.delta_e_max; }),
      real_key("delta_e_step", [](auto& c) -> auto& { return c.rates.delta_e_step; }),
      // hopfield
      list_key("temperatures", [](auto& c) -> auto& { return c.temperatures; }),
      int_key<std::uint64_t>("sweeps", [](auto& c) -> auto& { return c.sweeps; }),
      real_key("burn_in", [](auto& c) -> auto& { return c.burn_in; }),
      int_key<Index>("n_disorder", [](auto& c) -> auto& { return c.n_disorder; }),
      {"overlap_mode",
       [](RunConfig& c, std::string_view v) {
         v = trim(v);
         if (v == "sign") {
           c.overlap_mode = OverlapMode::Sign;
         } else if (v == "raw") {
           c.overlap_mode = OverlapMode::Raw;
         } else {
           throw std::invalid_argument("expected sign or raw, got '" + std::string(v) + "'");
         }
       },
       [](const RunConfig& c) { return Json(c.overlap_mode == OverlapMode::Sign ? "sign" : "raw"); }},
      // oracle
      int_key<std::uint64_t>("oracle_jumps", [](auto& c) -> auto& { return c.oracle.jumps; }),
      int_key<std::uint64_t>("oracle_burn_in", [](auto& c) -> auto& { return c.oracle.burn_in; }),
      real_key("oracle_tv_threshold", [](auto& c) -> auto& { return c.oracle.tv_threshold; }),
      // run
      int_key<std::uint64_t>("realization", [](auto& c) -> auto& { return c.realization; }),
      {"record_spins", [](RunConfig& c, std::string_view v) { c.record_spins = to_bool(v); },
       [](const RunConfig& c) { return Json(c.record_spins); }},
      {"output_dir", [](RunConfig& c, std::string_view v) { c.output_dir = std::string(trim(v)); },
       [](const RunConfig& c) { return Json(c.output_dir); }},
      int_key<int>("format_version", [](auto& c) -> auto& { return c.format_version; }),
      int_key<unsigned>("threads", [](auto& c) -> auto& { return c.threads; }),
  };
  return table;
}

const Key* find_key(std::string_view name) {
  for (const auto& k : keys()) {
    if (name == k.name) return &k;
  }
  return nullptr;
}

// Scalar JSON values are handed to the text setters in their textual form.
std::string json_scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

std::string json_value_text(const Json& v) {
  if (!v.is_array()) return json_scalar_text(v);
  std::string out;
  for (const auto& e : v) {
    if (!out.empty()) out += ", ";
    out += json_scalar_text(e);
  }
  return out;
}

void apply(RunConfig& cfg, std::set<std::string>& seen, std::vector<std::string>& problems,
           const std::string& where, std::string_view name, std::string_view value) {
  const Key* key = find_key(name);
  if (key == nullptr) {
    problems.push_back(where + "unknown key '" + std::string(name) + "'");
    return;
  }
  if (!seen.insert(std::string(name)).second) {
    problems.push_back(where + "duplicate key '" + std::string(name) + "'");
    return;
  }
  try {
    key->set(cfg, value);
  } catch (const std::exception& e) {
    problems.push_back(where + std::string(name) + ": " + e.what());
  }
}

RunConfig parse_manifest(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError({std::string("manifest: invalid JSON: ") + e.what()});
  }
  const Json& body = doc.contains("config") ? doc.at("config") : doc;
  if (!body.is_object()) throw ConfigError({"manifest: 'config' must be an object"});
  RunConfig cfg;
  std::set<std::string> seen;
  std::vector<std::string> problems;
  for (const auto& [name, value] : body.items()) {
    apply(cfg, seen, problems, "", name, json_value_text(value));
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

}  // namespace

TemperatureSweepSpec RunConfig::hopfield_spec() const {
  TemperatureSweepSpec spec;
  spec.num_spins = model().num_spins;
  spec.num_patterns = model().num_patterns;
  spec.coupling_width = model().coupling_width;
  spec.temperatures = temperatures;
  spec.chain.sweeps = sweeps;
  spec.chain.burn_in = burn_in;
  spec.n_disorder = n_disorder;
  spec.seed = ensemble.master_seed;
  spec.mode = overlap_mode;
  return spec;
}

std::vector<std::string> RunConfig::violations() const {
  std::vector<std::string> v = ensemble.violations();
  const auto& q = ensemble.quad;
  if (!(q.abs_tol > 0.0)) v.emplace_back("abs_tol: must be > 0");
  if (!(q.rel_tol > 0.0)) v.emplace_back("rel_tol: must be > 0");
  if (q.panels_per_period < 1) v.emplace_back("panels_per_period: must be >= 1");
  if (!(q.truncation_exponent > 0.0)) v.emplace_back("truncation_exponent: must be > 0");
  const auto& t = ensemble.table;
  if (!(t.rel_tol > 0.0)) v.emplace_back("table_rel_tol: must be > 0");
  if (!(t.abs_floor >= 0.0)) v.emplace_back("table_abs_floor: must be >= 0");
  if (!(t.initial_step > 0.0)) v.emplace_back("table_initial_step: must be > 0");
  if (!(t.min_step > 0.0 && t.min_step <= t.initial_step)) {
    v.emplace_back("table_min_step: must satisfy 0 < table_min_step <= table_initial_step");
  }
  if (t.verify_samples < 0) v.emplace_back("table_verify_samples: must be >= 0");
  if (!(rates.g_sq > 0.0)) v.emplace_back("g_sq: must be > 0");
  if (!(rates.delta_e_step > 0.0)) v.emplace_back("delta_e_step: must be > 0");
  if (!(rates.delta_e_min <= rates.delta_e_max)) v.emplace_back("delta_e_max: must be >= delta_e_min");
  if (rates.delta_e_step > 0.0 && (rates.delta_e_max - rates.delta_e_min) / rates.delta_e_step > 1e6) {
    v.emplace_back("delta_e_step: more than 1e6 grid points requested");
  }
  if (temperatures.empty()) v.emplace_back("temperatures: must not be empty");
  for (double x : temperatures) {
    if (!(x > 0.0)) {
      v.emplace_back("temperatures: every temperature must be > 0");
      break;
    }
  }
  if (sweeps == 0) v.emplace_back("sweeps: must be > 0");
  if (!(burn_in >= 0.0 && burn_in < 1.0)) v.emplace_back("burn_in: must lie in [0, 1)");
  if (n_disorder < 1) v.emplace_back("n_disorder: must be >= 1");
  if (oracle.jumps < 1) v.emplace_back("oracle_jumps: must be >= 1");
  if (!(oracle.tv_threshold > 0.0)) v.emplace_back("oracle_tv_threshold: must be > 0");
  if (output_dir.empty()) v.emplace_back("output_dir: must not be empty");
  if (format_version != kFormatVersion) {
    v.emplace_back("format_version: only version " + std::to_string(kFormatVersion) + " is supported");
  }
  return v;
}

void RunConfig::validate() const {
  if (auto v = violations(); !v.empty()) throw ConfigError(std::move(v));
}

RunConfig parse_config(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  RunConfig cfg;
  if (first != std::string_view::npos && text[first] == '{') {
    cfg = parse_manifest(text);
  } else {
    std::set<std::string> seen;
    std::vector<std::string> problems;
    std::size_t line_no = 0;
    while (!text.empty()) {
      ++line_no;
      const auto nl = text.find('\n');
      std::string_view line = text.substr(0, nl);
      text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
      if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const std::string where = "line " + std::to_string(line_no) + ": ";
      if (line.front() == '[') {
        if (line.back() != ']') problems.push_back(where + "unterminated section header");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        problems.push_back(where + "expected 'key = value'");
        continue;
      }
      const auto name = trim(line.substr(0, eq));
      if (name.empty()) {
        problems.push_back(where + "missing key before '='");
        continue;
      }
      apply(cfg, seen, problems, where, name, line.substr(eq + 1));
    }
    if (!problems.empty()) throw ConfigError(std::move(problems));
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    std::vector<std::string> v;
    for (const auto& s : e.violations()) v.push_back(path + ": " + s);
    throw ConfigError(std::move(v));
  }
}

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
  Json out = Json::object();
  for (const auto& k : keys()) out[k.name] = k.get(cfg);
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : keys()) out.emplace_back(k.name);
  return out;
}

}  // namespace sbmem
