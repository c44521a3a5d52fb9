#pragma once

// Scenario configuration: a line-based `key = value` format with [section]
// headers, a serializer that round-trips through the parser, and sweep
// expansion into individual runs.
//
//   [scenario]   type (convert | spectrum | transmit | engineer), g_ref,
//                omega_min, omega_max, omega_points, max_step
//   [params]     kappa1, kappa2, gamma_m, n_th, omega_m, detuning1, detuning2
//   [schedule]   type (trig | constant | piecewise | tanh) and its keys
//   [initial]    alpha_re, alpha_im, r, phi, mech_occupation
//   [pulse]      sigma_omega, amplitude, samples
//   [sweep]      mode (zip | product) and `section.key = v1, v2, ...`
//   [output]     dir, prefix, trajectory_every
//
// Rates ([params], sigma_omega, the omega grid, max_step as 1/rate) are given
// in units of g_ref; couplings and times in [schedule] are absolute model
// units. A Fig. 2 file therefore sets g_ref = 5 (= g0) and kappa1 = 0.064.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "optomech/gaussian.hpp"
#include "optomech/model.hpp"

namespace optomech {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class ScenarioKind { Convert, Spectrum, Transmit, Engineer };
enum class SweepMode { Zip, Product };

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Convert: return "convert";
    case ScenarioKind::Spectrum: return "spectrum";
    case ScenarioKind::Transmit: return "transmit";
    case ScenarioKind::Engineer: return "engineer";
  }
  return "?";
}

struct SweepAxis {
  std::string key;  // "section.key"
  std::vector<double> values;
  bool operator==(const SweepAxis&) const = default;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::Convert;
  std::string schedule_type = "trig";
  std::vector<schedule::Breakpoint> points;  // piecewise schedules only
  std::map<std::string, double> values;      // numeric keys as "section.key"
  SweepMode sweep_mode = SweepMode::Zip;
  std::vector<SweepAxis> sweep;
  std::string output_dir = ".";
  std::string output_prefix = "run";

  bool operator==(const ScenarioConfig&) const = default;

  bool has(const std::string& key) const { return values.count(key) != 0; }
  double get(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) throw ConfigError("missing required key " + key);
    return it->second;
  }
  double get_or(const std::string& key, double fallback) const {
    const auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
  }

  double g_ref() const { return get("scenario.g_ref"); }

  /// Model-unit parameters (rates multiplied by g_ref).
  SystemParams params() const {
    const double g = g_ref();
    SystemParams p;
    p.kappa1 = g * get("params.kappa1");
    p.kappa2 = g * get("params.kappa2");
    p.gamma_m = g * get("params.gamma_m");
    p.n_th = get("params.n_th");
    if (has("params.omega_m")) p.omega_m = g * get("params.omega_m");
    if (has("params.detuning1")) p.detuning1 = g * get("params.detuning1");
    if (has("params.detuning2")) p.detuning2 = g * get("params.detuning2");
    return p;
  }

  /// `fallback_duration` fills a constant schedule without an explicit
  /// duration (pulse scenarios use the pulse window).
  CouplingSchedule schedule(std::optional<double> fallback_duration = std::nullopt) const {
    if (schedule_type == "trig") {
      return CouplingSchedule::trig(get("schedule.amplitude"), get("schedule.duration"));
    }
    if (schedule_type == "constant") {
      double T = 0.0;
      if (has("schedule.duration")) {
        T = get("schedule.duration");
      } else if (fallback_duration) {
        T = *fallback_duration;
      } else {
        throw ConfigError("schedule.duration is required for a " + std::string(to_string(scenario)) + " scenario");
      }
      return CouplingSchedule::constant(get("schedule.g1"), get("schedule.g2"), T);
    }
    if (schedule_type == "piecewise") return CouplingSchedule::piecewise(points);
    return CouplingSchedule::tanh_ramp(get("schedule.g_max"), get("schedule.center"), get("schedule.width"),
                                       get("schedule.duration"));
  }

  SingleModeGaussian initial_state() const {
    return make_squeezed_coherent(cplx(get("initial.alpha_re"), get("initial.alpha_im")), get("initial.r"),
                                  get("initial.phi"));
  }

  /// Defaults to the bath occupation n_th.
  double mech_occupation() const { return get_or("initial.mech_occupation", get("params.n_th")); }

  double sigma_omega() const { return g_ref() * get("pulse.sigma_omega"); }

  std::size_t run_count() const {
    if (sweep.empty()) return 1;
    if (sweep_mode == SweepMode::Zip) return sweep.front().values.size();
    std::size_t n = 1;
    for (const auto& a : sweep) n *= a.values.size();
    return n;
  }

  /// Sweep values of run `i` in axis order.
  std::vector<double> sweep_point(std::size_t i) const {
    std::vector<double> v(sweep.size());
    if (sweep_mode == SweepMode::Zip) {
      for (std::size_t k = 0; k < sweep.size(); ++k) v[k] = sweep[k].values[i];
    } else {
      // First axis is the outermost loop.
      for (std::size_t k = sweep.size(); k-- > 0;) {
        const std::size_t n = sweep[k].values.size();
        v[k] = sweep[k].values[i % n];
        i /= n;
      }
    }
    return v;
  }

  /// Concrete configuration of run `i`, with the sweep removed.
  ScenarioConfig expand(std::size_t i) const {
    ScenarioConfig c = *this;
    const auto v = sweep_point(i);
    for (std::size_t k = 0; k < sweep.size(); ++k) c.values[sweep[k].key] = v[k];
    c.sweep.clear();
    c.sweep_mode = SweepMode::Zip;
    return c;
  }
};

namespace config_detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == sep && depth == 0) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline double parse_literal(const std::string& tok, int line) {
  if (tok == "pi") return std::numbers::pi;
  if (tok == "-pi") return -std::numbers::pi;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ConfigError("malformed number '" + tok + "'", line);
  }
  if (used != tok.size() || !std::isfinite(v)) throw ConfigError("malformed number '" + tok + "'", line);
  return v;
}

/// A number, `pi`, or a product/quotient of those such as `pi/2` or `0.5*pi`.
inline double parse_number(const std::string& text, int line) {
  const std::string s = trim(text);
  if (s.empty()) throw ConfigError("empty value", line);
  double acc = 1.0;
  char op = '*';
  std::string tok;
  auto apply = [&] {
    const double v = parse_literal(trim(tok), line);
    if (op == '*') {
      acc *= v;
    } else {
      if (v == 0.0) throw ConfigError("division by zero in '" + s + "'", line);
      acc /= v;
    }
    tok.clear();
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    // Exponent signs such as 1e-3 are part of the literal.
    if ((c == '*' || c == '/') && i > 0) {
      apply();
      op = c;
    } else {
      tok += c;
    }
  }
  apply();
  return acc;
}

inline std::vector<double> parse_list(const std::string& text, int line) {
  const std::string s = trim(text);
  if (s.rfind("linspace(", 0) == 0 && s.back() == ')') {
    const auto args = split(s.substr(9, s.size() - 10), ',');
    if (args.size() != 3) throw ConfigError("linspace needs (start, stop, count)", line);
    const double a = parse_number(args[0], line);
    const double b = parse_number(args[1], line);
    const double n = parse_number(args[2], line);
    if (!(n >= 1.0) || n != std::floor(n)) throw ConfigError("linspace count must be a positive integer", line);
    const auto cnt = static_cast<std::size_t>(n);
    std::vector<double> v(cnt);
    for (std::size_t i = 0; i < cnt; ++i) {
      v[i] = cnt == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(cnt - 1);
    }
    return v;
  }
  std::vector<double> v;
  for (const auto& item : split(s, ',')) v.push_back(parse_number(item, line));
  return v;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const std::set<std::string>& schedule_keys(const std::string& type) {
  static const std::map<std::string, std::set<std::string>> keys{
      {"trig", {"amplitude", "duration"}},
      {"constant", {"g1", "g2", "duration"}},
      {"piecewise", {"points"}},
      {"tanh", {"g_max", "center", "width", "duration"}},
  };
  const auto it = keys.find(type);
  if (it == keys.end()) {
    throw ConfigError("unknown schedule type " + type + " (expected trig, constant, piecewise or tanh)");
  }
  return it->second;
}

inline const std::map<std::string, std::set<std::string>>& numeric_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"scenario", {"g_ref", "omega_min", "omega_max", "omega_points", "max_step"}},
      {"params", {"kappa1", "kappa2", "gamma_m", "n_th", "omega_m", "detuning1", "detuning2"}},
      {"initial", {"alpha_re", "alpha_im", "r", "phi", "mech_occupation"}},
      {"pulse", {"sigma_omega", "amplitude", "samples"}},
      {"output", {"trajectory_every"}},
  };
  return keys;
}

inline bool is_numeric_key(const std::string& section, const std::string& key, const std::string& schedule_type) {
  if (section == "schedule") return key != "points" && key != "type" && schedule_keys(schedule_type).count(key);
  const auto& nk = numeric_keys();
  const auto it = nk.find(section);
  return it != nk.end() && it->second.count(key);
}

inline bool is_integer(double v) { return v == std::floor(v); }

}  // namespace config_detail

/// Checks required keys and value ranges of one concrete (sweep-free)
/// configuration. Returns soft warnings.
inline std::vector<std::string> validate_run(const ScenarioConfig& c) {
  using config_detail::is_integer;
  auto require = [&](const std::string& k) {
    if (!c.has(k)) throw ConfigError("missing required key " + k);
  };
  auto positive = [&](const std::string& k) {
    if (c.has(k) && !(c.get(k) > 0.0)) throw ConfigError(k + " must be > 0");
  };
  require("params.kappa1");
  positive("scenario.g_ref");
  positive("scenario.max_step");

  std::vector<std::string> warnings;
  try {
    warnings = c.params().validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  for (const auto& k : config_detail::schedule_keys(c.schedule_type)) {
    if (k == "points") {
      if (c.points.empty()) throw ConfigError("missing required key schedule.points");
    } else if (!(k == "duration" && c.schedule_type == "constant" && c.scenario != ScenarioKind::Convert)) {
      require("schedule." + k);
    }
  }

  switch (c.scenario) {
    case ScenarioKind::Convert:
      if (c.get("initial.r") < 0.0) throw ConfigError("initial.r must be >= 0");
      if (c.mech_occupation() < 0.0) throw ConfigError("initial.mech_occupation must be >= 0");
      if (!(c.get("output.trajectory_every") >= 1.0) || !is_integer(c.get("output.trajectory_every"))) {
        throw ConfigError("output.trajectory_every must be a positive integer");
      }
      break;
    case ScenarioKind::Spectrum:
      if (c.schedule_type != "constant") throw ConfigError("spectrum scenarios need a constant schedule");
      if (!(c.get("scenario.omega_max") > c.get("scenario.omega_min"))) {
        throw ConfigError("scenario.omega_max must exceed scenario.omega_min");
      }
      if (!(c.get("scenario.omega_points") >= 2.0) || !is_integer(c.get("scenario.omega_points"))) {
        throw ConfigError("scenario.omega_points must be an integer >= 2");
      }
      break;
    case ScenarioKind::Transmit:
    case ScenarioKind::Engineer:
      if (c.scenario == ScenarioKind::Transmit && c.schedule_type != "constant") {
        throw ConfigError("transmit scenarios need a constant schedule (use engineer for time-dependent couplings)");
      }
      require("pulse.sigma_omega");
      positive("pulse.sigma_omega");
      if (!(c.get("pulse.samples") >= 16.0) || !is_integer(c.get("pulse.samples"))) {
        throw ConfigError("pulse.samples must be an integer >= 16");
      }
      break;
  }
  try {
    (void)c.schedule(c.scenario == ScenarioKind::Convert ? std::nullopt : std::optional<double>(1.0));
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  return warnings;
}

/// Parses and validates a configuration. Every sweep point is validated.
inline ScenarioConfig parse_config(const std::string& text) {
  using namespace config_detail;
  ScenarioConfig c;
  std::map<std::string, int> seen;  // key -> line
  std::vector<std::pair<int, std::pair<std::string, std::string>>> schedule_entries;
  std::vector<std::pair<int, std::pair<std::string, std::string>>> sweep_entries;
  std::string section;
  bool have_type = false;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find('#');
    if (hash != std::string::npos) s.resize(hash);
    s = trim(s);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header", line);
      section = trim(s.substr(1, s.size() - 2));
      static const std::set<std::string> sections{"scenario", "params", "schedule", "initial",
                                                  "pulse",    "sweep",  "output"};
      if (!sections.count(section)) throw ConfigError("unknown section [" + section + "]", line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line);
    if (section.empty()) throw ConfigError("key outside of any section", line);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    const std::string full = section + "." + key;
    if (seen.count(full)) {
      throw ConfigError("duplicate key " + key + " in [" + section + "] (first at line " +
                            std::to_string(seen[full]) + ")",
                        line);
    }
    seen[full] = line;

    if (section == "schedule") {
      schedule_entries.push_back({line, {key, value}});
    } else if (section == "sweep") {
      sweep_entries.push_back({line, {key, value}});
    } else if (section == "scenario" && key == "type") {
      static const std::map<std::string, ScenarioKind> kinds{{"convert", ScenarioKind::Convert},
                                                             {"spectrum", ScenarioKind::Spectrum},
                                                             {"transmit", ScenarioKind::Transmit},
                                                             {"engineer", ScenarioKind::Engineer}};
      const auto it = kinds.find(value);
      if (it == kinds.end()) throw ConfigError("unknown scenario type " + value, line);
      c.scenario = it->second;
      have_type = true;
    } else if (section == "output" && key == "dir") {
      if (value.empty()) throw ConfigError("output.dir must not be empty", line);
      c.output_dir = value;
    } else if (section == "output" && key == "prefix") {
      if (value.empty() || value.find('/') != std::string::npos) {
        throw ConfigError("output.prefix must be a non-empty file name stem", line);
      }
      c.output_prefix = value;
    } else if (numeric_keys().at(section).count(key)) {
      c.values[full] = parse_number(value, line);
    } else {
      throw ConfigError("unknown key " + key + " in [" + section + "]", line);
    }
  }
  if (!have_type) throw ConfigError("missing required key scenario.type");

  // Schedule keys depend on the schedule type, which may appear on any line.
  for (const auto& [ln, kv] : schedule_entries) {
    if (kv.first == "type") {
      c.schedule_type = kv.second;
      try {
        (void)schedule_keys(c.schedule_type);
      } catch (const ConfigError& e) {
        throw ConfigError(e.what(), ln);
      }
    }
  }
  if (!seen.count("schedule.type")) throw ConfigError("missing required key schedule.type");
  for (const auto& [ln, kv] : schedule_entries) {
    const auto& [key, value] = kv;
    if (key == "type") continue;
    if (!schedule_keys(c.schedule_type).count(key)) {
      throw ConfigError("unknown key " + key + " in [schedule] for type " + c.schedule_type, ln);
    }
    if (key == "points") {
      // t:g1:g2 triples separated by commas.
      for (const auto& item : split(value, ',')) {
        const auto f = split(item, ':');
        if (f.size() != 3) throw ConfigError("schedule point '" + item + "' is not t:g1:g2", ln);
        c.points.push_back({parse_number(f[0], ln), parse_number(f[1], ln), parse_number(f[2], ln)});
      }
    } else {
      c.values["schedule." + key] = parse_number(value, ln);
    }
  }

  for (const auto& [ln, kv] : sweep_entries) {
    const auto& [key, value] = kv;
    if (key == "mode") {
      if (value == "zip") {
        c.sweep_mode = SweepMode::Zip;
      } else if (value == "product") {
        c.sweep_mode = SweepMode::Product;
      } else {
        throw ConfigError("sweep mode must be zip or product", ln);
      }
      continue;
    }
    const auto dot = key.find('.');
    if (dot == std::string::npos || !is_numeric_key(key.substr(0, dot), key.substr(dot + 1), c.schedule_type)) {
      throw ConfigError("sweep key " + key + " does not name a numeric field (use section.key)", ln);
    }
    SweepAxis axis{key, parse_list(value, ln)};
    if (axis.values.empty()) throw ConfigError("sweep list for " + key + " is empty", ln);
    c.sweep.push_back(std::move(axis));
  }
  if (c.sweep_mode == SweepMode::Zip) {
    for (const auto& a : c.sweep) {
      if (a.values.size() != c.sweep.front().values.size()) {
        throw ConfigError("zip sweep lists must have equal lengths (" + a.key + ")", seen["sweep." + a.key]);
      }
    }
  }

  // Documented defaults.
  auto dflt = [&](const std::string& k, double v) { c.values.emplace(k, v); };
  dflt("scenario.g_ref", 1.0);
  dflt("params.kappa2", 0.0);
  dflt("params.gamma_m", 0.0);
  dflt("params.n_th", 0.0);
  dflt("initial.alpha_re", 1.0);
  dflt("initial.alpha_im", 0.0);
  dflt("initial.r", 0.0);
  dflt("initial.phi", 0.0);
  dflt("pulse.amplitude", 1.0);
  dflt("pulse.samples", 4096.0);
  dflt("output.trajectory_every", 10.0);
  if (c.scenario == ScenarioKind::Spectrum) {
    dflt("scenario.omega_min", -0.3);
    dflt("scenario.omega_max", 0.3);
    dflt("scenario.omega_points", 601.0);
  }

  for (std::size_t i = 0; i < c.run_count(); ++i) {
    try {
      validate_run(c.expand(i));
    } catch (const ConfigError& e) {
      if (c.sweep.empty()) throw;
      throw ConfigError(std::string(e.what()) + " (sweep point " + std::to_string(i) + ")");
    }
  }
  return c;
}

/// Text form that parses back to an equal configuration.
inline std::string serialize_config(const ScenarioConfig& c) {
  using config_detail::format_double;
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> by_section;
  for (const auto& [k, v] : c.values) {
    const auto dot = k.find('.');
    by_section[k.substr(0, dot)].push_back({k.substr(dot + 1), format_double(v)});
  }
  std::ostringstream os;
  auto emit = [&](const std::string& section) {
    for (const auto& [k, v] : by_section[section]) os << k << " = " << v << "\n";
  };
  os << "[scenario]\ntype = " << to_string(c.scenario) << "\n";
  emit("scenario");
  os << "\n[params]\n";
  emit("params");
  os << "\n[schedule]\ntype = " << c.schedule_type << "\n";
  emit("schedule");
  if (!c.points.empty()) {
    os << "points = ";
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      const auto& b = c.points[i];
      os << (i ? ", " : "") << format_double(b.t) << ":" << format_double(b.g1) << ":" << format_double(b.g2);
    }
    os << "\n";
  }
  os << "\n[initial]\n";
  emit("initial");
  os << "\n[pulse]\n";
  emit("pulse");
  if (!c.sweep.empty()) {
    os << "\n[sweep]\nmode = " << (c.sweep_mode == SweepMode::Zip ? "zip" : "product") << "\n";
    for (const auto& a : c.sweep) {
      os << a.key << " = ";
      for (std::size_t i = 0; i < a.values.size(); ++i) os << (i ? ", " : "") << format_double(a.values[i]);
      os << "\n";
    }
  }
  os << "\n[output]\ndir = " << c.output_dir << "\nprefix = " << c.output_prefix << "\n";
  emit("output");
  return os.str();
}

}  // namespace optomech
