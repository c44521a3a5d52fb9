#pragma once

// Executes a parsed ScenarioConfig: one run per sweep point, optionally on
// several worker threads, with CSV artifacts assembled in sweep order so the
// output bytes do not depend on scheduling.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "optomech/adiabatic.hpp"
#include "optomech/config.hpp"
#include "optomech/conversion.hpp"
#include "optomech/transmission.hpp"

namespace optomech {

/// %.12g, the fixed float format of every CSV cell.
inline std::string csv_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct RunSummary {
  std::size_t index = 0;
  std::vector<std::pair<std::string, double>> sweep;    // swept key (short name) and value
  std::vector<std::pair<std::string, double>> scalars;  // key results
  std::vector<std::string> notes;

  std::string line(std::size_t total, ScenarioKind kind) const {
    std::ostringstream os;
    os << "[" << index + 1 << "/" << total << "] " << to_string(kind);
    for (const auto& [k, v] : sweep) os << " " << k << "=" << csv_num(v);
    os << ":";
    for (const auto& [k, v] : scalars) os << " " << k << "=" << csv_num(v);
    for (const auto& n : notes) os << " (" << n << ")";
    return os.str();
  }
};

struct CsvFile {
  std::string name;
  std::string content;
};

struct RunArtifacts {
  std::vector<RunSummary> runs;
  std::vector<std::string> files;  // paths written
};

namespace scenario_detail {

/// Column name for a swept key: the part after the section, unless two
/// axes share it.
inline std::vector<std::string> sweep_names(const ScenarioConfig& c) {
  std::vector<std::string> names;
  for (const auto& a : c.sweep) names.push_back(a.key.substr(a.key.find('.') + 1));
  for (std::size_t i = 0; i < names.size(); ++i) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (i != j && names[i] == c.sweep[j].key.substr(c.sweep[j].key.find('.') + 1)) {
        names[i] = c.sweep[i].key;
      }
    }
  }
  return names;
}

inline std::string run_tag(const ScenarioConfig& c, std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03zu", i);
  return c.output_prefix + "_" + buf;
}

inline std::string pulse_csv(const Pulse& p) {
  std::string s = "t,re,im,abs\n";
  for (std::size_t i = 0; i < p.size(); ++i) {
    s += csv_num(p.time(i)) + "," + csv_num(p[i].real()) + "," + csv_num(p[i].imag()) + "," +
         csv_num(std::abs(p[i])) + "\n";
  }
  return s;
}

struct RunResult {
  RunSummary summary;
  std::vector<std::string> row;  // summary CSV cells after the sweep columns
  std::vector<CsvFile> files;
};

inline RunResult run_convert(const ScenarioConfig& c, const std::string& tag) {
  const auto p = c.params();
  const auto s = c.schedule();
  const double T = s.duration();
  const auto initial = c.initial_state();
  StepControl ctl;
  ctl.sample_every = static_cast<std::size_t>(c.get("output.trajectory_every"));
  if (c.has("scenario.max_step")) ctl.max_step = c.get("scenario.max_step") / c.g_ref();
  const auto conv = numeric_conversion(initial, c.mech_occupation(), p, s, ctl);
  const auto rep = analytic_fidelity(initial.mean, c.get("initial.r"), c.get("initial.phi"), p, s, T);

  std::string traj = "t,re_a1,im_a1,re_bm,im_bm,re_a2,im_a2,n1,nm,n2,F_a2\n";
  for (const auto& pt : conv.trajectory) {
    const auto& st = pt.state;
    traj += csv_num(pt.t);
    for (int j = 0; j < 3; ++j) traj += "," + csv_num(st.mean(j).real()) + "," + csv_num(st.mean(j).imag());
    for (int j = 0; j < 3; ++j) traj += "," + csv_num(st.normal(j, j).real());
    traj += "," + csv_num(gaussian_fidelity(initial, reduce_to_mode(st, 3))) + "\n";
  }

  RunResult r;
  r.summary.scalars = {{"F_numeric", conv.fidelity}, {"F1_analytic", rep.F1}, {"F2_analytic", rep.F2},
                       {"F_analytic", rep.F},        {"f0T", rep.f0T},       {"fs", rep.fs}};
  if (rep.regime != ExpansionRegime::Valid) r.summary.notes.emplace_back(std::string("expansion ") + to_string(rep.regime));
  if (rep.f2_approximate) r.summary.notes.emplace_back("F2 approximate");
  for (const auto& [k, v] : r.summary.scalars) r.row.push_back(csv_num(v));
  r.row.push_back(to_string(rep.regime));
  r.row.push_back(rep.f2_approximate ? "1" : "0");
  r.files.push_back({tag + "_trajectory.csv", std::move(traj)});
  return r;
}

inline RunResult run_spectrum(const ScenarioConfig& c, const std::string& tag) {
  const auto p = c.params();
  const double g = c.g_ref();
  const double g1 = c.get("schedule.g1");
  const double g2 = c.get("schedule.g2");
  const auto grid = linspace(g * c.get("scenario.omega_min"), g * c.get("scenario.omega_max"),
                             static_cast<std::size_t>(c.get("scenario.omega_points")));
  const auto spec = transmission_spectrum(p, g1, g2, grid);

  std::string csv = "omega";
  for (int j = 1; j <= 3; ++j) {
    for (int k = 1; k <= 3; ++k) {
      const std::string e = std::to_string(j) + std::to_string(k);
      csv += ",re_T" + e + ",im_T" + e;
    }
  }
  csv += ",abs_T31\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    csv += csv_num(grid[i] / g);
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        csv += "," + csv_num(spec.matrices[i](j, k).real()) + "," + csv_num(spec.matrices[i](j, k).imag());
      }
    }
    csv += "," + csv_num(std::abs(spec.matrices[i](2, 0))) + "\n";
  }

  RunResult r;
  const auto res = t31_resonant(p, g1, g2);
  r.summary.scalars = {{"T31_0", res.value}, {"T31_0_matrix", std::abs(t31(p, g1, g2, 0.0))}};
  if (p.kappa1 > 0.0 && p.kappa2 > 0.0) {
    const auto hw = half_width(p, g1, g2);
    r.summary.scalars.push_back({"half_width_analytic", hw.analytic / g});
    r.summary.scalars.push_back({"half_width_numeric", hw.numeric / g});
  }
  if (res.optimal) r.summary.notes.emplace_back("optimal");
  for (const auto& [k, v] : r.summary.scalars) r.row.push_back(csv_num(v));
  if (r.row.size() == 2) r.row.insert(r.row.end(), {"", ""});
  r.row.push_back(res.optimal ? "1" : "0");
  r.files.push_back({tag + "_spectrum.csv", std::move(csv)});
  return r;
}

inline RunResult run_pulse(const ScenarioConfig& c, const std::string& tag) {
  const auto p = c.params();
  const auto in = Pulse::gaussian(c.sigma_omega(), c.get("pulse.amplitude"),
                                  static_cast<std::size_t>(c.get("pulse.samples")));
  RunResult r;
  Pulse out = in;
  double ratio = 0.0;
  if (c.scenario == ScenarioKind::Transmit) {
    const double g1 = c.get("schedule.g1");
    const double g2 = c.get("schedule.g2");
    auto t = transmit_pulse_freq(in, p, g1, g2);
    out = std::move(t.output);
    ratio = t.energy_ratio;
  } else {
    out = transmit_pulse_time(in, p, c.schedule(in.t_end()));
    ratio = out.norm_sq() / in.norm_sq();
  }
  const double fp = out.max_abs() > 0.0 ? pulse_fidelity(in, out) : 0.0;
  r.summary.scalars = {{"Fp", fp}, {"energy_ratio", ratio}};
  if (c.scenario == ScenarioKind::Transmit && p.kappa1 > 0.0 && p.kappa2 > 0.0) {
    r.summary.scalars.push_back({"T31_0", t31_resonant(p, c.get("schedule.g1"), c.get("schedule.g2")).value});
    r.summary.scalars.push_back(
        {"half_width_analytic", half_width(p, c.get("schedule.g1"), c.get("schedule.g2")).analytic / c.g_ref()});
  }
  for (const auto& [k, v] : r.summary.scalars) r.row.push_back(csv_num(v));
  r.files.push_back({tag + "_pulse_in.csv", pulse_csv(in)});
  r.files.push_back({tag + "_pulse_out.csv", pulse_csv(out)});
  return r;
}

inline std::string summary_header(const ScenarioConfig& c) {
  switch (c.scenario) {
    case ScenarioKind::Convert:
      return "F_numeric,F1_analytic,F2_analytic,F_analytic,f0T,fs,regime,f2_approximate";
    case ScenarioKind::Spectrum:
      return "T31_0,T31_0_matrix,half_width_analytic,half_width_numeric,optimal";
    case ScenarioKind::Transmit:
      return "Fp,energy_ratio,T31_0,half_width_analytic";
    case ScenarioKind::Engineer:
      return "Fp,energy_ratio";
  }
  return "";
}

inline RunResult run_one(const ScenarioConfig& c, std::size_t i) {
  const ScenarioConfig run = c.expand(i);
  const std::string tag = run_tag(c, i);
  RunResult r;
  switch (c.scenario) {
    case ScenarioKind::Convert: r = run_convert(run, tag); break;
    case ScenarioKind::Spectrum: r = run_spectrum(run, tag); break;
    case ScenarioKind::Transmit:
    case ScenarioKind::Engineer: r = run_pulse(run, tag); break;
  }
  if (c.scenario == ScenarioKind::Transmit && r.row.size() == 2) r.row.insert(r.row.end(), {"", ""});
  r.summary.index = i;
  const auto names = sweep_names(c);
  const auto point = c.sweep_point(i);
  for (std::size_t k = 0; k < names.size(); ++k) r.summary.sweep.push_back({names[k], point[k]});
  return r;
}

/// Rethrows `e` with the sweep point appended, keeping the error category.
[[noreturn]] inline void rethrow_annotated(std::exception_ptr e, const RunSummary& where) {
  std::string ctx = " [run " + std::to_string(where.index);
  for (const auto& [k, v] : where.sweep) ctx += " " + k + "=" + csv_num(v);
  ctx += "]";
  try {
    std::rethrow_exception(e);
  } catch (const NumericError& x) {
    throw NumericError(x.what() + ctx, x.time());
  } catch (const DomainError& x) {
    throw DomainError(x.what() + ctx);
  } catch (const ParameterError& x) {
    throw ParameterError(x.what() + ctx);
  } catch (const ConfigError& x) {
    throw ConfigError(x.what() + ctx);
  }
}

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace scenario_detail

/// Runs every sweep point of `c` on up to `jobs` threads and writes the
/// per-run CSVs plus `<prefix>_summary.csv` into `out_dir`. Nothing is
/// written if any run fails; the first failure in sweep order is rethrown
/// with the sweep point attached.
inline RunArtifacts run_scenario(const ScenarioConfig& c, const std::string& out_dir, unsigned jobs = 1) {
  using namespace scenario_detail;
  const std::size_t n = c.run_count();
  std::vector<RunResult> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = run_one(c, i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) {
      RunSummary where;
      where.index = i;
      const auto names = sweep_names(c);
      const auto point = c.sweep_point(i);
      for (std::size_t k = 0; k < names.size(); ++k) where.sweep.push_back({names[k], point[k]});
      rethrow_annotated(errors[i], where);
    }
  }

  std::filesystem::create_directories(out_dir);
  RunArtifacts art;
  std::string summary = "run";
  for (const auto& name : sweep_names(c)) summary += "," + name;
  summary += "," + summary_header(c) + "\n";
  for (auto& r : results) {
    summary += std::to_string(r.summary.index);
    for (const auto& [k, v] : r.summary.sweep) summary += "," + csv_num(v);
    for (const auto& cell : r.row) summary += "," + cell;
    summary += "\n";
    for (const auto& f : r.files) {
      const auto path = std::filesystem::path(out_dir) / f.name;
      write_atomic(path, f.content);
      art.files.push_back(path.string());
    }
    art.runs.push_back(std::move(r.summary));
  }
  const auto path = std::filesystem::path(out_dir) / (c.output_prefix + "_summary.csv");
  write_atomic(path, summary);
  art.files.push_back(path.string());
  return art;
}

}  // namespace optomech
