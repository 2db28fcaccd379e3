#pragma once

// Scenario-level workflows: build the pulse for a run mode, integrate it,
// reduce the trajectory to summary metrics, and write CSV / report files.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <future>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rabipulse/designer.hpp"
#include "rabipulse/errors.hpp"
#include "rabipulse/propagator.hpp"
#include "rabipulse/scenario.hpp"

namespace rabipulse {

enum class OutputFormat { text, structured };

struct RunSummary {
  RunMode mode = RunMode::optimized;
  std::string target_label;
  double final_transfer = 0.0;
  /// max Pi_target over the final half-oscillation (by scaled time)
  double peak_transfer_last_cycle = 0.0;
  double max_perturber_population = 0.0;
  double t_pi = 0.0;
  double t_used = 0.0;
  double norm_drift = 0.0;
  bool norm_exceeded = false;
};

struct RunResult {
  PulseSpec pulse;
  std::optional<DesignReport> report;
  Trajectory trajectory;
  RunSummary summary;
};

inline DesignOptions design_options(const Scenario& s) {
  DesignOptions o;
  o.detuning = s.detuning;
  o.tol = s.numerics.fixed_point_tol;
  o.max_iter = s.numerics.max_iter;
  return o;
}

inline PropagationOptions propagation_options(const Scenario& s) {
  PropagationOptions o;
  o.tol = s.numerics.tol;
  o.grid = s.numerics.grid;
  return o;
}

/// Level expected to hold the population at the end: the other target level
/// after an odd number of half-oscillations, the initial one after an even number.
inline std::size_t final_target_level(const Scenario& s) {
  const std::size_t other = s.initial == s.target.alpha ? s.target.beta : s.target.alpha;
  return s.n_half % 2 == 1 ? other : s.initial;
}

/// Designs the scenario for the requested mode. Manual mode keeps the designed
/// chirp and uses the scenario's explicit T.
inline Design design_for(const Scenario& s, RunMode mode) {
  if (mode == RunMode::manual) {
    if (!s.manual_duration) throw ScenarioError("field 'T': manual mode requires an explicit duration T");
    const ChirpDesign chirp = chirp_design(s.system, s.target, s.perturbers, s.f0);
    DesignReport rep;
    rep.chirp_coefficient = chirp.carrier.coefficient;
    rep.fixed_carrier_fallback = chirp.fixed_fallback;
    rep.extrapolated = chirp.extrapolated;
    rep.t_pi = s.f0 > 0.0 ? pi_pulse_duration(s.system, s.target, s.f0, s.envelope, s.n_half)
                          : std::numeric_limits<double>::infinity();
    rep.t_opt = std::numeric_limits<double>::quiet_NaN();
    rep.duration = *s.manual_duration;
    const LeakModel leak(s.system, s.target, s.perturbers, s.f0, s.detuning);
    for (const auto& a : leak.analyses()) rep.sigma_sq_per_perturber.push_back(a.sigma_sq());
    return {PulseSpec(s.f0, Envelope(s.envelope, *s.manual_duration), chirp.carrier), rep};
  }
  const DesignMode dm = mode == RunMode::unoptimized      ? DesignMode::unoptimized
                        : mode == RunMode::frequency_only ? DesignMode::frequency_only
                                                          : DesignMode::optimized;
  return design_pulse(s.system, s.target, s.perturbers, s.f0, s.envelope, s.n_half, dm, design_options(s));
}

/// Designs, integrates and summarizes one run.
inline RunResult run_mode(const Scenario& s, RunMode mode) {
  Design d = design_for(s, mode);
  const auto target = final_target_level(s);
  const double mu_ab = std::abs(s.system.moment(s.target.alpha, s.target.beta));
  const double tau_total = tau_of_t(d.pulse, mu_ab, d.pulse.duration());
  const double tau_last = tau_total * static_cast<double>(s.n_half - 1) / static_cast<double>(s.n_half);

  RunSummary sum;
  sum.mode = mode;
  sum.target_label = s.system.label(target);
  sum.t_pi = d.report.t_pi;
  sum.t_used = d.pulse.duration();
  const auto n = s.system.size();
  const auto observer = [&](double t, const StateVector& a) {
    if (tau_of_t(d.pulse, mu_ab, std::min(t, d.pulse.duration())) >= tau_last) {
      sum.peak_transfer_last_cycle =
          std::max(sum.peak_transfer_last_cycle, std::norm(a(static_cast<Eigen::Index>(target))));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == s.target.alpha || i == s.target.beta) continue;
      sum.max_perturber_population = std::max(sum.max_perturber_population, std::norm(a(static_cast<Eigen::Index>(i))));
    }
  };
  Trajectory tr = integrate(s.system, d.pulse, basis_state(n, s.initial), propagation_options(s), observer);
  sum.final_transfer = std::norm(tr.final_state(static_cast<Eigen::Index>(target)));
  sum.norm_drift = tr.norm_drift;
  sum.norm_exceeded = tr.norm_exceeded;
  return {d.pulse, d.report, std::move(tr), sum};
}

/// Modes compared side by side; manual is included when the scenario carries T.
inline std::vector<RunMode> compare_modes(const Scenario& s) {
  if (s.f0 == 0.0) return {RunMode::manual};
  std::vector<RunMode> modes = {RunMode::unoptimized, RunMode::frequency_only, RunMode::optimized};
  if (s.manual_duration) modes.push_back(RunMode::manual);
  return modes;
}

inline std::vector<RunSummary> compare(const Scenario& s) {
  std::vector<RunSummary> out;
  for (auto m : compare_modes(s)) out.push_back(run_mode(s, m).summary);
  return out;
}

enum class SweepParam { f0, n_half };

struct SweepRow {
  double value = 0.0;
  RunSummary summary;
};

/// Grid of `steps` points from `from` to `to` (inclusive; one point is `from`).
inline std::vector<double> sweep_grid(double from, double to, long steps) {
  if (steps < 1) throw ValidationError("sweep needs at least one step");
  std::vector<double> v;
  for (long k = 0; k < steps; ++k) {
    if (steps == 1) {
      v.push_back(from);
    } else {
      v.push_back(k + 1 == steps ? to : from + (to - from) * static_cast<double>(k) / static_cast<double>(steps - 1));
    }
  }
  return v;
}

inline Scenario with_parameter(Scenario s, SweepParam p, double value) {
  if (p == SweepParam::f0) {
    if (!(value >= 0.0)) throw ValidationError("swept F0 must be non-negative");
    s.f0 = value;
  } else {
    const long n = std::lround(value);
    if (n < 1) throw ValidationError("swept n_half must be >= 1");
    s.n_half = static_cast<int>(n);
  }
  return s;
}

/// Runs every compare mode at every grid value. Grid points run concurrently;
/// rows come back in grid order.
inline std::vector<SweepRow> sweep(const Scenario& base, SweepParam p, const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("sweep needs at least one value");
  std::vector<std::future<std::vector<SweepRow>>> jobs;
  for (double v : values) {
    const Scenario s = with_parameter(base, p, v);
    jobs.push_back(std::async(std::launch::async, [s, v] {
      std::vector<SweepRow> rows;
      for (const auto& r : compare(s)) rows.push_back({v, r});
      return rows;
    }));
  }
  std::vector<SweepRow> out;
  for (auto& j : jobs) {
    auto rows = j.get();
    out.insert(out.end(), rows.begin(), rows.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Writers

/// 17 significant digits, scientific.
inline std::string format_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::string format_num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return detail::format_double(v);
}

inline nlohmann::json json_num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline void write_trajectory_csv(std::ostream& out, const LevelSystem& system, const Trajectory& tr) {
  out << "t,m,omega";
  for (const auto& l : system.labels()) out << ",Pi_" << l;
  out << ",norm_error\n";
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    out << format_sci(tr.times[k]) << ',' << format_sci(tr.envelope_samples[k]) << ','
        << format_sci(tr.carrier_samples[k]);
    for (double p : tr.populations[k]) out << ',' << format_sci(p);
    out << ',' << format_sci(tr.norm_errors[k]) << '\n';
  }
}

inline nlohmann::json to_json(const Scenario& s, const DesignReport& r) {
  nlohmann::json sig = nlohmann::json::object();
  for (std::size_t i = 0; i < s.perturbers.size() && i < r.sigma_sq_per_perturber.size(); ++i) {
    sig[s.system.label(s.perturbers[i].level)] = r.sigma_sq_per_perturber[i];
  }
  return {{"t_pi", json_num(r.t_pi)},
          {"t_opt", json_num(r.t_opt)},
          {"duration", json_num(r.duration)},
          {"chirp_coefficient", r.chirp_coefficient},
          {"sigma_sq", sig},
          {"fixed_point_iterations", r.fixed_point_iterations},
          {"residual", r.residual},
          {"second_order_advisory", r.second_order_advisory},
          {"extrapolated", r.extrapolated},
          {"fixed_carrier_fallback", r.fixed_carrier_fallback}};
}

inline void write_design_report(std::ostream& out, const Scenario& s, const DesignReport& r, OutputFormat fmt) {
  if (fmt == OutputFormat::structured) {
    out << to_json(s, r).dump(2) << '\n';
    return;
  }
  out << "t_pi = " << format_num(r.t_pi) << '\n'
      << "t_opt = " << format_num(r.t_opt) << '\n'
      << "duration = " << format_num(r.duration) << '\n'
      << "chirp_coefficient = " << format_num(r.chirp_coefficient) << '\n';
  for (std::size_t i = 0; i < s.perturbers.size() && i < r.sigma_sq_per_perturber.size(); ++i) {
    out << "sigma_sq." << s.system.label(s.perturbers[i].level) << " = " << format_num(r.sigma_sq_per_perturber[i])
        << '\n';
  }
  out << "fixed_point_iterations = " << r.fixed_point_iterations << '\n'
      << "residual = " << format_num(r.residual) << '\n'
      << "second_order_advisory = " << format_num(r.second_order_advisory) << '\n'
      << "extrapolated = " << (r.extrapolated ? "true" : "false") << '\n'
      << "fixed_carrier_fallback = " << (r.fixed_carrier_fallback ? "true" : "false") << '\n';
}

inline nlohmann::json to_json(const RunSummary& r) {
  return {{"mode", std::string(to_string(r.mode))},
          {"target", r.target_label},
          {"final_transfer", r.final_transfer},
          {"peak_transfer_last_cycle", r.peak_transfer_last_cycle},
          {"max_perturber_population", r.max_perturber_population},
          {"t_pi", json_num(r.t_pi)},
          {"t_used", r.t_used},
          {"norm_drift", r.norm_drift},
          {"norm_exceeded", r.norm_exceeded}};
}

inline void write_summary(std::ostream& out, const RunSummary& r, OutputFormat fmt) {
  if (fmt == OutputFormat::structured) {
    out << to_json(r).dump(2) << '\n';
    return;
  }
  out << "mode = " << to_string(r.mode) << '\n'
      << "target = " << r.target_label << '\n'
      << "final_transfer = " << format_num(r.final_transfer) << '\n'
      << "peak_transfer_last_cycle = " << format_num(r.peak_transfer_last_cycle) << '\n'
      << "max_perturber_population = " << format_num(r.max_perturber_population) << '\n'
      << "t_pi = " << format_num(r.t_pi) << '\n'
      << "t_used = " << format_num(r.t_used) << '\n'
      << "norm_drift = " << format_num(r.norm_drift) << '\n';
}

/// Side-by-side table; deltas are against the first row (unoptimized).
inline void write_comparison(std::ostream& out, const std::vector<RunSummary>& rows, OutputFormat fmt) {
  const double base = rows.empty() ? 0.0 : rows.front().final_transfer;
  if (fmt == OutputFormat::structured) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
      auto j = to_json(r);
      j["delta_final_transfer"] = r.final_transfer - base;
      arr.push_back(j);
    }
    out << arr.dump(2) << '\n';
    return;
  }
  char line[256];
  std::snprintf(line, sizeof line, "%-15s %-8s %12s %12s %12s %14s %14s %12s %12s\n", "mode", "target", "final",
                "peak_last", "max_pert", "t_pi", "t_used", "norm_drift", "delta_final");
  out << line;
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%-15s %-8s %12.6f %12.6f %12.6f %14.1f %14.1f %12.3e %+12.6f\n",
                  std::string(to_string(r.mode)).c_str(), r.target_label.c_str(), r.final_transfer,
                  r.peak_transfer_last_cycle, r.max_perturber_population, r.t_pi, r.t_used, r.norm_drift,
                  r.final_transfer - base);
    out << line;
  }
}

inline void write_sweep(std::ostream& out, SweepParam p, const std::vector<SweepRow>& rows, OutputFormat fmt) {
  const char* name = p == SweepParam::f0 ? "F0" : "n_half";
  if (fmt == OutputFormat::structured) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
      auto j = to_json(r.summary);
      j[name] = r.value;
      arr.push_back(j);
    }
    out << arr.dump(2) << '\n';
    return;
  }
  out << name << ",mode,target,final_transfer,peak_transfer_last_cycle,max_perturber_population,t_pi,t_used,norm_drift\n";
  for (const auto& r : rows) {
    const auto& s = r.summary;
    out << format_sci(r.value) << ',' << to_string(s.mode) << ',' << s.target_label << ','
        << format_sci(s.final_transfer) << ',' << format_sci(s.peak_transfer_last_cycle) << ','
        << format_sci(s.max_perturber_population) << ',' << format_sci(s.t_pi) << ',' << format_sci(s.t_used)
        << ',' << format_sci(s.norm_drift) << '\n';
  }
}

}  // namespace rabipulse
