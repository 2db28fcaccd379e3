#pragma once

// Scenario files: line-oriented `[section]` / `key = value` text with `#`
// comments. Levels are given either as absolute energies or as pairwise
// `pair i j = omega sign mu` lines anchored at a `reference` level (E = 0).

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rabipulse/designer.hpp"
#include "rabipulse/errors.hpp"
#include "rabipulse/levels.hpp"
#include "rabipulse/pulse.hpp"

namespace rabipulse {

/// What a run does with the analytic design.
enum class RunMode { unoptimized, frequency_only, optimized, manual };

inline std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::unoptimized: return "unoptimized";
    case RunMode::frequency_only: return "frequency_only";
    case RunMode::optimized: return "optimized";
    case RunMode::manual: return "manual";
  }
  return "?";
}

inline std::optional<RunMode> parse_run_mode(std::string_view s) {
  if (s == "unoptimized") return RunMode::unoptimized;
  if (s == "frequency_only") return RunMode::frequency_only;
  if (s == "optimized") return RunMode::optimized;
  if (s == "manual") return RunMode::manual;
  return std::nullopt;
}

struct Numerics {
  double tol = 1e-10;
  std::size_t grid = 2000;
  double fixed_point_tol = 1e-10;
  std::size_t max_iter = 50;

  bool operator==(const Numerics&) const = default;
};

struct Scenario {
  LevelSystem system;
  TargetPair target;
  std::size_t initial = 0;  ///< alpha or beta
  std::vector<PerturberSpec> perturbers;
  double f0 = 0.0;
  EnvelopeShape envelope = EnvelopeShape::sin2;
  int n_half = 1;
  RunMode mode = RunMode::optimized;
  std::optional<double> manual_duration;
  EpsilonDetuning detuning = EpsilonDetuning::chirp;
  Numerics numerics;

  bool operator==(const Scenario&) const = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline double parse_double(const std::string& s, int line, const std::string& field) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw ScenarioError("field '" + field + "': '" + s + "' is not a finite number", line);
  }
  return v;
}

inline long parse_int(const std::string& s, int line, const std::string& field) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ScenarioError("field '" + field + "': '" + s + "' is not an integer", line);
  }
  return v;
}

/// Shortest text that reads back to the identical double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

struct PairLine {
  std::string upper;  // level i
  std::string lower;  // level j
  double omega = 0.0;
  int sign = 0;
  double mu = 0.0;
  int line = 0;
};

}  // namespace detail

/// Parses and validates scenario text.
inline Scenario parse_scenario(std::string_view text) {
  using detail::Entry;
  static const std::vector<std::string> sections = {"levels", "couplings", "target", "perturbers", "drive", "numerics"};
  std::map<std::string, std::vector<Entry>> body;
  std::string current;
  int lineno = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ScenarioError("malformed section header '" + line + "'", lineno);
      current = detail::trim(line.substr(1, line.size() - 2));
      if (std::find(sections.begin(), sections.end(), current) == sections.end()) {
        throw ScenarioError("unknown section [" + current + "]", lineno);
      }
      if (body.count(current)) throw ScenarioError("duplicate section [" + current + "]", lineno);
      body[current];
      continue;
    }
    if (current.empty()) throw ScenarioError("entry outside any section", lineno);
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ScenarioError("expected 'key = value'", lineno);
    Entry e{detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)), lineno};
    if (e.key.empty() || e.value.empty()) throw ScenarioError("empty key or value", lineno);
    body[current].push_back(std::move(e));
  }

  auto single_keys = [&](const std::string& section, const std::vector<std::string>& allowed) {
    std::map<std::string, Entry> out;
    for (const auto& e : body[section]) {
      if (std::find(allowed.begin(), allowed.end(), e.key) == allowed.end()) {
        throw ScenarioError("unknown key '" + e.key + "' in [" + section + "]", e.line);
      }
      if (!out.emplace(e.key, e).second) throw ScenarioError("duplicate key '" + e.key + "'", e.line);
    }
    return out;
  };

  const auto target = single_keys("target", {"alpha", "beta", "initial"});
  const auto drive = single_keys("drive", {"F0", "envelope", "n_half", "mode", "T", "epsilon_detuning"});
  const auto num = single_keys("numerics", {"tol", "grid", "fixed_point_tol", "max_iter"});

  // [levels]
  if (!body.count("levels") || body["levels"].empty()) throw ScenarioError("missing [levels] section");
  std::vector<std::string> labels;
  std::map<std::string, double> energy;
  std::vector<detail::PairLine> pairs;
  std::optional<Entry> reference;
  auto add_label = [&](const std::string& l) {
    if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
  };
  for (const auto& e : body["levels"]) {
    if (e.key == "reference") {
      if (reference) throw ScenarioError("duplicate key 'reference'", e.line);
      reference = e;
      continue;
    }
    const auto words = detail::split_ws(e.key);
    if (words.size() == 3 && words[0] == "pair") {
      const auto vals = detail::split_ws(e.value);
      if (vals.size() != 3) throw ScenarioError("pair line needs 'omega sign mu'", e.line);
      detail::PairLine p;
      p.upper = words[1];
      p.lower = words[2];
      p.line = e.line;
      p.omega = detail::parse_double(vals[0], e.line, "omega");
      p.sign = static_cast<int>(detail::parse_int(vals[1][0] == '+' ? vals[1].substr(1) : vals[1], e.line, "sign"));
      p.mu = detail::parse_double(vals[2], e.line, "mu");
      if (p.sign != 1 && p.sign != -1) throw ScenarioError("field 'sign' must be +1 or -1", e.line);
      if (!(p.omega > 0.0)) throw ScenarioError("field 'omega' must be positive", e.line);
      if (p.upper == p.lower) throw ScenarioError("pair line names the same level twice", e.line);
      pairs.push_back(p);
      continue;
    }
    if (words.size() != 1) throw ScenarioError("unknown key '" + e.key + "' in [levels]", e.line);
    if (energy.count(e.key)) throw ScenarioError("duplicate level '" + e.key + "'", e.line);
    add_label(e.key);
    energy[e.key] = detail::parse_double(e.value, e.line, e.key);
  }
  std::map<std::pair<std::string, std::string>, std::pair<double, int>> coupling;
  auto add_coupling = [&](std::string a, std::string b, double mu, int line) {
    if (a == b) throw ScenarioError("coupling of a level to itself", line);
    if (b < a) std::swap(a, b);
    auto [it, fresh] = coupling.emplace(std::make_pair(a, b), std::make_pair(mu, line));
    if (!fresh && it->second.first != mu) {
      throw ScenarioError("conflicting moments for pair (" + a + ", " + b + ")", line);
    }
  };
  if (!pairs.empty()) {
    if (!energy.empty()) throw ScenarioError("[levels] mixes absolute energies with pair lines", pairs.front().line);
    if (!reference) throw ScenarioError("pairwise [levels] needs 'reference = <level>'");
    add_label(reference->value);
    for (const auto& p : pairs) {
      add_label(p.upper);
      add_label(p.lower);
      add_coupling(p.upper, p.lower, p.mu, p.line);
    }
    energy[reference->value] = 0.0;
    bool progress = true;
    while (progress) {
      progress = false;
      for (const auto& p : pairs) {
        const double diff = p.sign * p.omega;  // E_upper - E_lower
        const bool hu = energy.count(p.upper) > 0;
        const bool hl = energy.count(p.lower) > 0;
        if (hu && hl) {
          const double have = energy[p.upper] - energy[p.lower];
          if (std::abs(have - diff) > 1e-12 * std::max(std::abs(diff), 1.0)) {
            throw ScenarioError("pair data inconsistent around (" + p.upper + ", " + p.lower + ")", p.line);
          }
        } else if (hu) {
          energy[p.lower] = energy[p.upper] - diff;
          progress = true;
        } else if (hl) {
          energy[p.upper] = energy[p.lower] + diff;
          progress = true;
        }
      }
    }
    for (const auto& l : labels) {
      if (!energy.count(l)) throw ScenarioError("level '" + l + "' is not connected to the reference level");
    }
  } else if (reference) {
    throw ScenarioError("'reference' is only valid with pair lines", reference->line);
  }

  for (const auto& e : body["couplings"]) {
    const auto words = detail::split_ws(e.key);
    if (words.size() != 2) throw ScenarioError("coupling key must be two level labels", e.line);
    for (const auto& w : words) {
      if (!energy.count(w)) throw ScenarioError("unknown level '" + w + "'", e.line);
    }
    add_coupling(words[0], words[1], detail::parse_double(e.value, e.line, "mu"), e.line);
  }

  Scenario s;
  {
    std::vector<double> en;
    for (const auto& l : labels) en.push_back(energy[l]);
    const auto n = static_cast<Eigen::Index>(labels.size());
    Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(n, n);
    auto idx = [&](const std::string& l) {
      return static_cast<Eigen::Index>(std::find(labels.begin(), labels.end(), l) - labels.begin());
    };
    for (const auto& [k, v] : coupling) {
      mu(idx(k.first), idx(k.second)) = v.first;
      mu(idx(k.second), idx(k.first)) = v.first;
    }
    try {
      s.system = build_system(labels, en, mu);
    } catch (const ValidationError& e) {
      throw ScenarioError(std::string("levels: ") + e.what());
    }
  }

  auto level_of = [&](const Entry& e) {
    try {
      return s.system.index_of(e.value);
    } catch (const ValidationError&) {
      throw ScenarioError("field '" + e.key + "': unknown level '" + e.value + "'", e.line);
    }
  };

  // [target]
  if (!target.count("alpha") || !target.count("beta")) throw ScenarioError("[target] needs 'alpha' and 'beta'");
  try {
    s.target = make_target(s.system, level_of(target.at("alpha")), level_of(target.at("beta")));
  } catch (const ValidationError& e) {
    throw ScenarioError(std::string("target: ") + e.what(), target.at("beta").line);
  }
  s.initial = s.target.alpha;
  if (target.count("initial")) {
    const auto& e = target.at("initial");
    if (e.value == "alpha") {
      s.initial = s.target.alpha;
    } else if (e.value == "beta") {
      s.initial = s.target.beta;
    } else {
      s.initial = level_of(e);
      if (s.initial != s.target.alpha && s.initial != s.target.beta) {
        throw ScenarioError("field 'initial' must be one of the target levels", e.line);
      }
    }
  }

  // [perturbers]: <level> = alpha|beta
  for (const auto& e : body["perturbers"]) {
    Attachment att;
    if (e.value == "alpha" || e.value == s.system.label(s.target.alpha)) {
      att = Attachment::alpha;
    } else if (e.value == "beta" || e.value == s.system.label(s.target.beta)) {
      att = Attachment::beta;
    } else {
      throw ScenarioError("perturber '" + e.key + "' must attach to alpha or beta", e.line);
    }
    std::size_t lvl;
    try {
      lvl = s.system.index_of(e.key);
    } catch (const ValidationError&) {
      throw ScenarioError("unknown perturber level '" + e.key + "'", e.line);
    }
    for (const auto& p : s.perturbers) {
      if (p.level == lvl) throw ScenarioError("duplicate perturber '" + e.key + "'", e.line);
    }
    try {
      s.perturbers.push_back(make_perturber(s.system, s.target, lvl, att));
    } catch (const ValidationError& ex) {
      throw ScenarioError(std::string("perturbers: ") + ex.what(), e.line);
    }
  }

  // [drive]
  if (!drive.count("F0")) throw ScenarioError("[drive] needs 'F0'");
  s.f0 = detail::parse_double(drive.at("F0").value, drive.at("F0").line, "F0");
  if (s.f0 < 0.0) throw ScenarioError("field 'F0' must be non-negative", drive.at("F0").line);
  if (drive.count("envelope")) {
    try {
      s.envelope = parse_envelope_shape(drive.at("envelope").value);
    } catch (const ValidationError& e) {
      throw ScenarioError(std::string("field 'envelope': ") + e.what(), drive.at("envelope").line);
    }
  }
  if (drive.count("n_half")) {
    const auto& e = drive.at("n_half");
    const long n = detail::parse_int(e.value, e.line, "n_half");
    if (n < 1 || n > 1'000'000) throw ScenarioError("field 'n_half' must be >= 1", e.line);
    s.n_half = static_cast<int>(n);
  }
  if (drive.count("mode")) {
    const auto& e = drive.at("mode");
    const auto m = parse_run_mode(e.value);
    if (!m) throw ScenarioError("field 'mode': unknown mode '" + e.value + "'", e.line);
    s.mode = *m;
  }
  if (drive.count("T")) {
    const auto& e = drive.at("T");
    const double t = detail::parse_double(e.value, e.line, "T");
    if (!(t > 0.0)) throw ScenarioError("field 'T' must be positive", e.line);
    s.manual_duration = t;
  }
  if (drive.count("epsilon_detuning")) {
    const auto& e = drive.at("epsilon_detuning");
    if (e.value == "chirp") {
      s.detuning = EpsilonDetuning::chirp;
    } else if (e.value == "none") {
      s.detuning = EpsilonDetuning::none;
    } else {
      throw ScenarioError("field 'epsilon_detuning' must be 'chirp' or 'none'", e.line);
    }
  }
  if (s.mode == RunMode::manual && !s.manual_duration) {
    throw ScenarioError("field 'T': mode = manual requires an explicit duration T");
  }
  if (s.f0 == 0.0 && s.mode != RunMode::manual) {
    throw ScenarioError("field 'F0': a zero field can only be run in manual mode");
  }

  // [numerics]
  if (num.count("tol")) {
    s.numerics.tol = detail::parse_double(num.at("tol").value, num.at("tol").line, "tol");
    if (!(s.numerics.tol > 0.0)) throw ScenarioError("field 'tol' must be positive", num.at("tol").line);
  }
  if (num.count("grid")) {
    const long g = detail::parse_int(num.at("grid").value, num.at("grid").line, "grid");
    if (g < 2) throw ScenarioError("field 'grid' must be >= 2", num.at("grid").line);
    s.numerics.grid = static_cast<std::size_t>(g);
  }
  if (num.count("fixed_point_tol")) {
    const auto& e = num.at("fixed_point_tol");
    s.numerics.fixed_point_tol = detail::parse_double(e.value, e.line, "fixed_point_tol");
    if (!(s.numerics.fixed_point_tol > 0.0)) throw ScenarioError("field 'fixed_point_tol' must be positive", e.line);
  }
  if (num.count("max_iter")) {
    const long m = detail::parse_int(num.at("max_iter").value, num.at("max_iter").line, "max_iter");
    if (m < 1) throw ScenarioError("field 'max_iter' must be >= 1", num.at("max_iter").line);
    s.numerics.max_iter = static_cast<std::size_t>(m);
  }
  return s;
}

/// Writes the canonical (absolute-energy) form.
inline std::string serialize_scenario(const Scenario& s) {
  using detail::format_double;
  std::ostringstream out;
  const auto& sys = s.system;
  out << "[levels]\n";
  for (std::size_t i = 0; i < sys.size(); ++i) out << sys.label(i) << " = " << format_double(sys.energy(i)) << "\n";
  out << "\n[couplings]\n";
  for (std::size_t i = 0; i < sys.size(); ++i) {
    for (std::size_t j = i + 1; j < sys.size(); ++j) {
      if (sys.moment(i, j) != 0.0) {
        out << sys.label(i) << " " << sys.label(j) << " = " << format_double(sys.moment(i, j)) << "\n";
      }
    }
  }
  out << "\n[target]\nalpha = " << sys.label(s.target.alpha) << "\nbeta = " << sys.label(s.target.beta)
      << "\ninitial = " << (s.initial == s.target.alpha ? "alpha" : "beta") << "\n";
  if (!s.perturbers.empty()) {
    out << "\n[perturbers]\n";
    for (const auto& p : s.perturbers) {
      out << sys.label(p.level) << " = " << (p.attached_to == Attachment::alpha ? "alpha" : "beta") << "\n";
    }
  }
  out << "\n[drive]\nF0 = " << format_double(s.f0) << "\nenvelope = " << to_string(s.envelope)
      << "\nn_half = " << s.n_half << "\nmode = " << to_string(s.mode) << "\n";
  if (s.manual_duration) out << "T = " << format_double(*s.manual_duration) << "\n";
  out << "epsilon_detuning = " << (s.detuning == EpsilonDetuning::chirp ? "chirp" : "none") << "\n";
  out << "\n[numerics]\ntol = " << format_double(s.numerics.tol) << "\ngrid = " << s.numerics.grid
      << "\nfixed_point_tol = " << format_double(s.numerics.fixed_point_tol)
      << "\nmax_iter = " << s.numerics.max_iter << "\n";
  return out.str();
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ScenarioError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace rabipulse
