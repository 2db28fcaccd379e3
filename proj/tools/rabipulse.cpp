// rabipulse: design, simulate, compare and sweep pulse scenarios.
//
//   rabipulse design   <scn> [--out file]
//   rabipulse simulate <scn> [--mode M] [--traj csv] [--summary file]
//   rabipulse compare  <scn> [--out file]
//   rabipulse sweep    <scn> --param F0|n_half --from A --to B --steps K [--out file]
//
// Exit status: 0 ok, 1 scenario/validation error, 2 numerical failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rabipulse/rabipulse.hpp"

namespace {

using namespace rabipulse;

struct Globals {
  std::optional<double> tol;
  std::optional<std::size_t> grid;
  std::string format = "text";
};

OutputFormat output_format(const Globals& g) {
  return g.format == "structured" ? OutputFormat::structured : OutputFormat::text;
}

Scenario load(const std::string& path, const Globals& g) {
  Scenario s = load_scenario(path);
  if (g.tol) {
    if (!(*g.tol > 0.0)) throw ValidationError("--tol must be positive");
    s.numerics.tol = *g.tol;
  }
  if (g.grid) s.numerics.grid = *g.grid;
  return s;
}

// Writes to `path`, or stdout when empty.
template <class Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ScenarioError("cannot open output file '" + path + "'");
  fn(f);
}

int norm_status(bool exceeded) {
  if (exceeded) {
    std::cerr << "error: norm drift exceeded the configured bound\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leak-corrected pi-pulse design and few-level propagation"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--tol", g.tol, "Relative integrator tolerance (default 1e-10)");
  app.add_option("--grid", g.grid, "Output grid size (default 2000)")->check(CLI::Range(2, 100'000'000));
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"text", "structured"}));

  std::string scn, out, traj, summary, mode_name, param;
  double from = 0.0, to = 0.0;
  long steps = 0;
  std::vector<double> values;

  auto* design = app.add_subcommand("design", "Compute T_pi, T_opt and the chirp");
  design->add_option("scenario", scn)->required();
  design->add_option("--out", out);

  auto* simulate = app.add_subcommand("simulate", "Integrate one run mode");
  simulate->add_option("scenario", scn)->required();
  simulate->add_option("--mode", mode_name)->check(
      CLI::IsMember({"unoptimized", "frequency_only", "optimized", "manual"}));
  simulate->add_option("--traj", traj, "Trajectory CSV");
  simulate->add_option("--summary", summary, "Summary file (stdout if omitted)");

  auto* cmp = app.add_subcommand("compare", "Run all applicable modes side by side");
  cmp->add_option("scenario", scn)->required();
  cmp->add_option("--out", out);

  auto* sw = app.add_subcommand("sweep", "Sweep F0 or n_half");
  sw->add_option("scenario", scn)->required();
  sw->add_option("--param", param)->required()->check(CLI::IsMember({"F0", "n_half"}));
  auto* from_opt = sw->add_option("--from", from);
  auto* to_opt = sw->add_option("--to", to);
  auto* steps_opt = sw->add_option("--steps", steps);
  auto* values_opt = sw->add_option("--values", values, "Explicit grid instead of --from/--to/--steps");
  from_opt->excludes(values_opt);
  to_opt->excludes(values_opt);
  steps_opt->excludes(values_opt);
  sw->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (design->parsed()) {
      const Scenario s = load(scn, g);
      const RunMode mode = s.mode;
      const Design d = design_for(s, mode);
      emit(out, [&](std::ostream& os) { write_design_report(os, s, d.report, output_format(g)); });
      return 0;
    }
    if (simulate->parsed()) {
      const Scenario s = load(scn, g);
      RunMode mode = s.mode;
      if (!mode_name.empty()) mode = *parse_run_mode(mode_name);
      const RunResult r = run_mode(s, mode);
      if (!traj.empty()) emit(traj, [&](std::ostream& os) { write_trajectory_csv(os, s.system, r.trajectory); });
      emit(summary, [&](std::ostream& os) { write_summary(os, r.summary, output_format(g)); });
      return norm_status(r.summary.norm_exceeded);
    }
    if (cmp->parsed()) {
      const Scenario s = load(scn, g);
      const auto rows = compare(s);
      emit(out, [&](std::ostream& os) { write_comparison(os, rows, output_format(g)); });
      bool exceeded = false;
      for (const auto& r : rows) exceeded = exceeded || r.norm_exceeded;
      return norm_status(exceeded);
    }
    if (sw->parsed()) {
      const Scenario s = load(scn, g);
      const SweepParam p = param == "F0" ? SweepParam::f0 : SweepParam::n_half;
      if (values.empty()) {
        if (!from_opt->count() || !to_opt->count() || !steps_opt->count()) {
          throw ValidationError("sweep needs --from, --to and --steps (or --values)");
        }
        values = sweep_grid(from, to, steps);
      }
      const auto rows = sweep(s, p, values);
      emit(out, [&](std::ostream& os) { write_sweep(os, p, rows, output_format(g)); });
      bool exceeded = false;
      for (const auto& r : rows) exceeded = exceeded || r.summary.norm_exceeded;
      return norm_status(exceeded);
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    if (!e.history().empty()) {
      std::cerr << "iterates:";
      for (double v : e.history()) std::cerr << ' ' << v;
      std::cerr << '\n';
    }
    return 2;
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
