// Designs a leak-corrected pi-pulse for a three-level ladder and compares its
// transfer against the plain resonant pulse of the same peak field.
//
//   leak_demo [F0]

#include <cstdio>
#include <cstdlib>

#include "rabipulse/rabipulse.hpp"

using namespace rabipulse;

int main(int argc, char** argv) {
  const double f0 = argc > 1 ? std::atof(argv[1]) : 4.07606e-4;

  const LevelSystem hf = build_system({"v0", "v1", "v2"}, {0.0, 0.017671, 0.035282},
                                      (Eigen::MatrixXd(3, 3) << 0.0, 0.07277, 0.0, 0.07277, 0.0, 0.098, 0.0, 0.098, 0.0).finished());
  const TargetPair pair = make_target(hf, 0, 1);
  const std::vector<PerturberSpec> leaks = {make_perturber(hf, pair, 2, Attachment::beta)};

  std::printf("F0 = %.6g a.u.\n\n", f0);
  std::printf("%-15s %12s %12s %10s %10s\n", "pulse", "T", "omega(T/2)", "Pi_v1", "max Pi_v2");
  for (auto mode : {DesignMode::unoptimized, DesignMode::frequency_only, DesignMode::optimized}) {
    const Design d = design_pulse(hf, pair, leaks, f0, EnvelopeShape::sin2, 1, mode);
    double leak_peak = 0.0;
    const Trajectory tr = integrate(hf, d.pulse, basis_state(3, 0), {},
                                    [&](double, const StateVector& a) { leak_peak = std::max(leak_peak, std::norm(a(2))); });
    const char* name = mode == DesignMode::unoptimized      ? "resonant"
                       : mode == DesignMode::frequency_only ? "chirp only"
                                                            : "chirp + T_opt";
    std::printf("%-15s %12.1f %12.8f %10.6f %10.6f\n", name, d.pulse.duration(),
                carrier_frequency(d.pulse, 0.5 * d.pulse.duration()), std::norm(tr.final_state(1)), leak_peak);
  }
  return 0;
}
