#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rabipulse/rabipulse.hpp"

namespace testing_support {

using namespace rabipulse;

// HF vibrational ladder: v=0, v=1, v=2 with omega_ba = 0.017671, omega_bp = 0.017611.
inline LevelSystem hf_system(double mu_ab = 0.073, double mu_bp = 0.098) {
  Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(3, 3);
  mu(0, 1) = mu(1, 0) = mu_ab;
  mu(1, 2) = mu(2, 1) = mu_bp;
  return build_system({"alpha", "beta", "p"}, {0.0, 0.017671, 0.017671 + 0.017611}, mu);
}

inline TargetPair hf_pair(const LevelSystem& s) { return make_target(s, 0, 1); }

inline std::vector<PerturberSpec> hf_leak(const LevelSystem& s) {
  return {make_perturber(s, hf_pair(s), 2, Attachment::beta)};
}

inline LevelSystem two_level(double omega = 1.0, double mu = 1.0) {
  Eigen::MatrixXd m(2, 2);
  m << 0.0, mu, mu, 0.0;
  return build_system({"g", "e"}, {0.0, omega}, m);
}

// Composite Simpson with n (even) panels; independent of the library's quadrature.
template <class F>
double composite_simpson(F&& f, double a, double b, int n = 20000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

inline std::string scenario_path(const std::string& name) { return std::string(SCENARIO_DIR) + "/" + name; }

// F0 giving sigma_bp^2 = s2 for the HF ladder.
inline double hf_f0_for_sigma_sq(double s2, double mu_bp = 0.098) {
  return std::sqrt(s2) * 2.0 * 6.0e-5 / mu_bp;
}

}  // namespace testing_support
