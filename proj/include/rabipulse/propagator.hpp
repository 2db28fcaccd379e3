#pragma once

// Direct integration of the interaction-picture Schrodinger equation
// da/dt = -i V(t) a with both rotating and counter-rotating terms, and the
// leak-corrected two-level model used as an analytic cross-check.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "rabipulse/designer.hpp"
#include "rabipulse/errors.hpp"
#include "rabipulse/levels.hpp"
#include "rabipulse/ode.hpp"
#include "rabipulse/pulse.hpp"

namespace rabipulse {

using StateVector = Eigen::VectorXcd;

/// Unit population in one level.
inline StateVector basis_state(std::size_t n, std::size_t level) {
  if (level >= n) throw ValidationError("initial level out of range");
  StateVector a = StateVector::Zero(static_cast<Eigen::Index>(n));
  a(static_cast<Eigen::Index>(level)) = 1.0;
  return a;
}

namespace detail {

struct Coupling {
  Eigen::Index i = 0;
  Eigen::Index j = 0;
  double half_rabi = 0.0;  // F0 mu_ij / 2
  double sign = 0.0;       // s_ij
  double omega = 0.0;      // omega_ij
};

inline std::vector<Coupling> couplings(const LevelSystem& system, double f0) {
  std::vector<Coupling> out;
  for (std::size_t i = 0; i < system.size(); ++i) {
    for (std::size_t j = i + 1; j < system.size(); ++j) {
      const double mu = system.moment(i, j);
      if (mu == 0.0) continue;
      const double de = system.energy(i) - system.energy(j);
      out.push_back({static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), 0.5 * f0 * mu,
                     de > 0.0 ? 1.0 : -1.0, std::abs(de)});
    }
  }
  return out;
}

// V_ij for i < j. Phases are grouped as (base -/+ omega_ij) t + C S(t) so the
// near-resonant difference is formed before multiplying by t.
inline std::complex<double> element(const Coupling& c, const PulseSpec& pulse, double m, double sq_integral,
                                    double t) {
  const double chirp_phase = pulse.carrier.coefficient * sq_integral;
  const double rotating = c.sign * ((pulse.carrier.base - c.omega) * t + chirp_phase);
  const double counter = -c.sign * ((pulse.carrier.base + c.omega) * t + chirp_phase);
  return c.half_rabi * m * (std::polar(1.0, rotating) + std::polar(1.0, counter));
}

}  // namespace detail

/// V(t) with V_ij = (F0 mu_ij / 2) m(t) (e^{i s_ij (w(t) - w_ij) t} + e^{-i s_ij (w(t) + w_ij) t}).
inline Eigen::MatrixXcd interaction_matrix(const LevelSystem& system, const PulseSpec& pulse, double t) {
  const auto n = static_cast<Eigen::Index>(system.size());
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(n, n);
  const double m = pulse.envelope.value(t);
  const double s = pulse.carrier.coefficient == 0.0 ? 0.0 : pulse.envelope.sq_integral(t);
  for (const auto& c : detail::couplings(system, pulse.amplitude)) {
    const auto vij = detail::element(c, pulse, m, s, t);
    v(c.i, c.j) = vij;
    v(c.j, c.i) = std::conj(vij);
  }
  return v;
}

struct PropagationOptions {
  double tol = 1e-10;
  std::size_t grid = 2000;
  /// Trajectories whose norm drifts beyond this are flagged.
  double norm_bound = 1e-6;
  /// Step cap as a fraction of the shortest period among rotating and
  /// counter-rotating terms.
  double carrier_step_fraction = 1.0 / 40.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> amplitudes;
  std::vector<std::vector<double>> populations;  ///< [sample][level]
  std::vector<double> carrier_samples;
  std::vector<double> envelope_samples;
  std::vector<double> norm_errors;  ///< sum_i Pi_i - 1 at each sample
  /// max |sum_i Pi_i - 1| over every accepted step
  double norm_drift = 0.0;
  bool norm_exceeded = false;
  StateVector final_state;
  OdeStats stats;
};

/// Called at t = 0 and after every accepted step with the state at step end.
using StepObserver = std::function<void(double, const StateVector&)>;

inline double max_step_for(const LevelSystem& system, const PulseSpec& pulse, double fraction) {
  const double w_max = std::abs(pulse.carrier.base) + std::abs(pulse.carrier.coefficient);
  double fastest = 0.0;
  for (std::size_t i = 0; i < system.size(); ++i) {
    for (std::size_t j = i + 1; j < system.size(); ++j) {
      if (system.moment(i, j) != 0.0) fastest = std::max(fastest, w_max + std::abs(system.energy(i) - system.energy(j)));
    }
  }
  if (fastest == 0.0) return pulse.duration();
  return fraction * 2.0 * std::numbers::pi / fastest;
}

/// da/dt = -i V(t) a, evaluated with the couplings precomputed once.
class SchrodingerRhs {
 public:
  SchrodingerRhs(const LevelSystem& system, const PulseSpec& pulse)
      : pulse_(pulse), couplings_(detail::couplings(system, pulse.amplitude)) {}

  void operator()(double t, const StateVector& a, StateVector& da) const {
    const double tc = std::clamp(t, 0.0, pulse_.duration());
    const double m = pulse_.envelope.value(tc);
    const double s = pulse_.carrier.coefficient != 0.0 ? pulse_.envelope.sq_integral(tc) : 0.0;
    da.setZero();
    for (const auto& c : couplings_) {
      const auto vij = detail::element(c, pulse_, m, s, tc);
      da(c.i) += vij * a(c.j);
      da(c.j) += std::conj(vij) * a(c.i);
    }
    da *= std::complex<double>(0.0, -1.0);
  }

 private:
  PulseSpec pulse_;
  std::vector<detail::Coupling> couplings_;
};

inline OdeTolerances ode_tolerances(const LevelSystem& system, const PulseSpec& pulse, const PropagationOptions& opt) {
  OdeTolerances tol;
  tol.rtol = opt.tol;
  tol.atol = opt.tol;
  tol.max_step = max_step_for(system, pulse, opt.carrier_step_fraction);
  return tol;
}

/// Propagates a state from t0 to t1 inside the pulse support; t1 < t0
/// integrates backward.
inline StateVector propagate(const LevelSystem& system, const PulseSpec& pulse, StateVector state, double t0,
                             double t1, const PropagationOptions& opt = {}) {
  if (static_cast<std::size_t>(state.size()) != system.size()) {
    throw ValidationError("state dimension does not match the level system");
  }
  (void)pulse.envelope.value(t0);
  (void)pulse.envelope.value(t1);
  auto stepper = make_dopri<StateVector>(SchrodingerRhs(system, pulse), ode_tolerances(system, pulse, opt));
  stepper.integrate(t0, state, t1);
  return state;
}

/// Integrates from t = 0 to T and samples `grid` uniformly spaced points
/// (including both ends) by dense output.
inline Trajectory integrate(const LevelSystem& system, const PulseSpec& pulse, const StateVector& initial_state,
                            const PropagationOptions& opt = {}, const StepObserver& observer = {}) {
  if (static_cast<std::size_t>(initial_state.size()) != system.size()) {
    throw ValidationError("initial state dimension does not match the level system");
  }
  if (std::abs(initial_state.squaredNorm() - 1.0) > 1e-12) throw ValidationError("initial state is not normalized");
  if (opt.grid < 2) throw ValidationError("output grid needs at least 2 points");

  const double total = pulse.duration();
  auto stepper = make_dopri<StateVector>(SchrodingerRhs(system, pulse), ode_tolerances(system, pulse, opt));

  Trajectory tr;
  tr.times.reserve(opt.grid);
  const auto n = system.size();
  auto sample = [&](double t, const StateVector& a) {
    const double tc = std::clamp(t, 0.0, total);
    tr.times.push_back(tc);
    tr.amplitudes.push_back(a);
    std::vector<double> pops(n);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      pops[i] = std::norm(a(static_cast<Eigen::Index>(i)));
      sum += pops[i];
    }
    tr.populations.push_back(std::move(pops));
    tr.norm_errors.push_back(sum - 1.0);
    tr.carrier_samples.push_back(carrier_frequency(pulse, tc));
    tr.envelope_samples.push_back(pulse.envelope.value(tc));
  };
  auto grid_time = [&](std::size_t k) {
    return k + 1 == opt.grid ? total : total * static_cast<double>(k) / static_cast<double>(opt.grid - 1);
  };

  StateVector a = initial_state;
  sample(0.0, a);
  if (observer) observer(0.0, a);
  std::size_t next = 1;
  tr.stats = stepper.integrate(0.0, a, total, [&](const DopriStep<StateVector>& st) {
    while (next < opt.grid && grid_time(next) <= st.t_new) {
      const double tg = grid_time(next);
      if (tg == st.t_new) {
        sample(tg, *st.y_new);
      } else {
        sample(tg, st.dense(tg));
      }
      ++next;
    }
    tr.norm_drift = std::max(tr.norm_drift, std::abs(st.y_new->squaredNorm() - 1.0));
    if (observer) observer(st.t_new, *st.y_new);
  });
  while (next < opt.grid) sample(grid_time(next++), a);
  tr.final_state = a;
  tr.norm_exceeded = tr.norm_drift > opt.norm_bound;
  return tr;
}

/// Leak-corrected two-level coefficients at one instant.
struct ReducedModelCoeffs {
  double eps_alpha_q = 0.0;
  double eps_beta_p = 0.0;
  double zeta_alpha = 1.0;  ///< 1 / (1 + eps_aq)
  double zeta_beta = 1.0;   ///< 1 / (1 + eps_bp)
  double xi_alpha = 0.0;    ///< -d/dtau ln (1 + eps_aq)^(1/2)
  double xi_beta = 0.0;     ///< -d/dtau ln (1 + eps_bp)^(1/2)
  double kappa = 1.0;       ///< sqrt((1 + eps_aq)(1 + eps_bp))
};

inline ReducedModelCoeffs reduced_coeffs(const LeakModel& leak, const PulseSpec& pulse, double t) {
  ReducedModelCoeffs c;
  c.eps_alpha_q = leak.epsilon(pulse, t, Attachment::alpha);
  c.eps_beta_p = leak.epsilon(pulse, t, Attachment::beta);
  c.zeta_alpha = 1.0 / (1.0 + c.eps_alpha_q);
  c.zeta_beta = 1.0 / (1.0 + c.eps_beta_p);
  c.xi_alpha = -0.5 * leak.log_rate_tau(pulse, t, Attachment::alpha);
  c.xi_beta = -0.5 * leak.log_rate_tau(pulse, t, Attachment::beta);
  c.kappa = std::sqrt((1.0 + c.eps_alpha_q) * (1.0 + c.eps_beta_p));
  return c;
}

struct ReducedTrajectory {
  std::vector<double> tau;
  std::vector<double> times;
  std::vector<Eigen::Vector2cd> amplitudes;  ///< (b_alpha, b_beta)
  std::vector<double> pop_alpha;
  std::vector<double> pop_beta;
  Eigen::Vector2cd final_state;
};

/// Integrates db/dtau = -i [[i xi_a, zeta_a], [zeta_b, i xi_b]] b over the
/// pulse's full scaled-time span. The generator is not Hermitian, so no norm
/// check applies.
inline ReducedTrajectory integrate_reduced(const LevelSystem& system, const TargetPair& pair,
                                           const std::vector<PerturberSpec>& perturbers, const PulseSpec& pulse,
                                           Attachment initial = Attachment::alpha, const PropagationOptions& opt = {},
                                           EpsilonDetuning detuning = EpsilonDetuning::chirp) {
  if (opt.grid < 2) throw ValidationError("output grid needs at least 2 points");
  const LeakModel leak(system, pair, perturbers, pulse.amplitude, detuning);
  const double mu_ab = std::abs(system.moment(pair.alpha, pair.beta));
  const double tau_total = tau_of_t(pulse, mu_ab, pulse.duration());

  using V = Eigen::VectorXcd;
  const std::complex<double> i1(0.0, 1.0);
  auto rhs = [&](double tau, const V& b, V& db) {
    const double t = t_of_tau(pulse, mu_ab, std::clamp(tau, 0.0, tau_total));
    const auto c = reduced_coeffs(leak, pulse, t);
    db(0) = c.xi_alpha * b(0) - i1 * c.zeta_alpha * b(1);
    db(1) = -i1 * c.zeta_beta * b(0) + c.xi_beta * b(1);
  };
  OdeTolerances tol;
  tol.rtol = opt.tol;
  tol.atol = opt.tol;
  auto stepper = make_dopri<V>(rhs, tol);

  ReducedTrajectory tr;
  auto sample = [&](double tau, const V& b) {
    const double tc = std::clamp(tau, 0.0, tau_total);
    tr.tau.push_back(tc);
    tr.times.push_back(t_of_tau(pulse, mu_ab, tc));
    tr.amplitudes.emplace_back(b(0), b(1));
    tr.pop_alpha.push_back(std::norm(b(0)));
    tr.pop_beta.push_back(std::norm(b(1)));
  };
  auto grid_tau = [&](std::size_t k) {
    return k + 1 == opt.grid ? tau_total : tau_total * static_cast<double>(k) / static_cast<double>(opt.grid - 1);
  };
  V b = V::Zero(2);
  b(initial == Attachment::alpha ? 0 : 1) = 1.0;
  sample(0.0, b);
  std::size_t next = 1;
  stepper.integrate(0.0, b, tau_total, [&](const DopriStep<V>& st) {
    while (next < opt.grid && grid_tau(next) <= st.t_new) {
      const double tg = grid_tau(next);
      sample(tg, tg == st.t_new ? V(*st.y_new) : st.dense(tg));
      ++next;
    }
  });
  while (next < opt.grid) sample(grid_tau(next++), b);
  tr.final_state = Eigen::Vector2cd(b(0), b(1));
  return tr;
}

/// Pointwise eps(t_k) * Pi_beta(t_k) along a trajectory.
template <class EpsFn>
std::vector<double> predicted_perturber_population(const Trajectory& trajectory, std::size_t beta_level,
                                                   EpsFn&& epsilon_of_t) {
  std::vector<double> out;
  out.reserve(trajectory.times.size());
  for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
    out.push_back(epsilon_of_t(trajectory.times[k]) * trajectory.populations[k].at(beta_level));
  }
  return out;
}

}  // namespace rabipulse
