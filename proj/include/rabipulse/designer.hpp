#pragma once

// Analytic pulse design for alpha <-> beta transfer in the presence of
// perturbing levels: perturbation strength sigma, detuning ratio Delta, leak
// ratio epsilon, the chirped carrier, the pi-pulse duration and the
// leak-corrected transfer duration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "rabipulse/errors.hpp"
#include "rabipulse/levels.hpp"
#include "rabipulse/pulse.hpp"
#include "rabipulse/quadrature.hpp"

namespace rabipulse {

/// How Delta enters epsilon: from the actual (chirped) carrier, or pinned to
/// zero (lowest-order form).
enum class EpsilonDetuning { chirp, none };

/// Per-perturber diagnostics: sigma, Delta(t), epsilon(t).
class PerturberAnalysis {
 public:
  PerturberAnalysis(const LevelSystem& system, const TargetPair& pair, const PerturberSpec& perturber, double f0)
      : spec_(perturber) {
    const auto host = attached_level(pair, perturber);
    const auto other = other_level(pair, perturber);
    const auto target = transition(system, host, other, pair);
    const auto pert = transition(system, host, perturber.level, pair);
    omega_target_ = target.omega;
    omega_perturber_ = pert.omega;
    sign_factor_ = target.sign * pert.sign;
    if (omega_target_ == omega_perturber_) {
      throw ValidationError("perturber '" + system.label(perturber.level) +
                            "' is resonant with the target transition; sigma is singular");
    }
    sigma_ = f0 * pert.moment / (2.0 * (omega_target_ - omega_perturber_));
    half_rabi_ = 0.5 * f0 * std::abs(system.moment(pair.alpha, pair.beta));
  }

  const PerturberSpec& spec() const noexcept { return spec_; }
  double sigma() const noexcept { return sigma_; }
  double sigma_sq() const noexcept { return sigma_ * sigma_; }
  double omega_target() const noexcept { return omega_target_; }
  double omega_perturber() const noexcept { return omega_perturber_; }
  /// s_{host,other} * s_{host,perturber}
  int sign_factor() const noexcept { return sign_factor_; }

  /// Delta = (omega - omega_ab) / (omega_perturber - omega_ab).
  double delta(double omega) const { return (omega - omega_target_) / (omega_perturber_ - omega_target_); }

  double delta_at(const PulseSpec& pulse, double t, EpsilonDetuning mode) const {
    if (mode == EpsilonDetuning::none) return 0.0;
    return delta(carrier_frequency(pulse, t));
  }

  /// epsilon = (sigma m / (1 - Delta))^2.
  double epsilon(const PulseSpec& pulse, double t, EpsilonDetuning mode = EpsilonDetuning::chirp) const {
    const double m = pulse.envelope.value(t);
    const double q = sigma_ * m / one_minus_delta(pulse, t, mode);
    return q * q;
  }

  /// d epsilon / d tau, with the envelope factor of d tau / dt cancelled
  /// analytically so the rate stays finite at envelope zeros.
  double epsilon_rate_tau(const PulseSpec& pulse, double t, EpsilonDetuning mode = EpsilonDetuning::chirp) const {
    const double m = pulse.envelope.value(t);
    const double dm = pulse.envelope.derivative(t);
    const double u = one_minus_delta(pulse, t, mode);
    double ddelta = 0.0;
    if (mode == EpsilonDetuning::chirp) {
      ddelta = pulse.carrier.frequency_rate(pulse.envelope, t) / (omega_perturber_ - omega_target_);
    }
    return 2.0 * sigma_ * sigma_ / half_rabi_ * (dm / (u * u) + m * ddelta / (u * u * u));
  }

 private:
  double one_minus_delta(const PulseSpec& pulse, double t, EpsilonDetuning mode) const {
    const double u = 1.0 - delta_at(pulse, t, mode);
    if (std::abs(u) < 1e-12) {
      throw NumericalError("carrier is resonant with the perturbing transition (Delta = 1); leak model is singular");
    }
    return u;
  }

  PerturberSpec spec_;
  double omega_target_ = 0.0;
  double omega_perturber_ = 0.0;
  int sign_factor_ = 0;
  double sigma_ = 0.0;
  double half_rabi_ = 0.0;
};

inline double sigma(const LevelSystem& system, const TargetPair& pair, const PerturberSpec& perturber, double f0) {
  return PerturberAnalysis(system, pair, perturber, f0).sigma();
}

inline double delta(const LevelSystem& system, const TargetPair& pair, const PerturberSpec& perturber,
                    double omega) {
  return PerturberAnalysis(system, pair, perturber, 0.0).delta(omega);
}

inline double epsilon(const LevelSystem& system, const TargetPair& pair, const PerturberSpec& perturber,
                      const PulseSpec& pulse, double t, EpsilonDetuning mode = EpsilonDetuning::chirp) {
  return PerturberAnalysis(system, pair, perturber, pulse.amplitude).epsilon(pulse, t, mode);
}

/// Combined leak factors of all perturbers: (1 + E_level) = prod (1 + eps_i)
/// separately for the alpha- and beta-attached groups.
class LeakModel {
 public:
  LeakModel(const LevelSystem& system, const TargetPair& pair, const std::vector<PerturberSpec>& perturbers,
            double f0, EpsilonDetuning mode)
      : mode_(mode) {
    for (const auto& p : perturbers) analyses_.emplace_back(system, pair, p, f0);
  }

  const std::vector<PerturberAnalysis>& analyses() const noexcept { return analyses_; }
  EpsilonDetuning mode() const noexcept { return mode_; }
  bool empty() const noexcept { return analyses_.empty(); }

  /// E for the given target level (sum over attached perturbers, combined multiplicatively).
  double epsilon(const PulseSpec& pulse, double t, Attachment level) const {
    double f = 1.0;
    for (const auto& a : analyses_) {
      if (a.spec().attached_to == level) f *= 1.0 + a.epsilon(pulse, t, mode_);
    }
    return f - 1.0;
  }

  /// d/dtau ln(1 + E_level).
  double log_rate_tau(const PulseSpec& pulse, double t, Attachment level) const {
    double r = 0.0;
    for (const auto& a : analyses_) {
      if (a.spec().attached_to == level) {
        r += a.epsilon_rate_tau(pulse, t, mode_) / (1.0 + a.epsilon(pulse, t, mode_));
      }
    }
    return r;
  }

  /// 1 / sqrt((1 + E_alpha)(1 + E_beta)), the weight on d tau in the
  /// corrected transfer condition.
  double tau_weight(const PulseSpec& pulse, double t) const {
    return 1.0 / std::sqrt((1.0 + epsilon(pulse, t, Attachment::alpha)) * (1.0 + epsilon(pulse, t, Attachment::beta)));
  }

 private:
  EpsilonDetuning mode_;
  std::vector<PerturberAnalysis> analyses_;
};

struct ChirpDesign {
  ChirpProfile carrier;
  /// No beta-attached perturber: the carrier stays at omega_ab.
  bool fixed_fallback = false;
  /// More than one beta-attached perturber: terms were summed.
  bool extrapolated = false;
};

/// Chirp coefficient C = sum over beta-attached perturbers of
/// (s_ba s_bp) (w_bp - w_ab) (2 w_bp / (w_ab + w_bp)) sigma_bp^2.
inline ChirpDesign chirp_design(const LevelSystem& system, const TargetPair& pair,
                                const std::vector<PerturberSpec>& perturbers, double f0) {
  if (!(f0 >= 0.0)) throw ValidationError("chirp design requires F0 >= 0");
  const double w_ab = transition(system, pair.alpha, pair.beta, pair).omega;
  ChirpDesign out;
  double c = 0.0;
  int count = 0;
  for (const auto& p : perturbers) {
    if (p.attached_to != Attachment::beta) continue;
    const PerturberAnalysis a(system, pair, p, f0);
    const double w_bp = a.omega_perturber();
    c += a.sign_factor() * (w_bp - w_ab) * (2.0 * w_bp / (w_ab + w_bp)) * a.sigma_sq();
    ++count;
  }
  out.carrier = ChirpProfile{w_ab, c};
  out.fixed_fallback = count == 0;
  out.extrapolated = count > 1;
  return out;
}

/// Duration T with (F0 mu_ab / 2) \int_0^T m = n_half pi / 2.
inline double pi_pulse_duration(const LevelSystem& system, const TargetPair& pair, double f0, EnvelopeShape shape,
                                int n_half) {
  if (n_half < 1) throw ValidationError("n_half must be >= 1");
  if (!(f0 > 0.0)) throw ValidationError("pi-pulse duration requires F0 > 0");
  const double k = 0.5 * f0 * std::abs(system.moment(pair.alpha, pair.beta));
  return n_half * std::numbers::pi / (2.0 * k * Envelope::unit_mean(shape));
}

struct DurationSolve {
  double t_opt = 0.0;
  std::size_t iterations = 0;
  double residual = 0.0;
  std::vector<double> history;
};

/// Weighted scaled-time budget \int_0^T (d tau) / sqrt((1+E_a)(1+E_b)) of a pulse.
inline double weighted_tau(const PulseSpec& pulse, double mu_alpha_beta, const LeakModel& leak,
                           double rel_tol = 1e-10) {
  const double k = 0.5 * pulse.amplitude * std::abs(mu_alpha_beta);
  if (leak.empty()) return k * pulse.envelope.integral(pulse.duration());
  auto integrand = [&](double t) { return k * pulse.envelope.value(t) * leak.tau_weight(pulse, t); };
  return adaptive_simpson(integrand, 0.0, pulse.duration(), rel_tol);
}

struct DesignOptions {
  EpsilonDetuning detuning = EpsilonDetuning::chirp;
  double tol = 1e-10;
  std::size_t max_iter = 50;
  double quad_tol = 1e-10;
};

/// Leak-corrected transfer duration by fixed-point iteration seeded at T_pi:
/// T_{k+1} = T_k (n_half pi / 2) / W(T_k), where W is the weighted tau budget
/// of the pulse stretched to T_k.
inline DurationSolve optimized_duration(const LevelSystem& system, const TargetPair& pair,
                                        const std::vector<PerturberSpec>& perturbers, double f0, EnvelopeShape shape,
                                        int n_half, const DesignOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw ValidationError("fixed-point tolerance must be positive");
  const double t_pi = pi_pulse_duration(system, pair, f0, shape, n_half);
  const ChirpDesign chirp = chirp_design(system, pair, perturbers, f0);
  const LeakModel leak(system, pair, perturbers, f0, opt.detuning);
  const double mu_ab = system.moment(pair.alpha, pair.beta);
  const double goal = n_half * std::numbers::pi / 2.0;

  DurationSolve out;
  out.history.push_back(t_pi);
  double t = t_pi;
  for (std::size_t k = 0; k < opt.max_iter; ++k) {
    const PulseSpec pulse(f0, Envelope(shape, t), chirp.carrier);
    const double budget = weighted_tau(pulse, mu_ab, leak, opt.quad_tol);
    const double next = t * goal / budget;
    if (!std::isfinite(next) || !(next > 0.0)) throw NumericalError("duration iteration diverged", out.history);
    out.history.push_back(next);
    out.iterations = k + 1;
    out.residual = std::abs(next - t) / t;
    t = next;
    if (out.residual <= opt.tol) {
      out.t_opt = t;
      return out;
    }
  }
  throw NumericalError("duration fixed point did not converge in " + std::to_string(opt.max_iter) + " iterations",
                       out.history);
}

/// Which parts of the design are applied to the emitted pulse.
enum class DesignMode { unoptimized, frequency_only, optimized };

struct DesignReport {
  double t_pi = 0.0;
  double t_opt = 0.0;
  double duration = 0.0;  ///< duration of the emitted pulse
  double chirp_coefficient = 0.0;
  std::vector<double> sigma_sq_per_perturber;
  std::size_t fixed_point_iterations = 0;
  double residual = 0.0;
  /// max over t of (1/2)|d(E^2)/d tau|, informational only.
  double second_order_advisory = 0.0;
  bool extrapolated = false;
  bool fixed_carrier_fallback = false;
};

struct Design {
  PulseSpec pulse;
  DesignReport report;
};

/// max over a uniform grid of (1/2)|d(E^2)/d tau| for both target levels.
inline double second_order_estimate(const PulseSpec& pulse, const LeakModel& leak, std::size_t samples = 2001) {
  double best = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double t = i + 1 == samples ? pulse.duration()
                                      : pulse.duration() * static_cast<double>(i) / static_cast<double>(samples - 1);
    for (auto level : {Attachment::alpha, Attachment::beta}) {
      const double e = leak.epsilon(pulse, t, level);
      const double de = (1.0 + e) * leak.log_rate_tau(pulse, t, level);
      best = std::max(best, std::abs(e * de));
    }
  }
  return best;
}

inline Design design_pulse(const LevelSystem& system, const TargetPair& pair,
                           const std::vector<PerturberSpec>& perturbers, double f0, EnvelopeShape shape, int n_half,
                           DesignMode mode = DesignMode::optimized, const DesignOptions& opt = {}) {
  DesignReport rep;
  rep.t_pi = pi_pulse_duration(system, pair, f0, shape, n_half);
  const ChirpDesign chirp = chirp_design(system, pair, perturbers, f0);
  const DurationSolve solve = optimized_duration(system, pair, perturbers, f0, shape, n_half, opt);
  rep.t_opt = solve.t_opt;
  rep.fixed_point_iterations = solve.iterations;
  rep.residual = solve.residual;
  const auto on_alpha = std::count_if(perturbers.begin(), perturbers.end(),
                                      [](const PerturberSpec& p) { return p.attached_to == Attachment::alpha; });
  rep.extrapolated = chirp.extrapolated || on_alpha > 1;
  rep.fixed_carrier_fallback = chirp.fixed_fallback;
  rep.chirp_coefficient = chirp.carrier.coefficient;

  const LeakModel leak(system, pair, perturbers, f0, opt.detuning);
  for (const auto& a : leak.analyses()) rep.sigma_sq_per_perturber.push_back(a.sigma_sq());

  const PulseSpec optimal(f0, Envelope(shape, rep.t_opt), chirp.carrier);
  rep.second_order_advisory = second_order_estimate(optimal, leak);

  const double w_ab = transition(system, pair.alpha, pair.beta, pair).omega;
  switch (mode) {
    case DesignMode::unoptimized:
      rep.duration = rep.t_pi;
      return {PulseSpec(f0, Envelope(shape, rep.t_pi), ChirpProfile::fixed(w_ab)), rep};
    case DesignMode::frequency_only:
      rep.duration = rep.t_pi;
      return {PulseSpec(f0, Envelope(shape, rep.t_pi), chirp.carrier), rep};
    case DesignMode::optimized:
      break;
  }
  rep.duration = rep.t_opt;
  return {optimal, rep};
}

}  // namespace rabipulse
