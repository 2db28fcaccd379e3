#pragma once

// Driving pulse F(t) = F0 m(t) cos(omega(t) t): envelope, chirped carrier,
// and the scaled clock d(tau) = (F0 mu_ab / 2) m(t) dt.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "rabipulse/errors.hpp"

namespace rabipulse {

enum class EnvelopeShape { sin2, constant };

inline std::string_view to_string(EnvelopeShape s) {
  return s == EnvelopeShape::sin2 ? "sin2" : "constant";
}

inline EnvelopeShape parse_envelope_shape(std::string_view s) {
  if (s == "sin2") return EnvelopeShape::sin2;
  if (s == "constant") return EnvelopeShape::constant;
  throw ValidationError("unknown envelope shape '" + std::string(s) + "'");
}

/// Pulse envelope m(t) on its support [0, T].
///
/// Every shape supplies m, m', and the running integrals of m and m^2 in
/// closed form.
class Envelope {
 public:
  Envelope(EnvelopeShape shape, double duration) : shape_(shape), duration_(duration) {
    if (!(duration > 0.0) || !std::isfinite(duration)) throw ValidationError("envelope duration must be positive");
  }

  EnvelopeShape shape() const noexcept { return shape_; }
  double duration() const noexcept { return duration_; }
  /// Omega = pi / T for the sin2 shape.
  double angular_rate() const noexcept { return std::numbers::pi / duration_; }

  double value(double t) const {
    check(t);
    if (shape_ == EnvelopeShape::constant) return 1.0;
    // Folding onto [0, T/2] makes m(T) exactly zero.
    const double s = std::sin(angular_rate() * std::min(t, duration_ - t));
    return s * s;
  }

  double derivative(double t) const {
    check(t);
    if (shape_ == EnvelopeShape::constant) return 0.0;
    const double w = angular_rate();
    return w * std::sin(2.0 * w * t);
  }

  /// \int_0^t m(t') dt'
  double integral(double t) const {
    check(t);
    if (shape_ == EnvelopeShape::constant) return t;
    const double w = angular_rate();
    return 0.5 * t - std::sin(2.0 * w * t) / (4.0 * w);
  }

  /// \int_0^t m(t')^2 dt'
  double sq_integral(double t) const {
    check(t);
    if (shape_ == EnvelopeShape::constant) return t;
    const double w = angular_rate();
    return 0.375 * t - std::sin(2.0 * w * t) / (4.0 * w) + std::sin(4.0 * w * t) / (32.0 * w);
  }

  /// Limit of (1/t) \int_0^t m^2 as t -> 0+.
  double sq_mean_at_origin() const noexcept { return shape_ == EnvelopeShape::constant ? 1.0 : 0.0; }

  /// \int_0^1 m(u) du for the unit-duration envelope of this shape.
  static double unit_mean(EnvelopeShape shape) { return shape == EnvelopeShape::constant ? 1.0 : 0.5; }

  bool operator==(const Envelope&) const = default;

 private:
  void check(double t) const {
    if (!(t >= 0.0 && t <= duration_)) {
      throw ValidationError("time " + std::to_string(t) + " outside pulse support [0, " +
                            std::to_string(duration_) + "]");
    }
  }

  EnvelopeShape shape_;
  double duration_;
};

inline double envelope_value(const Envelope& env, double t) { return env.value(t); }
inline double envelope_sq_integral(const Envelope& env, double t) { return env.sq_integral(t); }

/// Carrier frequency omega(t) = base + C (1/t) \int_0^t m^2.
/// A zero coefficient is the fixed-frequency carrier.
struct ChirpProfile {
  double base = 0.0;
  double coefficient = 0.0;

  static ChirpProfile fixed(double frequency) { return {frequency, 0.0}; }
  bool chirped() const noexcept { return coefficient != 0.0; }

  double frequency(const Envelope& env, double t) const {
    if (t == 0.0) {
      (void)env.value(0.0);
      return base + coefficient * env.sq_mean_at_origin();
    }
    return base + coefficient * env.sq_integral(t) / t;
  }

  /// omega(t) * t, written without the 1/t so it is exact at t = 0.
  double phase(const Envelope& env, double t) const {
    if (coefficient == 0.0) {
      (void)env.value(t);
      return base * t;
    }
    return base * t + coefficient * env.sq_integral(t);
  }

  /// d omega / dt.
  double frequency_rate(const Envelope& env, double t) const {
    if (coefficient == 0.0 || t == 0.0) {
      (void)env.value(t);
      return 0.0;
    }
    const double m = env.value(t);
    return coefficient * (m * m / t - env.sq_integral(t) / (t * t));
  }

  bool operator==(const ChirpProfile&) const = default;
};

/// Complete pulse. amplitude is F0 >= 0; F0 = 0 is the null drive.
struct PulseSpec {
  double amplitude;
  Envelope envelope;
  ChirpProfile carrier;

  PulseSpec(double f0, Envelope env, ChirpProfile c) : amplitude(f0), envelope(env), carrier(c) {
    if (!(f0 >= 0.0) || !std::isfinite(f0)) throw ValidationError("field amplitude F0 must be non-negative");
  }

  double duration() const noexcept { return envelope.duration(); }

  /// Same pulse with the envelope stretched to a new duration.
  PulseSpec with_duration(double t) const { return {amplitude, Envelope(envelope.shape(), t), carrier}; }

  bool operator==(const PulseSpec&) const = default;
};

inline double carrier_frequency(const PulseSpec& pulse, double t) {
  return pulse.carrier.frequency(pulse.envelope, t);
}

/// F(t) = F0 m(t) cos(omega(t) t). The phase is the product omega(t) t,
/// not the time integral of omega.
inline double field_value(const PulseSpec& pulse, double t) {
  return pulse.amplitude * pulse.envelope.value(t) * std::cos(pulse.carrier.phase(pulse.envelope, t));
}

/// tau(t) = (F0 mu_ab / 2) \int_0^t m.
inline double tau_of_t(const PulseSpec& pulse, double mu_alpha_beta, double t) {
  return 0.5 * pulse.amplitude * mu_alpha_beta * pulse.envelope.integral(t);
}

/// Inverse of tau_of_t by bisection on [0, T].
inline double t_of_tau(const PulseSpec& pulse, double mu_alpha_beta, double tau) {
  const double total = tau_of_t(pulse, mu_alpha_beta, pulse.duration());
  if (!(tau >= 0.0)) throw ValidationError("scaled time must be non-negative");
  if (tau > total) throw ValidationError("scaled time " + std::to_string(tau) + " exceeds pulse total " +
                                         std::to_string(total));
  if (tau == 0.0) return 0.0;
  if (tau == total) return pulse.duration();
  double lo = 0.0;
  double hi = pulse.duration();
  // tau is non-decreasing, so the smallest t reaching tau is well defined.
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (tau_of_t(pulse, mu_alpha_beta, mid) < tau) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

/// Scaled-time view of one instant.
struct ScaledClock {
  double t = 0.0;
  double tau = 0.0;
  double x = 0.0;  ///< (F0 mu_ab / 2) t
};

inline ScaledClock scaled_clock(const PulseSpec& pulse, double mu_alpha_beta, double t) {
  return {t, tau_of_t(pulse, mu_alpha_beta, t), 0.5 * pulse.amplitude * mu_alpha_beta * t};
}

/// Dimensionless detunings f_ij, g_ij at one instant.
struct ScaledDetunings {
  double f = 0.0;
  double g = 0.0;
};

inline ScaledDetunings scaled_detunings(const PulseSpec& pulse, double mu_alpha_beta, double omega_ij, int sign_ij,
                                        double t) {
  const double scale = sign_ij * 2.0 / (pulse.amplitude * mu_alpha_beta);
  const double w = carrier_frequency(pulse, t);
  return {scale * (w - omega_ij), scale * (w + omega_ij)};
}

}  // namespace rabipulse
