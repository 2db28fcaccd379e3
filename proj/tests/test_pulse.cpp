#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "support.hpp"

using namespace rabipulse;
using namespace testing_support;

TEST(Envelope, Sin2Values) {
  const Envelope e(EnvelopeShape::sin2, 100.0);
  EXPECT_NEAR(e.value(50.0), 1.0, 1e-15);
  EXPECT_EQ(e.value(0.0), 0.0);
  EXPECT_NEAR(e.value(25.0), 0.5, 1e-15);
  EXPECT_THROW(e.value(-1.0), ValidationError);
  EXPECT_THROW(e.value(100.5), ValidationError);
  EXPECT_THROW(Envelope(EnvelopeShape::sin2, 0.0), ValidationError);
}

TEST(Envelope, ConstantSqIntegralIsT) {
  const Envelope e(EnvelopeShape::constant, 7.0);
  EXPECT_EQ(e.sq_integral(3.25), 3.25);
  EXPECT_EQ(e.integral(3.25), 3.25);
}

TEST(Envelope, Sin2SqIntegralAgainstOracle) {
  const double T = 211831.0;
  const Envelope e(EnvelopeShape::sin2, T);
  auto m2 = [&](double t) { return std::pow(e.value(t), 2); };
  const double full = composite_simpson(m2, 0.0, T);
  const double half = composite_simpson(m2, 0.0, T / 2);
  EXPECT_NEAR(e.sq_integral(T) / full, 1.0, 1e-12);
  EXPECT_NEAR(e.sq_integral(T / 2) / half, 1.0, 1e-12);
  EXPECT_NEAR(e.sq_integral(T), 3.0 * T / 8.0, 1e-9 * T);
  EXPECT_NEAR(e.sq_integral(T / 2), 3.0 * T / 16.0, 1e-9 * T);
}

TEST(Envelope, ClosedFormsMatchQuadratureOnRandomPairs) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> dur(1e3, 4e6), frac(0.01, 1.0);
  for (int k = 0; k < 100; ++k) {
    const double T = dur(rng);
    const double t = frac(rng) * T;
    const Envelope e(EnvelopeShape::sin2, T);
    const double m1 = composite_simpson([&](double x) { return e.value(x); }, 0.0, t);
    const double m2 = composite_simpson([&](double x) { return std::pow(e.value(x), 2); }, 0.0, t);
    EXPECT_LE(std::abs(e.integral(t) - m1), 1e-10 * std::abs(m1)) << "T=" << T << " t=" << t;
    EXPECT_LE(std::abs(e.sq_integral(t) - m2), 1e-10 * std::abs(m2)) << "T=" << T << " t=" << t;
  }
}

TEST(Envelope, DerivativeMatchesDifference) {
  const Envelope e(EnvelopeShape::sin2, 1000.0);
  for (double t : {10.0, 250.0, 499.0, 777.0}) {
    const double h = 1e-3;
    EXPECT_NEAR(e.derivative(t), (e.value(t + h) - e.value(t - h)) / (2 * h), 1e-9);
  }
}

namespace {
PulseSpec sin2_pulse(double T, double f0 = 4.07606e-4, ChirpProfile c = ChirpProfile::fixed(0.017671)) {
  return PulseSpec(f0, Envelope(EnvelopeShape::sin2, T), c);
}
}  // namespace

TEST(ScaledTime, TauOfT) {
  const double T = 211831.0, mu = 0.073, f0 = 4.07606e-4;
  const auto p = sin2_pulse(T, f0);
  EXPECT_EQ(tau_of_t(p, mu, 0.0), 0.0);
  const double oracle = 0.5 * f0 * mu * composite_simpson([&](double t) { return p.envelope.value(t); }, 0.0, T);
  EXPECT_NEAR(tau_of_t(p, mu, T), oracle, 1e-12 * oracle);
  EXPECT_NEAR(tau_of_t(p, mu, T), f0 * mu * T / 4.0, 1e-12);
  const PulseSpec c(f0, Envelope(EnvelopeShape::constant, T), ChirpProfile::fixed(0.017671));
  EXPECT_NEAR(tau_of_t(c, mu, 1234.5), f0 * mu * 1234.5 / 2.0, 1e-15);
}

TEST(ScaledTime, Monotone) {
  const auto p = sin2_pulse(1e5);
  double prev = -1.0;
  for (int k = 0; k <= 1000; ++k) {
    const double tau = tau_of_t(p, 0.073, 1e5 * k / 1000.0);
    if (k > 0 && k < 1000) {
      EXPECT_GT(tau, prev);
    }
    prev = tau;
  }
}

TEST(ScaledTime, InverseRoundTrip) {
  const double T = 3.1e6, mu = 0.073;
  const auto p = sin2_pulse(T, 2.80534e-4);
  EXPECT_EQ(t_of_tau(p, mu, 0.0), 0.0);
  EXPECT_NEAR(t_of_tau(p, mu, p.amplitude * mu * T / 8.0), T / 2.0, 1e-10 * T);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1e-6, 1.0 - 1e-6);
  for (int k = 0; k < 200; ++k) {
    const double t = u(rng) * T;
    EXPECT_NEAR(t_of_tau(p, mu, tau_of_t(p, mu, t)), t, 1e-10 * T);
  }
  EXPECT_THROW(t_of_tau(p, mu, tau_of_t(p, mu, T) * 1.01), ValidationError);
}

TEST(Carrier, FixedAndChirped) {
  const double w = 0.017671, C = 6.6e-6, T = 2e5;
  const auto fixed = sin2_pulse(T);
  for (double t : {0.0, 1e4, T / 2, T}) EXPECT_EQ(carrier_frequency(fixed, t), w);
  const auto chirped = sin2_pulse(T, 4e-4, ChirpProfile{w, C});
  EXPECT_EQ(carrier_frequency(chirped, 0.0), w);
  for (int k = 0; k <= 1000; ++k) {
    const double t = T * k / 1000.0;
    EXPECT_LE(std::abs(carrier_frequency(chirped, t) - w), std::abs(C));
  }
  EXPECT_NEAR(carrier_frequency(chirped, T), w + C * 3.0 / 8.0, 1e-15);
  const PulseSpec flat(4e-4, Envelope(EnvelopeShape::constant, T), ChirpProfile{w, C});
  EXPECT_EQ(carrier_frequency(flat, 0.0), w + C);
}

TEST(Carrier, PhaseIsFrequencyTimesTime) {
  const auto p = sin2_pulse(2e5, 4e-4, ChirpProfile{0.017671, 6.6e-6});
  for (double t : {1.0, 5e4, 1.3e5}) {
    EXPECT_NEAR(p.carrier.phase(p.envelope, t), carrier_frequency(p, t) * t, 1e-12 * carrier_frequency(p, t) * t);
  }
}

TEST(Field, ZerosAndBound) {
  const double w = 0.017671;
  const auto p = sin2_pulse(2e5, 4e-4, ChirpProfile{w, 6.6e-6});
  EXPECT_EQ(field_value(p, 0.0), 0.0);
  const PulseSpec c(4e-4, Envelope(EnvelopeShape::constant, 1e4), ChirpProfile::fixed(w));
  EXPECT_NEAR(field_value(c, std::numbers::pi / (2.0 * w)), 0.0, 1e-18);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 2e5);
  for (int k = 0; k < 10000; ++k) EXPECT_LE(std::abs(field_value(p, u(rng))), 4e-4);
}

TEST(Field, NegativeAmplitudeRejected) {
  EXPECT_THROW(PulseSpec(-1e-4, Envelope(EnvelopeShape::sin2, 1.0), ChirpProfile::fixed(1.0)), ValidationError);
  EXPECT_NO_THROW(PulseSpec(0.0, Envelope(EnvelopeShape::sin2, 1.0), ChirpProfile::fixed(1.0)));
}

TEST(ScaledDetunings, MatchDefinition) {
  const double mu = 0.073, w_ij = 0.017611;
  const auto p = sin2_pulse(2e5, 4e-4, ChirpProfile{0.017671, 6.6e-6});
  const double t = 7.7e4;
  const auto d = scaled_detunings(p, mu, w_ij, -1, t);
  const double scale = 2.0 / (p.amplitude * mu);
  EXPECT_NEAR(d.f, -scale * (carrier_frequency(p, t) - w_ij), 1e-9);
  EXPECT_NEAR(d.g, -scale * (carrier_frequency(p, t) + w_ij), 1e-9);
  EXPECT_NEAR(d.g - d.f, -2.0 * scale * w_ij, 1e-9);
}

TEST(EnvelopeShape, ParseRoundTrip) {
  for (auto s : {EnvelopeShape::sin2, EnvelopeShape::constant}) EXPECT_EQ(parse_envelope_shape(to_string(s)), s);
  EXPECT_THROW(parse_envelope_shape("gauss"), ValidationError);
}
