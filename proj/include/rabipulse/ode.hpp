#pragma once

// Explicit adaptive Runge-Kutta: Dormand-Prince 5(4) with PI step-size
// control and the 4th-order continuous extension (Hairer, Norsett & Wanner,
// "Solving ODEs I", DOPRI5). Works on any dynamic Eigen column vector.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>

#include "rabipulse/errors.hpp"

namespace rabipulse {

struct OdeTolerances {
  double rtol = 1e-10;
  double atol = 1e-10;
  /// Largest permitted |h|; infinity for no cap.
  double max_step = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 100'000'000;
};

struct OdeStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

namespace dopri {
inline constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
inline constexpr double a21 = 1.0 / 5.0;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                        a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                        a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                        e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dopri

/// One accepted step, exposed to observers. dense() interpolates inside it.
template <class State>
class DopriStep {
 public:
  double t_old = 0.0;
  double t_new = 0.0;
  const State* y_new = nullptr;

  State dense(double t) const {
    const double h = t_new - t_old;
    const double theta = h == 0.0 ? 1.0 : (t - t_old) / h;
    const double theta1 = 1.0 - theta;
    return r1 + theta * (r2 + theta1 * (r3 + theta * (r4 + theta1 * r5)));
  }

  State r1, r2, r3, r4, r5;
};

/// Dormand-Prince 5(4) stepper. `Rhs` is callable as rhs(t, y, dydt_out).
template <class State, class Rhs>
class DormandPrince54 {
 public:
  DormandPrince54(Rhs rhs, OdeTolerances tol) : rhs_(std::move(rhs)), tol_(tol) {
    if (!(tol_.rtol > 0.0) || !(tol_.atol > 0.0)) throw ValidationError("ODE tolerances must be positive");
    if (!(tol_.max_step > 0.0)) throw ValidationError("maximum step must be positive");
  }

  /// Advances y from t0 to t1 (either direction). observer(const DopriStep&)
  /// runs after every accepted step.
  template <class Observer>
  OdeStats integrate(double t0, State& y, double t1, Observer&& observer) {
    OdeStats stats;
    if (t1 == t0) return stats;
    using namespace dopri;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const auto n = y.size();
    State k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y1(n);
    DopriStep<State> step;

    double t = t0;
    rhs_(t, y, k1);
    ++stats.evaluations;
    double h = dir * initial_step(t, y, k1, t1, ytmp, k2);
    ++stats.evaluations;
    double facold = 1e-4;
    bool last_rejected = false;
    constexpr double beta = 0.04;
    constexpr double expo1 = 0.2 - beta * 0.75;
    constexpr double safe = 0.9;
    constexpr double facc1 = 5.0;   // max shrink 1/0.2
    constexpr double facc2 = 0.1;   // max growth 10

    while (dir * (t1 - t) > 0.0) {
      if (stats.accepted + stats.rejected >= tol_.max_steps) {
        throw NumericalError("ODE step budget exhausted at t=" + std::to_string(t));
      }
      if (std::abs(h) <= 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t), 1.0)) {
        throw NumericalError("ODE step size underflow at t=" + std::to_string(t));
      }
      bool final_step = false;
      if (dir * (t + h - t1) >= 0.0) {
        h = t1 - t;
        final_step = true;
      }

      ytmp = y + h * a21 * k1;
      rhs_(t + c2 * h, ytmp, k2);
      ytmp = y + h * (a31 * k1 + a32 * k2);
      rhs_(t + c3 * h, ytmp, k3);
      ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
      rhs_(t + c4 * h, ytmp, k4);
      ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
      rhs_(t + c5 * h, ytmp, k5);
      ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
      const double t_next = final_step ? t1 : t + h;
      rhs_(t_next, ytmp, k6);
      y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
      rhs_(t_next, y1, k7);
      stats.evaluations += 6;

      ytmp = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      double err = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double sk = tol_.atol + tol_.rtol * std::max(std::abs(y(i)), std::abs(y1(i)));
        const double r = std::abs(ytmp(i)) / sk;
        err += r * r;
      }
      err = std::sqrt(err / static_cast<double>(n));
      if (!std::isfinite(err)) throw NumericalError("non-finite ODE state at t=" + std::to_string(t));

      const double fac11 = std::pow(err, expo1);
      if (err <= 1.0) {
        double fac = fac11 / std::pow(facold, beta);
        fac = std::clamp(fac / safe, facc2, facc1);
        double hnew = h / fac;
        facold = std::max(err, 1e-4);
        ++stats.accepted;

        step.t_old = t;
        step.t_new = t_next;
        step.r1 = y;
        step.r2 = y1 - y;
        step.r3 = h * k1 - step.r2;
        step.r4 = step.r2 - h * k7 - step.r3;
        step.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        step.y_new = &y1;
        observer(static_cast<const DopriStep<State>&>(step));

        y = y1;
        k1 = k7;
        t = t_next;
        if (std::abs(hnew) > tol_.max_step) hnew = dir * tol_.max_step;
        if (last_rejected) hnew = dir * std::min(std::abs(hnew), std::abs(h));
        last_rejected = false;
        h = hnew;
      } else {
        h = h / std::min(facc1, fac11 / safe);
        last_rejected = true;
        ++stats.rejected;
      }
    }
    return stats;
  }

  OdeStats integrate(double t0, State& y, double t1) {
    return integrate(t0, y, t1, [](const DopriStep<State>&) {});
  }

 private:
  double weighted_rms(const State& v, const State& y) const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double sk = tol_.atol + tol_.rtol * std::abs(y(i));
      s += std::norm(v(i)) / (sk * sk);
    }
    return std::sqrt(s / static_cast<double>(v.size()));
  }

  // Starting step guess (Hairer's HINIT).
  double initial_step(double t, const State& y, const State& f0, double t1, State& ytmp, State& f1) {
    const double span = std::abs(t1 - t);
    const double dnf = weighted_rms(f0, y);
    const double dny = weighted_rms(y, y);
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
    h = std::min({h, tol_.max_step, span});
    const double dir = t1 > t ? 1.0 : -1.0;
    ytmp = y + dir * h * f0;
    rhs_(t + dir * h, ytmp, f1);
    const double der2 = weighted_rms(State(f1 - f0), y) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    return std::min({100.0 * h, h1, tol_.max_step, span});
  }

  Rhs rhs_;
  OdeTolerances tol_;
};

template <class State, class Rhs>
DormandPrince54<State, Rhs> make_dopri(Rhs rhs, OdeTolerances tol) {
  return DormandPrince54<State, Rhs>(std::move(rhs), tol);
}

}  // namespace rabipulse
