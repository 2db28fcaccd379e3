#include <gtest/gtest.h>

#include <complex>

#include "rabipulse/ode.hpp"

using namespace rabipulse;
using V = Eigen::VectorXcd;

namespace {
auto rotation(double w) {
  return [w](double, const V& y, V& dy) { dy = std::complex<double>(0.0, -w) * y; };
}
}  // namespace

TEST(Dopri, HarmonicPhaseAccuracy) {
  OdeTolerances tol;
  tol.rtol = tol.atol = 1e-11;
  auto s = make_dopri<V>(rotation(2.0), tol);
  V y = V::Ones(1);
  const auto stats = s.integrate(0.0, y, 50.0);
  EXPECT_NEAR(std::abs(y(0) - std::polar(1.0, -100.0)), 0.0, 1e-8);
  EXPECT_GT(stats.accepted, 0u);
}

TEST(Dopri, DenseOutputInsideSteps) {
  OdeTolerances tol;
  tol.rtol = tol.atol = 1e-10;
  auto s = make_dopri<V>(rotation(1.0), tol);
  V y = V::Ones(1);
  double worst = 0.0;
  s.integrate(0.0, y, 20.0, [&](const DopriStep<V>& st) {
    for (int k = 1; k < 4; ++k) {
      const double t = st.t_old + (st.t_new - st.t_old) * k / 4.0;
      worst = std::max(worst, std::abs(st.dense(t)(0) - std::polar(1.0, -t)));
    }
  });
  EXPECT_LT(worst, 1e-7);
}

TEST(Dopri, BackwardIntegrationUndoesForward) {
  OdeTolerances tol;
  tol.rtol = tol.atol = 1e-12;
  auto s = make_dopri<V>(rotation(3.0), tol);
  V y(2);
  y << 0.6, std::complex<double>(0.0, 0.8);
  const V y0 = y;
  s.integrate(0.0, y, 10.0);
  s.integrate(10.0, y, 0.0);
  EXPECT_LT((y - y0).norm(), 1e-9);
}

TEST(Dopri, StepCapRespected) {
  OdeTolerances tol;
  tol.max_step = 0.01;
  auto s = make_dopri<V>(rotation(0.0), tol);
  V y = V::Ones(1);
  double largest = 0.0;
  s.integrate(0.0, y, 1.0, [&](const DopriStep<V>& st) { largest = std::max(largest, st.t_new - st.t_old); });
  EXPECT_LE(largest, 0.01 + 1e-15);
}

TEST(Dopri, BudgetExhaustionIsNumericalError) {
  OdeTolerances tol;
  tol.max_steps = 3;
  tol.max_step = 1e-3;
  auto s = make_dopri<V>(rotation(1.0), tol);
  V y = V::Ones(1);
  EXPECT_THROW(s.integrate(0.0, y, 1.0), NumericalError);
}

TEST(Dopri, NonFiniteStateIsNumericalError) {
  auto s = make_dopri<V>([](double, const V& y, V& dy) { dy = y.array() * y.array() * 1e300; }, OdeTolerances{});
  V y = V::Ones(1);
  EXPECT_THROW(s.integrate(0.0, y, 1.0), NumericalError);
}

TEST(Dopri, RejectsBadTolerances) {
  OdeTolerances tol;
  tol.rtol = 0.0;
  EXPECT_THROW(make_dopri<V>(rotation(1.0), tol), ValidationError);
}
