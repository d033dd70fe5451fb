#include <gtest/gtest.h>

#include <cmath>

#include "nematic/lifting.hpp"

using namespace nematic;

namespace {

BoundaryTrace rotating_trace(const Grid& g, double t) {
  return BoundaryTrace::sample(g, [t](double x, double y) -> Vec2 {
    const double a = 0.4 * (x - y) + 0.3 * std::exp(-t) * std::cos(M_PI * x) * std::cos(M_PI * y);
    return Vec2(std::cos(a), std::sin(a));
  });
}

LiftingState advance(const Grid& g, double T, int steps) {
  const double dt = T / steps;
  LiftingState s = make_lifting(rotating_trace(g, 0.0));
  for (int k = 1; k <= steps; ++k) s = parabolic_lift_step(s, rotating_trace(g, k * dt), dt);
  return s;
}

}  // namespace

TEST(EllipticLift, ReproducesLinearData) {
  Grid g(14, 11, 1.0, 0.8);
  auto lin = [](double x, double y) -> Vec2 { return Vec2(0.3 * x - 0.2 * y, 0.1 + 0.5 * y); };
  const VectorField2D e = elliptic_lift(BoundaryTrace::sample(g, lin));
  EXPECT_LT((e - VectorField2D::sample(g, lin)).max_magnitude(), 1e-12);
}

TEST(ParabolicLift, StartsAtHarmonicExtension) {
  Grid g(16, 16);
  const LiftingState s = make_lifting(rotating_trace(g, 0.0));
  EXPECT_EQ((s.dP - s.dE).max_magnitude(), 0.0);
  EXPECT_EQ((s.dE0 - s.dE).max_magnitude(), 0.0);
  EXPECT_EQ(s.dt_dP.max_magnitude(), 0.0);
}

TEST(ParabolicLift, StaticTraceIsFixedPoint) {
  Grid g(16, 16);
  const BoundaryTrace h = rotating_trace(g, 0.0);
  LiftingState s = make_lifting(h);
  for (int k = 0; k < 5; ++k) s = parabolic_lift_step(s, h, 0.01);
  EXPECT_EQ((s.dP - s.dE).max_magnitude(), 0.0);
  EXPECT_EQ(s.dt_dP.max_magnitude(), 0.0);
  EXPECT_EQ(s.dt_dE.max_magnitude(), 0.0);
  EXPECT_NEAR(s.t, 0.05, 1e-15);
}

TEST(ParabolicLift, TracesHoldExactly) {
  Grid g(16, 16);
  const LiftingState s = advance(g, 0.2, 10);
  const BoundaryTrace h = rotating_trace(g, 0.2);
  EXPECT_EQ(BoundaryTrace::restrict(s.dP).max_distance(h), 0.0);
  EXPECT_EQ(BoundaryTrace::restrict(s.dE).max_distance(h), 0.0);
}

// Backward Euler in time: refining dt by 4 shrinks the error against a
// 16x finer reference by about 4.
TEST(ParabolicLift, FirstOrderInTime) {
  Grid g(24, 24);
  const double T = 0.2;
  const LiftingState ref = advance(g, T, 640);
  const double e1 = (advance(g, T, 10).dP - ref.dP).max_magnitude();
  const double e2 = (advance(g, T, 40).dP - ref.dP).max_magnitude();
  const double ratio = e1 / e2;
  EXPECT_GT(ratio, 3.3);
  EXPECT_LT(ratio, 5.5);
}

// The heat step makes (d_P' - d_P)/dt = Lap d_P' exactly; with d_E harmonic
// this is Lap(d_P - d_E) = d_t d_P at interior nodes.
TEST(ParabolicLift, DiscreteIdentity) {
  Grid g(20, 20);
  const LiftingState s = advance(g, 0.1, 20);
  EXPECT_LT(summarize(s).identity_residual, 1e-8);
}

TEST(ShiftedFields, ZeroTraces) {
  Grid g(16, 16);
  const LiftingState s = advance(g, 0.1, 5);
  VectorField2D d = s.dE + VectorField2D::sample(g, [](double x, double y) -> Vec2 { return Vec2(x * y, x - y); });
  const auto [hat, tilde] = shifted_fields(d, s);
  for (auto [i, j] : g.boundary_nodes()) {
    EXPECT_EQ(hat.at(i, j).norm(), 0.0);
    EXPECT_EQ(tilde.at(i, j).norm(), 0.0);
  }
  VectorField2D expect = d - s.dE;
  expect.zero_boundary();
  EXPECT_EQ((hat - expect).max_magnitude(), 0.0);
}

TEST(ParabolicLift, RejectsBadInput) {
  Grid g(16, 16), h(18, 16);
  const LiftingState s = make_lifting(rotating_trace(g, 0.0));
  EXPECT_THROW(parabolic_lift_step(s, rotating_trace(g, 0.1), 0.0), ParameterError);
  EXPECT_THROW(parabolic_lift_step(s, rotating_trace(h, 0.1), 0.1), DimensionError);
}

TEST(LiftingDiagnostics, NeedsSixteenSamples) {
  std::vector<LiftingSample> h(15);
  for (std::size_t k = 0; k < h.size(); ++k) h[k].t = static_cast<double>(k);
  EXPECT_THROW(lifting_diagnostics(h, 2.0), InsufficientDataError);
}

// Samples built from exact power laws: ||d_t d_P||^2 ~ (1+t)^-8 must clear
// the 5.7 threshold, (1+t)^-4 must not.
TEST(LiftingDiagnostics, ExponentThreshold) {
  auto make = [](double p) {
    std::vector<LiftingSample> h(200);
    for (std::size_t k = 0; k < h.size(); ++k) {
      const double t = 0.1 * k;
      h[k].t = t;
      h[k].dt_dP = std::pow(1.0 + t, -p / 2);
      h[k].dt_dE = h[k].dt_dP;
      h[k].trace_rate_half = 2.0 * h[k].dt_dP;
      h[k].dist_H1 = h[k].dist_H2 = 0.1 * h[k].dt_dP;
      h[k].grad_lap_dP = h[k].dt_dP;
    }
    return lifting_diagnostics(h, 2.0);
  };
  const LiftingReport fast = make(8.0), slow = make(4.0);
  EXPECT_NEAR(fast.dt_decay.exponent, 8.0, 1e-9);
  EXPECT_TRUE(fast.dt_decay.pass);
  EXPECT_FALSE(slow.dt_decay.pass);
  EXPECT_FALSE(slow.pass());
}

TEST(LiftingDiagnostics, VacuousWhenStatic) {
  std::vector<LiftingSample> h(20);
  for (std::size_t k = 0; k < h.size(); ++k) h[k].t = static_cast<double>(k);
  const LiftingReport r = lifting_diagnostics(h, 2.0);
  EXPECT_TRUE(r.lift_gap.vacuous);
  EXPECT_TRUE(r.dt_decay.vacuous);
  EXPECT_TRUE(r.pass());
}

// Decaying trace on a small grid: every estimate holds and the caloric
// extension settles.
TEST(LiftingDiagnostics, DecayingTrace) {
  Grid g(16, 16);
  const double gamma = 2.0, dt = 5e-3;
  auto h = [&](double t) {
    return BoundaryTrace::sample(g, [&](double x, double y) -> Vec2 {
      const double a = 0.5 * (x - y) + 0.3 * std::pow(1.0 + t, -1.0 - gamma) * std::cos(M_PI * x) * std::cos(M_PI * y);
      return Vec2(std::cos(a), std::sin(a));
    });
  };
  LiftingState s = make_lifting(h(0.0));
  std::vector<LiftingSample> hist{summarize(s)};
  for (int k = 1; k <= 6000; ++k) {
    s = parabolic_lift_step(s, h(k * dt), dt);
    if (k % 50 == 0) hist.push_back(summarize(s));
  }
  const LiftingReport r = lifting_diagnostics(hist, gamma);
  EXPECT_TRUE(r.lift_gap.pass);
  EXPECT_TRUE(r.lift_h2.pass);
  EXPECT_TRUE(r.grad_lap_integral.pass);
  EXPECT_GE(r.dt_decay.exponent, 5.7);
  EXPECT_GE(r.grad_lap_tail.exponent, 4.7);
  EXPECT_TRUE(r.final_dt_pass);
  EXPECT_LT(r.max_identity_residual, 1e-6);
}
