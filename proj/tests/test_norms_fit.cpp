#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nematic/fit.hpp"
#include "nematic/norms.hpp"

using namespace nematic;

TEST(Norms, ZeroAndConstant) {
  Grid g(16, 16);
  ScalarField2D z(g);
  for (auto k : {NormKind::L2, NormKind::H1, NormKind::H2, NormKind::Hminus1}) EXPECT_EQ(norm(z, k), 0.0);
  EXPECT_NEAR(norm(ScalarField2D(g, -2.5), NormKind::L2), 2.5, 1e-13);
  EXPECT_THROW(parse_norm_kind("H3"), ParameterError);
  EXPECT_EQ(parse_norm_kind("H1"), NormKind::H1);
}

TEST(Norms, SineModeLimits) {
  Grid g(129, 129);
  auto f = ScalarField2D::sample(g, [](double x, double y) { return std::sin(M_PI * x) * std::sin(M_PI * y); });
  EXPECT_NEAR(norm(f, NormKind::L2), 0.5, 1e-6);
  EXPECT_NEAR(std::sqrt(grad_sq(f)), M_PI / std::sqrt(2.0), 1e-3);
  // -Lap u = f has u = f / (2 pi^2), so ||grad u|| = ||grad f|| / (2 pi^2).
  EXPECT_NEAR(norm(f, NormKind::Hminus1), 1.0 / (2 * M_PI * std::sqrt(2.0)), 1e-4);
}

TEST(Norms, EdgeGradientMatchesLaplacianPairing) {
  Grid g(20, 17, 1.0, 0.8);
  auto f = ScalarField2D::sample(g, [](double x, double y) { return x * (1 - x) * y * (0.8 - y) * std::exp(x + y); });
  f.zero_boundary();
  EXPECT_NEAR(grad_sq(f), -inner_interior(f, laplacian(f)), 1e-12 * grad_sq(f));
}

TEST(Norms, TraceSurrogates) {
  Grid g(9, 9);
  BoundaryTrace c(g, std::vector<Vec2>(g.boundary_size(), Vec2(0.6, 0.8)));
  EXPECT_NEAR(trace_l2(c), 2.0, 1e-13);
  EXPECT_NEAR(trace_tangential_sq(c), 0.0, 1e-14);
  EXPECT_NEAR(trace_h_half(c), 2.0, 1e-13);
  EXPECT_NEAR(trace_h_three_halves(c), 2.0, 1e-13);
}

TEST(Fit, ExactPowerLaw) {
  std::vector<double> t, v;
  for (int k = 0; k < 100; ++k) {
    t.push_back(0.5 * k);
    v.push_back(5.0 * std::pow(1 + t.back(), -3.0));
  }
  const auto f = fit_decay_exponent(t, v, 1.0);
  EXPECT_NEAR(f.exponent, 3.0, 1e-3);
  EXPECT_GE(f.r2, 0.9999);
  EXPECT_FALSE(f.super_polynomial);
}

TEST(Fit, PlantedExponentsRange) {
  for (double p = 0.5; p <= 8.0; p += 0.5) {
    std::vector<double> t, v;
    for (int k = 0; k < 200; ++k) {
      t.push_back(0.25 * k);
      v.push_back(std::pow(1 + t.back(), -p) * (1.0 + 1e-3 * std::sin(3.0 * k)));
    }
    const auto f = fit_decay_exponent(t, v, 0.5);
    EXPECT_NEAR(f.exponent, p, 1e-2) << p;
    EXPECT_GE(f.r2, 0.999) << p;
  }
}

TEST(Fit, ExponentialFlaggedSuperPolynomial) {
  std::vector<double> t, v;
  for (int k = 0; k < 200; ++k) {
    t.push_back(0.1 * k);
    v.push_back(std::exp(-t.back()));
  }
  const auto f = fit_decay_exponent(t, v, 1.0);
  EXPECT_TRUE(f.super_polynomial);
  const auto early = fit_decay_exponent_window(t, v, 0.0, 5.0);
  const auto late = fit_decay_exponent_window(t, v, 10.0, 20.0);
  EXPECT_GT(late.exponent, early.exponent);
}

TEST(Fit, FloorAndErrors) {
  std::vector<double> t, v;
  for (int k = 0; k < 200; ++k) {
    t.push_back(k);
    v.push_back(std::pow(1 + t.back(), -2.0) + 1e-12);
  }
  EXPECT_NEAR(fit_decay_exponent_window(t, v, 0.0, 50.0).exponent, 2.0, 1e-3);
  EXPECT_LT(fit_decay_exponent(t, v, 1.0).exponent, 2.0);

  std::vector<double> bad = v;
  bad.back() = 0.0;
  EXPECT_THROW(fit_decay_exponent(t, bad, 0.5), FitError);
  EXPECT_THROW(fit_decay_exponent(t, v, 0.0), ParameterError);
  EXPECT_THROW(fit_decay_exponent(t, v, 1.5), ParameterError);
}
