#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "nematic/majorant.hpp"

using namespace nematic;

namespace {

MajorantProblem problem(double C, double Y0, double R = 0.0) {
  MajorantProblem p;
  p.C_star = C;
  p.Y0 = Y0;
  if (R != 0.0) p.R3 = [R](double) { return R; };
  return p;
}

}  // namespace

// Y' = Y^3 + Y, Y(0) = 1 separates to Y / sqrt(Y^2 + 1) = e^t / sqrt(2):
// blow-up at t = ln(2) / 2.
TEST(Majorant, ClosedFormBlowUp) {
  const MajorantResult r = solve_majorant(problem(1.0, 1.0), 1e-3, 1e12);
  ASSERT_TRUE(r.crossed);
  EXPECT_NEAR(r.T_max, 0.5 * std::log(2.0), 1e-5);
  EXPECT_LE(r.T_half_cap, r.T_cap);
  EXPECT_LE(r.T_cap, r.T_max);
}

TEST(Majorant, ClosedFormTrajectory) {
  const MajorantResult r = solve_majorant(problem(1.0, 1.0), 1e-3, 1e6);
  for (std::size_t k = 0; k < r.t.size(); k += 7) {
    const double e = std::exp(r.t[k]) / std::sqrt(2.0);
    if (e >= 0.999) continue;
    const double exact = e / std::sqrt(1.0 - e * e);
    EXPECT_NEAR(r.Y[k], exact, 1e-7 * exact);
  }
}

TEST(Majorant, ZeroIsEquilibrium) {
  const MajorantResult r = solve_majorant(problem(1.0, 0.0), 1e-2, 100.0, 10.0);
  EXPECT_FALSE(r.crossed);
  EXPECT_TRUE(std::isinf(r.T_max));
  for (double y : r.Y) EXPECT_EQ(y, 0.0);
}

TEST(Majorant, MonotoneInData) {
  const double base = solve_majorant(problem(1.0, 1.0), 1e-3, 1e12).T_max;
  EXPECT_LT(solve_majorant(problem(1.0, 1.0, 5.0), 1e-3, 1e12).T_max, base);
  EXPECT_LT(solve_majorant(problem(2.0, 1.0), 1e-3, 1e12).T_max, base);
  EXPECT_LT(solve_majorant(problem(1.0, 2.0), 1e-3, 1e12).T_max, base);
  double prev = std::numeric_limits<double>::infinity();
  for (double Y0 : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const double T = solve_majorant(problem(1.0, Y0), 1e-3, 1e12).T_max;
    EXPECT_LE(T, prev);
    prev = T;
  }
}

TEST(Majorant, StepRefinement) {
  // The extrapolated horizon barely moves as the base step shrinks.
  const double a = solve_majorant(problem(1.0, 1.0), 4e-2, 1e12).T_max;
  const double b = solve_majorant(problem(1.0, 1.0), 2e-2, 1e12).T_max;
  const double c = solve_majorant(problem(1.0, 1.0), 1e-2, 1e12).T_max;
  EXPECT_LE(std::abs(c - b), 4.0 * std::abs(b - a) + 1e-9);
  EXPECT_NEAR(c, 0.5 * std::log(2.0), 1e-5);
}

TEST(Majorant, SmallDataStaysBounded) {
  // Y' = 0.1 (Y^3 + Y) + 0.1 R3 with integrable R3 and small Y0 stays small.
  MajorantProblem p = problem(0.1, 0.01);
  p.R3 = [](double t) { return 0.01 * std::exp(-t); };
  const MajorantResult r = solve_majorant(p, 1e-2, 1e3, 20.0);
  EXPECT_FALSE(r.crossed);
  EXPECT_LT(r.Y.back(), 1.0);
}

TEST(Majorant, Validation) {
  EXPECT_THROW(solve_majorant(problem(0.0, 1.0), 1e-3, 1e12), ParameterError);
  EXPECT_THROW(solve_majorant(problem(1.0, -1.0), 1e-3, 1e12), ParameterError);
  EXPECT_THROW(solve_majorant(problem(1.0, 1.0), 0.0, 1e12), ParameterError);
  EXPECT_THROW(solve_majorant(problem(1.0, 5.0), 1e-3, 20.0), ParameterError);
}

TEST(Comparison, ZeroAlwaysPasses) {
  std::vector<double> t{0, 1, 2, 3}, A(4, 0.0);
  EXPECT_TRUE(comparison_check(t, A, problem(1.0, 0.0)).pass);
  EXPECT_TRUE(comparison_check(t, A, problem(3.0, 2.0)).pass);
}

TEST(Comparison, FedBackTrajectoryPasses) {
  const MajorantProblem p = problem(0.05, 0.1);
  const MajorantResult r = solve_majorant(p, 1e-2, 1e3, 2.0);
  // Sample the majorant itself on a uniform axis.
  std::vector<double> t, A;
  for (int k = 0; k <= 20; ++k) {
    t.push_back(0.1 * k);
    A.push_back(interpolant(r.t, r.Y)(t.back()));
  }
  const ComparisonVerdict v = comparison_check(t, A, p, 1e-2);
  EXPECT_TRUE(v.pass);
  EXPECT_NEAR(v.worst_ratio, 1.0, 1e-6);
}

TEST(Comparison, ReportsWitness) {
  const MajorantProblem p = problem(0.05, 0.1);
  std::vector<double> t{0.0, 0.5, 1.0, 1.5}, A{0.1, 0.1, 5.0, 0.1};
  const ComparisonVerdict v = comparison_check(t, A, p);
  EXPECT_FALSE(v.pass);
  EXPECT_DOUBLE_EQ(v.witness_time, 1.0);
}

TEST(Comparison, TimeAxisMismatch) {
  MajorantProblem p = problem(1.0, 0.1);
  p.R3_times = {0.0, 1.0, 2.0};
  p.R3 = interpolant(p.R3_times, {0.0, 0.0, 0.0});
  std::vector<double> t{0.0, 1.0, 2.5}, A{0.0, 0.0, 0.0};
  EXPECT_THROW(comparison_check(t, A, p), DimensionError);
  EXPECT_THROW(comparison_check(t, std::vector<double>{0.0}, p), DimensionError);
}

// Calibrated majorant on a decaying sample: the fitted constant makes the
// discrete inequality hold, so the comparison passes.
TEST(Comparison, FittedMajorantDominates) {
  std::vector<double> t, A, R;
  for (int k = 0; k <= 200; ++k) {
    const double s = 0.05 * k;
    t.push_back(s);
    A.push_back(0.2 * std::exp(-s) + 0.05 * std::pow(std::sin(3 * s), 2));
    R.push_back(0.01 * std::exp(-s));
  }
  const MajorantProblem p = fit_majorant(t, A, R);
  EXPECT_GT(p.C_star, 0.0);
  EXPECT_EQ(p.Y0, A.front());
  for (std::size_t k = 1; k < t.size(); ++k) {
    const double a = std::min(A[k], A[k - 1]), r = std::min(R[k], R[k - 1]);
    EXPECT_LE((A[k] - A[k - 1]) / 0.05, p.C_star * (a * a * a + a + r) * (1 + 1e-12));
  }
  EXPECT_TRUE(comparison_check(t, A, p, 1e-3).pass);
}

TEST(Interpolant, LinearAndClamped) {
  const auto f = interpolant({0.0, 1.0, 3.0}, {0.0, 2.0, 6.0});
  EXPECT_DOUBLE_EQ(f(-1.0), 0.0);
  EXPECT_DOUBLE_EQ(f(0.5), 1.0);
  EXPECT_DOUBLE_EQ(f(2.0), 4.0);
  EXPECT_DOUBLE_EQ(f(9.0), 6.0);
  EXPECT_THROW(interpolant({0.0}, {}), DimensionError);
}
