#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "nematic/simulate.hpp"
#include "nematic/steady.hpp"

using namespace nematic;

namespace {

std::shared_ptr<Forcing> tilted_forcing(const Grid& g, double kappa = 0.6) {
  const BoundaryTrace h = BoundaryTrace::sample(g, [kappa](double x, double y) -> Vec2 {
    const double a = kappa * (x - y);
    return Vec2(std::cos(a), std::sin(a));
  });
  return std::make_shared<Forcing>(autonomous_forcing(h));
}

// Interior rotation of the harmonic lift by a bump; keeps |d| <= 1 and the trace.
VectorField2D perturbed_director(const Forcing& f, const Grid& g, double amp) {
  const VectorField2D base = elliptic_lift(f.h_inf);
  VectorField2D d(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const double a = amp * std::sin(M_PI * g.x(i)) * std::sin(2 * M_PI * g.y(j));
      const Vec2 b = base.at(i, j);
      d[0](i, j) = std::cos(a) * b[0] - std::sin(a) * b[1];
      d[1](i, j) = std::sin(a) * b[0] + std::cos(a) * b[1];
    }
  f.h_inf.apply_to(d);
  return d;
}

// Stream function zeta = S(x) S(y), S = sin^2(pi s): v = (S(x) S'(y), -S'(x) S(y)).
double S(double s) { return std::pow(std::sin(M_PI * s), 2); }
double S1(double s) { return M_PI * std::sin(2 * M_PI * s); }
double S2(double s) { return 2 * M_PI * M_PI * std::cos(2 * M_PI * s); }
double S3(double s) { return -4 * std::pow(M_PI, 3) * std::sin(2 * M_PI * s); }

Vec2 swirl(double x, double y) { return Vec2(S(x) * S1(y), -S1(x) * S(y)); }

VectorField2D swirl_field(const Grid& g, double amp) {
  VectorField2D v = VectorField2D::sample(g, [amp](double x, double y) -> Vec2 { return amp * swirl(x, y); });
  v.zero_boundary();
  return v;
}

}  // namespace

TEST(PhysParams, Validation) {
  PhysParams p;
  EXPECT_NO_THROW(p.validate());
  p.eps = 0.0;
  EXPECT_THROW(p.validate(), ParameterError);
}

TEST(Init, RejectsNoSlipViolation) {
  Grid g(16, 16);
  auto f = tilted_forcing(g);
  VectorField2D v(g);
  v[0](0, 5) = 0.1;
  EXPECT_THROW(init(v, elliptic_lift(f->h_inf), f, PhysParams{}, 1e-3), SetupError);
}

TEST(Init, RejectsTraceMismatch) {
  Grid g(16, 16);
  auto f = tilted_forcing(g);
  VectorField2D d = elliptic_lift(f->h_inf);
  d[0](0, 3) += 1e-3;
  try {
    init(VectorField2D(g), d, f, PhysParams{}, 1e-3);
    FAIL() << "expected a setup error";
  } catch (const SetupError& e) {
    EXPECT_NE(std::string(e.what()).find("compatibility"), std::string::npos);
  }
}

TEST(Init, RejectsOverlongDirector) {
  Grid g(16, 16);
  auto f = tilted_forcing(g);
  VectorField2D d = elliptic_lift(f->h_inf);
  d[0](5, 5) = 1.5;
  EXPECT_THROW(init(VectorField2D(g), d, f, PhysParams{}, 1e-3), SetupError);
}

TEST(Init, ProjectsInitialVelocity) {
  Grid g(16, 16);
  auto f = tilted_forcing(g);
  VectorField2D v = VectorField2D::sample(g, [](double x, double y) -> Vec2 {
    return Vec2(std::sin(M_PI * x) * std::sin(M_PI * y), 0.0);
  });
  v.zero_boundary();
  const SimState s = init(v, elliptic_lift(f->h_inf), f, PhysParams{}, 1e-3);
  const ScalarField2D div = divergence(s.v);
  EXPECT_LT(std::sqrt(inner_interior(div, div)), 1e-10);
  EXPECT_EQ(s.lifting.t, 0.0);
  EXPECT_EQ((s.lifting.dP - s.lifting.dE).max_magnitude(), 0.0);
}

TEST(DefaultDt, Rule) {
  Grid g(33, 17, 1.0, 1.0);
  PhysParams p;
  p.nu = 2.0;
  EXPECT_DOUBLE_EQ(default_dt(g, p), 0.25 * std::pow(1.0 / 32, 2) / 2.0);
}

TEST(Step, ConstantUnitDirectorIsFixedPoint) {
  Grid g(16, 16);
  const BoundaryTrace h = BoundaryTrace::sample(g, [](double, double) -> Vec2 { return Vec2(0.6, 0.8); });
  auto f = std::make_shared<Forcing>(autonomous_forcing(h));
  const VectorField2D d0 = VectorField2D::sample(g, [](double, double) -> Vec2 { return Vec2(0.6, 0.8); });
  SimState s = init(VectorField2D(g), d0, f, PhysParams{}, 1e-2);
  for (int k = 0; k < 5; ++k) s = step(s);
  EXPECT_LT(s.v.max_magnitude(), 1e-12);
  EXPECT_LT((s.d - d0).max_magnitude(), 1e-12);
}

TEST(Step, TracesAndSolenoidality) {
  Grid g(20, 20);
  auto f = tilted_forcing(g);
  SimState s = init(swirl_field(g, 0.5), perturbed_director(*f, g, 0.8), f, PhysParams{}, 1e-3);
  for (int k = 0; k < 10; ++k) s = step(s);
  EXPECT_EQ(BoundaryTrace::restrict(s.d).max_distance(f->h_inf), 0.0);
  for (auto [i, j] : g.boundary_nodes()) EXPECT_EQ(s.v.at(i, j).norm(), 0.0);
  const ScalarField2D div = divergence(s.v);
  EXPECT_LT(std::sqrt(inner_interior(div, div)), 1e-9);
}

TEST(SkewConvection, ConservesEnergy) {
  Grid g(20, 20);
  const VectorField2D v = swirl_field(g, 1.0);
  VectorField2D w = VectorField2D::sample(g, [](double x, double y) -> Vec2 {
    return Vec2(std::sin(3 * x) * y * (1 - y) * x * (1 - x), std::cos(2 * y) * x * (1 - x) * y * (1 - y));
  });
  w.zero_boundary();
  const VectorField2D b = skew_convection(v, w);
  EXPECT_LT(std::abs(inner_interior(b, w)), 1e-12 * std::sqrt(inner_interior(b, b) * inner_interior(w, w)));
}

TEST(Step, CflWarning) {
  Grid g(16, 16);
  auto f = tilted_forcing(g);
  StepOptions opt;
  opt.cfl_limit = 1e-6;
  SimState s = init(swirl_field(g, 1.0), elliptic_lift(f->h_inf), f, PhysParams{}, 1e-3, opt);
  s = step(s);
  EXPECT_EQ(s.cfl_warnings, 1);
  EXPECT_GT(s.last_cfl, 1e-6);
}

// With the velocity frozen at zero the director relaxes to the stationary
// solution computed by the steady solver on the same grid.
TEST(Step, DirectorRelaxationMatchesSteadySolver) {
  Grid g(20, 20);
  auto f = tilted_forcing(g, 1.2);
  StepOptions opt;
  opt.freeze_velocity = true;
  const VectorField2D d0 = perturbed_director(*f, g, 0.8);
  SimState s = init(VectorField2D(g), d0, f, PhysParams{}, 2e-3, opt);
  RunSummary r = run(s, 8.0, RunOptions{});
  const Equilibrium e = solve_equilibrium(f->h_inf, elliptic_lift(f->h_inf), PhysParams{}, 1e-11);
  ASSERT_TRUE(e.converged);
  EXPECT_LT((r.final_state.d - e.psi).max_magnitude(), 1e-6);
}

// Director equation with a source making d = (1,0) + e^{-t} (-p, p),
// p = 0.2 sin(pi x) sin(pi y), exact; velocity frozen at zero. Halving h and
// quartering dt must shrink the error by about 4.
TEST(Step, ManufacturedDirector) {
  const double eps = 0.5, T = 0.1;
  auto err = [&](int n, int steps) {
    Grid g(n, n);
    PhysParams p;
    p.eps = eps;
    auto exact = [](double x, double y, double t) -> Vec2 {
      const double q = 0.2 * std::exp(-t) * std::sin(M_PI * x) * std::sin(M_PI * y);
      return Vec2(1.0 - q, q);
    };
    auto F = std::make_shared<Forcing>();
    F->h = [](double, double, double) -> Vec2 { return Vec2(1.0, 0.0); };
    F->h_static = true;
    F->h_inf = F->trace(g, 0.0);
    F->director_source = [=](double x, double y, double t) -> Vec2 {
      const double q = 0.2 * std::exp(-t) * std::sin(M_PI * x) * std::sin(M_PI * y);
      const Vec2 d = exact(x, y, t);
      // d_t - Lap d + f(d) with d_t = (q, -q) and Lap d = 2 pi^2 (q, -q).
      return Vec2(q - 2 * M_PI * M_PI * q, -q + 2 * M_PI * M_PI * q) + ginzburg_landau_f(d, eps);
    };
    StepOptions opt;
    opt.freeze_velocity = true;
    const VectorField2D d0 = VectorField2D::sample(g, [&](double x, double y) { return exact(x, y, 0.0); });
    SimState s = init(VectorField2D(g), d0, F, p, T / steps, opt);
    for (int k = 0; k < steps; ++k) s = step(s);
    return (s.d - VectorField2D::sample(g, [&](double x, double y) { return exact(x, y, T); })).max_magnitude();
  };
  const double e1 = err(17, 10), e2 = err(33, 40);
  EXPECT_LT(e1, 1e-2);
  EXPECT_GT(e1 / e2, 3.0);
  EXPECT_LT(e1 / e2, 5.5);
}

// Velocity equation with constant director (no elastic force) and a force
// making v = e^{-t} V exact, V the swirl above, zero pressure.
TEST(Step, ManufacturedVelocity) {
  const double nu = 1.0, T = 0.05;
  auto err = [&](int n, int steps) {
    Grid g(n, n);
    PhysParams p;
    p.nu = nu;
    auto F = std::make_shared<Forcing>();
    F->h = [](double, double, double) -> Vec2 { return Vec2(1.0, 0.0); };
    F->h_static = true;
    F->h_inf = F->trace(g, 0.0);
    F->g = [nu](double x, double y, double t) -> Vec2 {
      const double e = std::exp(-t);
      const Vec2 V = swirl(x, y);
      const Vec2 lapV(S2(x) * S1(y) + S(x) * S3(y), -S3(x) * S(y) - S1(x) * S2(y));
      const Vec2 conv(V[0] * S1(x) * S1(y) + V[1] * S(x) * S2(y), -V[0] * S2(x) * S(y) - V[1] * S1(x) * S1(y));
      return -e * V + e * e * conv - nu * e * lapV;
    };
    const VectorField2D d0 = VectorField2D::sample(g, [](double, double) -> Vec2 { return Vec2(1.0, 0.0); });
    SimState s = init(swirl_field(g, 1.0), d0, F, p, T / steps);
    for (int k = 0; k < steps; ++k) s = step(s);
    return (s.v - swirl_field(g, std::exp(-T))).max_magnitude();
  };
  const double e1 = err(17, 10), e2 = err(33, 40);
  EXPECT_LT(e1, 5e-2);
  EXPECT_GT(e1 / e2, 3.0);
  EXPECT_LT(e1 / e2, 5.5);
}

TEST(Run, RecordCount) {
  Grid g(12, 12);
  auto f = tilted_forcing(g);
  const SimState s = init(VectorField2D(g), perturbed_director(*f, g, 0.5), f, PhysParams{}, 1e-3);
  RunOptions o;
  o.sample_every = 7;
  const RunSummary r = run(s, 0.05, o);
  EXPECT_EQ(r.steps, 50);
  EXPECT_EQ(r.records.size(), static_cast<std::size_t>(50 / 7 + 1));
  EXPECT_NEAR(r.final_state.t, 0.05, 1e-12);
}

TEST(Run, FixedPointRecordsConstant) {
  Grid g(12, 12);
  const BoundaryTrace h = BoundaryTrace::sample(g, [](double, double) -> Vec2 { return Vec2(1.0, 0.0); });
  auto f = std::make_shared<Forcing>(autonomous_forcing(h));
  const SimState s = init(VectorField2D(g), elliptic_lift(h), f, PhysParams{}, 1e-2);
  const RunSummary r = run(s, 0.2, RunOptions{});
  for (const auto& rec : r.records) {
    EXPECT_LT(rec.E_hat, 1e-24);
    EXPECT_LT(rec.D2, 1e-20);
  }
}

TEST(Run, SinksSeeEverySample) {
  Grid g(12, 12);
  auto f = tilted_forcing(g);
  const SimState s = init(VectorField2D(g), elliptic_lift(f->h_inf), f, PhysParams{}, 1e-2);
  RunOptions o;
  o.sample_every = 2;
  int seen = 0;
  o.sinks.push_back([&](const EnergyRecord&, const SimState&) { ++seen; });
  const RunSummary r = run(s, 0.1, o);
  EXPECT_EQ(seen, static_cast<int>(r.records.size()));
}

TEST(Run, AbortsOnBlowUpWithLastGoodState) {
  Grid g(12, 12);
  auto f = tilted_forcing(g);
  PhysParams p;
  p.eps = 0.01;
  const SimState s = init(VectorField2D(g), perturbed_director(*f, g, 0.5), f, p, 1.0);
  RunSummary r;
  try {
    r = run(s, 1e4, RunOptions{});
  } catch (const std::exception& e) {
    FAIL() << e.what();
  }
  EXPECT_TRUE(r.aborted);
  EXPECT_TRUE(r.final_state.d.finite());
  EXPECT_LT(r.final_state.t, 1e4);
}

TEST(Run, RejectsBadArguments) {
  Grid g(12, 12);
  auto f = tilted_forcing(g);
  const SimState s = init(VectorField2D(g), elliptic_lift(f->h_inf), f, PhysParams{}, 1e-2);
  EXPECT_THROW(run(s, 0.0, RunOptions{}), ParameterError);
  RunOptions o;
  o.sample_every = 0;
  EXPECT_THROW(run(s, 1.0, o), ParameterError);
}

// Autonomous data: the lifted energy never increases and the discrete
// energy inequality holds step by step.
TEST(Run, EnergyLawAndMaximumPrinciple) {
  Grid g(24, 24);
  auto f = tilted_forcing(g);
  const SimState s = init(swirl_field(g, 0.4), perturbed_director(*f, g, 1.0), f, PhysParams{}, default_dt(g, PhysParams{}));
  RunOptions o;
  o.track_energy_law = true;
  o.sample_every = 20;
  const RunSummary r = run(s, 0.3, o);
  EXPECT_LE(r.max_energy_residual, 1e-8 * (1.0 + r.E_hat0));
  EXPECT_LE(r.max_energy_increase, 0.0);
  EXPECT_LE(r.max_abs_d, 1.0 + 5e-3);
}

TEST(Run, GradVelocityEventuallyMonotone) {
  Grid g(24, 24);
  auto f = tilted_forcing(g);
  const SimState s = init(swirl_field(g, 0.4), perturbed_director(*f, g, 1.0), f, PhysParams{}, 2e-3);
  RunOptions o;
  o.sample_every = 10;
  const RunSummary r = run(s, 2.0, o);
  const std::size_t n = r.records.size();
  for (std::size_t k = n / 2 + 1; k < n; ++k)
    EXPECT_LE(r.records[k].grad_v_sq, r.records[k - 1].grad_v_sq * (1 + 1e-9) + 1e-28);
}

TEST(Step, TensorCouplingAgreesNearEquilibrium) {
  Grid g(20, 20);
  auto f = tilted_forcing(g);
  StepOptions a, b;
  b.coupling = CouplingForm::tensor;
  const VectorField2D d0 = perturbed_director(*f, g, 0.3);
  SimState sa = init(VectorField2D(g), d0, f, PhysParams{}, 1e-3, a);
  SimState sb = init(VectorField2D(g), d0, f, PhysParams{}, 1e-3, b);
  for (int k = 0; k < 20; ++k) {
    sa = step(sa);
    sb = step(sb);
  }
  EXPECT_LT((sa.d - sb.d).max_magnitude(), 1e-3);
  EXPECT_LT((sa.v - sb.v).max_magnitude(), 0.1 * std::max(sa.v.max_magnitude(), 1e-12) + 1e-6);
}
