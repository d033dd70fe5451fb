#pragma once

// Forcing families and seeded initial data.
//
// Boundary data are angle-parametrized, h = (cos phi, sin phi) with
// phi = phi_inf + a_h (1+t)^(-1-gamma) psi_b, so |h| = 1 exactly. The force
// is g = a_g (1+t)^(-(2+gamma)/2) g0. Initial velocities come from a stream
// function vanishing to second order on the boundary; initial directors are
// pointwise rotations of a base field, which keeps |d0| <= 1.

#include <cmath>
#include <memory>
#include <optional>
#include <random>

#include "nematic/diagnostics.hpp"
#include "nematic/dynamics.hpp"
#include "nematic/harness/config.hpp"
#include "nematic/lifting.hpp"
#include "nematic/norms.hpp"
#include "nematic/steady.hpp"

namespace nematic::harness {

struct Scenario {
  ScenarioSpec spec;
  SimState state;
  std::shared_ptr<const Forcing> forcing;
  RateModel rate;
  BoundaryTrace h_inf;
  /// Equilibrium the initial director perturbs; only for the minimizer family.
  std::optional<Equilibrium> psi_star;
  /// Amplitudes actually used; the minimizer family derives them from M1..M3.
  double a_h = 0.0;
  double a_g = 0.0;
};

/// Limiting boundary angle: a linear tilt of amplitude kappa plus `winding`
/// turns around the domain centre.
inline double boundary_angle(const ScenarioSpec& s, double x, double y) {
  double phi = s.kappa * (x / s.lx - y / s.ly);
  if (s.winding != 0) phi += s.winding * std::atan2(y - 0.5 * s.ly, x - 0.5 * s.lx);
  return phi;
}

inline double boundary_profile(const ScenarioSpec& s, double x, double y) {
  return std::cos(M_PI * x / s.lx) * std::cos(M_PI * y / s.ly);
}

inline Vec2 force_profile(const ScenarioSpec& s, double x, double y) {
  const double px = M_PI * x / s.lx, py = M_PI * y / s.ly;
  return Vec2(std::sin(px) * std::sin(2 * py), -std::sin(2 * px) * std::sin(py));
}

inline BoundaryTrace limiting_trace(const ScenarioSpec& s) {
  return BoundaryTrace::sample(s.grid(), [&](double x, double y) -> Vec2 {
    const double phi = boundary_angle(s, x, y);
    return Vec2(std::cos(phi), std::sin(phi));
  });
}

/// Forcing for the given amplitudes; a_h = a_g = 0 gives the autonomous case.
inline Forcing make_forcing(const ScenarioSpec& s, double a_h, double a_g) {
  Forcing f;
  f.h_inf = limiting_trace(s);
  const double gamma = s.gamma;
  if (a_h == 0.0) {
    f.h = [s](double x, double y, double) -> Vec2 {
      const double phi = boundary_angle(s, x, y);
      return Vec2(std::cos(phi), std::sin(phi));
    };
    f.h_static = true;
  } else {
    f.h = [s, a_h, gamma](double x, double y, double t) -> Vec2 {
      const double phi = boundary_angle(s, x, y) + a_h * std::pow(1.0 + t, -1.0 - gamma) * boundary_profile(s, x, y);
      return Vec2(std::cos(phi), std::sin(phi));
    };
  }
  if (a_g != 0.0) {
    f.g = [s, a_g, gamma](double x, double y, double t) -> Vec2 {
      return a_g * std::pow(1.0 + t, -0.5 * (2.0 + gamma)) * force_profile(s, x, y);
    };
  }
  f.gamma = (a_h == 0.0 && a_g == 0.0) ? 0.0 : gamma;
  return f;
}

namespace detail {

// Random sine series with decaying coefficients, zero on the boundary.
inline ScalarField2D random_sine_series(const Grid& g, std::mt19937_64& rng, int modes = 4) {
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<double> c(static_cast<std::size_t>(modes * modes));
  for (int p = 0; p < modes; ++p)
    for (int q = 0; q < modes; ++q) c[p * modes + q] = N(rng) / ((p + 1) * (q + 1));
  ScalarField2D f = ScalarField2D::sample(g, [&](double x, double y) {
    double s = 0.0;
    for (int p = 0; p < modes; ++p)
      for (int q = 0; q < modes; ++q)
        s += c[p * modes + q] * std::sin((p + 1) * M_PI * x / g.lx()) * std::sin((q + 1) * M_PI * y / g.ly());
    return s;
  });
  f.zero_boundary();
  return f;
}

inline VectorField2D rotate(const VectorField2D& d, const ScalarField2D& theta) {
  VectorField2D out(d.grid());
  const Array2D c = theta.values().cos(), s = theta.values().sin();
  out[0].values() = c * d[0].values() - s * d[1].values();
  out[1].values() = s * d[0].values() + c * d[1].values();
  return out;
}

}  // namespace detail

/// Divergence-free velocity with zero trace and L2 norm `amplitude`.
inline VectorField2D stream_function_velocity(const Grid& g, std::mt19937_64& rng, double amplitude) {
  const ScalarField2D bump = ScalarField2D::sample(
      g, [&](double x, double y) { return std::sin(M_PI * x / g.lx()) * std::sin(M_PI * y / g.ly()); });
  ScalarField2D zeta(g, detail::random_sine_series(g, rng).values() * bump.values());
  const VectorField2D gz = gradient(zeta);
  VectorField2D v(g);
  v[0] = gz[1];
  v[1].values() = -gz[0].values();
  v.zero_boundary();
  const double n = std::sqrt(l2_sq(v));
  return n > 0.0 ? v * (amplitude / n) : v;
}

inline Scenario generate_scenario(const ScenarioSpec& spec) {
  spec.validate();
  const Grid g = spec.grid();
  const SolverConfig cfg = spec.solver_config();
  Scenario sc;
  sc.spec = spec;
  sc.h_inf = limiting_trace(spec);

  switch (spec.family) {
    case Family::autonomous:
      break;
    case Family::polynomial_decay:
      sc.a_h = spec.a_h;
      sc.a_g = spec.a_g;
      break;
    case Family::minimizer_perturbation: {
      // Largest amplitudes meeting the primed hypotheses with constants M1..M3.
      const BoundaryTrace dir = BoundaryTrace::sample(g, [&](double x, double y) -> Vec2 {
        const double phi = boundary_angle(spec, x, y);
        return boundary_profile(spec, x, y) * Vec2(-std::sin(phi), std::cos(phi));
      });
      const double half = trace_h_half(dir), l2 = trace_l2(dir);
      const double g0 = std::sqrt(l2_sq(VectorField2D::sample(g, [&](double x, double y) { return force_profile(spec, x, y); })));
      sc.a_h = 0.9 * std::min(spec.M1 / half, spec.M3 / ((1.0 + spec.gamma) * l2));
      sc.a_g = 0.9 * std::sqrt(spec.M2) / g0;
      break;
    }
  }
  auto forcing = std::make_shared<Forcing>(make_forcing(spec, sc.a_h, sc.a_g));
  sc.forcing = forcing;
  sc.rate = spec.family == Family::autonomous ? make_rate_model(0.0) : make_rate_model(spec.gamma);

  std::mt19937_64 rng(spec.seed);
  VectorField2D base = elliptic_lift(sc.h_inf, cfg);
  if (spec.family == Family::minimizer_perturbation) {
    sc.psi_star = solve_equilibrium(sc.h_inf, base, spec.params, spec.tol.steady);
    if (!sc.psi_star->converged) throw SetupError("equilibrium for the minimizer scenario did not converge");
    base = sc.psi_star->psi;
  }

  // Rotation angle: boundary part matching h(0), interior random part.
  const ScalarField2D profile = ScalarField2D::sample(g, [&](double x, double y) { return boundary_profile(spec, x, y); });
  const ScalarField2D bnd(g, profile.values() * sc.a_h);
  ScalarField2D rnd = detail::random_sine_series(g, rng);
  const double peak = rnd.max_abs();
  if (peak > 0.0) rnd.values() *= spec.d0_amplitude / peak;

  double v_amp = spec.v0_amplitude;
  if (spec.family == Family::minimizer_perturbation) v_amp = std::min(v_amp, spec.sigma1);
  const VectorField2D v0 = stream_function_velocity(g, rng, v_amp);

  VectorField2D d0 = detail::rotate(base, ScalarField2D(g, bnd.values() + rnd.values()));
  if (spec.family == Family::minimizer_perturbation) {
    double scale = 1.0;
    for (int k = 0; k < 60 && norm(d0 - base, NormKind::H1) > spec.sigma2; ++k) {
      scale *= 0.5;
      d0 = detail::rotate(base, ScalarField2D(g, bnd.values() + scale * rnd.values()));
    }
    if (norm(d0 - base, NormKind::H1) > spec.sigma2)
      throw SetupError("boundary perturbation alone exceeds sigma2; decrease M1 or M3");
  }
  const double dt = spec.dt > 0.0 ? spec.dt : default_dt(g, spec.params);
  StepOptions opt;
  opt.solver = cfg;
  opt.coupling = spec.coupling;
  sc.state = init(v0, d0, forcing, spec.params, dt, opt);
  return sc;
}

}  // namespace nematic::harness
