#pragma once

// Time integrator for the coupled velocity/director system with
// time-dependent Dirichlet director data. Each step advances the liftings,
// then the director (backward Euler in the diffusion, explicit elsewhere),
// then the velocity (implicit viscosity, explicit convection and coupling)
// followed by the exact discrete projection.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>

#include "nematic/error.hpp"
#include "nematic/grid.hpp"
#include "nematic/lifting.hpp"
#include "nematic/linsolve.hpp"

namespace nematic {

struct PhysParams {
  double nu = 1.0;
  double lambda = 1.0;
  double eta = 1.0;
  double eps = 0.25;

  void validate() const {
    auto pos = [](double v, const char* n) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ParameterError(std::string(n) + " must be positive");
    };
    pos(nu, "nu");
    pos(lambda, "lambda");
    pos(eta, "eta");
    pos(eps, "eps");
  }
};

using SpaceTimeField = std::function<Vec2(double x, double y, double t)>;

/// External force g and boundary director data h. Empty callables mean zero
/// force, and `h_static` marks data that do not depend on time.
struct Forcing {
  SpaceTimeField g;
  SpaceTimeField h;
  BoundaryTrace h_inf;
  double gamma = 0.0;
  bool h_static = false;
  /// Extra source added to the director equation; used for manufactured solutions.
  SpaceTimeField director_source;

  bool has_force() const { return static_cast<bool>(g); }

  BoundaryTrace trace(const Grid& grid, double t) const {
    if (!h) throw SetupError("forcing has no boundary data");
    return BoundaryTrace::sample(grid, [&](double x, double y) { return h(x, y, t); });
  }

  VectorField2D force(const Grid& grid, double t) const {
    if (!g) return VectorField2D(grid);
    return VectorField2D::sample(grid, [&](double x, double y) { return g(x, y, t); });
  }
};

/// Static boundary datum with no force.
inline Forcing autonomous_forcing(const BoundaryTrace& h) {
  Forcing f;
  const Grid grid = h.grid();
  auto values = std::make_shared<std::vector<Vec2>>(h.values());
  auto ring = std::make_shared<std::vector<std::pair<int, int>>>(grid.boundary_nodes());
  f.h = [values, ring, grid](double x, double y, double) -> Vec2 {
    for (std::size_t k = 0; k < ring->size(); ++k)
      if (std::abs(grid.x((*ring)[k].first) - x) < 1e-12 && std::abs(grid.y((*ring)[k].second) - y) < 1e-12)
        return (*values)[k];
    throw DimensionError("boundary datum sampled off the boundary ring");
  };
  f.h_inf = h;
  f.h_static = true;
  return f;
}

enum class CouplingForm {
  /// sum_k mu_k grad d_k with mu = -Lap d_hat + f(d); pairs exactly with the
  /// director transport so the coupling exchanges no net energy.
  chemical_potential,
  /// sum_k Lap d_k grad d_k evaluated at the new director.
  tensor,
};

struct StepOptions {
  SolverConfig solver{};
  CouplingForm coupling = CouplingForm::chemical_potential;
  bool freeze_velocity = false;
  double cfl_limit = 1.0;
};

struct SimState {
  double t = 0.0;
  double dt = 0.0;
  long steps = 0;
  VectorField2D v;
  VectorField2D d;
  ScalarField2D pi;
  LiftingState lifting;
  PhysParams params;
  std::shared_ptr<const Forcing> forcing;
  StepOptions options;
  /// g(t) at the current time.
  VectorField2D g;
  long cfl_warnings = 0;
  double last_cfl = 0.0;

  const Grid& grid() const { return d.grid(); }
};

/// 0.25 min(hx, hy)^2 / max(eta, nu).
inline double default_dt(const Grid& g, const PhysParams& p) {
  const double h = std::min(g.hx(), g.hy());
  return 0.25 * h * h / std::max(p.eta, p.nu);
}

/// Skew-symmetric convection 0.5 (v . grad w + div(v (x) w)) at interior
/// nodes; zero on the boundary ring.
inline VectorField2D skew_convection(const VectorField2D& v, const VectorField2D& w) {
  const Grid& g = v.grid();
  VectorField2D out(g);
  for (int k = 0; k < 2; ++k) {
    const VectorField2D gw = gradient(w[k]);
    const ScalarField2D flux_x(g, v[0].values() * w[k].values());
    const ScalarField2D flux_y(g, v[1].values() * w[k].values());
    const Array2D div = detail::diff_rows(flux_x.values(), g.hx()) + detail::diff_cols(flux_y.values(), g.hy());
    out[k].values() = 0.5 * (v[0].values() * gw[0].values() + v[1].values() * gw[1].values() + div);
    out[k].zero_boundary();
  }
  return out;
}

inline SimState init(const VectorField2D& v0, const VectorField2D& d0, std::shared_ptr<const Forcing> forcing,
                     const PhysParams& params, double dt, const StepOptions& opt = {}, double t0 = 0.0) {
  params.validate();
  opt.solver.validate();
  if (!forcing) throw SetupError("init needs a forcing");
  if (!(dt > 0.0)) throw ParameterError("dt must be positive");
  require_same_grid(v0.grid(), d0.grid(), "initial data");
  const Grid& g = d0.grid();
  if (!v0.finite() || !d0.finite()) throw SetupError("initial data contain non-finite values");

  for (auto [i, j] : g.boundary_nodes()) {
    if (v0.at(i, j).norm() > 1e-12) {
      throw SetupError("no-slip violated: v0 is nonzero on the boundary at node (" + std::to_string(i) + ", " +
                       std::to_string(j) + ")");
    }
  }
  const BoundaryTrace h0 = forcing->trace(g, t0);
  for (std::size_t k = 0; k < h0.size(); ++k) {
    if (h0[k].norm() > 1.0 + 1e-12) throw SetupError("boundary datum exceeds unit length at t0");
  }
  const double mismatch = BoundaryTrace::restrict(d0).max_distance(h0);
  if (mismatch > 1e-12) {
    throw SetupError("compatibility violated: d0 trace differs from h(t0) by " + std::to_string(mismatch));
  }
  if (d0.max_magnitude() > 1.0 + 1e-12) throw SetupError("initial director exceeds unit length");

  SimState s;
  s.t = t0;
  s.dt = dt;
  s.params = params;
  s.forcing = std::move(forcing);
  s.options = opt;
  s.d = d0;
  h0.apply_to(s.d);
  auto proj = project_divergence_free(v0, opt.solver);
  s.v = std::move(proj.v);
  s.pi = std::move(proj.pi);
  s.lifting = make_lifting(h0, t0, opt.solver);
  s.g = s.forcing->force(g, t0);
  return s;
}

inline SimState step(const SimState& s) {
  const Grid& g = s.grid();
  const PhysParams& p = s.params;
  const double dt = s.dt;
  const double t1 = s.t + dt;
  const SolverConfig& cfg = s.options.solver;
  const Forcing& F = *s.forcing;

  SimState n;
  n.t = t1;
  n.dt = dt;
  n.steps = s.steps + 1;
  n.params = p;
  n.forcing = s.forcing;
  n.options = s.options;
  n.cfl_warnings = s.cfl_warnings;

  const double vmax = s.v.max_magnitude();
  n.last_cfl = dt * vmax / std::min(g.hx(), g.hy());
  if (n.last_cfl > s.options.cfl_limit) ++n.cfl_warnings;

  // 1. Liftings.
  const BoundaryTrace h1 = F.h_static ? s.lifting.trace : F.trace(g, t1);
  n.lifting = parabolic_lift_step(s.lifting, h1, dt, cfg);

  // 2. Director: (I - eta dt Lap) dhat' = dhat + dt (-v.grad d - eta f(d) - d_t d_E + s).
  VectorField2D dhat = s.d - s.lifting.dE;
  dhat.zero_boundary();
  const VectorField2D fd = ginzburg_landau_f(s.d, p.eps);
  VectorField2D rhs = dhat - (advect(s.v, s.d) + fd * p.eta + n.lifting.dt_dE) * dt;
  if (F.director_source) {
    rhs += VectorField2D::sample(g, [&](double x, double y) { return F.director_source(x, y, t1); }) * dt;
  }
  if (!rhs.finite()) throw NonFiniteError("non-finite director update at t=" + std::to_string(t1));
  VectorField2D dhat1(g);
  for (int k = 0; k < 2; ++k) dhat1[k] = implicit_diffusion(rhs[k], p.eta * dt, cfg);
  n.d = dhat1 + n.lifting.dE;
  h1.apply_to(n.d);

  // 3-4. Velocity predictor and projection.
  n.g = F.force(g, t1);
  if (s.options.freeze_velocity) {
    n.v = s.v;
    n.pi = s.pi;
  } else {
    // Elastic force; the two forms differ by grad F, which the projection removes.
    VectorField2D elastic;
    if (s.options.coupling == CouplingForm::chemical_potential) {
      VectorField2D mu = laplacian(dhat1) * -1.0 + fd;
      mu.zero_boundary();
      elastic = contract_gradient(mu, s.d);
    } else {
      elastic = elastic_stress_divergence(n.d) * -1.0;
    }
    VectorField2D vrhs = s.v + (n.g - skew_convection(s.v, s.v) + elastic * p.lambda) * dt;
    if (!vrhs.finite()) throw NonFiniteError("non-finite velocity update at t=" + std::to_string(t1));
    VectorField2D ustar(g);
    for (int k = 0; k < 2; ++k) ustar[k] = implicit_diffusion(vrhs[k], p.nu * dt, cfg);
    auto proj = project_divergence_free(ustar, cfg);
    n.v = std::move(proj.v);
    n.pi = proj.pi * (1.0 / dt);
  }

  if (!n.d.finite() || !n.v.finite()) {
    throw NonFiniteError("non-finite values after step at t=" + std::to_string(t1));
  }
  return n;
}

}  // namespace nematic
