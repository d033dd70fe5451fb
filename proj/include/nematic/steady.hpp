#pragma once

// Stationary director problem -Lap psi + f(psi) = 0 with psi = h_inf on the
// boundary: explicit gradient flow, Newton refinement, energies and an
// empirical local-minimality test.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nematic/dynamics.hpp"
#include "nematic/error.hpp"
#include "nematic/grid.hpp"
#include "nematic/lifting.hpp"
#include "nematic/norms.hpp"

namespace nematic {

struct Equilibrium {
  VectorField2D psi;
  double residual = std::numeric_limits<double>::infinity();
  double energy_E = 0.0;
  double energy_script = 0.0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_history;
  /// E at the monitored gradient-flow iterates.
  std::vector<double> energy_history;
};

/// -Lap d + f(d) on interior nodes, zero on the boundary.
inline VectorField2D stationary_defect(const VectorField2D& d, double eps) {
  VectorField2D r = laplacian(d) * -1.0 + ginzburg_landau_f(d, eps);
  r.zero_boundary();
  return r;
}

inline double stationary_residual(const VectorField2D& d, double eps) {
  const VectorField2D r = stationary_defect(d, eps);
  return std::sqrt(inner_interior(r, r));
}

/// E(d) = 0.5 ||grad d||^2 + int F(d).
inline double energy_E(const VectorField2D& d, double eps) {
  return 0.5 * grad_sq(d) + integrate(bulk_potential_F(d, eps));
}

/// 0.5 ||grad (d - d_star)||^2 + int F(d), with d_star the harmonic lift of
/// the limiting boundary datum.
inline double energy_script(const VectorField2D& d, const VectorField2D& d_star, double eps) {
  return 0.5 * grad_sq(d - d_star) + integrate(bulk_potential_F(d, eps));
}

namespace detail {

inline void fill_energies(Equilibrium& e, const BoundaryTrace& h_inf, double eps, const SolverConfig& cfg) {
  const VectorField2D d_star = elliptic_lift(h_inf, cfg);
  e.energy_E = energy_E(e.psi, eps);
  e.energy_script = energy_script(e.psi, d_star, eps);
}

}  // namespace detail

struct GradientFlowOptions {
  int max_iter = 2000000;
  /// Record the residual every this many iterations.
  int monitor_every = 100;
  SolverConfig solver{};
};

/// Pseudo-timestep 1.8 / (4/hx^2 + 4/hy^2 + 2/eps^2): 90% of the explicit
/// stability limit of -Lap + f' on the unit ball.
inline double gradient_flow_tau(const Grid& g, double eps) {
  return 1.8 / (4.0 / (g.hx() * g.hx()) + 4.0 / (g.hy() * g.hy()) + 2.0 / (eps * eps));
}

/// Relaxes d_tau = Lap d - f(d) with d = h_inf on the boundary until the
/// stationary residual drops below tol. Returns the best iterate with
/// converged = false when the iteration cap is reached.
inline Equilibrium solve_gradient_flow(const BoundaryTrace& h_inf, const VectorField2D& d_init,
                                       const PhysParams& params, double tol, const GradientFlowOptions& opt = {}) {
  params.validate();
  if (!(tol > 0.0)) throw ParameterError("gradient flow tolerance must be positive");
  require_same_grid(h_inf.grid(), d_init.grid(), "gradient flow");
  if (BoundaryTrace::restrict(d_init).max_distance(h_inf) > 1e-12) {
    throw SetupError("gradient flow initial guess does not match the boundary datum");
  }
  const Grid& g = h_inf.grid();
  const double eps = params.eps;
  const double tau = gradient_flow_tau(g, eps);
  Equilibrium e;
  VectorField2D d = d_init;
  VectorField2D best = d;
  double best_res = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it <= opt.max_iter; ++it) {
    const VectorField2D r = stationary_defect(d, eps);
    if (it % opt.monitor_every == 0 || it == opt.max_iter) {
      const double res = std::sqrt(inner_interior(r, r));
      e.residual_history.push_back(res);
      e.energy_history.push_back(energy_E(d, eps));
      if (res < best_res) {
        best_res = res;
        best = d;
      }
      if (res <= tol) break;
    }
    if (it == opt.max_iter) break;
    d -= r * tau;
  }
  e.psi = best;
  e.residual = best_res;
  e.converged = best_res <= tol;
  e.iterations = it;
  detail::fill_energies(e, h_inf, eps, opt.solver);
  return e;
}

namespace detail {

// Sparse Jacobian of -Lap d + f(d) on interior unknowns ordered
// (component, j, i) with i fastest.
inline Eigen::SparseMatrix<double> stationary_jacobian(const VectorField2D& d, double eps) {
  const Grid& g = d.grid();
  const int mx = g.mx(), my = g.my(), n = mx * my;
  const double ax = 1.0 / (g.hx() * g.hx()), ay = 1.0 / (g.hy() * g.hy());
  const double ie2 = 1.0 / (eps * eps);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(2 * n * 7));
  auto id = [mx, n](int c, int i, int j) { return c * n + j * mx + i; };
  for (int j = 0; j < my; ++j)
    for (int i = 0; i < mx; ++i) {
      const Vec2 v = d.at(i + 1, j + 1);
      const double s = v.squaredNorm() - 1.0;
      for (int c = 0; c < 2; ++c) {
        const int r = id(c, i, j);
        trip.emplace_back(r, r, 2 * ax + 2 * ay + ie2 * (s + 2 * v[c] * v[c]));
        trip.emplace_back(r, id(1 - c, i, j), ie2 * 2 * v[0] * v[1]);
        if (i > 0) trip.emplace_back(r, id(c, i - 1, j), -ax);
        if (i + 1 < mx) trip.emplace_back(r, id(c, i + 1, j), -ax);
        if (j > 0) trip.emplace_back(r, id(c, i, j - 1), -ay);
        if (j + 1 < my) trip.emplace_back(r, id(c, i, j + 1), -ay);
      }
    }
  Eigen::SparseMatrix<double> J(2 * n, 2 * n);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

inline Eigen::VectorXd pack_interior(const VectorField2D& f) {
  const Grid& g = f.grid();
  const int mx = g.mx(), my = g.my(), n = mx * my;
  Eigen::VectorXd x(2 * n);
  for (int c = 0; c < 2; ++c)
    for (int j = 0; j < my; ++j)
      for (int i = 0; i < mx; ++i) x[c * n + j * mx + i] = f[c](i + 1, j + 1);
  return x;
}

inline VectorField2D unpack_interior(const Grid& g, const Eigen::VectorXd& x) {
  const int mx = g.mx(), my = g.my(), n = mx * my;
  VectorField2D f(g);
  for (int c = 0; c < 2; ++c)
    for (int j = 0; j < my; ++j)
      for (int i = 0; i < mx; ++i) f[c](i + 1, j + 1) = x[c * n + j * mx + i];
  return f;
}

}  // namespace detail

struct NewtonOptions {
  int max_iter = 30;
  /// Refuse to start from iterates with a larger residual.
  double max_start_residual = 1e-2;
  SolverConfig solver{};
};

/// Newton iteration with Jacobian -Lap + f'(psi) on the interior unknowns.
inline Equilibrium newton_refine(const Equilibrium& e0, const BoundaryTrace& h_inf, const PhysParams& params,
                                 double tol, const NewtonOptions& opt = {}) {
  params.validate();
  const double eps = params.eps;
  Equilibrium e = e0;
  e.residual_history.clear();
  e.residual = stationary_residual(e.psi, eps);
  e.residual_history.push_back(e.residual);
  e.iterations = 0;
  if (e.residual > opt.max_start_residual) {
    e.converged = false;
    detail::fill_energies(e, h_inf, eps, opt.solver);
    return e;
  }
  const Grid& g = e.psi.grid();
  while (e.residual > tol && e.iterations < opt.max_iter) {
    const Eigen::SparseMatrix<double> J = detail::stationary_jacobian(e.psi, eps);
    const Eigen::VectorXd R = detail::pack_interior(stationary_defect(e.psi, eps));
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(J);
    if (lu.info() != Eigen::Success) {
      throw DegenerateCriticalPointError("stationary Jacobian is singular at residual " +
                                         std::to_string(e.residual));
    }
    const Eigen::VectorXd step = lu.solve(-R);
    const double lin_res = (J * step + R).norm();
    if (!step.allFinite() || lin_res > 1e-6 * std::max(1e-300, R.norm())) {
      throw DegenerateCriticalPointError("stationary Jacobian is numerically singular (linear residual " +
                                         std::to_string(lin_res) + ")");
    }
    e.psi += detail::unpack_interior(g, step);
    e.residual = stationary_residual(e.psi, eps);
    e.residual_history.push_back(e.residual);
    ++e.iterations;
  }
  e.converged = e.residual <= tol;
  detail::fill_energies(e, h_inf, eps, opt.solver);
  return e;
}

/// Gradient flow down to `handoff`, then Newton to `tol`.
inline Equilibrium solve_equilibrium(const BoundaryTrace& h_inf, const VectorField2D& d_init,
                                     const PhysParams& params, double tol, double handoff = 1e-4) {
  Equilibrium e = solve_gradient_flow(h_inf, d_init, params, std::max(tol, handoff));
  if (e.residual <= tol) return e;
  return newton_refine(e, h_inf, params, tol);
}

/// <-Lap psi + f(psi), z> for a zero-trace direction z, relative to ||z||_{H1}.
inline double critical_point_defect(const Equilibrium& e, const VectorField2D& z, double eps) {
  const double zn = norm(z, NormKind::H1);
  if (zn == 0.0) return 0.0;
  return std::abs(inner_interior(stationary_defect(e.psi, eps), z)) / zn;
}

enum class MinimizerVerdict { minimizer_consistent, saddle_detected };

inline const char* to_string(MinimizerVerdict v) {
  return v == MinimizerVerdict::minimizer_consistent ? "minimizer-consistent" : "saddle-detected";
}

struct MinimizerReport {
  MinimizerVerdict verdict = MinimizerVerdict::minimizer_consistent;
  double min_energy_gap = std::numeric_limits<double>::infinity();
  double min_rayleigh = std::numeric_limits<double>::infinity();
  /// Smallest eigenvalue of the linearization from the slow path, NaN when not run.
  double min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  std::optional<VectorField2D> witness;
};

struct MinimizerCheckOptions {
  unsigned seed = 12345;
  int max_mode = 4;
  bool eigen_slow_path = false;
  int power_iterations = 3000;
  double gap_tolerance = 1e-12;
};

namespace detail {

inline VectorField2D sine_probe(const Grid& g, std::mt19937_64& rng, int max_mode) {
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::MatrixXd a0(max_mode, max_mode), a1(max_mode, max_mode);
  for (int p = 0; p < max_mode; ++p)
    for (int q = 0; q < max_mode; ++q) {
      const double damp = 1.0 / ((p + 1) * (q + 1));
      a0(p, q) = N(rng) * damp;
      a1(p, q) = N(rng) * damp;
    }
  return VectorField2D::sample(g, [&](double x, double y) {
    Vec2 w = Vec2::Zero();
    for (int p = 0; p < max_mode; ++p)
      for (int q = 0; q < max_mode; ++q) {
        const double s = std::sin((p + 1) * M_PI * x / g.lx()) * std::sin((q + 1) * M_PI * y / g.ly());
        w[0] += a0(p, q) * s;
        w[1] += a1(p, q) * s;
      }
    return w;
  });
}

inline VectorField2D apply_linearization(const VectorField2D& psi, const VectorField2D& w, double eps) {
  const double ie2 = 1.0 / (eps * eps);
  const Array2D s = psi[0].values().square() + psi[1].values().square() - 1.0;
  const Array2D dot = psi[0].values() * w[0].values() + psi[1].values() * w[1].values();
  VectorField2D out = laplacian(w) * -1.0;
  for (int c = 0; c < 2; ++c) out[c].values() += ie2 * (s * w[c].values() + 2.0 * psi[c].values() * dot);
  out.zero_boundary();
  return out;
}

}  // namespace detail

/// Probes E_script(psi + w) - E_script(psi) over random zero-trace
/// directions with ||w||_{H1} = delta. The first two probes are the lowest
/// sine mode in each component.
inline MinimizerReport local_minimizer_check(const Equilibrium& e, const BoundaryTrace& h_inf,
                                             const PhysParams& params, int n_probe, double delta,
                                             const MinimizerCheckOptions& opt = {}) {
  MinimizerReport rep;
  if (delta == 0.0 || n_probe <= 0) return rep;
  if (delta < 0.0) throw ParameterError("probe radius must be nonnegative");
  const Grid& g = e.psi.grid();
  const double eps = params.eps;
  const VectorField2D d_star = elliptic_lift(h_inf);
  const double base = energy_script(e.psi, d_star, eps);
  std::mt19937_64 rng(opt.seed);
  for (int k = 0; k < n_probe; ++k) {
    VectorField2D w(g);
    if (k < 2) {
      w[k] = ScalarField2D::sample(g, [&](double x, double y) {
        return std::sin(M_PI * x / g.lx()) * std::sin(M_PI * y / g.ly());
      });
    } else {
      w = detail::sine_probe(g, rng, opt.max_mode);
    }
    w.zero_boundary();
    const double wn = norm(w, NormKind::H1);
    if (wn == 0.0) continue;
    w *= delta / wn;
    const double gap = energy_script(e.psi + w, d_star, eps) - base;
    const double rq = inner_interior(detail::apply_linearization(e.psi, w, eps), w) / inner_interior(w, w);
    rep.min_rayleigh = std::min(rep.min_rayleigh, rq);
    if (gap < rep.min_energy_gap) {
      rep.min_energy_gap = gap;
      if (gap < -opt.gap_tolerance * (1.0 + std::abs(base))) {
        rep.verdict = MinimizerVerdict::saddle_detected;
        rep.witness = w;
      }
    }
  }
  if (opt.eigen_slow_path) {
    // Power iteration on sigma I - J with sigma above the spectrum of J.
    const double sigma = 4.0 / (g.hx() * g.hx()) + 4.0 / (g.hy() * g.hy()) + 3.0 / (eps * eps);
    VectorField2D w = detail::sine_probe(g, rng, opt.max_mode);
    w.zero_boundary();
    double mu = 0.0;
    for (int it = 0; it < opt.power_iterations; ++it) {
      VectorField2D z = w * sigma - detail::apply_linearization(e.psi, w, eps);
      z.zero_boundary();
      const double zn = std::sqrt(inner_interior(z, z));
      if (zn == 0.0) break;
      mu = inner_interior(z, w) / inner_interior(w, w);
      w = z * (1.0 / zn);
    }
    rep.min_eigenvalue = sigma - mu;
    if (rep.min_eigenvalue < 0.0 && rep.verdict == MinimizerVerdict::minimizer_consistent) {
      const double wn = norm(w, NormKind::H1);
      w *= delta / wn;
      if (energy_script(e.psi + w, d_star, eps) - base < -opt.gap_tolerance * (1.0 + std::abs(base))) {
        rep.verdict = MinimizerVerdict::saddle_detected;
        rep.witness = w;
      }
    }
  }
  return rep;
}

}  // namespace nematic
