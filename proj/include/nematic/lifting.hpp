#pragma once

// Boundary liftings of the director data: the harmonic extension d_E(t), the
// caloric extension d_P(t) started from d_E(0), and checks of the decay
// estimates relating the two.

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <utility>
#include <vector>

#include "nematic/error.hpp"
#include "nematic/fit.hpp"
#include "nematic/grid.hpp"
#include "nematic/linsolve.hpp"
#include "nematic/norms.hpp"

namespace nematic {

struct LiftingState {
  VectorField2D dE;
  VectorField2D dP;
  VectorField2D dE0;
  VectorField2D dt_dP;
  VectorField2D dt_dE;
  BoundaryTrace trace;
  /// (h(t) - h(t - dt)) / dt on the boundary ring.
  BoundaryTrace trace_rate;
  double t = 0.0;
};

/// Componentwise harmonic extension of the trace.
inline VectorField2D elliptic_lift(const BoundaryTrace& trace, const SolverConfig& cfg = {}) {
  const Grid& g = trace.grid();
  VectorField2D out(g);
  for (int k = 0; k < 2; ++k) {
    PoissonProblem p{g, ScalarField2D(g), trace.component(k)};
    out[k] = solve_poisson_dirichlet(p, cfg);
  }
  return out;
}

/// Lifting at time t0 with d_P(t0) = d_E(t0) = d_E0.
inline LiftingState make_lifting(const BoundaryTrace& h0, double t0 = 0.0, const SolverConfig& cfg = {}) {
  const Grid& g = h0.grid();
  LiftingState s;
  s.dE = elliptic_lift(h0, cfg);
  s.dP = s.dE;
  s.dE0 = s.dE;
  s.dt_dP = VectorField2D(g);
  s.dt_dE = VectorField2D(g);
  s.trace = h0;
  s.trace_rate = BoundaryTrace(g, std::vector<Vec2>(g.boundary_size(), Vec2::Zero()));
  s.t = t0;
  return s;
}

/// Advances d_P by one backward-Euler heat step to the new trace and
/// recomputes d_E. A trace identical to the current one reuses d_E.
inline LiftingState parabolic_lift_step(const LiftingState& s, const BoundaryTrace& trace_next, double dt,
                                        const SolverConfig& cfg = {}) {
  if (!(dt > 0.0)) throw ParameterError("lifting step needs dt > 0");
  require_same_grid(s.trace.grid(), trace_next.grid(), "lifting step");
  const Grid& g = trace_next.grid();
  LiftingState n;
  n.t = s.t + dt;
  n.dE0 = s.dE0;
  n.trace = trace_next;
  std::vector<Vec2> rate(trace_next.size());
  for (std::size_t k = 0; k < rate.size(); ++k) rate[k] = (trace_next[k] - s.trace[k]) / dt;
  n.trace_rate = BoundaryTrace(g, std::move(rate));

  if (trace_next.max_distance(s.trace) == 0.0) {
    n.dE = s.dE;
    n.dt_dE = VectorField2D(g);
    // A harmonic d_P is a fixed point of the heat step.
    if ((s.dP - s.dE).magnitude().max_abs() == 0.0) {
      n.dP = s.dP;
      n.dt_dP = VectorField2D(g);
      return n;
    }
  } else {
    n.dE = elliptic_lift(trace_next, cfg);
    n.dt_dE = (n.dE - s.dE) * (1.0 / dt);
  }
  n.dP = heat_step(s.dP, trace_next, dt, cfg);
  n.dt_dP = (n.dP - s.dP) * (1.0 / dt);
  return n;
}

/// d_hat = d - d_E and d_tilde = d - d_P, both with zero trace.
inline std::pair<VectorField2D, VectorField2D> shifted_fields(const VectorField2D& d, const LiftingState& s) {
  require_same_grid(d.grid(), s.dE.grid(), "shifted fields");
  VectorField2D hat = d - s.dE;
  VectorField2D tilde = d - s.dP;
  hat.zero_boundary();
  tilde.zero_boundary();
  return {std::move(hat), std::move(tilde)};
}

/// ||grad Lap d_P||. The boundary values of Lap d_P are taken from d_t d_P,
/// which the heat equation makes consistent up to the boundary.
inline double grad_lap_norm(const LiftingState& s) {
  double acc = 0.0;
  for (int k = 0; k < 2; ++k) {
    ScalarField2D l = laplacian(s.dP[k]);
    const ScalarTrace b = s.trace_rate.component(k);
    apply_scalar_trace(l, b);
    acc += grad_sq(l);
  }
  return std::sqrt(acc);
}

/// Scalar summary of one lifting state; enough to run the decay checks
/// without keeping whole fields.
struct LiftingSample {
  double t = 0.0;
  double dist_H1 = 0.0;        ///< ||d_P - d_E||_{H1}
  double dist_H2 = 0.0;        ///< ||d_P - d_E||_{H2}
  double dt_dP = 0.0;          ///< ||d_t d_P||
  double grad_lap_dP = 0.0;    ///< ||grad Lap d_P||
  double dt_dE = 0.0;          ///< ||d_t d_E||, stands in for ||h_t||_{H^{-1/2}}
  double trace_rate_half = 0.0;  ///< surrogate ||h_t||_{H^{1/2}(G)}
  double trace_rate_l2 = 0.0;    ///< ||h_t||_{L2(G)}
  double identity_residual = 0.0;  ///< ||Lap(d_P - d_E) - d_t d_P|| over the interior
};

inline LiftingSample summarize(const LiftingState& s) {
  LiftingSample out;
  out.t = s.t;
  VectorField2D diff = s.dP - s.dE;
  diff.zero_boundary();
  out.dist_H1 = norm(diff, NormKind::H1);
  out.dist_H2 = norm(diff, NormKind::H2);
  out.dt_dP = std::sqrt(l2_sq(s.dt_dP));
  out.grad_lap_dP = grad_lap_norm(s);
  out.dt_dE = std::sqrt(l2_sq(s.dt_dE));
  out.trace_rate_half = trace_h_half(s.trace_rate);
  out.trace_rate_l2 = trace_l2(s.trace_rate);
  VectorField2D r = laplacian(diff) - s.dt_dP;
  out.identity_residual = std::sqrt(inner_interior(r, r));
  return out;
}

/// Bound check calibrated on the first half of the samples and validated on
/// the second: c is the worst ratio lhs/rhs on the first half and the check
/// passes when the second half stays within `slack` * c.
struct BoundCheck {
  double constant = 0.0;
  double worst_late_ratio = 0.0;
  bool pass = true;
  bool vacuous = false;
  std::vector<double> ratio;
};

namespace detail {

inline constexpr double kNegligible = 1e-280;

inline BoundCheck calibrated_bound(const std::vector<double>& lhs, const std::vector<double>& rhs,
                                   double slack = 1.5) {
  BoundCheck b;
  const std::size_t n = lhs.size(), half = n / 2;
  b.ratio.assign(n, 0.0);
  bool any = false;
  for (std::size_t k = 0; k < n; ++k) {
    if (lhs[k] <= kNegligible) continue;
    any = true;
    b.ratio[k] = rhs[k] > kNegligible ? lhs[k] / rhs[k] : std::numeric_limits<double>::infinity();
  }
  if (!any) {
    b.vacuous = true;
    return b;
  }
  for (std::size_t k = 0; k < half; ++k) b.constant = std::max(b.constant, b.ratio[k]);
  for (std::size_t k = half; k < n; ++k) b.worst_late_ratio = std::max(b.worst_late_ratio, b.ratio[k]);
  b.pass = std::isfinite(b.constant) && b.worst_late_ratio <= slack * b.constant;
  return b;
}

}  // namespace detail

struct ExponentCheck {
  double exponent = std::numeric_limits<double>::quiet_NaN();
  double r2 = std::numeric_limits<double>::quiet_NaN();
  double required = 0.0;
  bool super_polynomial = false;
  bool vacuous = false;
  bool pass = true;
};

struct LiftingReport {
  double gamma = 0.0;
  BoundCheck lift_gap;  ///< ||d_P - d_E||^2_{H1} against the exponentially weighted trace-rate integral
  BoundCheck lift_h2;  ///< ||d_t d_P||^2 + ||d_P - d_E||^2_{H2} against the cumulative trace-rate integral
  BoundCheck grad_lap_integral;  ///< cumulative ||grad Lap d_P||^2 against the same integral
  ExponentCheck dt_decay;  ///< decay of ||d_t d_P||^2
  ExponentCheck dt_h2_decay;  ///< decay of ||d_t d_P||^2 + ||d_P - d_E||^2_{H2}
  ExponentCheck grad_lap_tail;  ///< decay of the integral of ||grad Lap d_P||^2 over [t/2, t]
  double final_dt_dP = 0.0;
  bool final_dt_pass = true;
  double max_identity_residual = 0.0;

  bool pass() const { return lift_gap.pass && lift_h2.pass && grad_lap_integral.pass && dt_decay.pass && grad_lap_tail.pass && final_dt_pass; }
};

namespace detail {

inline ExponentCheck exponent_check(const std::vector<double>& t, const std::vector<double>& v, double required,
                                    double tail_fraction) {
  ExponentCheck e;
  e.required = required;
  const std::size_t n = t.size();
  const std::size_t start = n - std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(tail_fraction * n)));
  double peak = 0.0;
  for (std::size_t k = start; k < n; ++k) peak = std::max(peak, std::abs(v[k]));
  if (peak <= kNegligible) {
    e.vacuous = true;
    return e;
  }
  const DecayFit f = fit_decay_exponent(t, v, tail_fraction);
  e.exponent = f.exponent;
  e.r2 = f.r2;
  e.super_polynomial = f.super_polynomial;
  e.pass = f.exponent >= required;
  return e;
}

}  // namespace detail

/// Checks the decay estimates on a uniformly sampled lifting history.
/// Exponent fits use the last `tail_fraction` of the samples.
inline LiftingReport lifting_diagnostics(const std::vector<LiftingSample>& h, double gamma,
                                          double tail_fraction = 0.5, double final_dt_tol = 1e-6,
                                          double exponent_slack = 0.3) {
  if (h.size() < 16) throw InsufficientDataError("lifting diagnostics need at least 16 samples");
  if (!(gamma > 0.0)) throw ParameterError("gamma must be positive");
  const std::size_t n = h.size();
  LiftingReport r;
  r.gamma = gamma;

  std::vector<double> t(n), gap_lhs(n), gap_rhs(n), h2_lhs(n), cum_half(n), cum_gl(n), dtp2(n), comb(n), tail_gl(n);
  double weighted = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    t[k] = h[k].t;
    gap_lhs[k] = h[k].dist_H1 * h[k].dist_H1;
    dtp2[k] = h[k].dt_dP * h[k].dt_dP;
    comb[k] = dtp2[k] + h[k].dist_H2 * h[k].dist_H2;
    h2_lhs[k] = comb[k];
    r.max_identity_residual = std::max(r.max_identity_residual, h[k].identity_residual);
    if (k == 0) {
      cum_half[k] = cum_gl[k] = 0.0;
      gap_rhs[k] = 0.0;
      continue;
    }
    const double dt = t[k] - t[k - 1];
    if (!(dt > 0.0)) throw ParameterError("lifting history must be strictly increasing in time");
    const double q0 = h[k - 1].dt_dE * h[k - 1].dt_dE, q1 = h[k].dt_dE * h[k].dt_dE;
    // e^{-t} int_0^t e^s q ds, advanced with the trapezoid rule.
    weighted = std::exp(-dt) * (weighted + 0.5 * dt * q0) + 0.5 * dt * q1;
    gap_rhs[k] = weighted;
    const double s0 = h[k - 1].trace_rate_half, s1 = h[k].trace_rate_half;
    cum_half[k] = cum_half[k - 1] + 0.5 * dt * (s0 * s0 + s1 * s1);
    const double g0 = h[k - 1].grad_lap_dP, g1 = h[k].grad_lap_dP;
    cum_gl[k] = cum_gl[k - 1] + 0.5 * dt * (g0 * g0 + g1 * g1);
  }
  // int_{t/2}^t ||grad Lap d_P||^2, interpolating the cumulative integral at t/2.
  for (std::size_t k = 0; k < n; ++k) {
    const double mid = 0.5 * t[k];
    std::size_t j = 0;
    while (j + 1 < n && t[j + 1] <= mid) ++j;
    double at_mid = cum_gl[j];
    if (j + 1 < n && t[j + 1] > t[j] && mid > t[j]) {
      const double w = (mid - t[j]) / (t[j + 1] - t[j]);
      at_mid = (1 - w) * cum_gl[j] + w * cum_gl[j + 1];
    }
    tail_gl[k] = std::max(0.0, cum_gl[k] - at_mid);
  }

  r.lift_gap = detail::calibrated_bound(gap_lhs, gap_rhs);
  r.lift_h2 = detail::calibrated_bound(h2_lhs, cum_half);
  r.grad_lap_integral = detail::calibrated_bound(cum_gl, cum_half);
  r.dt_decay = detail::exponent_check(t, dtp2, 2.0 + 2.0 * gamma - exponent_slack, tail_fraction);
  r.dt_h2_decay = detail::exponent_check(t, comb, 2.0 + 2.0 * gamma - exponent_slack, tail_fraction);
  r.grad_lap_tail = detail::exponent_check(t, tail_gl, 1.0 + 2.0 * gamma - exponent_slack, tail_fraction);
  r.final_dt_dP = h.back().dt_dP;
  r.final_dt_pass = r.final_dt_dP <= final_dt_tol;
  return r;
}

inline LiftingReport lifting_diagnostics(const std::vector<LiftingState>& states, double gamma,
                                          double tail_fraction = 0.5) {
  std::vector<LiftingSample> s;
  s.reserve(states.size());
  for (const auto& st : states) s.push_back(summarize(st));
  return lifting_diagnostics(s, gamma, tail_fraction);
}

/// One row per sample: t, ||d_P - d_E||_{H1}, ||d_t d_P||, ||grad Lap d_P||,
/// then the per-row A3 ratio and flag.
inline void write_lifting_csv(std::ostream& os, const std::vector<LiftingSample>& h, const LiftingReport& r) {
  os << "t,dist_PE_H1,dt_dP_L2,grad_lap_dP,gap_ratio,gap_ok\n";
  os << std::setprecision(17);
  for (std::size_t k = 0; k < h.size(); ++k) {
    const double ratio = k < r.lift_gap.ratio.size() ? r.lift_gap.ratio[k] : 0.0;
    const bool ok = r.lift_gap.vacuous || ratio <= 1.5 * r.lift_gap.constant;
    os << h[k].t << ',' << h[k].dist_H1 << ',' << h[k].dt_dP << ',' << h[k].grad_lap_dP << ',' << ratio << ','
       << (ok ? 1 : 0) << '\n';
  }
}

}  // namespace nematic
