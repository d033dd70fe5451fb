#pragma once

// Scalar functionals of a simulation state and checkers for the energy
// inequality, uniform Gronwall bounds, differential inequalities and decay
// rates.

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "nematic/dynamics.hpp"
#include "nematic/error.hpp"
#include "nematic/fit.hpp"
#include "nematic/lifting.hpp"
#include "nematic/norms.hpp"
#include "nematic/steady.hpp"

namespace nematic {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct EnergyRecord {
  double t = 0.0;
  double kinetic = 0.0;
  double elastic_hat = 0.0;
  double potential = 0.0;
  double E_hat = 0.0;
  double D2 = 0.0;
  double A_P = 0.0;
  double r_t = 0.0;
  double max_abs_d = 0.0;
  double div_v_norm = 0.0;
  double residual_stationary = 0.0;
  double norm_v_L2 = 0.0;
  double norm_v_H1 = 0.0;
  double dist_d_L2 = kNaN;
  double dist_d_H1 = kNaN;

  // Not serialized.
  double grad_v_sq = 0.0;
  double dist_d_H2 = kNaN;
  double dt_dP_norm = 0.0;
  double grad_lap_dP = 0.0;
  double g_norm = 0.0;
  double R1 = 0.0;
  double R3 = 0.0;
};

inline const std::vector<std::string>& energy_csv_columns() {
  static const std::vector<std::string> cols = {
      "t",   "kinetic",    "elastic_hat", "potential",           "E_hat",     "D2",        "A_P",      "r_t",
      "max_abs_d", "div_v_norm", "residual_stationary", "norm_v_L2", "norm_v_H1", "dist_d_L2", "dist_d_H1"};
  return cols;
}

inline void write_energy_csv_header(std::ostream& os) {
  const auto& c = energy_csv_columns();
  for (std::size_t k = 0; k < c.size(); ++k) os << (k ? "," : "") << c[k];
  os << '\n';
}

inline void write_energy_csv_row(std::ostream& os, const EnergyRecord& r) {
  const double vals[] = {r.t,          r.kinetic,    r.elastic_hat,         r.potential, r.E_hat,
                         r.D2,         r.A_P,        r.r_t,                 r.max_abs_d, r.div_v_norm,
                         r.residual_stationary, r.norm_v_L2, r.norm_v_H1, r.dist_d_L2, r.dist_d_H1};
  os << std::setprecision(17);
  for (std::size_t k = 0; k < std::size(vals); ++k) os << (k ? "," : "") << vals[k];
  os << '\n';
}

/// All scalar diagnostics of a state. `reference` is the equilibrium that
/// distances are measured against; without it the distances are NaN.
inline EnergyRecord energy_record(const SimState& s, const VectorField2D* reference = nullptr) {
  const double eps = s.params.eps;
  EnergyRecord r;
  r.t = s.t;
  const auto [dhat, dtilde] = shifted_fields(s.d, s.lifting);
  const VectorField2D fd = ginzburg_landau_f(s.d, eps);

  r.kinetic = 0.5 * l2_sq(s.v);
  r.elastic_hat = 0.5 * grad_sq(dhat);
  r.potential = integrate(bulk_potential_F(s.d, eps));
  r.E_hat = r.kinetic + r.elastic_hat + r.potential;

  r.grad_v_sq = grad_sq(s.v);
  VectorField2D mu_hat = laplacian(dhat) - fd;
  mu_hat.zero_boundary();
  r.D2 = s.params.nu * r.grad_v_sq + inner_interior(mu_hat, mu_hat);
  VectorField2D mu_tilde = laplacian(dtilde) - fd;
  mu_tilde.zero_boundary();
  r.A_P = r.grad_v_sq + inner_interior(mu_tilde, mu_tilde);

  const double a = std::sqrt(l2_sq(s.lifting.dt_dE));
  double g_riesz_sq = 0.0;
  if (s.forcing && s.forcing->has_force()) {
    const double n0 = hminus1_norm(s.g[0], s.options.solver), n1 = hminus1_norm(s.g[1], s.options.solver);
    g_riesz_sq = n0 * n0 + n1 * n1;
    r.g_norm = std::sqrt(l2_sq(s.g));
  }
  r.r_t = 0.5 * a * a + a + g_riesz_sq;

  r.max_abs_d = s.d.max_magnitude();
  const ScalarField2D div = divergence(s.v);
  r.div_v_norm = std::sqrt(inner_interior(div, div));
  VectorField2D res = laplacian(s.d) * -1.0 + fd;
  res.zero_boundary();
  r.residual_stationary = std::sqrt(inner_interior(res, res));
  r.norm_v_L2 = std::sqrt(l2_sq(s.v));
  r.norm_v_H1 = std::sqrt(l2_sq(s.v) + r.grad_v_sq);

  if (reference) {
    const VectorField2D e = s.d - *reference;
    const double l2 = l2_sq(e);
    r.dist_d_L2 = std::sqrt(l2);
    r.dist_d_H1 = std::sqrt(l2 + grad_sq(e));
    r.dist_d_H2 = r.dist_d_L2 + std::sqrt(lap_sq(e));
  }

  r.dt_dP_norm = std::sqrt(l2_sq(s.lifting.dt_dP));
  r.grad_lap_dP = grad_lap_norm(s.lifting);
  const double p = r.dt_dP_norm, b2 = r.grad_lap_dP * r.grad_lap_dP, g2 = r.g_norm * r.g_norm;
  r.R1 = std::pow(p, 4) + p * p + b2 + g2;
  r.R3 = std::pow(p, 6) + p * p + b2 + g2;
  return r;
}

/// (E_hat(next) - E_hat(prev)) / dt + D2(next) / 2 - r(next); the discrete
/// energy inequality holds when this is at most a small slack.
inline double energy_inequality_residual(const EnergyRecord& prev, const EnergyRecord& next, double dt) {
  if (!(dt > 0.0)) throw ParameterError("energy residual needs dt > 0");
  return (next.E_hat - prev.E_hat) / dt + 0.5 * next.D2 - next.r_t;
}

// ---------------------------------------------------------------------------
// Uniform Gronwall bound: if y' <= c1 y^2 + c2 + h with int y <= c3 and
// int h <= c4, then y(t + rho) <= (c3/rho + c2 rho + c4) exp(c1 c3).

struct GronwallVerdict {
  double c3 = 0.0;
  double c4 = 0.0;
  double bound = 0.0;
  double max_violation = -std::numeric_limits<double>::infinity();
  double worst_time = kNaN;
  std::vector<bool> ok;  ///< per sample with t >= t0 + rho
  bool pass = true;
};

inline double trapezoid(std::span<const double> t, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) s += 0.5 * (t[k] - t[k - 1]) * (y[k] + y[k - 1]);
  return s;
}

inline GronwallVerdict uniform_gronwall_check(std::span<const double> t, std::span<const double> y,
                                              std::span<const double> h, double c1, double c2, double rho) {
  if (t.size() != y.size() || t.size() != h.size()) throw DimensionError("gronwall check: length mismatch");
  if (t.size() < 2) throw InsufficientDataError("gronwall check needs at least two samples");
  const double T = t.back() - t.front();
  if (!(rho > 0.0) || !(rho < T)) throw ParameterError("rho must lie in (0, T)");
  if (c1 < 0.0 || c2 < 0.0) throw ParameterError("gronwall constants must be nonnegative");
  for (std::size_t k = 0; k < t.size(); ++k)
    if (y[k] < 0.0 || h[k] < 0.0) throw ParameterError("gronwall check needs nonnegative y and h");
  GronwallVerdict v;
  v.c3 = trapezoid(t, y);
  v.c4 = trapezoid(t, h);
  const double growth = c1 * v.c3;
  v.bound = (v.c3 / rho + c2 * rho + v.c4) * (growth > 700.0 ? std::numeric_limits<double>::infinity() : std::exp(growth));
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t.front() + rho) continue;
    const double excess = y[k] - v.bound;
    v.ok.push_back(excess <= 0.0);
    if (excess > v.max_violation) {
      v.max_violation = excess;
      v.worst_time = t[k];
    }
  }
  v.pass = v.max_violation <= 0.0;
  return v;
}

/// Smallest C with (A_{k+1} - A_k) / dt <= C (a^p + a + r) on every sample
/// interval, where a and r are the smaller endpoint values of A and R.
inline double fit_differential_constant(std::span<const double> t, std::span<const double> A,
                                        std::span<const double> R, int power) {
  if (t.size() != A.size() || t.size() != R.size()) throw DimensionError("differential fit: length mismatch");
  double C = 0.0;
  for (std::size_t k = 1; k < t.size(); ++k) {
    const double dt = t[k] - t[k - 1];
    if (!(dt > 0.0)) throw ParameterError("differential fit needs increasing times");
    const double rate = (A[k] - A[k - 1]) / dt;
    if (rate <= 0.0) continue;
    const double a = std::min(A[k], A[k - 1]), r = std::min(R[k], R[k - 1]);
    const double denom = std::pow(a, power) + a + r;
    if (!(denom > 0.0)) return std::numeric_limits<double>::infinity();
    C = std::max(C, rate / denom);
  }
  return C;
}

/// Gronwall check for A_P with h = C (A_P + R1), where C is fitted from
/// dA_P/dt <= C (A_P^2 + A_P + R1).
inline GronwallVerdict gronwall_check_records(const std::vector<EnergyRecord>& recs, double rho) {
  std::vector<double> t, A, R, h;
  for (const auto& r : recs) {
    t.push_back(r.t);
    A.push_back(r.A_P);
    R.push_back(r.R1);
  }
  const double C = fit_differential_constant(t, A, R, 2);
  for (std::size_t k = 0; k < t.size(); ++k) h.push_back(C * (A[k] + R[k]));
  return uniform_gronwall_check(t, A, h, C, 0.0, rho);
}

// ---------------------------------------------------------------------------
// Decay rates

struct RateModel {
  double gamma = 0.0;
  double theta_prime = kNaN;
  double predicted_exponent = kNaN;
  double fitted_exponent = kNaN;
  double fit_r2 = kNaN;
  /// Autonomous data: no algebraic prediction, decay expected to be exponential.
  bool exponential_regime = false;
};

inline double default_theta_prime(double gamma) {
  double th = 0.9 * gamma / (2.0 * (1.0 + gamma));
  if (gamma > 1.0) th = std::min(th, (gamma - 1.0) / (2.0 * gamma));
  return th;
}

/// gamma <= 0 or infinite marks the autonomous regime. theta_prime NaN selects
/// the default.
inline RateModel make_rate_model(double gamma, double theta_prime = kNaN) {
  RateModel m;
  m.gamma = gamma;
  if (!std::isfinite(gamma) || gamma <= 0.0) {
    m.exponential_regime = true;
    return m;
  }
  const double th = std::isnan(theta_prime) ? default_theta_prime(gamma) : theta_prime;
  if (!(th > 0.0) || !(th < gamma / (2.0 * (1.0 + gamma)))) {
    throw ParameterError("theta' must lie in (0, gamma / (2 (1 + gamma)))");
  }
  m.theta_prime = th;
  m.predicted_exponent = th / (1.0 - 2.0 * th);
  return m;
}

struct ConvergenceReport {
  double v_V = 0.0;  ///< ||v(t_end)||_{H1}
  double dist_L2 = 0.0;
  double dist_H1 = 0.0;
  double dist_H2 = 0.0;
  double trace_mismatch = 0.0;  ///< max |d - psi| on the boundary ring
  DecayFit fit_v{};
  DecayFit fit_dist{};
  DecayFit fit_A_P{};
  bool fit_v_ok = false;
  bool fit_dist_ok = false;
  bool fit_A_P_ok = false;
  double predicted = kNaN;
  double tolerance = 0.15;
  bool vacuous = false;
  bool rate_pass = true;
};

struct ConvergenceOptions {
  double tail_fraction = 0.5;
  double tolerance = 0.15;
  /// Distances below this count as already converged.
  double at_equilibrium = 1e-12;
};

namespace detail {

inline bool try_fit(const std::vector<double>& t, const std::vector<double>& v, double tail, DecayFit& out) {
  try {
    out = fit_decay_exponent(t, v, tail);
    return true;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace detail

inline ConvergenceReport convergence_report(const std::vector<EnergyRecord>& records, const VectorField2D& d_final,
                                            const VectorField2D& v_final, const Equilibrium& eq, RateModel& rate,
                                            const ConvergenceOptions& opt = {}) {
  if (records.empty()) throw InsufficientDataError("convergence report needs records");
  ConvergenceReport c;
  c.tolerance = opt.tolerance;
  c.predicted = rate.predicted_exponent;
  const VectorField2D e = d_final - eq.psi;
  c.v_V = std::sqrt(l2_sq(v_final) + grad_sq(v_final));
  c.dist_L2 = std::sqrt(l2_sq(e));
  c.dist_H1 = std::sqrt(l2_sq(e) + grad_sq(e));
  c.dist_H2 = c.dist_L2 + std::sqrt(lap_sq(e));
  c.trace_mismatch = BoundaryTrace::restrict(d_final).max_distance(BoundaryTrace::restrict(eq.psi));

  std::vector<double> t, vn, dist, ap;
  double worst = 0.0;
  for (const auto& r : records) {
    t.push_back(r.t);
    vn.push_back(r.norm_v_L2);
    dist.push_back(r.dist_d_L2);
    ap.push_back(r.A_P);
    worst = std::max({worst, r.norm_v_L2, std::isnan(r.dist_d_L2) ? 0.0 : r.dist_d_L2});
  }
  if (worst <= opt.at_equilibrium) {
    c.vacuous = true;
    return c;
  }
  c.fit_v_ok = detail::try_fit(t, vn, opt.tail_fraction, c.fit_v);
  c.fit_dist_ok = detail::try_fit(t, dist, opt.tail_fraction, c.fit_dist);
  c.fit_A_P_ok = detail::try_fit(t, ap, opt.tail_fraction, c.fit_A_P);
  if (c.fit_dist_ok) {
    rate.fitted_exponent = c.fit_dist.exponent;
    rate.fit_r2 = c.fit_dist.r2;
  }
  if (rate.exponential_regime) {
    c.rate_pass = true;
  } else {
    c.rate_pass = c.fit_dist_ok && c.fit_dist.exponent >= rate.predicted_exponent - opt.tolerance;
  }
  return c;
}

}  // namespace nematic
