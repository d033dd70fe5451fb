#pragma once

// Linear solves on the node grid: Dirichlet and pure-Neumann Poisson
// problems, backward-Euler heat steps and the discrete Helmholtz projection.
//
// The direct path diagonalizes each separable operator with 1D eigenbases
// (fast diagonalization), so a solve costs four small dense products. The
// iterative path runs matrix-free conjugate gradients on the same operators.

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <variant>

#include "nematic/error.hpp"
#include "nematic/grid.hpp"

namespace nematic {

enum class SolverMethod { direct, conjugate_gradient };

struct SolverConfig {
  double tol = 1e-10;
  int max_iter = 20000;
  SolverMethod method = SolverMethod::direct;

  static SolverConfig direct() { return {}; }
  static SolverConfig iterative() { return {1e-9, 20000, SolverMethod::conjugate_gradient}; }

  void validate() const {
    if (!(tol > 0.0) || tol > 1e-4) throw ParameterError("solver tol must lie in (0, 1e-4]");
    if (max_iter < 1) throw ParameterError("solver max_iter must be at least 1");
  }
};

struct SolverStats {
  int iterations = 0;
  double residual = 0.0;
};

/// Pressure-type problem: homogeneous Neumann data, solution fixed to zero mean.
struct PureNeumann {};

struct PoissonProblem {
  Grid grid;
  ScalarField2D rhs;
  std::variant<ScalarTrace, PureNeumann> boundary;
};

namespace detail {

using Matrix = Eigen::MatrixXd;

enum class Op1D { dirichlet, central_pair, neumann };

/// Symmetric 1D operator in its eigenbasis: op = Q diag(lambda) Q^T.
/// For the Neumann operator `scale` holds the square roots of the
/// trapezoidal weights that symmetrize it.
struct Eig1D {
  Matrix Q;
  Eigen::VectorXd lambda;
  Eigen::VectorXd scale;
};

// Central difference with zero extension on m interior nodes, applied along
// rows (axis 0) or columns (axis 1).
inline Matrix central_rows(const Matrix& x, double h) {
  const Eigen::Index m = x.rows();
  Matrix r = Matrix::Zero(m, x.cols());
  r.topRows(m - 1) += x.bottomRows(m - 1);
  r.bottomRows(m - 1) -= x.topRows(m - 1);
  return r / (2.0 * h);
}

inline Matrix central_cols(const Matrix& x, double h) {
  const Eigen::Index m = x.cols();
  Matrix r = Matrix::Zero(x.rows(), m);
  r.leftCols(m - 1) += x.rightCols(m - 1);
  r.rightCols(m - 1) -= x.leftCols(m - 1);
  return r / (2.0 * h);
}

inline std::shared_ptr<const Eig1D> build_eig1d(Op1D op, int n, double h) {
  auto e = std::make_shared<Eig1D>();
  if (op == Op1D::dirichlet) {
    // Closed-form sine basis of tridiag(-1, 2, -1) / h^2 on m = n - 2 nodes.
    const int m = n - 2;
    e->Q.resize(m, m);
    e->lambda.resize(m);
    const double c = std::sqrt(2.0 / (m + 1));
    for (int k = 0; k < m; ++k) {
      const double s = std::sin(M_PI * (k + 1) / (2.0 * (m + 1)));
      e->lambda[k] = 4.0 * s * s / (h * h);
      for (int i = 0; i < m; ++i) e->Q(i, k) = c * std::sin(M_PI * (i + 1) * (k + 1) / (m + 1.0));
    }
    return e;
  }
  Matrix M;
  if (op == Op1D::central_pair) {
    const int m = n - 2;
    Matrix C = Matrix::Zero(m, m);
    for (int i = 0; i + 1 < m; ++i) {
      C(i, i + 1) = 0.5 / h;
      C(i + 1, i) = -0.5 / h;
    }
    M = C * C.transpose();
  } else {
    // Ghost-reflection Neumann operator premultiplied by the trapezoidal
    // weights is symmetric; W^{-1/2} N W^{-1/2} is then diagonalized.
    M = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      if (i > 0) {
        M(i, i) += 1.0;
        M(i, i - 1) -= 1.0;
      }
      if (i + 1 < n) {
        M(i, i) += 1.0;
        M(i, i + 1) -= 1.0;
      }
    }
    M /= h * h;
    e->scale = Eigen::VectorXd::Ones(n);
    e->scale[0] = e->scale[n - 1] = std::sqrt(0.5);
    const Eigen::VectorXd inv = e->scale.cwiseInverse();
    M = inv.asDiagonal() * M * inv.asDiagonal();
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(M);
  e->Q = es.eigenvectors();
  e->lambda = es.eigenvalues();
  return e;
}

inline std::shared_ptr<const Eig1D> eig1d(Op1D op, int n, double h) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, double>, std::shared_ptr<const Eig1D>> cache;
  const auto key = std::make_tuple(static_cast<int>(op), n, h);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto e = build_eig1d(op, n, h);
  cache.emplace(key, e);
  return e;
}

/// Solves (alpha + beta (Lx (+) Ly)) X = B; modes with a vanishing symbol
/// are dropped (pseudo-inverse).
inline Matrix tensor_solve(const Eig1D& ex, const Eig1D& ey, const Matrix& B, double alpha, double beta) {
  Matrix T = ex.Q.transpose() * B * ey.Q;
  const double top = std::abs(alpha) + std::abs(beta) * (ex.lambda.cwiseAbs().maxCoeff() +
                                                         ey.lambda.cwiseAbs().maxCoeff());
  const double cutoff = 1e-12 * top;
  for (Eigen::Index j = 0; j < T.cols(); ++j)
    for (Eigen::Index i = 0; i < T.rows(); ++i) {
      const double den = alpha + beta * (ex.lambda[i] + ey.lambda[j]);
      T(i, j) = std::abs(den) > cutoff ? T(i, j) / den : 0.0;
    }
  return ex.Q * T * ey.Q.transpose();
}

// Positive Dirichlet operator K = -Lap_h on interior arrays with zero trace.
inline Matrix apply_dirichlet(const Matrix& x, double hx, double hy) {
  const Eigen::Index m = x.rows(), n = x.cols();
  Matrix r = (2.0 / (hx * hx) + 2.0 / (hy * hy)) * x;
  r.topRows(m - 1) -= x.bottomRows(m - 1) / (hx * hx);
  r.bottomRows(m - 1) -= x.topRows(m - 1) / (hx * hx);
  r.leftCols(n - 1) -= x.rightCols(n - 1) / (hy * hy);
  r.rightCols(n - 1) -= x.leftCols(n - 1) / (hy * hy);
  return r;
}

// Wide-stencil operator D D^T of the collocated projection.
inline Matrix apply_projection(const Matrix& p, double hx, double hy) {
  return -central_rows(central_rows(p, hx), hx) - central_cols(central_cols(p, hy), hy);
}

// Symmetrized pure-Neumann operator W (-Lap_ghost) on all nodes.
inline Matrix apply_neumann_sym(const Matrix& u, double hx, double hy) {
  const Eigen::Index n = u.rows(), m = u.cols();
  Eigen::VectorXd wx = Eigen::VectorXd::Ones(n), wy = Eigen::VectorXd::Ones(m);
  wx[0] = wx[n - 1] = 0.5;
  wy[0] = wy[m - 1] = 0.5;
  Matrix dx = Matrix::Zero(n, m), dy = Matrix::Zero(n, m);
  // Nx u: difference flux along rows.
  Matrix fx = (u.bottomRows(n - 1) - u.topRows(n - 1)) / (hx * hx);
  dx.topRows(n - 1) -= fx;
  dx.bottomRows(n - 1) += fx;
  Matrix fy = (u.rightCols(m - 1) - u.leftCols(m - 1)) / (hy * hy);
  dy.leftCols(m - 1) -= fy;
  dy.rightCols(m - 1) += fy;
  return dx * wy.asDiagonal() + wx.asDiagonal() * dy;
}

inline double weighted_norm(const Matrix& r, double hx, double hy) {
  return std::sqrt(r.squaredNorm() * hx * hy);
}

template <class Apply>
Matrix conjugate_gradient(Apply&& apply, const Matrix& b, const SolverConfig& cfg, double hx, double hy,
                          SolverStats* stats) {
  const double scale = std::max(1.0, weighted_norm(b, hx, hy));
  Matrix x = Matrix::Zero(b.rows(), b.cols());
  Matrix r = b;
  Matrix p = r;
  double rr = r.squaredNorm();
  int it = 0;
  double res = weighted_norm(r, hx, hy) / scale;
  while (res > cfg.tol && it < cfg.max_iter) {
    const Matrix Ap = apply(p);
    const double pAp = (p.array() * Ap.array()).sum();
    if (!(pAp > 0.0)) break;
    const double alpha = rr / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
    ++it;
    res = weighted_norm(r, hx, hy) / scale;
  }
  // Recompute the true residual; the recursive one drifts.
  res = weighted_norm(b - apply(x), hx, hy) / scale;
  if (stats) *stats = {it, res};
  if (!x.allFinite() || !std::isfinite(res)) throw NonFiniteError("conjugate gradient produced non-finite values");
  if (res > cfg.tol) throw SolverError("conjugate gradient did not converge", res, it);
  return x;
}

template <class Apply>
void check_direct(Apply&& apply, const Matrix& x, const Matrix& b, const SolverConfig& cfg, double hx, double hy,
                  SolverStats* stats) {
  const double scale = std::max(1.0, weighted_norm(b, hx, hy));
  const double res = weighted_norm(b - apply(x), hx, hy) / scale;
  if (stats) *stats = {1, res};
  if (!x.allFinite() || !std::isfinite(res)) throw NonFiniteError("direct solve produced non-finite values");
  if (res > cfg.tol) throw SolverError("direct solve residual above tolerance", res, 1);
}

/// Solves (alpha I + beta K) X = B on interior arrays, K = -Lap_h with zero trace.
inline Matrix solve_shifted_dirichlet(const Grid& g, const Matrix& B, double alpha, double beta,
                                      const SolverConfig& cfg, SolverStats* stats) {
  cfg.validate();
  const double hx = g.hx(), hy = g.hy();
  auto apply = [&](const Matrix& x) -> Matrix { return alpha * x + beta * apply_dirichlet(x, hx, hy); };
  if (cfg.method == SolverMethod::conjugate_gradient) return conjugate_gradient(apply, B, cfg, hx, hy, stats);
  const auto ex = eig1d(Op1D::dirichlet, g.nx(), hx);
  const auto ey = eig1d(Op1D::dirichlet, g.ny(), hy);
  Matrix X = tensor_solve(*ex, *ey, B, alpha, beta);
  check_direct(apply, X, B, cfg, hx, hy, stats);
  return X;
}

/// Interior contribution of boundary values to the 5-point Laplacian.
inline Matrix boundary_lift_term(const Grid& g, const ScalarTrace& trace) {
  ScalarField2D tmp(g);
  apply_scalar_trace(tmp, trace);
  return interior_laplacian(tmp.values(), g.hx(), g.hy()).matrix();
}

}  // namespace detail

/// Solves Lap u = rhs in the interior with u = trace on the boundary.
inline ScalarField2D solve_poisson_dirichlet(const PoissonProblem& p, const SolverConfig& cfg = {},
                                             SolverStats* stats = nullptr) {
  const auto* trace = std::get_if<ScalarTrace>(&p.boundary);
  if (!trace) throw ParameterError("solve_poisson_dirichlet needs a Dirichlet trace");
  require_same_grid(p.grid, p.rhs.grid(), "poisson rhs");
  const Grid& g = p.grid;
  // Lap u = -K U + B(trace)  =>  K U = B(trace) - rhs.
  const detail::Matrix b = detail::boundary_lift_term(g, *trace) - p.rhs.interior().matrix();
  ScalarField2D u(g);
  u.interior() = detail::solve_shifted_dirichlet(g, b, 0.0, 1.0, cfg, stats).array();
  apply_scalar_trace(u, *trace);
  return u;
}

/// Pure-Neumann problem for the ghost-reflection 5-point Laplacian on all
/// nodes. The rhs must have zero trapezoidal mean; the result has zero mean.
inline ScalarField2D solve_poisson_neumann(const PoissonProblem& p, const SolverConfig& cfg = {},
                                           SolverStats* stats = nullptr) {
  cfg.validate();
  require_same_grid(p.grid, p.rhs.grid(), "poisson rhs");
  const Grid& g = p.grid;
  const double area = g.lx() * g.ly();
  const double mean = integrate(p.rhs) / area;
  const double rhs_norm = std::sqrt(integrate(ScalarField2D(g, p.rhs.values().square())));
  if (std::abs(mean) > cfg.tol * std::max(1.0, rhs_norm)) {
    throw ParameterError("pure-Neumann rhs violates compatibility: mean " + std::to_string(mean));
  }
  const double hx = g.hx(), hy = g.hy();
  const Array2D W = g.weights() / (hx * hy);
  // W (-Lap) u = -W rhs.
  const detail::Matrix b = -(W * p.rhs.values()).matrix();
  detail::Matrix X;
  auto apply = [&](const detail::Matrix& x) -> detail::Matrix { return detail::apply_neumann_sym(x, hx, hy); };
  if (cfg.method == SolverMethod::conjugate_gradient) {
    X = detail::conjugate_gradient(apply, b, cfg, hx, hy, stats);
  } else {
    const auto ex = detail::eig1d(detail::Op1D::neumann, g.nx(), hx);
    const auto ey = detail::eig1d(detail::Op1D::neumann, g.ny(), hy);
    const Eigen::VectorXd isx = ex->scale.cwiseInverse(), isy = ey->scale.cwiseInverse();
    // With S = W^{-1/2} N W^{-1/2}: N u = b  <=>  S (W^{1/2} u) = W^{-1/2} b.
    const detail::Matrix bs = isx.asDiagonal() * b * isy.asDiagonal();
    const detail::Matrix ys = detail::tensor_solve(*ex, *ey, bs, 0.0, 1.0);
    X = isx.asDiagonal() * ys * isy.asDiagonal();
    detail::check_direct(apply, X, b, cfg, hx, hy, stats);
  }
  ScalarField2D u(g, X.array());
  u.values() -= integrate(u) / area;
  return u;
}

inline ScalarField2D solve_poisson(const PoissonProblem& p, const SolverConfig& cfg = {},
                                   SolverStats* stats = nullptr) {
  if (std::holds_alternative<PureNeumann>(p.boundary)) return solve_poisson_neumann(p, cfg, stats);
  return solve_poisson_dirichlet(p, cfg, stats);
}

/// Solves (I - coeff Lap) u = rhs in the interior with u = trace on the boundary.
inline ScalarField2D implicit_diffusion(const ScalarField2D& rhs, const ScalarTrace& trace, double coeff,
                                        const SolverConfig& cfg = {}, SolverStats* stats = nullptr) {
  if (!(coeff > 0.0)) throw ParameterError("implicit diffusion coefficient must be positive");
  const Grid& g = rhs.grid();
  const detail::Matrix b = rhs.interior().matrix() + coeff * detail::boundary_lift_term(g, trace);
  ScalarField2D u(g);
  u.interior() = detail::solve_shifted_dirichlet(g, b, 1.0, coeff, cfg, stats).array();
  apply_scalar_trace(u, trace);
  return u;
}

/// Same with a homogeneous trace; boundary of the result is zero.
inline ScalarField2D implicit_diffusion(const ScalarField2D& rhs, double coeff, const SolverConfig& cfg = {},
                                        SolverStats* stats = nullptr) {
  if (!(coeff > 0.0)) throw ParameterError("implicit diffusion coefficient must be positive");
  const Grid& g = rhs.grid();
  ScalarField2D u(g);
  u.interior() = detail::solve_shifted_dirichlet(g, rhs.interior().matrix(), 1.0, coeff, cfg, stats).array();
  return u;
}

/// One backward-Euler step of w_t = Lap w with w = trace on the boundary.
inline VectorField2D heat_step(const VectorField2D& u, const BoundaryTrace& trace, double dt,
                               const SolverConfig& cfg = {}, SolverStats* stats = nullptr) {
  if (!(dt > 0.0)) throw ParameterError("heat_step needs dt > 0");
  require_same_grid(u.grid(), trace.grid(), "heat_step trace");
  return VectorField2D(implicit_diffusion(u[0], trace.component(0), dt, cfg, stats),
                       implicit_diffusion(u[1], trace.component(1), dt, cfg, stats));
}

struct Projection {
  VectorField2D v;
  ScalarField2D pi;
};

/// Discrete Helmholtz projection on the collocated grid.
///
/// The divergence D is the central difference at interior nodes with the
/// velocity vanishing on the boundary ring, and the pressure gradient is its
/// negative adjoint: the central gradient of a pressure that is zero on the
/// boundary ring. The returned v satisfies D v = 0 to solver precision and
/// v = u - grad(pi) at every interior node; boundary values of u are ignored.
inline Projection project_divergence_free(const VectorField2D& u, const SolverConfig& cfg = {},
                                          SolverStats* stats = nullptr) {
  cfg.validate();
  const Grid& g = u.grid();
  const double hx = g.hx(), hy = g.hy();
  const detail::Matrix ux = u[0].interior().matrix();
  const detail::Matrix uy = u[1].interior().matrix();
  const detail::Matrix div = detail::central_rows(ux, hx) + detail::central_cols(uy, hy);
  // D D^T pi = -D u.
  const detail::Matrix b = -div;
  auto apply = [&](const detail::Matrix& p) -> detail::Matrix { return detail::apply_projection(p, hx, hy); };
  detail::Matrix P;
  if (cfg.method == SolverMethod::conjugate_gradient) {
    P = detail::conjugate_gradient(apply, b, cfg, hx, hy, stats);
  } else {
    const auto ex = detail::eig1d(detail::Op1D::central_pair, g.nx(), hx);
    const auto ey = detail::eig1d(detail::Op1D::central_pair, g.ny(), hy);
    P = detail::tensor_solve(*ex, *ey, b, 0.0, 1.0);
    detail::check_direct(apply, P, b, cfg, hx, hy, stats);
  }
  Projection out{VectorField2D(g), ScalarField2D(g)};
  out.pi.interior() = P.array();
  // v = u + D^T pi = u - central_grad(pi).
  out.v[0].interior() = (ux - detail::central_rows(P, hx)).array();
  out.v[1].interior() = (uy - detail::central_cols(P, hy)).array();
  return out;
}

/// L2 norm over interior nodes of -Lap v + grad(pi) - rhs.
inline double stokes_residual(const VectorField2D& v, const ScalarField2D& pi, const VectorField2D& rhs) {
  require_same_grid(v.grid(), pi.grid(), "stokes residual");
  require_same_grid(v.grid(), rhs.grid(), "stokes residual");
  const VectorField2D gp = gradient(pi);
  double s = 0.0;
  for (int k = 0; k < 2; ++k) {
    ScalarField2D r = laplacian(v[k]) * -1.0 + gp[k] - rhs[k];
    s += inner_interior(r, r);
  }
  return std::sqrt(s);
}

}  // namespace nematic
