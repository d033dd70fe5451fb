#pragma once

// Discrete norms. L2 uses trapezoidal quadrature; the gradient seminorm sums
// squared forward differences over grid edges, which for fields vanishing on
// the boundary equals -<u, Lap_h u> exactly.

#include <cmath>
#include <string>
#include <type_traits>

#include "nematic/error.hpp"
#include "nematic/grid.hpp"
#include "nematic/linsolve.hpp"

namespace nematic {

enum class NormKind { L2, H1, H2, Hminus1 };

inline NormKind parse_norm_kind(const std::string& s) {
  if (s == "L2") return NormKind::L2;
  if (s == "H1") return NormKind::H1;
  if (s == "H2") return NormKind::H2;
  if (s == "Hminus1" || s == "H-1") return NormKind::Hminus1;
  throw ParameterError("unknown norm kind '" + s + "'");
}

inline double l2_sq(const ScalarField2D& f) { return integrate(ScalarField2D(f.grid(), f.values().square())); }
inline double l2_sq(const VectorField2D& f) { return l2_sq(f[0]) + l2_sq(f[1]); }

/// Edge-based ||grad f||^2 (half weight on edges lying on the boundary).
inline double grad_sq(const ScalarField2D& f) {
  const Grid& g = f.grid();
  const Array2D& a = f.values();
  const double hx = g.hx(), hy = g.hy();
  const int nx = g.nx(), ny = g.ny();
  // x-edges: (i, j)-(i+1, j), weight hx*hy (half on j = 0, ny-1).
  Array2D dx = (a.bottomRows(nx - 1) - a.topRows(nx - 1)) / hx;
  Eigen::ArrayXd wy = Eigen::ArrayXd::Constant(ny, hx * hy);
  wy[0] *= 0.5;
  wy[ny - 1] *= 0.5;
  double s = (dx.square().rowwise() * wy.transpose()).sum();
  Array2D dy = (a.rightCols(ny - 1) - a.leftCols(ny - 1)) / hy;
  Eigen::ArrayXd wx = Eigen::ArrayXd::Constant(nx, hx * hy);
  wx[0] *= 0.5;
  wx[nx - 1] *= 0.5;
  s += (dy.square().colwise() * wx).sum();
  return s;
}
inline double grad_sq(const VectorField2D& f) { return grad_sq(f[0]) + grad_sq(f[1]); }

/// Edge-based <grad a, grad b>.
inline double grad_inner(const ScalarField2D& a, const ScalarField2D& b) {
  return 0.25 * (grad_sq(a + b) - grad_sq(a - b));
}
inline double grad_inner(const VectorField2D& a, const VectorField2D& b) {
  return grad_inner(a[0], b[0]) + grad_inner(a[1], b[1]);
}

/// ||Lap f||^2 over interior nodes.
inline double lap_sq(const ScalarField2D& f) {
  const ScalarField2D l = laplacian(f);
  return inner_interior(l, l);
}
inline double lap_sq(const VectorField2D& f) { return lap_sq(f[0]) + lap_sq(f[1]); }

/// ||grad u|| where -Lap u = f in the interior and u = 0 on the boundary.
inline double hminus1_norm(const ScalarField2D& f, const SolverConfig& cfg = {}) {
  const Grid& g = f.grid();
  PoissonProblem p{g, f * -1.0, ScalarTrace(g.boundary_size(), 0.0)};
  return std::sqrt(grad_sq(solve_poisson_dirichlet(p, cfg)));
}

template <class Field>
double norm(const Field& f, NormKind kind) {
  switch (kind) {
    case NormKind::L2:
      return std::sqrt(l2_sq(f));
    case NormKind::H1:
      return std::sqrt(l2_sq(f) + grad_sq(f));
    case NormKind::H2:
      return std::sqrt(l2_sq(f) + grad_sq(f) + lap_sq(f));
    case NormKind::Hminus1:
      if constexpr (std::is_same_v<Field, VectorField2D>) {
        const double a = hminus1_norm(f[0]), b = hminus1_norm(f[1]);
        return std::sqrt(a * a + b * b);
      } else {
        return hminus1_norm(f);
      }
  }
  throw ParameterError("unknown norm kind");
}

// ---------------------------------------------------------------------------
// Boundary norms. Fractional trace norms are replaced by computable
// surrogates built from tangential differences along the boundary ring.

inline double trace_l2(const BoundaryTrace& t) {
  const auto seg = t.grid().boundary_segments();
  const std::size_t n = t.size();
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double ds = 0.5 * (seg[k] + seg[(k + n - 1) % n]);
    s += t[k].squaredNorm() * ds;
  }
  return std::sqrt(s);
}

inline double trace_tangential_sq(const BoundaryTrace& t) {
  const auto seg = t.grid().boundary_segments();
  const std::size_t n = t.size();
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) s += (t[(k + 1) % n] - t[k]).squaredNorm() / seg[k];
  return s;
}

/// (||.||^2_{L2(G)} + tangential seminorm^2)^{1/2}.
inline double trace_h_half(const BoundaryTrace& t) {
  const double l2 = trace_l2(t);
  return std::sqrt(l2 * l2 + trace_tangential_sq(t));
}

/// Adds the tangential second-difference seminorm to trace_h_half.
inline double trace_h_three_halves(const BoundaryTrace& t) {
  const auto seg = t.grid().boundary_segments();
  const std::size_t n = t.size();
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = seg[(k + n - 1) % n], b = seg[k];
    const Vec2 second = 2.0 * ((t[(k + 1) % n] - t[k]) / b - (t[k] - t[(k + n - 1) % n]) / a) / (a + b);
    s += second.squaredNorm() * 0.5 * (a + b);
  }
  const double h = trace_h_half(t);
  return std::sqrt(h * h + s);
}

}  // namespace nematic
