#pragma once

// Node-centered rectangular grid, field containers and the finite-difference
// operators shared by all solvers.
//
// Storage convention: a field on an nx-by-ny grid is an Eigen array of shape
// (nx, ny); entry (i, j) sits at (i * hx, j * hy). Boundary nodes are the
// outermost ring i in {0, nx-1} or j in {0, ny-1}.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nematic/error.hpp"

namespace nematic {

using Array2D = Eigen::ArrayXXd;
using Vec2 = Eigen::Vector2d;

class Grid {
 public:
  Grid() = default;
  Grid(int nx, int ny, double lx = 1.0, double ly = 1.0) : nx_(nx), ny_(ny), lx_(lx), ly_(ly) {
    if (nx < 8 || ny < 8) {
      throw ParameterError("grid needs at least 8 nodes per axis, got " + std::to_string(nx) +
                           "x" + std::to_string(ny));
    }
    if (!(lx > 0.0) || !(ly > 0.0)) {
      throw ParameterError("grid extents must be positive");
    }
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double lx() const { return lx_; }
  double ly() const { return ly_; }
  double hx() const { return lx_ / (nx_ - 1); }
  double hy() const { return ly_ / (ny_ - 1); }
  double x(int i) const { return i * hx(); }
  double y(int j) const { return j * hy(); }

  /// Interior node counts.
  int mx() const { return nx_ - 2; }
  int my() const { return ny_ - 2; }

  bool is_boundary(int i, int j) const {
    return i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1;
  }

  int boundary_size() const { return 2 * (nx_ + ny_) - 4; }

  /// Boundary nodes counterclockwise starting at (0, 0).
  std::vector<std::pair<int, int>> boundary_nodes() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(boundary_size());
    for (int i = 0; i < nx_; ++i) out.emplace_back(i, 0);
    for (int j = 1; j < ny_; ++j) out.emplace_back(nx_ - 1, j);
    for (int i = nx_ - 2; i >= 0; --i) out.emplace_back(i, ny_ - 1);
    for (int j = ny_ - 2; j >= 1; --j) out.emplace_back(0, j);
    return out;
  }

  /// Length of the boundary segment between consecutive nodes k and k+1.
  std::vector<double> boundary_segments() const {
    std::vector<double> seg;
    seg.reserve(boundary_size());
    for (int i = 0; i < nx_ - 1; ++i) seg.push_back(hx());
    for (int j = 0; j < ny_ - 1; ++j) seg.push_back(hy());
    for (int i = 0; i < nx_ - 1; ++i) seg.push_back(hx());
    for (int j = 0; j < ny_ - 1; ++j) seg.push_back(hy());
    return seg;
  }

  /// Trapezoidal quadrature weight of node (i, j).
  double weight(int i, int j) const {
    double w = hx() * hy();
    if (i == 0 || i == nx_ - 1) w *= 0.5;
    if (j == 0 || j == ny_ - 1) w *= 0.5;
    return w;
  }

  Array2D weights() const {
    Array2D w(nx_, ny_);
    for (int j = 0; j < ny_; ++j)
      for (int i = 0; i < nx_; ++i) w(i, j) = weight(i, j);
    return w;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.nx_ == b.nx_ && a.ny_ == b.ny_ && a.lx_ == b.lx_ && a.ly_ == b.ly_;
  }
  friend bool operator!=(const Grid& a, const Grid& b) { return !(a == b); }

 private:
  int nx_ = 8;
  int ny_ = 8;
  double lx_ = 1.0;
  double ly_ = 1.0;
};

inline void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (a != b) throw DimensionError(std::string(what) + ": grid mismatch");
}

class ScalarField2D {
 public:
  ScalarField2D() = default;
  explicit ScalarField2D(const Grid& g, double value = 0.0)
      : grid_(g), data_(Array2D::Constant(g.nx(), g.ny(), value)) {}
  ScalarField2D(const Grid& g, Array2D data) : grid_(g), data_(std::move(data)) {
    if (data_.rows() != g.nx() || data_.cols() != g.ny()) {
      throw DimensionError("field data shape does not match grid");
    }
  }

  /// Samples f(x, y) at every node.
  template <class F>
  static ScalarField2D sample(const Grid& g, F&& f) {
    ScalarField2D out(g);
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) out.data_(i, j) = f(g.x(i), g.y(j));
    return out;
  }

  const Grid& grid() const { return grid_; }
  const Array2D& values() const { return data_; }
  Array2D& values() { return data_; }
  double operator()(int i, int j) const { return data_(i, j); }
  double& operator()(int i, int j) { return data_(i, j); }

  auto interior() { return data_.block(1, 1, grid_.mx(), grid_.my()); }
  auto interior() const { return data_.block(1, 1, grid_.mx(), grid_.my()); }

  bool finite() const { return data_.allFinite(); }
  double max_abs() const { return data_.abs().maxCoeff(); }

  void zero_boundary() {
    data_.row(0).setZero();
    data_.row(grid_.nx() - 1).setZero();
    data_.col(0).setZero();
    data_.col(grid_.ny() - 1).setZero();
  }

  ScalarField2D& operator+=(const ScalarField2D& o) {
    require_same_grid(grid_, o.grid_, "field +=");
    data_ += o.data_;
    return *this;
  }
  ScalarField2D& operator-=(const ScalarField2D& o) {
    require_same_grid(grid_, o.grid_, "field -=");
    data_ -= o.data_;
    return *this;
  }
  ScalarField2D& operator*=(double s) {
    data_ *= s;
    return *this;
  }
  friend ScalarField2D operator+(ScalarField2D a, const ScalarField2D& b) { return a += b; }
  friend ScalarField2D operator-(ScalarField2D a, const ScalarField2D& b) { return a -= b; }
  friend ScalarField2D operator*(ScalarField2D a, double s) { return a *= s; }
  friend ScalarField2D operator*(double s, ScalarField2D a) { return a *= s; }

 private:
  Grid grid_;
  Array2D data_;
};

class VectorField2D {
 public:
  VectorField2D() = default;
  explicit VectorField2D(const Grid& g, double c0 = 0.0, double c1 = 0.0)
      : c_{ScalarField2D(g, c0), ScalarField2D(g, c1)} {}
  VectorField2D(ScalarField2D a, ScalarField2D b) : c_{std::move(a), std::move(b)} {
    require_same_grid(c_[0].grid(), c_[1].grid(), "vector field components");
  }

  /// Samples f(x, y) -> Vec2 at every node.
  template <class F>
  static VectorField2D sample(const Grid& g, F&& f) {
    VectorField2D out(g);
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        const Vec2 v = f(g.x(i), g.y(j));
        out.c_[0](i, j) = v[0];
        out.c_[1](i, j) = v[1];
      }
    return out;
  }

  const Grid& grid() const { return c_[0].grid(); }
  const ScalarField2D& operator[](int k) const { return c_[k]; }
  ScalarField2D& operator[](int k) { return c_[k]; }
  Vec2 at(int i, int j) const { return {c_[0](i, j), c_[1](i, j)}; }
  void set(int i, int j, const Vec2& v) {
    c_[0](i, j) = v[0];
    c_[1](i, j) = v[1];
  }

  bool finite() const { return c_[0].finite() && c_[1].finite(); }
  void zero_boundary() {
    c_[0].zero_boundary();
    c_[1].zero_boundary();
  }

  /// Pointwise Euclidean norm.
  ScalarField2D magnitude() const {
    return ScalarField2D(grid(), (c_[0].values().square() + c_[1].values().square()).sqrt());
  }
  double max_magnitude() const { return magnitude().values().maxCoeff(); }

  VectorField2D& operator+=(const VectorField2D& o) {
    c_[0] += o.c_[0];
    c_[1] += o.c_[1];
    return *this;
  }
  VectorField2D& operator-=(const VectorField2D& o) {
    c_[0] -= o.c_[0];
    c_[1] -= o.c_[1];
    return *this;
  }
  VectorField2D& operator*=(double s) {
    c_[0] *= s;
    c_[1] *= s;
    return *this;
  }
  friend VectorField2D operator+(VectorField2D a, const VectorField2D& b) { return a += b; }
  friend VectorField2D operator-(VectorField2D a, const VectorField2D& b) { return a -= b; }
  friend VectorField2D operator*(VectorField2D a, double s) { return a *= s; }
  friend VectorField2D operator*(double s, VectorField2D a) { return a *= s; }

 private:
  std::array<ScalarField2D, 2> c_;
};

using ScalarTrace = std::vector<double>;

/// R^2 values on the boundary ring, counterclockwise from node (0, 0).
class BoundaryTrace {
 public:
  BoundaryTrace() = default;
  BoundaryTrace(const Grid& g, std::vector<Vec2> values) : grid_(g), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != g.boundary_size()) {
      throw DimensionError("boundary trace has " + std::to_string(values_.size()) +
                           " values, grid boundary has " + std::to_string(g.boundary_size()));
    }
  }

  template <class F>
  static BoundaryTrace sample(const Grid& g, F&& f) {
    std::vector<Vec2> vals;
    vals.reserve(g.boundary_size());
    for (auto [i, j] : g.boundary_nodes()) vals.push_back(f(g.x(i), g.y(j)));
    return BoundaryTrace(g, std::move(vals));
  }

  static BoundaryTrace restrict(const VectorField2D& f) {
    const Grid& g = f.grid();
    std::vector<Vec2> vals;
    vals.reserve(g.boundary_size());
    for (auto [i, j] : g.boundary_nodes()) vals.push_back(f.at(i, j));
    return BoundaryTrace(g, std::move(vals));
  }

  const Grid& grid() const { return grid_; }
  const std::vector<Vec2>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  const Vec2& operator[](std::size_t k) const { return values_[k]; }

  ScalarTrace component(int c) const {
    ScalarTrace out(values_.size());
    for (std::size_t k = 0; k < values_.size(); ++k) out[k] = values_[k][c];
    return out;
  }

  /// Overwrites the boundary ring of f with this trace.
  void apply_to(VectorField2D& f) const {
    require_same_grid(grid_, f.grid(), "apply trace");
    const auto nodes = grid_.boundary_nodes();
    for (std::size_t k = 0; k < nodes.size(); ++k) f.set(nodes[k].first, nodes[k].second, values_[k]);
  }

  double max_distance(const BoundaryTrace& o) const {
    require_same_grid(grid_, o.grid_, "trace distance");
    double m = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k) m = std::max(m, (values_[k] - o.values_[k]).norm());
    return m;
  }

 private:
  Grid grid_;
  std::vector<Vec2> values_;
};

inline void apply_scalar_trace(ScalarField2D& f, const ScalarTrace& t) {
  const Grid& g = f.grid();
  if (static_cast<int>(t.size()) != g.boundary_size()) {
    throw DimensionError("scalar trace length does not match grid boundary");
  }
  const auto nodes = g.boundary_nodes();
  for (std::size_t k = 0; k < nodes.size(); ++k) f(nodes[k].first, nodes[k].second) = t[k];
}

// ---------------------------------------------------------------------------
// Difference operators

namespace detail {

// Second-order first derivative along axis 0 (rows) of a (n, m) array;
// central inside, one-sided at the two ends.
inline Array2D diff_rows(const Array2D& a, double h) {
  const Eigen::Index n = a.rows();
  Array2D d(n, a.cols());
  d.middleRows(1, n - 2) = (a.bottomRows(n - 2) - a.topRows(n - 2)) / (2.0 * h);
  d.row(0) = (-3.0 * a.row(0) + 4.0 * a.row(1) - a.row(2)) / (2.0 * h);
  d.row(n - 1) = (3.0 * a.row(n - 1) - 4.0 * a.row(n - 2) + a.row(n - 3)) / (2.0 * h);
  return d;
}

inline Array2D diff_cols(const Array2D& a, double h) {
  const Eigen::Index m = a.cols();
  Array2D d(a.rows(), m);
  d.middleCols(1, m - 2) = (a.rightCols(m - 2) - a.leftCols(m - 2)) / (2.0 * h);
  d.col(0) = (-3.0 * a.col(0) + 4.0 * a.col(1) - a.col(2)) / (2.0 * h);
  d.col(m - 1) = (3.0 * a.col(m - 1) - 4.0 * a.col(m - 2) + a.col(m - 3)) / (2.0 * h);
  return d;
}

// 5-point Laplacian at interior nodes of a full (nx, ny) array.
inline Array2D interior_laplacian(const Array2D& a, double hx, double hy) {
  const Eigen::Index mx = a.rows() - 2, my = a.cols() - 2;
  return (a.block(2, 1, mx, my) - 2.0 * a.block(1, 1, mx, my) + a.block(0, 1, mx, my)) / (hx * hx) +
         (a.block(1, 2, mx, my) - 2.0 * a.block(1, 1, mx, my) + a.block(1, 0, mx, my)) / (hy * hy);
}

}  // namespace detail

inline VectorField2D gradient(const ScalarField2D& f) {
  const Grid& g = f.grid();
  return VectorField2D(ScalarField2D(g, detail::diff_rows(f.values(), g.hx())),
                       ScalarField2D(g, detail::diff_cols(f.values(), g.hy())));
}

inline ScalarField2D divergence(const VectorField2D& u) {
  const Grid& g = u.grid();
  return ScalarField2D(g, detail::diff_rows(u[0].values(), g.hx()) +
                              detail::diff_cols(u[1].values(), g.hy()));
}

/// Use the field's own boundary values.
struct InteriorOnly {};
/// Evaluate boundary neighbours against supplied values instead.
struct DirichletValues {
  ScalarTrace values;
};
using BoundaryMode = std::variant<InteriorOnly, DirichletValues>;

/// 5-point Laplacian. Interior nodes carry the stencil value; boundary nodes
/// of the result are zero.
inline ScalarField2D laplacian(const ScalarField2D& f, const BoundaryMode& bc = InteriorOnly{}) {
  const Grid& g = f.grid();
  ScalarField2D out(g);
  if (const auto* d = std::get_if<DirichletValues>(&bc)) {
    ScalarField2D tmp = f;
    apply_scalar_trace(tmp, d->values);
    out.interior() = detail::interior_laplacian(tmp.values(), g.hx(), g.hy());
  } else {
    out.interior() = detail::interior_laplacian(f.values(), g.hx(), g.hy());
  }
  return out;
}

inline VectorField2D laplacian(const VectorField2D& f) {
  return VectorField2D(laplacian(f[0]), laplacian(f[1]));
}

/// Tensor form of the elastic coupling: component i is sum_k lap(d_k) d_i d_k.
/// Zero on the boundary ring.
inline VectorField2D elastic_stress_divergence(const VectorField2D& d) {
  const Grid& g = d.grid();
  const ScalarField2D l0 = laplacian(d[0]);
  const ScalarField2D l1 = laplacian(d[1]);
  const VectorField2D g0 = gradient(d[0]);
  const VectorField2D g1 = gradient(d[1]);
  VectorField2D out(g);
  for (int i = 0; i < 2; ++i) {
    out[i].values() = l0.values() * g0[i].values() + l1.values() * g1[i].values();
    out[i].zero_boundary();
  }
  return out;
}

/// sum_k w_k grad(d_k): the transport of a director-space covector w along
/// the director gradient. Interior central differences, zero boundary.
inline VectorField2D contract_gradient(const VectorField2D& w, const VectorField2D& d) {
  const Grid& g = d.grid();
  const VectorField2D g0 = gradient(d[0]);
  const VectorField2D g1 = gradient(d[1]);
  VectorField2D out(g);
  for (int i = 0; i < 2; ++i) {
    out[i].values() = w[0].values() * g0[i].values() + w[1].values() * g1[i].values();
    out[i].zero_boundary();
  }
  return out;
}

/// (v . grad) d, central differences in the interior, zero boundary.
inline VectorField2D advect(const VectorField2D& v, const VectorField2D& d) {
  const Grid& g = d.grid();
  VectorField2D out(g);
  for (int k = 0; k < 2; ++k) {
    const VectorField2D gk = gradient(d[k]);
    out[k].values() = v[0].values() * gk[0].values() + v[1].values() * gk[1].values();
    out[k].zero_boundary();
  }
  return out;
}

inline void require_positive_eps(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) {
    throw ParameterError("Ginzburg-Landau width eps must be positive");
  }
}

/// f(d) = (|d|^2 - 1) d / eps^2.
inline VectorField2D ginzburg_landau_f(const VectorField2D& d, double eps) {
  require_positive_eps(eps);
  const Array2D s = (d[0].values().square() + d[1].values().square() - 1.0) / (eps * eps);
  return VectorField2D(ScalarField2D(d.grid(), s * d[0].values()),
                       ScalarField2D(d.grid(), s * d[1].values()));
}

/// F(d) = (|d|^2 - 1)^2 / (4 eps^2); grad_d F = f.
inline ScalarField2D bulk_potential_F(const VectorField2D& d, double eps) {
  require_positive_eps(eps);
  const Array2D s = d[0].values().square() + d[1].values().square() - 1.0;
  return ScalarField2D(d.grid(), s.square() / (4.0 * eps * eps));
}

inline Vec2 ginzburg_landau_f(const Vec2& d, double eps) {
  require_positive_eps(eps);
  return (d.squaredNorm() - 1.0) / (eps * eps) * d;
}

inline double bulk_potential_F(const Vec2& d, double eps) {
  require_positive_eps(eps);
  const double s = d.squaredNorm() - 1.0;
  return s * s / (4.0 * eps * eps);
}

// ---------------------------------------------------------------------------
// Quadrature

/// Trapezoidal integral over the rectangle.
inline double integrate(const ScalarField2D& f) {
  return (f.values() * f.grid().weights()).sum();
}

/// Sum over interior nodes weighted by hx*hy. Equals the trapezoidal inner
/// product whenever either argument vanishes on the boundary.
inline double inner_interior(const ScalarField2D& a, const ScalarField2D& b) {
  require_same_grid(a.grid(), b.grid(), "inner product");
  const Grid& g = a.grid();
  return (a.interior() * b.interior()).sum() * g.hx() * g.hy();
}

inline double inner_interior(const VectorField2D& a, const VectorField2D& b) {
  return inner_interior(a[0], b[0]) + inner_interior(a[1], b[1]);
}

// ---------------------------------------------------------------------------
// Snapshot files: header "nx ny lx ly t", then each component's node values
// in row-major order (j outer, i inner), one value per line.

struct Snapshot {
  Grid grid;
  double t = 0.0;
  std::vector<ScalarField2D> components;
};

inline void write_snapshot(std::ostream& os, double t, const std::vector<const ScalarField2D*>& comps) {
  if (comps.empty()) throw DimensionError("snapshot needs at least one component");
  const Grid& g = comps.front()->grid();
  os << std::setprecision(17);
  os << g.nx() << ' ' << g.ny() << ' ' << g.lx() << ' ' << g.ly() << ' ' << t << '\n';
  for (const ScalarField2D* c : comps) {
    require_same_grid(g, c->grid(), "snapshot");
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) os << (*c)(i, j) << '\n';
  }
}

inline void write_snapshot(const std::string& path, double t, const VectorField2D& f) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open snapshot file " + path);
  write_snapshot(os, t, {&f[0], &f[1]});
}

inline Snapshot read_snapshot(std::istream& is) {
  int nx = 0, ny = 0;
  double lx = 0, ly = 0, t = 0;
  if (!(is >> nx >> ny >> lx >> ly >> t)) throw Error("malformed snapshot header");
  Snapshot s{Grid(nx, ny, lx, ly), t, {}};
  std::vector<double> vals;
  double v;
  while (is >> v) vals.push_back(v);
  const std::size_t per = static_cast<std::size_t>(nx) * ny;
  if (vals.empty() || vals.size() % per != 0) throw Error("snapshot value count is not a multiple of nx*ny");
  for (std::size_t c = 0; c < vals.size() / per; ++c) {
    ScalarField2D f(s.grid);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) f(i, j) = vals[c * per + static_cast<std::size_t>(j) * nx + i];
    s.components.push_back(std::move(f));
  }
  return s;
}

inline Snapshot read_snapshot(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open snapshot file " + path);
  return read_snapshot(is);
}

}  // namespace nematic
