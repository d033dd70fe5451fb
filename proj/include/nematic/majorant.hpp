#pragma once

// Comparison ODE Y' = C (Y^3 + Y) + C R3(t), its blow-up horizon, and the
// check that a sampled trajectory quantity stays below Y.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nematic/diagnostics.hpp"
#include "nematic/error.hpp"

namespace nematic {

struct MajorantProblem {
  double C_star = 1.0;
  double Y0 = 1.0;
  /// R3(t) >= 0; empty means R3 = 0.
  std::function<double(double)> R3;
  /// Sample times when R3 interpolates data; empty for closed-form R3.
  std::vector<double> R3_times;

  void validate() const {
    if (!(C_star > 0.0) || !std::isfinite(C_star)) throw ParameterError("C* must be positive and finite");
    if (!(Y0 >= 0.0) || !std::isfinite(Y0)) throw ParameterError("Y0 must be nonnegative");
  }

  double r3(double t) const { return R3 ? R3(t) : 0.0; }
  double rhs(double t, double y) const { return C_star * (y * y * y + y) + C_star * r3(t); }
};

/// Piecewise-linear interpolant of samples, constant beyond the ends.
inline std::function<double(double)> interpolant(std::vector<double> t, std::vector<double> v) {
  if (t.size() != v.size() || t.empty()) throw DimensionError("interpolant needs matching nonempty samples");
  return [t = std::move(t), v = std::move(v)](double s) {
    if (s <= t.front()) return v.front();
    if (s >= t.back()) return v.back();
    const auto it = std::upper_bound(t.begin(), t.end(), s);
    const std::size_t k = static_cast<std::size_t>(it - t.begin());
    const double w = (s - t[k - 1]) / (t[k] - t[k - 1]);
    return (1 - w) * v[k - 1] + w * v[k];
  };
}

struct MajorantResult {
  std::vector<double> t;
  std::vector<double> Y;
  bool crossed = false;
  double T_half_cap = std::numeric_limits<double>::infinity();
  double T_cap = std::numeric_limits<double>::infinity();
  /// Richardson extrapolation (4 T_cap - T_half_cap) / 3, infinite without blow-up.
  double T_max = std::numeric_limits<double>::infinity();
};

namespace detail {

inline double rk4(const MajorantProblem& p, double t, double y, double h) {
  const double k1 = p.rhs(t, y);
  const double k2 = p.rhs(t + 0.5 * h, y + 0.5 * h * k1);
  const double k3 = p.rhs(t + 0.5 * h, y + 0.5 * h * k2);
  const double k4 = p.rhs(t + h, y + h * k3);
  return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
}

// Time in [0, h] at which the RK4 substep from (t, y) reaches `level`.
inline double crossing_in_step(const MajorantProblem& p, double t, double y, double h, double level) {
  double lo = 0.0, hi = h;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, t); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (rk4(p, t, y, mid) >= level) hi = mid; else lo = mid;
  }
  return 0.5 * (lo + hi);
}

/// Adaptive RK4: steps are halved until the change per step is at most 1% of
/// max(|Y|, 1), and regrown up to h_max when the solution is flat.
class MajorantStepper {
 public:
  MajorantStepper(const MajorantProblem& p, double t0, double h_max) : p_(p), t_(t0), y_(p.Y0), h_(h_max), h_max_(h_max) {}

  double t() const { return t_; }
  double y() const { return y_; }

  /// Advances to t_target, stopping early when Y reaches `cap`. Crossings of
  /// `levels` (ascending) are located by bisection and appended to `hits`.
  bool advance(double t_target, double cap, const std::vector<double>& levels, std::vector<double>& hits,
               std::vector<double>* ts = nullptr, std::vector<double>* ys = nullptr) {
    while (t_ < t_target) {
      double h = std::min(h_, t_target - t_);
      double y1 = rk4(p_, t_, y_, h);
      while ((!std::isfinite(y1) || std::abs(y1 - y_) > 0.01 * std::max(std::abs(y_), 1.0)) && h > 1e-300) {
        h *= 0.5;
        y1 = rk4(p_, t_, y_, h);
      }
      while (hits.size() < levels.size() && y_ < levels[hits.size()] && y1 >= levels[hits.size()]) {
        hits.push_back(t_ + crossing_in_step(p_, t_, y_, h, levels[hits.size()]));
      }
      if (y1 >= cap) {
        t_ += crossing_in_step(p_, t_, y_, h, cap);
        y_ = cap;
        if (ts) {
          ts->push_back(t_);
          ys->push_back(y_);
        }
        return true;
      }
      const bool flat = std::abs(y1 - y_) < 0.0025 * std::max(std::abs(y_), 1.0);
      t_ += h;
      y_ = y1;
      if (ts) {
        ts->push_back(t_);
        ys->push_back(y_);
      }
      h_ = flat ? std::min(h_max_, 2 * h) : h;
      if (t_target - t_ < 1e-14 * std::max(1.0, std::abs(t_target))) t_ = t_target;
    }
    return false;
  }

 private:
  const MajorantProblem& p_;
  double t_, y_, h_, h_max_;
};

}  // namespace detail

/// Integrates from t = 0 until t_end or until Y reaches y_cap.
inline MajorantResult solve_majorant(const MajorantProblem& p, double dt, double y_cap, double t_end = 1e3) {
  p.validate();
  if (!(dt > 0.0)) throw ParameterError("majorant dt must be positive");
  if (!(y_cap >= 10.0 * std::max(1.0, p.Y0))) throw ParameterError("y_cap must be at least 10 max(1, Y0)");
  MajorantResult r;
  r.t.push_back(0.0);
  r.Y.push_back(p.Y0);
  detail::MajorantStepper st(p, 0.0, dt);
  std::vector<double> hits;
  r.crossed = st.advance(t_end, y_cap, {0.5 * y_cap}, hits, &r.t, &r.Y);
  if (r.crossed) {
    r.T_cap = st.t();
    r.T_half_cap = hits.empty() ? r.T_cap : hits.front();
    r.T_max = (4.0 * r.T_cap - r.T_half_cap) / 3.0;
  }
  return r;
}

struct ComparisonVerdict {
  bool pass = true;
  double witness_time = kNaN;
  double worst_ratio = 0.0;  ///< max A / Y over samples with finite Y
  double C_star = 0.0;
  double T_cap = std::numeric_limits<double>::infinity();
};

/// A(t_k) <= Y(t_k) (1 + 1e-9) for every sample; Y counts as infinite past y_cap.
inline ComparisonVerdict comparison_check(std::span<const double> t, std::span<const double> A,
                                          const MajorantProblem& p, double dt = 1e-3, double y_cap = 1e12) {
  p.validate();
  if (t.size() != A.size()) throw DimensionError("comparison check: sample lengths differ");
  if (!p.R3_times.empty()) {
    bool same = p.R3_times.size() == t.size();
    for (std::size_t k = 0; same && k < t.size(); ++k)
      same = std::abs(p.R3_times[k] - t[k]) <= 1e-12 * std::max(1.0, std::abs(t[k]));
    if (!same) throw DimensionError("comparison check: R3 and A_P sample times differ");
  }
  ComparisonVerdict v;
  v.C_star = p.C_star;
  if (t.empty()) return v;
  y_cap = std::max(y_cap, 10.0 * std::max(1.0, p.Y0));
  MajorantProblem shifted = p;
  const double t0 = t.front();
  if (p.R3) shifted.R3 = [r = p.R3, t0](double s) { return r(s + t0); };
  detail::MajorantStepper st(shifted, 0.0, dt);
  std::vector<double> hits;
  bool infinite = false;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!infinite && k > 0) infinite = st.advance(t[k] - t0, y_cap, {}, hits);
    if (infinite) {
      v.T_cap = std::min(v.T_cap, st.t() + t0);
      continue;
    }
    const double Y = st.y();
    const double ratio = Y > 0.0 ? A[k] / Y : (A[k] > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    v.worst_ratio = std::max(v.worst_ratio, ratio);
    if (A[k] > Y * (1.0 + 1e-9) && v.pass) {
      v.pass = false;
      v.witness_time = t[k];
    }
  }
  return v;
}

/// Majorant calibrated on data: C* is the smallest constant with
/// dA/dt <= C* (A^3 + A + R3) between samples, Y0 = A(t_0).
inline MajorantProblem fit_majorant(std::span<const double> t, std::span<const double> A,
                                    std::span<const double> R3) {
  MajorantProblem p;
  p.C_star = std::max(fit_differential_constant(t, A, R3, 3), std::numeric_limits<double>::min());
  p.Y0 = A.empty() ? 0.0 : A.front();
  std::vector<double> tt(t.begin(), t.end()), rr(R3.begin(), R3.end());
  p.R3_times = tt;
  p.R3 = interpolant(std::move(tt), std::move(rr));
  return p;
}

inline ComparisonVerdict comparison_check_records(const std::vector<EnergyRecord>& recs) {
  std::vector<double> t, A, R;
  for (const auto& r : recs) {
    t.push_back(r.t);
    A.push_back(r.A_P);
    R.push_back(r.R3);
  }
  const MajorantProblem p = fit_majorant(t, A, R);
  const double span = t.size() > 1 ? t.back() - t.front() : 1.0;
  return comparison_check(t, A, p, std::min(1e-3, span / 1000.0));
}

}  // namespace nematic
