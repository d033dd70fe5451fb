#pragma once

// Power-law decay fitting: value ~ C (1 + t)^(-p), estimated by least squares
// of log(value) against log(1 + t).

#include <cmath>
#include <span>
#include <vector>

#include "nematic/error.hpp"

namespace nematic {

struct DecayFit {
  double exponent = 0.0;
  double log_constant = 0.0;
  double r2 = 0.0;
  int samples = 0;
  /// Set when the local exponent keeps growing across the window, i.e. the
  /// data decay faster than any power law (typically exponentially).
  bool super_polynomial = false;
};

namespace detail {

struct LineFit {
  double slope, intercept, r2;
};

inline LineFit least_squares_line(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (!(sxx > 0.0)) throw FitError("degenerate abscissae in decay fit");
  const double slope = sxy / sxx;
  const double r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return {slope, my - slope * mx, r2};
}

}  // namespace detail

/// Fits the decay exponent over samples with t in [t_min, t_max].
inline DecayFit fit_decay_exponent_window(std::span<const double> t, std::span<const double> v, double t_min,
                                          double t_max) {
  if (t.size() != v.size()) throw DimensionError("decay fit: time and value lengths differ");
  std::vector<double> x, y;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_min || t[k] > t_max) continue;
    if (!(v[k] > 0.0) || !std::isfinite(v[k])) {
      throw FitError("non-positive value " + std::to_string(v[k]) + " at t=" + std::to_string(t[k]) +
                     " in fitted window; clip the window above the floating-point floor");
    }
    if (!(t[k] > -1.0)) throw FitError("decay fit needs t > -1");
    x.push_back(std::log1p(t[k]));
    y.push_back(std::log(v[k]));
  }
  if (x.size() < 2) throw InsufficientDataError("decay fit needs at least two samples in the window");
  const auto line = detail::least_squares_line(x, y);
  DecayFit out{-line.slope, line.intercept, line.r2, static_cast<int>(x.size()), false};
  if (x.size() >= 8) {
    const std::size_t h = x.size() / 2;
    const auto early = detail::least_squares_line(std::span(x).first(h), std::span(y).first(h));
    const auto late = detail::least_squares_line(std::span(x).subspan(h), std::span(y).subspan(h));
    out.super_polynomial = -late.slope > 1.1 * (-early.slope) + 0.05 && -early.slope > 0.0;
  }
  return out;
}

/// Fits over the last `tail_fraction` of the samples.
inline DecayFit fit_decay_exponent(std::span<const double> t, std::span<const double> v, double tail_fraction) {
  if (!(tail_fraction > 0.0) || tail_fraction > 1.0) throw ParameterError("tail_fraction must lie in (0, 1]");
  if (t.size() != v.size()) throw DimensionError("decay fit: time and value lengths differ");
  if (t.size() < 2) throw InsufficientDataError("decay fit needs at least two samples");
  const std::size_t n = t.size();
  std::size_t keep = static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(n)));
  keep = std::max<std::size_t>(2, std::min(keep, n));
  return fit_decay_exponent_window(t.subspan(n - keep), v.subspan(n - keep), -0.5, INFINITY);
}

}  // namespace nematic
