#ifndef FLRWKG_QUADRATURE_HPP
#define FLRWKG_QUADRATURE_HPP

// Adaptive Gauss-Kronrod on log-transformed t, plus an improper-integral
// driver that doubles the upper limit and extrapolates the geometric tail.

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace flrwkg {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  bool diverged = false;
  bool extrapolated = false;  // tail added from the panel ratio
  double tail = 0.0;
  double tail_ratio = 0.0;
  int doublings = 0;
};

struct QuadratureOptions {
  double rel_tol = 1e-13;
  int max_depth = 15;
  double max_panel_log_width = 1.0;
  int max_doublings = 60;
  double ratio_stability = 1e-6;
};

/// int_lo^hi f(t) dt for 0 < lo <= hi, substituted t = e^s, split into
/// panels of width <= max_panel_log_width in s. Panels negligible against
/// `scale` (plus the running total) are not refined.
inline QuadratureResult integrate_log(const std::function<double(double)>& f, double lo, double hi,
                                      const QuadratureOptions& opt = {}, double scale = 0.0) {
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi))
    throw std::invalid_argument("integrate_log: need 0 < lo <= hi < inf");
  QuadratureResult r;
  if (hi == lo) return r;
  const double s0 = std::log(lo), s1 = std::log(hi);
  const int panels = std::max(1, static_cast<int>(std::ceil((s1 - s0) / opt.max_panel_log_width)));
  auto g = [&](double s) {
    const double t = std::exp(s);
    return f(t) * t;
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  for (int k = 0; k < panels; ++k) {
    const double a = s0 + (s1 - s0) * k / panels;
    const double b = (k + 1 == panels) ? s1 : s0 + (s1 - s0) * (k + 1) / panels;
    double err = 0.0;
    double v = GK::integrate(g, a, b, 0, opt.rel_tol, &err);
    if (std::abs(v) + err > 1e-15 * (scale + std::abs(r.value)))
      v = GK::integrate(g, a, b, opt.max_depth, opt.rel_tol, &err);
    r.value += v;
    r.abs_error += err;
  }
  return r;
}

/// int_lo^inf f(t) dt for a nonnegative integrand. Panels [T, 2T] are added
/// until the panel ratio settles; a settled ratio q < 1 contributes the
/// geometric tail J q / (1 - q), exact for power-law tails.
inline QuadratureResult integrate_log_to_infinity(const std::function<double(double)>& f, double lo,
                                                  const QuadratureOptions& opt = {}) {
  QuadratureResult r;
  double T = lo;
  double prev = -1.0, prev_ratio = std::numeric_limits<double>::quiet_NaN();
  int growth = 0;
  for (int k = 0; k < opt.max_doublings; ++k) {
    const auto panel = integrate_log(f, T, 2.0 * T, opt, r.value);
    r.value += panel.value;
    r.abs_error += panel.abs_error;
    r.doublings = k + 1;
    T *= 2.0;
    if (!std::isfinite(r.value)) {
      r.diverged = true;
      return r;
    }
    const double J = panel.value;
    if (J <= std::numeric_limits<double>::min() || J <= 1e-17 * r.value) {
      // Superpolynomially small panel: stop once the next one is tiny too.
      if (prev >= 0.0 && prev <= 1e-15 * r.value) return r;
      prev = J;
      continue;
    }
    if (prev > 0.0) {
      const double ratio = J / prev;
      if (ratio >= 1.0) {
        if (++growth >= 3) {
          r.diverged = true;
          r.tail_ratio = ratio;
          return r;
        }
      } else {
        growth = 0;
        if (std::isfinite(prev_ratio) &&
            std::abs(ratio - prev_ratio) <= opt.ratio_stability * ratio) {
          r.tail_ratio = ratio;
          r.tail = J * ratio / (1.0 - ratio);
          r.value += r.tail;
          r.extrapolated = true;
          return r;
        }
      }
      prev_ratio = ratio;
    }
    prev = J;
  }
  // Budget spent without a settled ratio.
  if (std::isfinite(prev_ratio) && prev_ratio < 1.0 && prev > 0.0) {
    r.tail_ratio = prev_ratio;
    r.tail = prev * prev_ratio / (1.0 - prev_ratio);
    r.value += r.tail;
    r.extrapolated = true;
    return r;
  }
  r.diverged = true;
  return r;
}

}  // namespace flrwkg

#endif
