#ifndef FLRWKG_GRID_UTIL_HPP
#define FLRWKG_GRID_UTIL_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

namespace flrwkg {

/// n points log-spaced on [lo, hi], endpoints included exactly.
inline std::vector<double> geometric_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 2) throw std::invalid_argument("geometric_grid: bad range");
  std::vector<double> g(static_cast<std::size_t>(n));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i) g[i] = std::exp(llo + (lhi - llo) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

inline std::vector<double> linear_grid(double lo, double hi, int n) {
  if (n < 2) throw std::invalid_argument("linear_grid: need n >= 2");
  std::vector<double> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
  g.back() = hi;
  return g;
}

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace flrwkg

#endif
