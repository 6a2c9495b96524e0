#ifndef FLRWKG_INITIAL_DATA_HPP
#define FLRWKG_INITIAL_DATA_HPP

// Named initial profiles on the torus.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "flrwkg/torus.hpp"

namespace flrwkg {

/// A * prod_d sum_{s=-1,0,1} exp(-(x_d - c_d + sL)^2 / (2 w^2)): one image
/// per side, so the bump is periodic up to exp(-L^2/(8 w^2)).
inline std::vector<double> gaussian_profile(const TorusGrid& g, double amplitude, double width,
                                            std::array<double, 3> center) {
  validate_grid(g);
  if (!(width > 0.0)) throw std::invalid_argument("gaussian width must be positive");
  std::vector<std::vector<double>> axis(g.n, std::vector<double>(g.points));
  for (int d = 0; d < g.n; ++d)
    for (int i = 0; i < g.points; ++i) {
      const double x = g.dx() * i;
      double s = 0.0;
      for (int img = -1; img <= 1; ++img) {
        const double y = x - center[d] + img * g.L;
        s += std::exp(-y * y / (2.0 * width * width));
      }
      axis[d][i] = s;
    }
  std::vector<double> u(g.total());
  for (std::size_t idx = 0; idx < u.size(); ++idx) {
    std::size_t r = idx;
    double v = amplitude;
    for (int d = g.n - 1; d >= 0; --d) {
      v *= axis[d][r % g.points];
      r /= g.points;
    }
    u[idx] = v;
  }
  return u;
}

/// A cos(k.x + phase), k = 2 pi m / L.
inline std::vector<double> fourier_mode_profile(const TorusGrid& g, double amplitude,
                                                std::array<int, 3> mode, double phase = 0.0) {
  validate_grid(g);
  std::vector<double> u(g.total());
  for (std::size_t idx = 0; idx < u.size(); ++idx) {
    const auto x = node_position(g, idx);
    double arg = phase;
    for (int d = 0; d < g.n; ++d) arg += g.k0() * mode[d] * x[d];
    u[idx] = amplitude * std::cos(arg);
  }
  return u;
}

/// Random real field sum_m c_m e^{i k_m x} over 0 < max|m_i| <= band with
/// c_{-m} = conj(c_m) and c_m ~ complex normal / (1 + |m|^2). Coefficients
/// are drawn per mode in a fixed order, so the same seed gives the same
/// continuous field on every resolution with band < points/2.
inline std::vector<double> random_band_limited(SpectralTorus& torus, std::uint64_t seed, int band) {
  const auto& g = torus.grid();
  if (band < 1 || 2 * band >= g.points)
    throw std::invalid_argument("random band must satisfy 1 <= band < points/2");
  using cplx = std::complex<double>;
  std::vector<cplx> spec(torus.spectral_size(), cplx(0.0, 0.0));
  const int P = g.points, Hh = P / 2 + 1;
  auto wrap = [P](int m) { return m < 0 ? m + P : m; };
  auto slot = [&](const std::array<int, 3>& m) {
    // m[g.n - 1] is the half (last) axis and must be >= 0 here
    std::size_t j = 0;
    for (int d = 0; d < g.n - 1; ++d) j = j * P + wrap(m[d]);
    return j * Hh + m[g.n - 1];
  };
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  std::array<int, 3> lo{0, 0, 0}, hi{0, 0, 0};
  for (int d = 0; d < g.n; ++d) {
    lo[d] = -band;
    hi[d] = band;
  }
  std::array<int, 3> m{};
  for (m[0] = lo[0]; m[0] <= hi[0]; ++m[0])
    for (m[1] = lo[1]; m[1] <= hi[1]; ++m[1])
      for (m[2] = lo[2]; m[2] <= hi[2]; ++m[2]) {
        // canonical half: first nonzero component from the last axis is positive
        int lead = 0;
        for (int d = g.n - 1; d >= 0; --d)
          if (m[d] != 0) {
            lead = m[d];
            break;
          }
        if (lead <= 0) continue;
        double m2 = 0.0;
        for (int d = 0; d < g.n; ++d) m2 += double(m[d]) * m[d];
        const double re = N(rng), im = N(rng);
        const cplx c = cplx(re, im) * (std::sqrt(0.5) / (1.0 + m2));
        if (m[g.n - 1] > 0) {
          spec[slot(m)] += c;
        } else {
          std::array<int, 3> mm{-m[0], -m[1], -m[2]};
          spec[slot(m)] += c;
          spec[slot(mm)] += std::conj(c);
        }
      }
  std::vector<double> u(torus.size());
  torus.synthesize(spec.data(), u.data());
  return u;
}

}  // namespace flrwkg

#endif
