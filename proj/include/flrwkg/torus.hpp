#ifndef FLRWKG_TORUS_HPP
#define FLRWKG_TORUS_HPP

// Periodic torus [0, L)^n sampled on points^n nodes, row-major with the last
// axis fastest, and FFTW-backed spectral operators on it.

#include <fftw3.h>

#include <array>
#include <cmath>
#include <complex>
#include <cstring>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "flrwkg/grid_util.hpp"

namespace flrwkg {

struct TorusGrid {
  int n = 3;
  int points = 16;
  double L = 2.0 * M_PI;

  std::size_t total() const {
    std::size_t s = 1;
    for (int d = 0; d < n; ++d) s *= static_cast<std::size_t>(points);
    return s;
  }
  /// complex half-spectrum length
  std::size_t spectral_total() const { return total() / points * (points / 2 + 1); }
  double dx() const { return L / points; }
  double cell_volume() const { return std::pow(dx(), n); }
  double volume() const { return std::pow(L, n); }
  double k0() const { return 2.0 * M_PI / L; }
};

inline void validate_grid(const TorusGrid& g) {
  if (g.n < 1 || g.n > 3) throw std::invalid_argument("torus dimension must be 1, 2 or 3");
  if (g.points < 8 || !is_power_of_two(g.points))
    throw std::invalid_argument("points per axis must be a power of two >= 8");
  if (!(g.L > 0.0)) throw std::invalid_argument("torus side length must be positive");
}

/// Coordinates of node `idx` along each axis.
inline std::array<double, 3> node_position(const TorusGrid& g, std::size_t idx) {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int d = g.n - 1; d >= 0; --d) {
    x[d] = g.dx() * static_cast<double>(idx % g.points);
    idx /= g.points;
  }
  return x;
}

/// Signed integer wavenumber of FFT index i on an axis with N points.
inline int signed_mode(int i, int N) { return i <= N / 2 - 1 ? i : (i == N / 2 ? N / 2 : i - N); }

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlanDeleter {
  void operator()(fftw_plan_s* p) const {
    if (p) {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      fftw_destroy_plan(p);
    }
  }
};

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace detail

/// Owns FFTW plans and aligned scratch for one grid. Not shareable between
/// threads while in use; make one per simulation.
class SpectralTorus {
 public:
  using cplx = std::complex<double>;

  explicit SpectralTorus(const TorusGrid& g) : grid_(g) {
    validate_grid(g);
    N_ = g.total();
    Nc_ = g.spectral_total();
    real_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * N_)));
    spec_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * Nc_)));
    if (!real_ || !spec_) throw std::bad_alloc();
    std::array<int, 3> dims{g.points, g.points, g.points};
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      fwd_.reset(fftw_plan_dft_r2c(g.n, dims.data(), real_.get(), spec_.get(), FFTW_ESTIMATE));
      bwd_.reset(fftw_plan_dft_c2r(g.n, dims.data(), spec_.get(), real_.get(), FFTW_ESTIMATE));
    }
    if (!fwd_ || !bwd_) throw std::runtime_error("FFTW plan creation failed");

    k2_.resize(Nc_);
    weight_.resize(Nc_);
    dealias_.resize(Nc_);
    top_third_.resize(Nc_);
    const int P = g.points, H = P / 2 + 1;
    const double k0 = g.k0();
    for (std::size_t j = 0; j < Nc_; ++j) {
      std::size_t r = j;
      const int last = static_cast<int>(r % H);
      r /= H;
      double k2 = double(last) * last * k0 * k0;
      int mmax = last;
      for (int d = 0; d < g.n - 1; ++d) {
        const int m = signed_mode(static_cast<int>(r % P), P);
        r /= P;
        k2 += double(m) * m * k0 * k0;
        mmax = std::max(mmax, std::abs(m));
      }
      k2_[j] = k2;
      weight_[j] = (last == 0 || last == P / 2) ? 1.0 : 2.0;
      dealias_[j] = (3 * mmax <= P) ? 1 : 0;  // keep |m| <= N/3
      top_third_[j] = (3 * mmax > P) ? 1 : 0;
    }
  }

  SpectralTorus(const SpectralTorus&) = delete;
  SpectralTorus& operator=(const SpectralTorus&) = delete;

  const TorusGrid& grid() const { return grid_; }
  std::size_t size() const { return N_; }
  std::size_t spectral_size() const { return Nc_; }
  const std::vector<double>& k2() const { return k2_; }
  const std::vector<double>& half_weights() const { return weight_; }

  /// Unnormalized forward transform into `out` (length spectral_size()).
  void forward(const double* u, cplx* out) {
    std::memcpy(real_.get(), u, sizeof(double) * N_);
    fftw_execute(fwd_.get());
    std::memcpy(static_cast<void*>(out), spec_.get(), sizeof(fftw_complex) * Nc_);
  }

  /// Inverse transform including the 1/N factor.
  void backward(const cplx* in, double* u) {
    std::memcpy(spec_.get(), static_cast<const void*>(in), sizeof(fftw_complex) * Nc_);
    fftw_execute(bwd_.get());
    const double s = 1.0 / static_cast<double>(N_);
    for (std::size_t i = 0; i < N_; ++i) u[i] = real_.get()[i] * s;
  }

  /// Sum over the full spectrum c_k e^{i k x}, no normalization (Hermitian
  /// half-spectrum input).
  void synthesize(const cplx* in, double* u) {
    std::memcpy(spec_.get(), static_cast<const void*>(in), sizeof(fftw_complex) * Nc_);
    fftw_execute(bwd_.get());
    std::memcpy(u, real_.get(), sizeof(double) * N_);
  }

  void laplacian(const double* u, double* out) {
    std::memcpy(real_.get(), u, sizeof(double) * N_);
    fftw_execute(fwd_.get());
    const double s = 1.0 / static_cast<double>(N_);
    for (std::size_t j = 0; j < Nc_; ++j) {
      spec_.get()[j][0] *= -k2_[j] * s;
      spec_.get()[j][1] *= -k2_[j] * s;
    }
    fftw_execute(bwd_.get());
    std::memcpy(out, real_.get(), sizeof(double) * N_);
  }

  std::vector<double> laplacian(const std::vector<double>& u) {
    check(u);
    std::vector<double> out(N_);
    laplacian(u.data(), out.data());
    return out;
  }

  /// int |grad u|^2 via Parseval on the half spectrum.
  double grad_norm_sq(const double* u) {
    std::memcpy(real_.get(), u, sizeof(double) * N_);
    fftw_execute(fwd_.get());
    double acc = 0.0;
    for (std::size_t j = 0; j < Nc_; ++j) {
      const double re = spec_.get()[j][0], im = spec_.get()[j][1];
      acc += weight_[j] * k2_[j] * (re * re + im * im);
    }
    return acc * grid_.cell_volume() / static_cast<double>(N_);
  }
  double grad_norm_sq(const std::vector<double>& u) {
    check(u);
    return grad_norm_sq(u.data());
  }

  double l2_norm_sq(const double* u) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < N_; ++i) acc += u[i] * u[i];
    return acc * grid_.cell_volume();
  }
  double l2_norm_sq(const std::vector<double>& u) const {
    check(u);
    return l2_norm_sq(u.data());
  }
  double inner(const double* u, const double* v) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < N_; ++i) acc += u[i] * v[i];
    return acc * grid_.cell_volume();
  }

  /// ||u||_{H^1}^2 = ||u||^2 + ||grad u||^2
  double h1_norm_sq(const double* u) { return l2_norm_sq(u) + grad_norm_sq(u); }

  /// Zero all modes with max_i |m_i| > N/3.
  void dealias(double* u) {
    std::memcpy(real_.get(), u, sizeof(double) * N_);
    fftw_execute(fwd_.get());
    const double s = 1.0 / static_cast<double>(N_);
    for (std::size_t j = 0; j < Nc_; ++j) {
      const double f = dealias_[j] ? s : 0.0;
      spec_.get()[j][0] *= f;
      spec_.get()[j][1] *= f;
    }
    fftw_execute(bwd_.get());
    std::memcpy(u, real_.get(), sizeof(double) * N_);
  }

  /// Fraction of sum |u_k|^2 carried by modes in the top third of the band.
  double spectral_tail_fraction(const double* u) {
    std::memcpy(real_.get(), u, sizeof(double) * N_);
    fftw_execute(fwd_.get());
    double all = 0.0, top = 0.0;
    for (std::size_t j = 0; j < Nc_; ++j) {
      const double re = spec_.get()[j][0], im = spec_.get()[j][1];
      const double e = weight_[j] * (re * re + im * im);
      all += e;
      if (top_third_[j]) top += e;
    }
    return all > 0.0 ? top / all : 0.0;
  }

 private:
  void check(const std::vector<double>& u) const {
    if (u.size() != N_) throw std::invalid_argument("field size does not match the torus grid");
  }

  TorusGrid grid_;
  std::size_t N_ = 0, Nc_ = 0;
  std::unique_ptr<double, detail::FftwFree> real_;
  std::unique_ptr<fftw_complex, detail::FftwFree> spec_;
  std::unique_ptr<fftw_plan_s, detail::FftwPlanDeleter> fwd_, bwd_;
  std::vector<double> k2_, weight_;
  std::vector<char> dealias_, top_third_;
};

}  // namespace flrwkg

#endif  // FLRWKG_TORUS_HPP
