#ifndef FLRWKG_NONLINEARITY_HPP
#define FLRWKG_NONLINEARITY_HPP

// Nonlinear terms F(x, u) with a declared Lipschitz exponent alpha,
// exponent-range checks, and potentials V(t, x, psi) for the dissipative
// energy argument.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "flrwkg/gamma_weight.hpp"
#include "flrwkg/grid_util.hpp"
#include "flrwkg/scale_factor.hpp"

namespace flrwkg {

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// F = sign * lambda * |u|^alpha u
struct PurePower {
  double alpha = 2.0;
  double lambda = 1.0;
  int sign = 1;
};

/// F = sign * lambda * mu(x) |u|^alpha u, mu sampled per grid point
struct ModulatedPower {
  double alpha = 2.0;
  double lambda = 1.0;
  int sign = 1;
  std::vector<double> mu;
};

struct CustomForm {
  std::string name;
  double alpha = 0.0;
  std::function<double(double)> f;
};

struct NonlinearityModel {
  std::variant<PurePower, ModulatedPower, CustomForm> form;
  std::optional<double> lipschitz_C;
};

inline double declared_alpha(const NonlinearityModel& m) {
  return std::visit([](const auto& f) { return f.alpha; }, m.form);
}

inline std::string form_name(const NonlinearityModel& m) {
  return std::visit(
      [](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PurePower>) return "pure_power";
        else if constexpr (std::is_same_v<T, ModulatedPower>) return "modulated_power";
        else return "custom:" + f.name;
      },
      m.form);
}

/// Compiled-in custom forms.
inline const std::map<std::string, CustomForm>& custom_registry() {
  static const std::map<std::string, CustomForm> reg = {
      {"linear", {"linear", 0.0, [](double u) { return u; }}},
      {"expm1", {"expm1", 1.0, [](double u) { return std::expm1(u); }}},
      {"cubic", {"cubic", 2.0, [](double u) { return u * u * u; }}},
      {"saturated_cubic", {"saturated_cubic", 2.0, [](double u) { return u * u * u / (1.0 + u * u); }}},
  };
  return reg;
}

inline NonlinearityModel make_custom(const std::string& name) {
  const auto& reg = custom_registry();
  auto it = reg.find(name);
  if (it == reg.end()) throw std::invalid_argument("unknown custom nonlinearity '" + name + "'");
  return {it->second, std::nullopt};
}

/// |u|^alpha u with 0 -> 0; integer exponents use plain products.
inline double power_term(double alpha, double u) {
  if (u == 0.0) return 0.0;
  if (alpha == 0.0) return u;
  if (alpha == 1.0) return std::abs(u) * u;
  if (alpha == 2.0) return u * u * u;
  if (alpha == 4.0) {
    const double u2 = u * u;
    return u2 * u2 * u;
  }
  return std::pow(std::abs(u), alpha) * u;
}

inline double eval_F(const NonlinearityModel& m, std::size_t x, double u) {
  const double v = std::visit(
      [&](const auto& f) -> double {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PurePower>) return f.sign * f.lambda * power_term(f.alpha, u);
        else if constexpr (std::is_same_v<T, ModulatedPower>) {
          if (x >= f.mu.size()) throw std::out_of_range("modulated nonlinearity: grid index out of range");
          return f.sign * f.lambda * f.mu[x] * power_term(f.alpha, u);
        } else
          return f.f(u);
      },
      m.form);
  if (std::isnan(v)) throw EvaluationError("nonlinearity evaluated to NaN");
  return v;
}

/// out[i] = scale_out * F(i, scale_in * u[i]) over a whole grid.
inline void apply_F(const NonlinearityModel& m, const double* u, double* out, std::size_t N,
                    double scale_in, double scale_out) {
  if (const auto* p = std::get_if<PurePower>(&m.form)) {
    // power_term is homogeneous: fold both scales into one coefficient
    const double c = scale_out * p->sign * p->lambda *
                     (p->alpha == 0.0 ? scale_in : std::pow(std::abs(scale_in), p->alpha) * scale_in);
    if (p->alpha == 2.0) {
      for (std::size_t i = 0; i < N; ++i) out[i] = c * u[i] * u[i] * u[i];
    } else {
      for (std::size_t i = 0; i < N; ++i) out[i] = c * power_term(p->alpha, u[i]);
    }
  } else if (const auto* q = std::get_if<ModulatedPower>(&m.form)) {
    if (q->mu.size() != N) throw std::invalid_argument("modulated nonlinearity: mu size mismatch");
    const double c = scale_out * q->sign * q->lambda *
                     (q->alpha == 0.0 ? scale_in : std::pow(std::abs(scale_in), q->alpha) * scale_in);
    for (std::size_t i = 0; i < N; ++i) out[i] = c * q->mu[i] * power_term(q->alpha, u[i]);
  } else {
    const auto& f = std::get<CustomForm>(m.form).f;
    for (std::size_t i = 0; i < N; ++i) out[i] = scale_out * f(scale_in * u[i]);
  }
  for (std::size_t i = 0; i < N; ++i)
    if (std::isnan(out[i])) throw EvaluationError("nonlinearity evaluated to NaN");
}

struct LipschitzReport {
  bool pass = false;
  double C_measured = 0.0;
  double worst_u = 0.0;
  double worst_v = 0.0;
  int n_pairs = 0;
  int n_skipped = 0;
  double log10_lo = -3.0;
  double log10_hi = 3.0;
  std::uint64_t seed = 0;
};

/// Sampled supremum of |F(u) - F(v)| / (|u - v| (|u|^alpha + |v|^alpha)),
/// magnitudes log-uniform in [10^lo, 10^hi] with random signs.
inline LipschitzReport check_lipschitz(const NonlinearityModel& m, double alpha, int n_samples,
                                       std::uint64_t seed = 1, double log10_lo = -3.0,
                                       double log10_hi = 3.0) {
  if (n_samples < 100) throw std::invalid_argument("check_lipschitz: need n_samples >= 100");
  LipschitzReport r;
  r.seed = seed;
  r.log10_lo = log10_lo;
  r.log10_hi = log10_hi;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(log10_lo, log10_hi);
  std::bernoulli_distribution coin(0.5);
  std::size_t nx = 1;
  if (const auto* q = std::get_if<ModulatedPower>(&m.form)) nx = std::max<std::size_t>(1, q->mu.size());
  std::uniform_int_distribution<std::size_t> pick(0, nx - 1);
  auto draw = [&] { return (coin(rng) ? 1.0 : -1.0) * std::pow(10.0, mag(rng)); };
  for (int i = 0; i < n_samples; ++i) {
    const double u = draw(), v = draw();
    const std::size_t x = pick(rng);
    if (u == v) {
      ++r.n_skipped;
      continue;
    }
    ++r.n_pairs;
    const double num = std::abs(eval_F(m, x, u) - eval_F(m, x, v));
    const double den = std::abs(u - v) * (std::pow(std::abs(u), alpha) + std::pow(std::abs(v), alpha));
    const double ratio = num / den;
    if (!(ratio <= r.C_measured)) {
      r.C_measured = std::isnan(ratio) ? INFINITY : ratio;
      r.worst_u = u;
      r.worst_v = v;
    }
  }
  r.pass = std::isfinite(r.C_measured);
  return r;
}

enum class TheoremRange { Global11, Local13 };

inline bool check_alpha_range(int n, double alpha, TheoremRange th) {
  if (th == TheoremRange::Global11) {
    if (n != 3 && n != 4) return false;
    return alpha >= 4.0 / n && alpha <= 2.0 / (n - 2);
  }
  if (alpha < 0.0) return false;
  if (n <= 2) return true;
  return alpha <= 2.0 / (n - 2);
}

/// V(t, x, psi) with closed-form partials; V_psi = -Gamma F for the
/// associated nonlinearity.
struct PotentialModel {
  std::string name;
  std::function<double(double, std::size_t, double)> V;
  std::function<double(double, std::size_t, double)> V_t;
  std::function<double(double, std::size_t, double)> V_psi;
  std::size_t n_points = 1;  // distinct spatial samples of the coefficient
  NonlinearityModel nonlinearity;
  GammaWeight gamma = GammaConstant{1.0};
};

inline PotentialModel zero_potential() {
  auto z = [](double, std::size_t, double) { return 0.0; };
  return {"zero", z, z, z, 1, {PurePower{0.0, 0.0, 1}, std::nullopt}, GammaConstant{0.0}};
}

/// V = s * Gamma(t) lambda mu(x) |psi|^{alpha+2}/(alpha+2), F = -s lambda mu |psi|^alpha psi.
/// s = +1 is the defocusing (dissipative) sign.
inline PotentialModel power_potential(double alpha, double lambda, GammaWeight gamma,
                                      std::vector<double> mu = {}, int s = 1) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("power_potential: alpha must be >= 0");
  validate_gamma(gamma);
  PotentialModel p;
  p.name = s > 0 ? "dissipative_power" : "focusing_power";
  p.gamma = gamma;
  const bool hom = mu.empty();
  p.n_points = hom ? 1 : mu.size();
  auto mu_at = [mu](std::size_t x) { return mu.empty() ? 1.0 : mu.at(x); };
  const double k = s * lambda / (alpha + 2.0);
  p.V = [=](double t, std::size_t x, double psi) {
    return k * gamma_eval(gamma, t) * mu_at(x) * std::pow(std::abs(psi), alpha + 2.0);
  };
  p.V_t = [=](double t, std::size_t x, double psi) {
    return k * gamma_derivative(gamma, t) * mu_at(x) * std::pow(std::abs(psi), alpha + 2.0);
  };
  p.V_psi = [=](double t, std::size_t x, double psi) {
    return s * lambda * gamma_eval(gamma, t) * mu_at(x) * power_term(alpha, psi);
  };
  if (hom) p.nonlinearity = {PurePower{alpha, lambda, -s}, std::nullopt};
  else p.nonlinearity = {ModulatedPower{alpha, lambda, -s, mu}, std::nullopt};
  return p;
}

inline PotentialModel dissipative_power_potential(double alpha, double lambda, GammaWeight gamma,
                                                  std::vector<double> mu = {}) {
  return power_potential(alpha, lambda, std::move(gamma), std::move(mu), 1);
}

struct DissipativityPoint {
  double t = 0.0;
  std::size_t x = 0;
  double w = 0.0;
};

struct DissipativityReport {
  bool pass = false;
  double worst_value = -INFINITY;
  DissipativityPoint worst_point;
  double tolerance = 1e-12;
  double worst_excess = -INFINITY;  // max of value - tolerance * max(1, term scale)
  int n_evaluations = 0;
  std::string note = "V_psi evaluated at the same t as V";
};

struct DissipativityOptions {
  int n_magnitudes = 64;       // per sign
  double min_magnitude = 1e-3; // relative to max |w|
  std::size_t max_x_samples = 16;
  double tolerance = 1e-12;
};

/// Samples (2/n)(a/a_dot) V_t + 2V - psi V_psi at psi = a^{-n/2} w.
inline DissipativityReport check_potential_dissipativity(const PotentialModel& pot,
                                                         const ScaleFactorModel& model, int n,
                                                         std::pair<double, double> t_window,
                                                         std::pair<double, double> w_range,
                                                         int n_samples, DissipativityOptions opt = {}) {
  if (!pot.V || !pot.V_t || !pot.V_psi)
    throw std::invalid_argument("check_potential_dissipativity: potential lacks closed-form partials");
  if (!(t_window.second >= t_window.first) || !(t_window.first > 0.0) || n_samples < 1)
    throw std::invalid_argument("check_potential_dissipativity: bad window");
  DissipativityReport r;
  r.tolerance = opt.tolerance;
  std::vector<double> ts = n_samples == 1 || t_window.first == t_window.second
                               ? std::vector<double>{t_window.first}
                               : geometric_grid(t_window.first, t_window.second, n_samples);
  std::vector<double> ws{0.0};
  const double wmax_pos = std::max(0.0, w_range.second), wmax_neg = std::max(0.0, -w_range.first);
  auto mags = [&](double wm) {
    if (opt.n_magnitudes < 2 || opt.min_magnitude >= 1.0) return std::vector<double>{wm};
    return geometric_grid(opt.min_magnitude * wm, wm, opt.n_magnitudes);
  };
  if (wmax_pos > 0.0)
    for (double mag : mags(wmax_pos)) ws.push_back(mag);
  if (wmax_neg > 0.0)
    for (double mag : mags(wmax_neg)) ws.push_back(-mag);
  const std::size_t stride = std::max<std::size_t>(1, pot.n_points / opt.max_x_samples);
  for (double t : ts) {
    const auto ld = log_derivatives(model.family, t);
    if (!(ld.d1 > 0.0)) throw std::domain_error("check_potential_dissipativity: non-expanding model");
    const double inv_h = 1.0 / ld.d1;
    const double b = std::exp(-0.5 * n * ld.phi);
    for (std::size_t x = 0; x < pot.n_points; x += stride) {
      for (double w : ws) {
        const double psi = b * w;
        const double t1 = (2.0 / n) * inv_h * pot.V_t(t, x, psi);
        const double t2 = 2.0 * pot.V(t, x, psi);
        const double t3 = psi * pot.V_psi(t, x, psi);
        const double val = t1 + t2 - t3;
        ++r.n_evaluations;
        if (!(val <= r.worst_value)) {
          r.worst_value = val;
          r.worst_point = {t, x, w};
        }
        // tolerance grows with the size of the cancelling terms
        const double excess = val - opt.tolerance * std::max(1.0, std::abs(t1) + std::abs(t2) + std::abs(t3));
        if (!(excess <= r.worst_excess)) r.worst_excess = excess;
      }
    }
  }
  r.pass = r.worst_excess <= 0.0;
  return r;
}

}  // namespace flrwkg

#endif  // FLRWKG_NONLINEARITY_HPP
