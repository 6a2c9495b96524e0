#ifndef FLRWKG_WEIGHT_LIFESPAN_HPP
#define FLRWKG_WEIGHT_LIFESPAN_HPP

// Admissibility of the weight Gamma(t), the lifespan functional
//   C(T) = ( int_{t0}^T (a/a')^{n a0/(4 - n a0)} |Gamma|^{4/(4 - n a0)} dt )^{(4 - n a0)/4},
// its inverse, the selector C~ and the lifespan lower bound.

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "flrwkg/gamma_weight.hpp"
#include "flrwkg/grid_util.hpp"
#include "flrwkg/quadrature.hpp"
#include "flrwkg/scale_factor.hpp"

namespace flrwkg {

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AdmissibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GammaBoundReport {
  bool pass = false;
  double C_Gamma_measured = 0.0;
  bool analytic_known = false;
  bool analytic_pass = false;
  std::string analytic_rule;
  double argmax_t = 0.0;
  int n_samples = 0;
};

namespace detail {

inline void require_expanding_at(const ScaleFamily& f, double t) {
  if (!(log_derivatives(f, t).d1 > 0.0))
    throw std::domain_error("weight checks need an expanding model (a_dot > 0) at t = " +
                            std::to_string(t));
}

// Growth exponent p with a/a_dot ~ t^p as t -> inf.
inline double hubble_time_power(const ScaleFamily& f) {
  if (std::holds_alternative<PowerLaw>(f)) return 1.0;
  if (const auto* e = std::get_if<Exponential>(&f)) return 1.0 - e->beta;
  const auto& m = std::get<Mixed>(f);
  if (m.H == 0.0 || m.beta == 0.0) return 1.0;
  if (m.beta < 0.0 && m.ell != 0.0) return 1.0;
  return 1.0 - m.beta;
}

}  // namespace detail

inline GammaBoundReport check_gamma_bounded(const GammaWeight& gamma, const ScaleFactorModel& model,
                                            double t0, double horizon, int n_samples = 2000) {
  if (!(horizon > t0) || n_samples < 2) throw std::invalid_argument("check_gamma_bounded: bad window");
  validate_gamma(gamma);
  GammaBoundReport rep;
  rep.n_samples = n_samples;
  for (double t : geometric_grid(t0, horizon, n_samples)) {
    const auto ld = log_derivatives(model.family, t);
    if (!(ld.d1 > 0.0))
      throw std::domain_error("check_gamma_bounded: non-expanding model at t = " + std::to_string(t));
    const double v = std::abs(gamma_eval(gamma, t)) / ld.d1;
    if (v > rep.C_Gamma_measured || !std::isfinite(v)) {
      rep.C_Gamma_measured = v;
      rep.argmax_t = t;
    }
  }
  const double p = detail::hubble_time_power(model.family);
  if (gamma_identically_zero(gamma)) {
    rep.analytic_known = true;
    rep.analytic_pass = true;
    rep.analytic_rule = "Gamma = 0";
  } else if (const auto* gp = std::get_if<GammaPower>(&gamma)) {
    rep.analytic_known = true;
    rep.analytic_pass = gp->gamma + p <= 0.0;
    rep.analytic_rule = "|Gamma| a/a_dot ~ t^(gamma + " + std::to_string(p) + "), bounded iff exponent <= 0";
  } else if (std::holds_alternative<GammaConstant>(gamma)) {
    rep.analytic_known = true;
    rep.analytic_pass = p <= 0.0;
    rep.analytic_rule = "|Gamma| a/a_dot ~ t^" + std::to_string(p) + ", bounded iff exponent <= 0";
  } else if (const auto* ge = std::get_if<GammaExponential>(&gamma)) {
    rep.analytic_known = true;
    rep.analytic_pass = ge->rate < 0.0 || (ge->rate == 0.0 && p <= 0.0);
    rep.analytic_rule = "exponential weight: bounded iff rate < 0 (or rate = 0 with a/a_dot bounded)";
  } else {
    rep.analytic_rule = "tabulated weight: sampled supremum only";
  }
  rep.pass = std::isfinite(rep.C_Gamma_measured) && (!rep.analytic_known || rep.analytic_pass);
  return rep;
}

struct LifespanExponents {
  double p = 0.0;  // power of a/a_dot
  double q = 0.0;  // power of |Gamma|; result is J^{1/q}
};

inline LifespanExponents lifespan_exponents(double alpha0, int n) {
  const double na = n * alpha0;
  if (!(alpha0 > 0.0) || !(na < 4.0))
    throw std::invalid_argument("alpha0 must lie in (0, 4/n)");
  return {na / (4.0 - na), 4.0 / (4.0 - na)};
}

namespace detail {

inline double capital_C_integrand(const ScaleFamily& f, const GammaWeight& g,
                                  const LifespanExponents& ex, double t) {
  const double lg = gamma_log_abs(g, t);
  if (lg == -INFINITY) return 0.0;
  const double h = log_derivatives(f, t).d1;
  if (!(h > 0.0)) throw std::domain_error("capital_C: non-expanding model at t = " + std::to_string(t));
  return std::exp(-ex.p * std::log(h) + ex.q * lg);
}

}  // namespace detail

struct CapitalCResult {
  double value = 0.0;
  double integral = 0.0;  // J, before the 1/q power
  double abs_error = 0.0;
  bool diverged = false;
  bool extrapolated = false;
};

inline CapitalCResult capital_C_detail(const ScaleFactorModel& model, const GammaWeight& gamma,
                                       double alpha0, int n, double t0, double T) {
  const auto ex = lifespan_exponents(alpha0, n);
  if (!(t0 > 0.0) || !(T >= t0)) throw std::invalid_argument("capital_C: need 0 < t0 <= T");
  validate_gamma(gamma);
  detail::require_expanding_at(model.family, t0);
  auto f = [&](double t) { return detail::capital_C_integrand(model.family, gamma, ex, t); };
  QuadratureResult q = std::isinf(T) ? integrate_log_to_infinity(f, t0) : integrate_log(f, t0, T);
  CapitalCResult r;
  r.diverged = q.diverged;
  r.extrapolated = q.extrapolated;
  r.integral = q.value;
  r.abs_error = q.abs_error;
  r.value = q.diverged ? std::numeric_limits<double>::infinity() : std::pow(q.value, 1.0 / ex.q);
  return r;
}

/// Throws DivergenceError when T = inf and the integral diverges.
inline double capital_C(const ScaleFactorModel& model, const GammaWeight& gamma, double alpha0, int n,
                        double t0, double T) {
  const auto r = capital_C_detail(model, gamma, alpha0, n, t0, T);
  if (r.diverged) throw DivergenceError("capital_C: integral diverges as T -> inf");
  return r.value;
}

struct InverseResult {
  bool unbounded = false;
  double T = 0.0;
  double supremum = 0.0;  // C(inf), +inf if divergent
};

inline InverseResult capital_C_inverse(const ScaleFactorModel& model, const GammaWeight& gamma,
                                       double alpha0, int n, double t0, double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("capital_C_inverse: need r >= 0");
  InverseResult out;
  out.supremum = capital_C_detail(model, gamma, alpha0, n, t0, INFINITY).value;
  if (r == 0.0) {
    out.T = t0;
    return out;
  }
  if (r >= out.supremum) {
    out.unbounded = true;
    out.T = std::numeric_limits<double>::infinity();
    return out;
  }
  const auto ex = lifespan_exponents(alpha0, n);
  // Solve J(T) = r^q; J is built incrementally from a bracket.
  const double target = std::pow(r, ex.q);
  auto f = [&](double t) { return detail::capital_C_integrand(model.family, gamma, ex, t); };
  double lo = t0, hi = 2.0 * t0, J_lo = 0.0;
  double J_hi = integrate_log(f, lo, hi).value;
  while (J_hi < target) {
    lo = hi;
    J_lo = J_hi;
    hi *= 2.0;
    J_hi = J_lo + integrate_log(f, lo, hi).value;
    if (!std::isfinite(hi)) {
      out.unbounded = true;
      out.T = std::numeric_limits<double>::infinity();
      return out;
    }
  }
  const double base = J_lo, base_t = lo;
  auto g = [&](double T) { return base + integrate_log(f, base_t, T).value - target; };
  boost::math::tools::eps_tolerance<double> tol(48);
  std::uintmax_t iters = 200;
  const double g_lo = J_lo - target, g_hi = J_hi - target;
  if (g_hi == 0.0) {
    out.T = hi;
    return out;
  }
  auto root = boost::math::tools::toms748_solve(g, lo, hi, g_lo, g_hi, tol, iters);
  out.T = 0.5 * (root.first + root.second);
  return out;
}

enum class TildeBranch { bounded_critical, integrable };

inline std::string branch_name(TildeBranch b) {
  return b == TildeBranch::bounded_critical ? "bounded_critical" : "integrable";
}

struct TildeCResult {
  double value = 0.0;
  TildeBranch branch = TildeBranch::integrable;
  // Second evaluation through the weight mu(t) = a^{(2n alpha + n alpha0)/4} |a_dot|^{-n alpha0/4}.
  std::optional<double> mu_route;
  std::optional<double> route_rel_diff;
};

inline TildeCResult tilde_C(const ScaleFactorModel& model, const GammaWeight& gamma, double alpha,
                            double alpha0, int n, double t0, double T, double check_horizon = 1e4) {
  const bool critical = std::abs(alpha0 * n - 4.0) <= 1e-12;
  const auto gb = check_gamma_bounded(gamma, model, t0, std::max(check_horizon, 2.0 * t0));
  TildeCResult r;
  if (critical) {
    if (!gb.pass) throw AdmissibilityError("tilde_C: alpha0 = 4/n needs |Gamma| <= C a_dot/a");
    r.branch = TildeBranch::bounded_critical;
    r.value = 1.0;
    return r;
  }
  const auto ex = lifespan_exponents(alpha0, n);
  if (!gb.pass && capital_C_detail(model, gamma, alpha0, n, t0, INFINITY).diverged)
    throw AdmissibilityError("tilde_C: neither the Gamma bound nor C(inf) < inf holds");
  r.branch = TildeBranch::integrable;
  r.value = capital_C_detail(model, gamma, alpha0, n, t0, T).value;

  const double nd = n;
  const double mu_a = (2.0 * nd * alpha + nd * alpha0) / 4.0;
  const double mu_adot = -nd * alpha0 / 4.0;
  const double b_pow = -nd / 2.0;
  auto f = [&](double t) {
    const double lg = gamma_log_abs(gamma, t);
    if (lg == -INFINITY) return 0.0;
    const auto ld = log_derivatives(model.family, t);
    const double log_a = ld.phi;
    const double log_adot = ld.phi + std::log(ld.d1);
    const double log_mu = mu_a * log_a + mu_adot * log_adot;
    const double log_b = b_pow * log_a;
    return std::exp(ex.q * (log_mu + alpha * log_b + lg));
  };
  const auto q = std::isinf(T) ? integrate_log_to_infinity(f, t0) : integrate_log(f, t0, T);
  r.mu_route = q.diverged ? INFINITY : std::pow(q.value, 1.0 / ex.q);
  if (r.value > 0.0) r.route_rel_diff = std::abs(*r.mu_route - r.value) / r.value;
  else r.route_rel_diff = std::abs(*r.mu_route);
  return r;
}

struct LifespanEstimate {
  double alpha0 = 0.0;
  double alpha = 0.0;
  int n = 0;
  double data_norm = 0.0;
  double constant_C = 1.0;
  double fixedpoint_c0 = 1.0;
  double capital_C_at_horizon = 0.0;  // C(inf); +inf when the weight integral diverges
  double domain_lo = 0.0;             // inverse defined on [domain_lo, domain_hi)
  double domain_hi = 0.0;
  // C * (C^{-1}(data_norm) - t0)
  double literal_bound = 0.0;
  bool literal_unbounded = false;
  // C * (C^{-1}(r*) - t0) with r* = 1/(c R1^alpha), R1^alpha (R1 - R) = R
  double bound = 0.0;
  bool unbounded = false;
  double R1 = 0.0;
  double r_star = 0.0;
  std::string note;
};

/// Solves R1^alpha (R1 - R) = R for R1 > R.
inline double fixed_point_radius(double R, double alpha) {
  if (!(R > 0.0)) return 0.0;
  if (alpha == 0.0) return 2.0 * R;
  auto f = [&](double x) { return std::pow(x, alpha) * (x - R) - R; };
  double lo = R, hi = 2.0 * R + 1.0;
  while (f(hi) < 0.0) hi *= 2.0;
  boost::math::tools::eps_tolerance<double> tol(50);
  std::uintmax_t it = 200;
  auto res = boost::math::tools::toms748_solve(f, lo, hi, f(lo), f(hi), tol, it);
  return 0.5 * (res.first + res.second);
}

inline LifespanEstimate lifespan_lower_bound(const ScaleFactorModel& model, const GammaWeight& gamma,
                                             double alpha0, int n, double t0, double data_norm,
                                             double constant_C = 1.0, double alpha = 0.0,
                                             double fixedpoint_c0 = 1.0) {
  if (!(data_norm >= 0.0)) throw std::invalid_argument("lifespan_lower_bound: data_norm must be >= 0");
  if (!(constant_C > 0.0) || !(fixedpoint_c0 > 0.0) || !(alpha >= 0.0))
    throw std::invalid_argument("lifespan_lower_bound: constants must be positive, alpha >= 0");
  LifespanEstimate e;
  e.alpha0 = alpha0;
  e.alpha = alpha;
  e.n = n;
  e.data_norm = data_norm;
  e.constant_C = constant_C;
  e.fixedpoint_c0 = fixedpoint_c0;

  const auto lit = capital_C_inverse(model, gamma, alpha0, n, t0, data_norm);
  e.capital_C_at_horizon = lit.supremum;
  e.domain_hi = lit.supremum;
  e.literal_unbounded = lit.unbounded;
  e.literal_bound = lit.unbounded ? INFINITY : constant_C * (lit.T - t0);

  if (data_norm == 0.0) {
    e.unbounded = true;
    e.bound = INFINITY;
    e.r_star = INFINITY;
    e.note = "zero data: literal bound is 0, unbounded lifespan expected for small data; bounds are up to the theorem's constant";
    return e;
  }
  e.R1 = fixed_point_radius(data_norm, alpha);
  e.r_star = 1.0 / (fixedpoint_c0 * std::pow(e.R1, alpha));
  const auto inv = capital_C_inverse(model, gamma, alpha0, n, t0, e.r_star);
  e.unbounded = inv.unbounded;
  e.bound = inv.unbounded ? INFINITY : constant_C * (inv.T - t0);
  e.note = "bounds are up to the theorem's constant";
  return e;
}

}  // namespace flrwkg

#endif  // FLRWKG_WEIGHT_LIFESPAN_HPP
