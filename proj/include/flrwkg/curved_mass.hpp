#ifndef FLRWKG_CURVED_MASS_HPP
#define FLRWKG_CURVED_MASS_HPP

// Curved mass M^2(t) = m^2 + (n/2 - n^2/4)(a'/a)^2 - (n/2)(a''/a) of the
// transformed equation, its time derivative and the admissibility check
// M(t) > c0 > 0, d/dt M^2 <= 0.
//
// Writing phi = log a and S = n phi'^2 + 2 phi'', the mass is
// M^2 = m^2 - (n/4) S. Each family gets a factored form of S so that
// boundary cases (n l = 4, beta = 1) come out exact.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "flrwkg/grid_util.hpp"
#include "flrwkg/scale_factor.hpp"

namespace flrwkg {

struct CurvedMassProfile {
  ScaleFactorModel model;
  int n = 3;
  double m = 1.0;
  std::optional<double> c0;  // floor; defaults to m/2

  double floor() const { return c0 ? *c0 : 0.5 * m; }
};

namespace detail {

inline double mass_correction_S(const ScaleFamily& family, int n, double t) {
  const double nd = n;
  if (const auto* p = std::get_if<PowerLaw>(&family)) {
    require_domain(t > 0.0, "power-law scale factor needs t > 0");
    return p->ell * (nd * p->ell - 4.0) / (4.0 * t * t);
  }
  if (const auto* e = std::get_if<Exponential>(&family)) {
    require_domain(t >= 0.0, "exponential scale factor needs t >= 0");
    if (e->H == 0.0 || e->beta == 0.0) return 0.0;
    const double tb = std::pow(t, e->beta);
    return e->beta * e->H * std::pow(t, e->beta - 2.0) *
           (nd * e->beta * e->H * tb + 2.0 * (e->beta - 1.0));
  }
  const auto& m = std::get<Mixed>(family);
  require_domain(t > 0.0, "mixed scale factor needs t > 0");
  const double bht = scaled_pow(m.beta * m.H, t, m.beta);
  const double g = 0.5 * m.ell + bht;
  return (nd * g * g - m.ell + 2.0 * (m.beta - 1.0) * bht) / (t * t);
}

inline double mass_correction_S_dot(const ScaleFamily& family, int n, double t) {
  const double nd = n;
  if (const auto* p = std::get_if<PowerLaw>(&family)) {
    require_domain(t > 0.0, "power-law scale factor needs t > 0");
    return -p->ell * (nd * p->ell - 4.0) / (2.0 * t * t * t);
  }
  if (const auto* e = std::get_if<Exponential>(&family)) {
    require_domain(t >= 0.0, "exponential scale factor needs t >= 0");
    const double b = e->beta;
    if (e->H == 0.0 || b == 0.0 || b == 1.0) return 0.0;
    // dM^2/dt = -(1/2)(b-1) b H n t^{b-3} (b + b H n t^b - 2) = -(n/4) S'
    const double dm2 = -0.5 * (b - 1.0) * b * e->H * nd * std::pow(t, b - 3.0) *
                       (b + b * e->H * nd * std::pow(t, b) - 2.0);
    return -4.0 * dm2 / nd;
  }
  const auto& m = std::get<Mixed>(family);
  require_domain(t > 0.0, "mixed scale factor needs t > 0");
  const double b = m.beta;
  const double bht = scaled_pow(b * m.H, t, b);
  const double g = 0.5 * m.ell + bht;
  const double gdot = scaled_pow(b * b * m.H, t, b - 1.0);
  const double num = nd * g * g - m.ell + 2.0 * (b - 1.0) * bht;
  const double num_dot = 2.0 * nd * g * gdot + 2.0 * (b - 1.0) * gdot;
  return num_dot / (t * t) - 2.0 * num / (t * t * t);
}

}  // namespace detail

inline double curved_mass_sq(const CurvedMassProfile& p, double t) {
  return p.m * p.m - 0.25 * p.n * detail::mass_correction_S(p.model.family, p.n, t);
}

inline double curved_mass_sq_derivative(const CurvedMassProfile& p, double t) {
  return -0.25 * p.n * detail::mass_correction_S_dot(p.model.family, p.n, t);
}

/// Einstein-de Sitter type closed form m^2 - n l (n l - 4) / (16 t^2).
inline double eds_curved_mass_sq(double ell, int n, double m, double t) {
  if (!(t > 0.0)) throw std::domain_error("eds_curved_mass_sq needs t > 0");
  const double nl = n * ell;
  return m * m - nl * (nl - 4.0) / (16.0 * t * t);
}

struct ConditionVerdict {
  std::string name;
  bool pass = false;
  std::optional<double> first_violation_t;
  double worst_value = 0.0;  // min M^2 - c0^2 or max dM^2/dt over samples
};

struct AdmissibilityReport {
  std::vector<ConditionVerdict> conditions;
  bool admissible = false;
  std::string verdict;  // "admissible" | "not_admissible"
  std::string method;   // "analytic" | "analytic+numeric" | "numeric-only"
  std::optional<double> first_violation_t;
  std::string analytic_rule;
  double c0 = 0.0;
  double inf_M = 0.0;  // sampled infimum of M (NaN-free; 0 if M^2 <= 0 somewhere)
  double sup_dM2 = 0.0;
  // Smallest t' >= t0 from which the conditions hold (analytic or sampled).
  std::optional<double> eventual_t0;
  double t0 = 0.0;
  double horizon = 0.0;
  int n_samples = 0;
  double derivative_tol = 0.0;
  bool numeric_pass = false;
};

struct MassCheckOptions {
  double derivative_tol = 1e-12;
  bool force_numeric = false;
};

namespace detail {

struct AnalyticMassRule {
  bool known = false;
  bool pass = false;
  bool needs_numeric = false;  // rule gives an eventual statement only
  std::optional<double> first_violation_t;
  std::optional<double> eventual_t0;
  std::string rule;
};

inline AnalyticMassRule power_law_rule(double ell, int n, double m, double c0, double t0) {
  AnalyticMassRule r;
  r.known = true;
  r.rule = "power law: 0 <= l <= 4/n (dM^2/dt = n l (n l - 4) / (8 t^3)), inf M = m > c0";
  const double nl = n * ell;
  r.pass = nl >= 0.0 && nl <= 4.0 && m > c0;
  if (r.pass) r.eventual_t0 = t0;
  else r.first_violation_t = t0;
  return r;
}

inline AnalyticMassRule exponential_rule(double H, double beta, int n, double m, double c0,
                                         double t0) {
  AnalyticMassRule r;
  r.known = true;
  if (H == 0.0 || beta == 0.0 || beta == 1.0) {
    const double m2 = (beta == 1.0) ? m * m - 0.25 * n * n * H * H : m * m;
    r.rule = "exponential, beta = 1: M^2 = m^2 - n^2 H^2 / 4 constant, needs M > c0 (0 < H < 2m/n for small c0)";
    r.pass = m2 > c0 * c0 && c0 >= 0.0;
    if (r.pass) r.eventual_t0 = t0;
    else r.first_violation_t = t0;
    return r;
  }
  if (beta > 0.0) {
    r.rule = "exponential, beta > 0: conditions hold only if beta = 1";
    r.pass = false;
    r.needs_numeric = true;  // locate the violation
    return r;
  }
  if (H > 0.0) {
    r.rule = "exponential, beta < 0, H > 0: dM^2/dt > 0 for all t";
    r.pass = false;
    r.first_violation_t = t0;
    return r;
  }
  // beta < 0, H < 0: dM^2/dt <= 0 iff t >= t_e, and M^2 > m^2 from there on.
  r.rule = "exponential, beta < 0, H < 0: dM^2/dt <= 0 for t^beta <= (2 - beta)/(beta H n)";
  const double te = std::pow((2.0 - beta) / (beta * H * n), 1.0 / beta);
  const double from = std::max(t0, te);
  if (m > c0) r.eventual_t0 = from;
  r.pass = t0 >= te && m > c0;
  if (!r.pass) r.first_violation_t = t0;
  return r;
}

inline AnalyticMassRule analytic_mass_rule(const CurvedMassProfile& p, double t0) {
  const double c0 = p.floor();
  if (const auto* pl = std::get_if<PowerLaw>(&p.model.family))
    return power_law_rule(pl->ell, p.n, p.m, c0, t0);
  if (const auto* e = std::get_if<Exponential>(&p.model.family))
    return exponential_rule(e->H, e->beta, p.n, p.m, c0, t0);
  const auto& mx = std::get<Mixed>(p.model.family);
  if (mx.ell == 0.0) {
    auto r = exponential_rule(mx.H, mx.beta, p.n, p.m, c0, t0);
    r.rule = "mixed with l = 0 reduces to " + r.rule;
    return r;
  }
  if (mx.H == 0.0 || mx.beta == 0.0) {
    auto r = power_law_rule(mx.ell, p.n, p.m, c0, t0);
    r.rule = "mixed with H = 0 reduces to " + r.rule;
    return r;
  }
  AnalyticMassRule r;
  const double nl = p.n * mx.ell;
  if (mx.beta > 0.0) {
    r.known = true;
    r.rule = "mixed, beta > 0: conditions hold only for beta = 1, H = 0";
    r.needs_numeric = true;
    return r;
  }
  if (nl > 4.0 || mx.ell < 0.0) {
    r.known = true;
    r.rule = "mixed, beta < 0: eventual conditions need 0 < l <= 4/n";
    r.needs_numeric = true;
    return r;
  }
  if (nl < 4.0) {
    r.known = true;
    r.pass = true;
    r.needs_numeric = true;
    r.rule = "mixed, beta < 0: 0 < l < 4/n holds for sufficiently large t (eventual t0 sampled)";
    return r;
  }
  r.rule = "mixed, beta < 0, n l = 4: no closed rule";
  return r;
}

}  // namespace detail

inline AdmissibilityReport check_mass_conditions(const CurvedMassProfile& p, double horizon,
                                                 int n_samples, MassCheckOptions opt = {}) {
  const double t0 = p.model.t0;
  if (!(horizon > t0) || n_samples < 2)
    throw std::invalid_argument("check_mass_conditions: need horizon > t0 and n_samples >= 2");
  AdmissibilityReport rep;
  rep.c0 = p.floor();
  rep.t0 = t0;
  rep.horizon = horizon;
  rep.n_samples = n_samples;
  rep.derivative_tol = opt.derivative_tol;

  ConditionVerdict floor_c{"mass_floor", true, std::nullopt, std::numeric_limits<double>::infinity()};
  ConditionVerdict mono_c{"mass_nonincreasing", true, std::nullopt,
                          -std::numeric_limits<double>::infinity()};
  const auto grid = geometric_grid(t0, horizon, n_samples);
  std::vector<char> ok(grid.size(), 1);
  const double c02 = rep.c0 * rep.c0;
  double inf_m2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    const double m2 = curved_mass_sq(p, t);
    const double dm2 = curved_mass_sq_derivative(p, t);
    inf_m2 = std::min(inf_m2, m2);
    floor_c.worst_value = std::min(floor_c.worst_value, m2 - c02);
    mono_c.worst_value = std::max(mono_c.worst_value, dm2);
    const bool f_ok = m2 > c02 && rep.c0 >= 0.0;
    const bool d_ok = dm2 <= opt.derivative_tol;
    if (!f_ok && floor_c.pass) {
      floor_c.pass = false;
      floor_c.first_violation_t = t;
    }
    if (!d_ok && mono_c.pass) {
      mono_c.pass = false;
      mono_c.first_violation_t = t;
    }
    ok[i] = f_ok && d_ok;
  }
  rep.inf_M = inf_m2 > 0.0 ? std::sqrt(inf_m2) : 0.0;
  rep.sup_dM2 = mono_c.worst_value;
  rep.numeric_pass = floor_c.pass && mono_c.pass;
  std::optional<double> numeric_first;
  if (!floor_c.pass) numeric_first = floor_c.first_violation_t;
  if (!mono_c.pass && (!numeric_first || *mono_c.first_violation_t < *numeric_first))
    numeric_first = mono_c.first_violation_t;
  std::optional<double> sampled_eventual;
  {
    std::size_t k = grid.size();
    while (k > 0 && ok[k - 1]) --k;
    if (k < grid.size()) sampled_eventual = grid[k];
  }
  rep.conditions = {floor_c, mono_c};

  const auto rule = detail::analytic_mass_rule(p, t0);
  rep.analytic_rule = rule.rule;
  if (opt.force_numeric || !rule.known) {
    rep.method = "numeric-only";
    rep.admissible = rep.numeric_pass;
    rep.first_violation_t = numeric_first;
    rep.eventual_t0 = sampled_eventual;
  } else if (!rule.needs_numeric) {
    rep.method = "analytic";
    rep.admissible = rule.pass;
    rep.first_violation_t = rule.first_violation_t;
    rep.eventual_t0 = rule.eventual_t0;
  } else {
    rep.method = "analytic+numeric";
    // Eventual rules: pass on [t0, inf) only if sampling finds no violation.
    rep.admissible = rule.pass && rep.numeric_pass;
    rep.first_violation_t = rep.admissible ? std::nullopt : numeric_first;
    if (rule.pass) rep.eventual_t0 = sampled_eventual;
  }
  rep.verdict = rep.admissible ? "admissible" : "not_admissible";
  return rep;
}

}  // namespace flrwkg

#endif  // FLRWKG_CURVED_MASS_HPP
