#ifndef FLRWKG_SCALE_FACTOR_HPP
#define FLRWKG_SCALE_FACTOR_HPP

// Closed-form scale-factor families a(t) on an FLRW background:
//   power law    a = t^{l/2}
//   exponential  a = exp(H t^beta)
//   mixed        a = t^{l/2} exp(H t^beta)
// All derivatives are analytic. Downstream admissibility checks are sign
// sensitive, so nothing here is finite-differenced.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "flrwkg/grid_util.hpp"

namespace flrwkg {

struct PowerLaw {
  double ell = 0.0;
};

struct Exponential {
  double H = 0.0;
  double beta = 1.0;
};

struct Mixed {
  double ell = 0.0;
  double H = 0.0;
  double beta = 1.0;
};

using ScaleFamily = std::variant<PowerLaw, Exponential, Mixed>;

struct ScaleFactorModel {
  ScaleFamily family;
  double t0 = 1.0;
};

struct ScaleDerivatives {
  double a = 0.0;
  double a_dot = 0.0;
  double a_ddot = 0.0;
};

/// phi = log a and its first three time derivatives.
struct LogDerivatives {
  double phi = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
};

inline std::string family_name(const ScaleFamily& f) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PowerLaw>) return "power_law";
        else if constexpr (std::is_same_v<T, Exponential>) return "exponential";
        else return "mixed";
      },
      f);
}

namespace detail {

// c * t^p with the convention 0 * (anything) = 0, so that degenerate
// coefficients (beta = 1 in t^{beta-2}) never produce 0 * inf.
inline double scaled_pow(double c, double t, double p) {
  if (c == 0.0) return 0.0;
  return c * std::pow(t, p);
}

inline void require_domain(bool ok, const char* what) {
  if (!ok) throw std::domain_error(what);
}

// Derivatives of H t^beta.
inline LogDerivatives exp_part(double H, double beta, double t) {
  LogDerivatives r;
  r.phi = scaled_pow(H, t, beta);
  r.d1 = scaled_pow(H * beta, t, beta - 1.0);
  r.d2 = scaled_pow(H * beta * (beta - 1.0), t, beta - 2.0);
  r.d3 = scaled_pow(H * beta * (beta - 1.0) * (beta - 2.0), t, beta - 3.0);
  return r;
}

// Derivatives of (l/2) log t.
inline LogDerivatives power_part(double ell, double t) {
  const double h = 0.5 * ell;
  return {h * std::log(t), h / t, -h / (t * t), 2.0 * h / (t * t * t)};
}

}  // namespace detail

inline LogDerivatives log_derivatives(const ScaleFamily& family, double t) {
  LogDerivatives r = std::visit(
      [t](const auto& f) -> LogDerivatives {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, PowerLaw>) {
          detail::require_domain(t > 0.0, "power-law scale factor needs t > 0");
          return detail::power_part(f.ell, t);
        } else if constexpr (std::is_same_v<T, Exponential>) {
          detail::require_domain(t >= 0.0, "exponential scale factor needs t >= 0");
          return detail::exp_part(f.H, f.beta, t);
        } else {
          detail::require_domain(t > 0.0, "mixed scale factor needs t > 0");
          const auto p = detail::power_part(f.ell, t);
          const auto e = detail::exp_part(f.H, f.beta, t);
          return {p.phi + e.phi, p.d1 + e.d1, p.d2 + e.d2, p.d3 + e.d3};
        }
      },
      family);
  detail::require_domain(std::isfinite(r.d1) && std::isfinite(r.d2) && std::isfinite(r.d3),
                         "scale factor derivatives are not finite at this t");
  return r;
}

inline LogDerivatives log_derivatives(const ScaleFactorModel& model, double t) {
  return log_derivatives(model.family, t);
}

inline ScaleDerivatives eval(const ScaleFactorModel& model, double t) {
  const auto ld = log_derivatives(model, t);
  double a = 0.0;
  if (const auto* p = std::get_if<PowerLaw>(&model.family)) {
    a = std::pow(t, 0.5 * p->ell);
  } else if (const auto* m = std::get_if<Mixed>(&model.family)) {
    a = std::pow(t, 0.5 * m->ell) * std::exp(detail::scaled_pow(m->H, t, m->beta));
  } else {
    a = std::exp(ld.phi);
  }
  return {a, a * ld.d1, a * (ld.d2 + ld.d1 * ld.d1)};
}

inline double hubble_rate(const ScaleFactorModel& model, double t) {
  const auto d = eval(model, t);
  return d.a_dot / d.a;
}

struct ExpansionReport {
  bool pass = false;
  std::optional<double> first_violation_t;
  // Closed-form sign analysis of a_dot on [t0, horizon].
  bool analytic_pass = false;
  std::optional<double> analytic_first_violation_t;
  // First time from which a_dot > 0 holds for good, if known.
  std::optional<double> expanding_from;
  std::string rule;
  // Brute-force sign sampling on the geometric grid.
  bool sampled_pass = false;
  std::optional<double> sampled_first_violation_t;
  int n_samples = 0;
};

namespace detail {

struct SignAnalysis {
  bool pass;
  std::optional<double> first_violation;
  std::optional<double> expanding_from;
  std::string rule;
};

// a > 0 always holds for these families, so sign(a_dot) = sign(d/dt log a).
inline SignAnalysis analyze_expansion(const ScaleFamily& family, double t0, double horizon) {
  if (const auto* p = std::get_if<PowerLaw>(&family)) {
    if (p->ell > 0.0) return {true, std::nullopt, t0, "power law: a_dot > 0 iff l > 0"};
    return {false, t0, std::nullopt, "power law: a_dot > 0 iff l > 0"};
  }
  if (const auto* e = std::get_if<Exponential>(&family)) {
    if (e->beta * e->H > 0.0) return {true, std::nullopt, t0, "exponential: a_dot > 0 iff beta*H > 0"};
    return {false, t0, std::nullopt, "exponential: a_dot > 0 iff beta*H > 0"};
  }
  const auto& m = std::get<Mixed>(family);
  const std::string rule = "mixed: sign of l/2 + beta*H*t^beta (monotone in t)";
  const double bh = m.beta * m.H;
  auto g = [&](double t) { return 0.5 * m.ell + scaled_pow(bh, t, m.beta); };
  if (bh == 0.0) {
    if (m.ell > 0.0) return {true, std::nullopt, t0, rule};
    return {false, t0, std::nullopt, rule};
  }
  // g' = beta^2 H t^{beta-1}: sign(H).
  const double root_pow = -0.5 * m.ell / bh;  // t*^beta at g = 0
  std::optional<double> root;
  if (root_pow > 0.0) root = std::pow(root_pow, 1.0 / m.beta);
  if (m.H > 0.0) {
    if (g(t0) > 0.0) return {true, std::nullopt, t0, rule};
    std::optional<double> from;
    if (root) from = *root;  // strictly positive beyond the root
    return {false, t0, from, rule};
  }
  // Decreasing g.
  if (g(t0) <= 0.0) return {false, t0, std::nullopt, rule};
  if (root && *root > t0) {
    if (*root <= horizon) return {false, *root, std::nullopt, rule};
    return {true, std::nullopt, std::nullopt, rule};
  }
  return {true, std::nullopt, t0, rule};
}

}  // namespace detail

inline ExpansionReport validate_expansion(const ScaleFactorModel& model, double t0, double horizon,
                                          int n_samples) {
  if (!(t0 > 0.0) || !(horizon > t0) || n_samples < 2)
    throw std::invalid_argument("validate_expansion: need 0 < t0 < horizon and n_samples >= 2");
  ExpansionReport rep;
  rep.n_samples = n_samples;
  const auto sa = detail::analyze_expansion(model.family, t0, horizon);
  rep.analytic_pass = sa.pass;
  rep.analytic_first_violation_t = sa.first_violation;
  rep.expanding_from = sa.expanding_from;
  rep.rule = sa.rule;

  rep.sampled_pass = true;
  for (double t : geometric_grid(t0, horizon, n_samples)) {
    if (!(log_derivatives(model.family, t).d1 > 0.0)) {
      rep.sampled_pass = false;
      rep.sampled_first_violation_t = t;
      break;
    }
  }
  rep.pass = rep.analytic_pass;
  rep.first_violation_t = rep.analytic_first_violation_t;
  return rep;
}

}  // namespace flrwkg

#endif  // FLRWKG_SCALE_FACTOR_HPP
