#ifndef FLRWKG_GAMMA_WEIGHT_HPP
#define FLRWKG_GAMMA_WEIGHT_HPP

// Time weights Gamma(t) multiplying the nonlinearity.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace flrwkg {

struct GammaConstant {
  double c = 1.0;
};

/// coef * t^gamma
struct GammaPower {
  double gamma = -1.0;
  double coef = 1.0;
};

/// coef * exp(rate * t)
struct GammaExponential {
  double rate = 0.0;
  double coef = 1.0;
};

/// Sampled table; linear interpolation, endpoint values held outside.
struct GammaTable {
  std::vector<double> t;
  std::vector<double> value;
};

using GammaWeight = std::variant<GammaConstant, GammaPower, GammaExponential, GammaTable>;

inline std::string gamma_form_name(const GammaWeight& g) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GammaConstant>) return "constant";
        else if constexpr (std::is_same_v<T, GammaPower>) return "power";
        else if constexpr (std::is_same_v<T, GammaExponential>) return "exponential";
        else return "table";
      },
      g);
}

inline void validate_gamma(const GammaWeight& g) {
  if (const auto* tab = std::get_if<GammaTable>(&g)) {
    if (tab->t.size() < 2 || tab->t.size() != tab->value.size())
      throw std::invalid_argument("gamma table needs >= 2 matching samples");
    for (std::size_t i = 1; i < tab->t.size(); ++i)
      if (!(tab->t[i] > tab->t[i - 1])) throw std::invalid_argument("gamma table times must increase");
    for (double v : tab->value)
      if (!std::isfinite(v)) throw std::invalid_argument("gamma table values must be finite");
  }
}

namespace detail {
inline std::size_t table_segment(const GammaTable& tab, double t) {
  auto it = std::upper_bound(tab.t.begin(), tab.t.end(), t);
  std::size_t i = static_cast<std::size_t>(it - tab.t.begin());
  return std::clamp<std::size_t>(i, 1, tab.t.size() - 1) - 1;
}
}  // namespace detail

inline double gamma_eval(const GammaWeight& g, double t) {
  return std::visit(
      [t](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GammaConstant>) return v.c;
        else if constexpr (std::is_same_v<T, GammaPower>) return v.coef == 0.0 ? 0.0 : v.coef * std::pow(t, v.gamma);
        else if constexpr (std::is_same_v<T, GammaExponential>) return v.coef == 0.0 ? 0.0 : v.coef * std::exp(v.rate * t);
        else {
          if (t <= v.t.front()) return v.value.front();
          if (t >= v.t.back()) return v.value.back();
          const auto i = detail::table_segment(v, t);
          const double w = (t - v.t[i]) / (v.t[i + 1] - v.t[i]);
          return (1.0 - w) * v.value[i] + w * v.value[i + 1];
        }
      },
      g);
}

inline double gamma_derivative(const GammaWeight& g, double t) {
  return std::visit(
      [t](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, GammaConstant>) return 0.0;
        else if constexpr (std::is_same_v<T, GammaPower>)
          return (v.coef == 0.0 || v.gamma == 0.0) ? 0.0 : v.coef * v.gamma * std::pow(t, v.gamma - 1.0);
        else if constexpr (std::is_same_v<T, GammaExponential>)
          return v.coef == 0.0 ? 0.0 : v.coef * v.rate * std::exp(v.rate * t);
        else {
          if (t < v.t.front() || t > v.t.back()) return 0.0;
          const auto i = detail::table_segment(v, t);
          return (v.value[i + 1] - v.value[i]) / (v.t[i + 1] - v.t[i]);
        }
      },
      g);
}

/// log|Gamma(t)|, -inf where Gamma vanishes.
inline double gamma_log_abs(const GammaWeight& g, double t) {
  if (const auto* p = std::get_if<GammaPower>(&g)) {
    if (p->coef == 0.0) return -INFINITY;
    return std::log(std::abs(p->coef)) + p->gamma * std::log(t);
  }
  if (const auto* e = std::get_if<GammaExponential>(&g)) {
    if (e->coef == 0.0) return -INFINITY;
    return std::log(std::abs(e->coef)) + e->rate * t;
  }
  const double v = std::abs(gamma_eval(g, t));
  return v == 0.0 ? -INFINITY : std::log(v);
}

inline bool gamma_identically_zero(const GammaWeight& g) {
  if (const auto* c = std::get_if<GammaConstant>(&g)) return c->c == 0.0;
  if (const auto* p = std::get_if<GammaPower>(&g)) return p->coef == 0.0;
  if (const auto* e = std::get_if<GammaExponential>(&g)) return e->coef == 0.0;
  const auto& tab = std::get<GammaTable>(g);
  return std::all_of(tab.value.begin(), tab.value.end(), [](double v) { return v == 0.0; });
}

}  // namespace flrwkg

#endif
