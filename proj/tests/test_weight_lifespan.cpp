#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "flrwkg/weight_lifespan.hpp"

using namespace flrwkg;

namespace {

// Closed form for a = t^{l/2}, Gamma = t^gamma:
// integrand (2/l)^p t^{p + gamma q}.
double power_oracle(double ell, double gamma, double alpha0, int n, double t0, double T) {
  const double na = n * alpha0, p = na / (4 - na), q = 4 / (4 - na);
  const double e1 = p + gamma * q + 1;
  const double upper = std::isinf(T) ? 0.0 : std::pow(T, e1);
  const double J = std::pow(2 / ell, p) * (upper - std::pow(t0, e1)) / e1;
  return std::pow(J, 1 / q);
}

const ScaleFactorModel kEds{PowerLaw{4.0 / 3.0}, 1.0};

}  // namespace

TEST(GammaBounded, Examples) {
  for (double ell : {0.5, 4.0 / 3.0, 3.0}) {
    auto r = check_gamma_bounded(GammaPower{-1.0}, {PowerLaw{ell}, 1.0}, 1.0, 1e3);
    EXPECT_TRUE(r.pass);
    EXPECT_NEAR(r.C_Gamma_measured, 2.0 / ell, 1e-13);
  }
  auto ds = check_gamma_bounded(GammaConstant{1.0}, {Exponential{0.8, 1.0}, 1.0}, 1.0, 1e3);
  EXPECT_TRUE(ds.pass);
  EXPECT_NEAR(ds.C_Gamma_measured, 1.0 / 0.8, 1e-14);
  auto z = check_gamma_bounded(GammaConstant{0.0}, kEds, 1.0, 10.0);
  EXPECT_TRUE(z.pass);
  EXPECT_EQ(z.C_Gamma_measured, 0.0);
  EXPECT_FALSE(check_gamma_bounded(GammaConstant{1.0}, kEds, 1.0, 10.0).pass);
  EXPECT_FALSE(check_gamma_bounded(GammaExponential{0.5, 1.0}, {Exponential{1.0, 1.0}, 1.0}, 1.0, 10.0).pass);
  // beta < 0, H < 0: |Gamma| <~ t^{beta - 1}.
  EXPECT_TRUE(check_gamma_bounded(GammaPower{-1.5}, {Exponential{-1.0, -0.5}, 1.0}, 1.0, 100.0).pass);
  EXPECT_FALSE(check_gamma_bounded(GammaPower{-1.4}, {Exponential{-1.0, -0.5}, 1.0}, 1.0, 100.0).pass);
  EXPECT_THROW(check_gamma_bounded(GammaConstant{1.0}, {PowerLaw{-1.0}, 1.0}, 1.0, 10.0), std::domain_error);
}

TEST(CapitalC, ClosedFormExamples) {
  const double c2 = capital_C(kEds, GammaPower{-2.0}, 1.0, 3, 1.0, 2.0);
  EXPECT_NEAR(c2, std::pow(3.375 * 0.9375 / 4, 0.25), 1e-12);
  EXPECT_NEAR(c2, 0.9431, 1e-4);
  const double cinf = capital_C(kEds, GammaPower{-2.0}, 1.0, 3, 1.0, INFINITY);
  EXPECT_NEAR(cinf, std::pow(27.0 / 32.0, 0.25), 1e-12);
  EXPECT_EQ(capital_C(kEds, GammaConstant{0.0}, 1.0, 3, 1.0, 5.0), 0.0);
  EXPECT_EQ(capital_C(kEds, GammaConstant{0.0}, 1.0, 3, 1.0, INFINITY), 0.0);
}

TEST(CapitalC, Errors) {
  EXPECT_THROW(capital_C(kEds, GammaPower{-2.0}, 4.0 / 3.0, 3, 1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(capital_C(kEds, GammaPower{-2.0}, 0.0, 3, 1.0, 2.0), std::invalid_argument);
  EXPECT_THROW(capital_C(kEds, GammaPower{-0.5}, 1.0, 3, 1.0, INFINITY), DivergenceError);
  EXPECT_THROW(capital_C({PowerLaw{-1.0}, 1.0}, GammaPower{-2.0}, 1.0, 3, 1.0, 2.0), std::domain_error);
}

TEST(CapitalC, PowerGridAgainstOracle) {
  for (double ell : {0.5, 1.0, 4.0 / 3.0})
    for (double gamma : {-3.0, -2.0, -1.5})
      for (double a0 : {0.3, 0.7, 1.1}) {
        GammaPower g{gamma};
        ScaleFactorModel m{PowerLaw{ell}, 1.0};
        for (double T : {3.0, 50.0, double(INFINITY)}) {
          const double ref = power_oracle(ell, gamma, a0, 3, 1.0, T);
          EXPECT_NEAR(capital_C(m, g, a0, 3, 1.0, T), ref, 1e-8 * ref) << ell << " " << gamma << " " << a0 << " " << T;
        }
      }
}

TEST(CapitalC, DivergenceThresholds) {
  for (int k = -30; k <= 10; ++k) {
    if (k == -10) continue;
    const double gamma = 0.1 * k;
    auto r = capital_C_detail(kEds, GammaPower{gamma}, 0.7, 3, 1.0, INFINITY);
    EXPECT_EQ(r.diverged, gamma >= -1.0) << gamma;
  }
  // beta < 0, H < 0 exponential: convergent iff gamma < -1 + beta n alpha0 / 4.
  const double beta = -0.5, a0 = 1.0;
  const double thr = -1 + beta * 3 * a0 / 4;
  ScaleFactorModel m{Exponential{-1.0, beta}, 1.0};
  for (int k = -30; k <= 0; ++k) {
    const double gamma = 0.1 * k;
    if (std::abs(gamma - thr) < 0.05) continue;
    auto r = capital_C_detail(m, GammaPower{gamma}, a0, 3, 1.0, INFINITY);
    EXPECT_EQ(r.diverged, gamma >= thr) << gamma;
  }
}

TEST(CapitalC, StrictlyIncreasingAndInvertible) {
  ScaleFactorModel m{Mixed{1.0, 0.3, 0.5}, 1.0};
  GammaExponential g{-0.2, 1.5};
  double prev = 0.0;
  for (double T : {1.5, 2.0, 4.0, 8.0, 16.0}) {
    const double c = capital_C(m, g, 0.9, 3, 1.0, T);
    EXPECT_GT(c, prev);
    prev = c;
    auto inv = capital_C_inverse(m, g, 0.9, 3, 1.0, c);
    ASSERT_FALSE(inv.unbounded);
    EXPECT_NEAR(inv.T, T, 1e-7 * T);
  }
}

TEST(CapitalCInverse, Examples) {
  auto z = capital_C_inverse(kEds, GammaPower{-2.0}, 1.0, 3, 1.0, 0.0);
  EXPECT_EQ(z.T, 1.0);
  const double r = std::pow(3.375 * 0.9375 / 4, 0.25);
  auto two = capital_C_inverse(kEds, GammaPower{-2.0}, 1.0, 3, 1.0, r);
  EXPECT_NEAR(two.T, 2.0, 1e-8 * 2.0);
  auto big = capital_C_inverse(kEds, GammaPower{-2.0}, 1.0, 3, 1.0, 0.96);
  EXPECT_TRUE(big.unbounded);
  EXPECT_NEAR(big.supremum, std::pow(27.0 / 32.0, 0.25), 1e-12);
  EXPECT_THROW(capital_C_inverse(kEds, GammaPower{-2.0}, 1.0, 3, 1.0, -1.0), std::invalid_argument);
}

TEST(TildeC, Branches) {
  ScaleFactorModel ds{Exponential{1.0, 1.0}, 1.0};
  auto b = tilde_C(ds, GammaConstant{1.0}, 2.0, 4.0 / 3.0, 3, 1.0, 5.0);
  EXPECT_EQ(b.branch, TildeBranch::bounded_critical);
  EXPECT_EQ(b.value, 1.0);
  auto z = tilde_C(ds, GammaConstant{0.0}, 2.0, 1.0, 3, 1.0, 5.0);
  EXPECT_EQ(z.value, 0.0);
  EXPECT_THROW(tilde_C(kEds, GammaPower{1.0}, 2.0, 1.0, 3, 1.0, 5.0), AdmissibilityError);
}

TEST(TildeC, MuRouteMatchesDirect) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const double ell = 0.3 + U(rng), a0 = 0.1 + 1.1 * U(rng), alpha = 4.0 / 3.0 + (2.0 / 3.0) * U(rng);
    const double gamma = -1.2 - 2.0 * U(rng), T = 1.5 + 20.0 * U(rng);
    auto r = tilde_C({PowerLaw{ell}, 1.0}, GammaPower{gamma}, alpha, a0, 3, 1.0, T);
    ASSERT_TRUE(r.mu_route.has_value());
    EXPECT_LE(*r.route_rel_diff, 1e-10);
    EXPECT_NEAR(r.value, power_oracle(ell, gamma, a0, 3, 1.0, T), 1e-8 * r.value);
  }
}

TEST(Lifespan, ZeroDataAndMonotone) {
  GammaPower g{-2.0};
  auto z = lifespan_lower_bound(kEds, g, 1.0, 3, 1.0, 0.0, 1.0, 2.0);
  EXPECT_EQ(z.literal_bound, 0.0);
  EXPECT_TRUE(z.unbounded);
  EXPECT_NE(z.note.find("unbounded"), std::string::npos);

  double prev = INFINITY;
  for (double R : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    auto e = lifespan_lower_bound(kEds, g, 1.0, 3, 1.0, R, 1.0, 2.0);
    EXPECT_LE(e.bound, prev) << R;
    EXPECT_NEAR(std::pow(e.R1, 2.0) * (e.R1 - R), R, 1e-12 * R);
    prev = e.bound;
  }
  auto fin = lifespan_lower_bound(kEds, g, 1.0, 3, 1.0, 4.0, 1.0, 2.0);
  EXPECT_FALSE(fin.unbounded);
  EXPECT_GT(fin.bound, 0.0);
  // literal bound below the supremum is finite and positive
  auto lit = lifespan_lower_bound(kEds, g, 1.0, 3, 1.0, 0.5, 2.0, 2.0);
  EXPECT_FALSE(lit.literal_unbounded);
  EXPECT_NEAR(lit.literal_bound, 2.0 * (capital_C_inverse(kEds, g, 1.0, 3, 1.0, 0.5).T - 1.0), 1e-12);
  EXPECT_GT(lit.literal_bound, 0.0);
  EXPECT_THROW(lifespan_lower_bound(kEds, g, 1.0, 3, 1.0, -1.0), std::invalid_argument);
}
