#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "flrwkg/curved_mass.hpp"

using namespace flrwkg;

namespace {

// Oracle: M^2 straight from a, a_dot, a_ddot.
double mass_from_derivatives(const CurvedMassProfile& p, double t) {
  auto d = eval(p.model, t);
  const double h = d.a_dot / d.a, q = d.a_ddot / d.a, n = p.n;
  return p.m * p.m + (n / 2 - n * n / 4) * h * h - (n / 2) * q;
}

}  // namespace

TEST(CurvedMass, EinsteinDeSitterIsExactlyPhysical) {
  CurvedMassProfile p{{PowerLaw{4.0 / 3.0}, 1.0}, 3, 2.0, {}};
  for (double t : {1.0, 2.5, 17.0, 1e6}) {
    EXPECT_EQ(curved_mass_sq(p, t), 4.0);
    EXPECT_EQ(curved_mass_sq_derivative(p, t), 0.0);
  }
  EXPECT_EQ(eds_curved_mass_sq(4.0 / 3.0, 3, 2.0, 5.0), 4.0);
}

TEST(CurvedMass, DeSitterConstant) {
  CurvedMassProfile p{{Exponential{1.0, 1.0}, 1.0}, 3, 2.0, {}};
  for (double t : {1.0, 3.0, 40.0}) {
    EXPECT_DOUBLE_EQ(curved_mass_sq(p, t), 1.75);
    EXPECT_EQ(curved_mass_sq_derivative(p, t), 0.0);
  }
}

TEST(CurvedMass, StaticBackground) {
  CurvedMassProfile p{{PowerLaw{0.0}, 1.0}, 3, 1.0, {}};
  EXPECT_EQ(curved_mass_sq(p, 4.2), 1.0);
  EXPECT_EQ(eds_curved_mass_sq(0.0, 3, 1.0, 4.2), 1.0);
}

TEST(CurvedMass, EdsRadiationLikeExponent) {
  for (int n : {1, 2, 3, 5}) EXPECT_NEAR(eds_curved_mass_sq(2.0 / n, n, 1.3, 1.0), 1.69 + 0.25, 1e-14);
}

TEST(CurvedMass, ExponentialDerivativeExample) {
  // -(1/2)(beta-1) beta H n t^{beta-3} (beta + beta H n t^beta - 2) at H=-1, beta=-1, n=3, t=2
  CurvedMassProfile p{{Exponential{-1.0, -1.0}, 1.0}, 3, 2.0, {}};
  const double b = -1, H = -1, n = 3, t = 2;
  const double expected = -0.5 * (b - 1) * b * H * n * std::pow(t, b - 3) * (b + b * H * n * std::pow(t, b) - 2);
  EXPECT_NEAR(expected, -0.28125, 1e-15);
  EXPECT_NEAR(curved_mass_sq_derivative(p, 2.0), expected, 1e-15);
}

TEST(CurvedMass, MatchesDerivativeFormulaAndEdsClosedForm) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    const double ell = 3.0 * U(rng), m = 0.1 + 3.0 * U(rng), t = 0.5 + 20.0 * U(rng);
    const int n = 1 + static_cast<int>(4 * U(rng));
    CurvedMassProfile p{{PowerLaw{ell}, 0.5}, n, m, {}};
    const double eds = eds_curved_mass_sq(ell, n, m, t);
    EXPECT_NEAR(curved_mass_sq(p, t), eds, 1e-12 * std::abs(eds));
    EXPECT_NEAR(mass_from_derivatives(p, t), eds, 1e-12 * std::abs(eds) + 1e-13);
  }
  const ScaleFamily fams[] = {Exponential{0.7, 1.3}, Exponential{-1.0, -0.5}, Mixed{1.0, 0.5, 0.5},
                              Mixed{4.0 / 3.0, -1.0, -1.0}, Mixed{0.4, 2.0, -1.5}};
  for (const auto& f : fams) {
    CurvedMassProfile p{{f, 1.0}, 3, 1.5, {}};
    for (int i = 0; i < 25; ++i) {
      const double t = 1.0 + 9.0 * U(rng);
      const double ref = mass_from_derivatives(p, t);
      EXPECT_NEAR(curved_mass_sq(p, t), ref, 1e-11 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(CurvedMass, DerivativeMatchesFiniteDifferences) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(1.0, 10.0);
  const ScaleFamily fams[] = {PowerLaw{0.9}, PowerLaw{2.5},       Exponential{0.7, 1.3},
                              Exponential{-1.0, -0.5}, Exponential{0.2, 0.5}, Mixed{1.0, 0.5, 0.5},
                              Mixed{4.0 / 3.0, -1.0, -1.0}, Mixed{0.4, 2.0, -1.5}};
  for (const auto& f : fams) {
    CurvedMassProfile p{{f, 1.0}, 3, 1.5, {}};
    for (int i = 0; i < 25; ++i) {
      const double t = U(rng), h = 1e-4 * t;
      const double fd = (curved_mass_sq(p, t + h) - curved_mass_sq(p, t - h)) / (2 * h);
      const double d = curved_mass_sq_derivative(p, t);
      EXPECT_NEAR(d, fd, 1e-7 * std::max(std::abs(fd), 1e-2)) << family_name(f) << " t=" << t;
    }
  }
}

TEST(CurvedMass, CheckExamples) {
  auto ok = check_mass_conditions({{Exponential{0.5, 1.0}, 1.0}, 3, 2.0, {}}, 100.0, 1000);
  EXPECT_TRUE(ok.admissible);
  EXPECT_EQ(ok.method, "analytic");
  EXPECT_EQ(ok.verdict, "admissible");
  EXPECT_NEAR(ok.inf_M, std::sqrt(4.0 - 9.0 * 0.25 / 4.0), 1e-14);

  auto bad = check_mass_conditions({{Exponential{1.0, 2.0}, 1.0}, 3, 2.0, {}}, 100.0, 1000);
  EXPECT_FALSE(bad.admissible);
  ASSERT_TRUE(bad.first_violation_t.has_value());

  for (int n : {1, 2, 3, 4}) {
    auto b = check_mass_conditions({{PowerLaw{4.0 / n}, 1.0}, n, 0.7, {}}, 100.0, 500);
    EXPECT_TRUE(b.admissible) << n;
    EXPECT_LE(b.sup_dM2, 1e-15);
  }
  EXPECT_DOUBLE_EQ(ok.c0, 1.0);
  EXPECT_THROW(check_mass_conditions({{PowerLaw{1.0}, 1.0}, 3, 1.0, {}}, 1.0, 10), std::invalid_argument);
}

TEST(CurvedMass, PowerLawRule) {
  // n l > 4: M^2 increases toward m^2.
  auto r = check_mass_conditions({{PowerLaw{2.0}, 1.0}, 3, 2.0, {}}, 50.0, 500);
  EXPECT_FALSE(r.admissible);
  EXPECT_FALSE(r.conditions[1].pass);
  auto r2 = check_mass_conditions({{PowerLaw{1.0}, 1.0}, 3, 2.0, {}}, 50.0, 500);
  EXPECT_TRUE(r2.admissible);
  EXPECT_TRUE(r2.numeric_pass);
}

TEST(CurvedMass, EventualRegimeReportsStartTime) {
  // beta < 0, H < 0: dM^2/dt <= 0 from t_e = ((2 - beta)/(beta H n))^{1/beta}.
  const double b = -0.5, H = -3.0;
  const double te = std::pow((2 - b) / (b * H * 3), 1 / b);
  auto r = check_mass_conditions({{Exponential{H, b}, 1.0}, 3, 2.0, {}}, 1e4, 4000);
  ASSERT_LT(1.0, te);
  EXPECT_FALSE(r.admissible);
  ASSERT_TRUE(r.eventual_t0.has_value());
  EXPECT_NEAR(*r.eventual_t0, te, 1e-12 * te);
  auto r2 = check_mass_conditions({{Exponential{H, b}, 1.01 * te}, 3, 2.0, {}}, 1e4, 4000);
  EXPECT_TRUE(r2.admissible);
  EXPECT_TRUE(r2.numeric_pass);
}

TEST(CurvedMass, AdmissibleProfilesPassDenseSampling) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  int admissible = 0;
  for (int i = 0; i < 60; ++i) {
    ScaleFamily f;
    if (i % 2) f = PowerLaw{2.0 * U(rng)};
    else f = Exponential{2.0 * U(rng), U(rng) < 0.5 ? 1.0 : 2.0 * U(rng)};
    CurvedMassProfile p{{f, 1.0}, 3, 2.0, {}};
    auto r = check_mass_conditions(p, 1e3, 200);
    if (!r.admissible) continue;
    ++admissible;
    auto dense = check_mass_conditions(p, 1e3, 10000, {1e-12, true});
    EXPECT_TRUE(dense.numeric_pass);
    EXPECT_GT(dense.inf_M, p.floor());
    EXPECT_LE(dense.sup_dM2, 1e-12);
  }
  EXPECT_GT(admissible, 10);
}

TEST(CurvedMass, AnalyticAgreesWithSamplingOffBoundary) {
  // Strict derivative sign and a long horizon so slow violations (small beta) show up.
  int disagree = 0, cells = 0;
  for (int i = 0; i < 12; ++i) {
    for (int j = 0; j < 12; ++j) {
      const double beta = 0.2 + 0.15 * i, H = 0.1 + 0.15 * j;
      CurvedMassProfile p{{Exponential{H, beta}, 1.0}, 3, 2.0, 1e-9};
      auto a = check_mass_conditions(p, 1e30, 4000);
      auto s = check_mass_conditions(p, 1e30, 4000, {0.0, true});
      ++cells;
      if (a.admissible != s.admissible) ++disagree;
    }
  }
  EXPECT_EQ(disagree, 0) << "of " << cells;
}
