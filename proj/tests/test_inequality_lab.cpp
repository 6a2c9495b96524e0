#include <gtest/gtest.h>

#include <cmath>

#include "flrwkg/inequality_lab.hpp"

using namespace flrwkg;

namespace {

const ScaleFactorModel kDeSitter{Exponential{1.0, 1.0}, 1.0};
const NonlinearityModel kCubic{PurePower{2.0, 1.0, -1}, std::nullopt};

double lp_norm(const std::vector<double>& u, double p, double dV) {
  double s = 0.0;
  for (double x : u) s += std::pow(std::abs(x), p);
  return std::pow(s * dV, 1.0 / p);
}

std::vector<double> scaled(std::vector<double> u, double s) {
  for (auto& x : u) x *= s;
  return u;
}

}  // namespace

TEST(GN, ZeroField) {
  SpectralTorus T(TorusGrid{3, 8, 2 * M_PI});
  const auto r = gn_check(T, std::vector<double>(T.size(), 0.0), kCubic, 2.0);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.rhs_unit, 0.0);
  EXPECT_EQ(r.ratio, 0.0);
}

TEST(GN, LhsIsLebesgueNormPower) {
  TorusGrid g{3, 16, 2 * M_PI};
  SpectralTorus T(g);
  const auto phi = scaled(random_band_limited(T, 9, 3), 2.5);
  for (double alpha : {0.5, 1.0, 2.0}) {
    const auto r = gn_check(T, phi, NonlinearityModel{PurePower{alpha, 1.0, 1}, std::nullopt}, alpha);
    const double ref = std::pow(lp_norm(phi, 2 * (alpha + 1), g.cell_volume()), alpha + 1);
    EXPECT_NEAR(r.lhs, ref, 1e-12 * ref) << alpha;
  }
}

TEST(GN, RhsUnitExponents) {
  TorusGrid g{2, 16, 2 * M_PI};
  SpectralTorus T(g);
  const auto phi = random_band_limited(T, 4, 3);
  const double l2 = std::sqrt(T.l2_norm_sq(phi)), h1 = std::sqrt(l2 * l2 + T.grad_norm_sq(phi));
  const auto r = gn_check(T, phi, NonlinearityModel{PurePower{1.0, 1.0, 1}, std::nullopt}, 1.0);
  EXPECT_NEAR(r.rhs_unit, h1 * l2, 1e-13 * h1 * l2);  // n alpha / 2 = 1, alpha + 1 - 1 = 1
}

TEST(GN, RatioSymmetryAndScaleInvariance) {
  SpectralTorus T(TorusGrid{3, 16, 2 * M_PI});
  const auto phi = random_band_limited(T, 21, 4);
  const double base = gn_check(T, phi, kCubic, 2.0).ratio;
  EXPECT_NEAR(gn_check(T, scaled(phi, -1.0), kCubic, 2.0).ratio, base, 1e-14 * base);
  for (double s : {0.25, 4.0}) EXPECT_NEAR(gn_check(T, scaled(phi, s), kCubic, 2.0).ratio, base, 1e-10 * base);
}

TEST(GN, RangeErrors) {
  SpectralTorus T(TorusGrid{3, 8, 2 * M_PI});
  std::vector<double> u(T.size(), 1.0);
  EXPECT_THROW(gn_check(T, u, kCubic, 2.5), std::invalid_argument);
  EXPECT_THROW(gn_check(T, u, kCubic, 0.0), std::invalid_argument);
  EXPECT_THROW(gn_check(T, std::vector<double>(3, 1.0), kCubic, 2.0), std::invalid_argument);
}

TEST(GN, EnsembleIsResolutionStable) {
  FieldEnsembleSpec spec;
  spec.count = 60;
  const auto a = gn_ensemble(TorusGrid{3, 16, 2 * M_PI}, kCubic, 2.0, spec);
  const auto b = gn_ensemble(TorusGrid{3, 32, 2 * M_PI}, kCubic, 2.0, spec);
  ASSERT_EQ(a.ratios.size(), 60u);
  EXPECT_TRUE(std::isfinite(a.max_ratio));
  EXPECT_GT(a.min_ratio, 0.0);
  EXPECT_LT(std::abs(b.max_ratio / a.max_ratio - 1.0), 0.1);
  EXPECT_EQ(a.ratios[a.argmax], a.max_ratio);
}

TEST(GNDiff, Degenerate) {
  SpectralTorus T(TorusGrid{3, 16, 2 * M_PI});
  const auto p = random_band_limited(T, 2, 3);
  EXPECT_EQ(gn_diff_check(T, p, p, kCubic, 2.0).lhs, 0.0);
  const auto d = gn_diff_check(T, p, std::vector<double>(T.size(), 0.0), kCubic, 2.0);
  const auto s = gn_check(T, p, kCubic, 2.0);
  EXPECT_LT(d.ratio, 2.0 * s.ratio);
  EXPECT_GT(d.ratio, 0.5 * s.ratio);
}

TEST(GNDiff, EnsembleBounded) {
  FieldEnsembleSpec spec;
  spec.count = 40;
  const auto a = gn_diff_ensemble(TorusGrid{3, 16, 2 * M_PI}, kCubic, 2.0, spec);
  const auto b = gn_diff_ensemble(TorusGrid{3, 32, 2 * M_PI}, kCubic, 2.0, spec);
  EXPECT_TRUE(std::isfinite(a.max_ratio));
  EXPECT_LT(std::abs(b.max_ratio / a.max_ratio - 1.0), 0.1);
}

namespace {

std::vector<FieldState> linear_run(SpectralTorus& T, const CurvedMassProfile& prof, int seed, double amp) {
  FieldState s{prof.model.t0, scaled(random_band_limited(T, seed, 3), amp),
               scaled(random_band_limited(T, seed + 1000, 3), amp)};
  SolverOptions o;
  o.record_dt = 0.1;
  return free_evolution(T.grid(), prof, s, 3.0, o).states;
}

}  // namespace

TEST(Estimate, EqualTrajectoriesGiveZero) {
  SpectralTorus T(TorusGrid{3, 8, 2 * M_PI});
  const CurvedMassProfile prof{kDeSitter, 3, 2.0};
  const auto u = linear_run(T, prof, 1, 0.01);
  const auto r = nonlinear_term_estimate_check(T, u, &u, prof, GammaConstant{1.0}, kCubic, 2.0, 4.0 / 3);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.ratio, 0.0);
  EXPECT_EQ(r.branch, "bounded_critical");
}

TEST(Estimate, SingleTrajectoryMatchesDirectQuadrature) {
  TorusGrid g{3, 8, 2 * M_PI};
  SpectralTorus T(g);
  const CurvedMassProfile prof{kDeSitter, 3, 2.0};
  const auto u = linear_run(T, prof, 3, 0.02);
  const auto r = nonlinear_term_estimate_check(T, u, nullptr, prof, GammaConstant{1.0}, kCubic, 2.0, 4.0 / 3);
  // trapezoid of || e^{3t/2} (e^{-3t/2} u)^3 ||_{L2}
  double ref = 0.0, prev = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    double s = 0.0;
    for (double x : u[k].u) {
      const double psi = std::exp(-1.5 * u[k].t) * x;
      const double f = std::exp(1.5 * u[k].t) * psi * psi * psi;
      s += f * f;
    }
    const double f = std::sqrt(s * g.cell_volume());
    if (k > 0) ref += 0.5 * (u[k].t - u[k - 1].t) * (f + prev);
    prev = f;
  }
  EXPECT_NEAR(r.lhs, ref, 1e-12 * ref);
  EXPECT_NEAR(r.rhs, std::pow(r.x_u, 3), 1e-12 * r.rhs);
  EXPECT_GT(r.ratio, 0.0);
}

TEST(Estimate, RegimeErrors) {
  SpectralTorus T(TorusGrid{3, 8, 2 * M_PI});
  const CurvedMassProfile prof{kDeSitter, 3, 2.0};
  const auto u = linear_run(T, prof, 1, 0.01);
  const NonlinearityModel sub{PurePower{1.0, 1.0, -1}, std::nullopt};
  EXPECT_THROW(nonlinear_term_estimate_check(T, u, nullptr, prof, GammaConstant{1.0}, sub, 1.0, 1.0),
               AdmissibilityError);
  EXPECT_THROW(nonlinear_term_estimate_check(T, u, nullptr, prof, GammaConstant{1.0}, kCubic, 2.0, 2.0),
               AdmissibilityError);
}

TEST(Estimate, EnsembleRatioBounded) {
  SpectralTorus T(TorusGrid{3, 8, 2 * M_PI});
  const CurvedMassProfile prof{kDeSitter, 3, 2.0};
  double lo = INFINITY, hi = 0.0;
  for (int i = 0; i < 6; ++i) {
    const auto u = linear_run(T, prof, 10 + 2 * i, 0.01 * (1 + i));
    const auto v = linear_run(T, prof, 11 + 2 * i, 0.01);
    const auto r = nonlinear_term_estimate_check(T, u, &v, prof, GammaConstant{1.0}, kCubic, 2.0, 4.0 / 3);
    lo = std::min(lo, r.ratio);
    hi = std::max(hi, r.ratio);
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LE(hi, 1.0);
}

TEST(SolutionOperator, ZeroForcing) {
  TorusGrid g{3, 8, 2 * M_PI};
  const CurvedMassProfile prof{kDeSitter, 3, 2.0};
  const auto z = solution_operator_G(
      g, prof, [&](double, double* out) { std::fill(out, out + g.total(), 0.0); }, 2.0);
  EXPECT_EQ(z.status, RunStatus::completed);
  for (const auto& s : z.states)
    for (double x : s.u) EXPECT_EQ(x, 0.0);
}

TEST(SolutionOperator, Superposition) {
  TorusGrid g{3, 8, 2 * M_PI};
  SpectralTorus T(g);
  const CurvedMassProfile prof{kDeSitter, 3, 2.0};
  const auto f1 = random_band_limited(T, 1, 2), f2 = random_band_limited(T, 2, 2);
  auto g1 = [&](double t, double* out) {
    for (std::size_t i = 0; i < f1.size(); ++i) out[i] = std::cos(2 * t) * f1[i];
  };
  auto g2 = [&](double t, double* out) {
    for (std::size_t i = 0; i < f2.size(); ++i) out[i] = t * f2[i];
  };
  auto g12 = [&](double t, double* out) {
    for (std::size_t i = 0; i < f2.size(); ++i) out[i] = std::cos(2 * t) * f1[i] + t * f2[i];
  };
  const auto a = solution_operator_G(g, prof, g1, 3.0);
  const auto b = solution_operator_G(g, prof, g2, 3.0);
  const auto c = solution_operator_G(g, prof, g12, 3.0);
  double scale = 0.0, dev = 0.0;
  for (std::size_t k = 0; k < c.states.size(); ++k)
    for (std::size_t i = 0; i < g.total(); ++i) {
      scale = std::max(scale, std::abs(c.states[k].u[i]));
      dev = std::max(dev, std::abs(c.states[k].u[i] - a.states[k].u[i] - b.states[k].u[i]));
    }
  EXPECT_LE(dev, 1e-10 * scale);
}

TEST(SolutionOperator, ConstantForcingDuhamel) {
  // M^2 = 7/4 constant: u = (1 - cos(M (t - t0))) / M^2 for g = 1
  TorusGrid g{3, 8, 2 * M_PI};
  const CurvedMassProfile prof{kDeSitter, 3, 2.0};
  SolverOptions o;
  o.dt_max = 0.01;
  o.record_dt = 0.5;
  const auto tr = solution_operator_G(
      g, prof, [&](double, double* out) { std::fill(out, out + g.total(), 1.0); }, 5.0, o);
  const double M = std::sqrt(1.75);
  for (const auto& s : tr.states) {
    const double ref = (1.0 - std::cos(M * (s.t - 1.0))) / 1.75;
    EXPECT_NEAR(s.u[17], ref, 1e-9);
  }
}

TEST(LatticeForcing, ExactOnCubics) {
  const std::vector<double> t{0.0, 0.3, 0.5, 1.0, 1.4, 2.0};
  auto p = [](double x) { return 2.0 - x + 0.5 * x * x - 0.25 * x * x * x; };
  std::vector<std::vector<double>> v;
  for (double x : t) v.push_back({p(x), 2 * p(x)});
  const LatticeForcing f(t, v);
  double out[2];
  for (double x : {0.0, 0.1, 0.45, 0.77, 1.2, 1.9, 2.0}) {
    f(x, out);
    EXPECT_NEAR(out[0], p(x), 1e-13);
    EXPECT_NEAR(out[1], 2 * p(x), 1e-13);
  }
}

namespace {

struct PicardCase {
  PicardRun run;
  double rel_to_direct;
};

PicardCase picard_case(double amplitude) {
  TorusGrid g{3, 16, 2 * M_PI};
  SpectralTorus T(g);
  const CurvedMassProfile prof{kDeSitter, 3, 2.0};
  const auto psi0 = gaussian_profile(g, amplitude, 0.6, {M_PI, M_PI, M_PI});
  const std::vector<double> z(g.total(), 0.0);
  const auto data = transform_data(psi0, z, kDeSitter, 3, 1.0);
  SolverOptions o;
  o.record_dt = 0.1;
  const auto phi0 = free_evolution(g, prof, data, 4.0, o);
  KGProblem pb{prof};
  pb.gamma = GammaConstant{1.0};
  pb.nonlinearity = kCubic;
  PicardOptions po;
  po.solver = o;
  auto run = picard_solve(g, pb, phi0.states, po);
  o.store_states = true;
  KGSimulator sim(g, pb, o);
  const auto direct = sim.simulate(data, 4.0);
  const double d = x_norm_states(T, run.limit, &direct.states, prof).total();
  const double x = x_norm_states(T, direct.states, nullptr, prof).total();
  return {std::move(run), d / x};
}

}  // namespace

TEST(Picard, ZeroDataConvergesImmediately) {
  TorusGrid g{3, 8, 2 * M_PI};
  const CurvedMassProfile prof{kDeSitter, 3, 2.0};
  std::vector<double> z(g.total(), 0.0);
  const auto phi0 = free_evolution(g, prof, FieldState{1.0, z, z}, 2.0).states;
  KGProblem pb{prof};
  pb.gamma = GammaConstant{1.0};
  pb.nonlinearity = kCubic;
  const auto run = picard_solve(g, pb, phi0);
  EXPECT_EQ(run.status, PicardStatus::converged);
  EXPECT_EQ(run.iterations, 1);
  EXPECT_EQ(run.x_limit, 0.0);
}

TEST(Picard, SmallDataMatchesDirectSolver) {
  const auto big = picard_case(1e-2);
  const auto small = picard_case(5e-3);
  for (const auto* c : {&big, &small}) {
    EXPECT_EQ(c->run.status, PicardStatus::converged);
    EXPECT_LE(c->run.iterations, 15);
    EXPECT_LT(c->rel_to_direct, 1e-6);
    EXPECT_TRUE(c->run.within_small_data_bound);
    EXPECT_LE(c->run.limit_residual, 10 * c->run.tol_abs);
    EXPECT_GT(c->run.contraction_estimate, 0.0);
    EXPECT_LT(c->run.contraction_estimate, 1.0);
  }
  EXPECT_NEAR(big.run.contraction_estimate / small.run.contraction_estimate, 4.0, 1.2);
}

TEST(CalibrateCE, StableAcrossForcingEnsemble) {
  TorusGrid g{3, 8, 2 * M_PI};
  const CurvedMassProfile prof{kDeSitter, 3, 2.0};
  SolverOptions o;
  o.record_dt = 0.1;
  const auto cal = calibrate_C_E(g, prof, 5.0, ForcingEnsembleSpec{}, o);
  ASSERT_EQ(cal.cases.size(), 10u);
  EXPECT_TRUE(cal.stable);
  for (const auto& c : cal.cases) {
    EXPECT_GT(c.rhs, 0.0);
    EXPECT_LE(c.lhs, cal.C_E * c.rhs * (1 + 1e-15));
  }
}
