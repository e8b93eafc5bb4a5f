#include <gtest/gtest.h>

#include <cmath>

#include "dkdv/potential_well.hpp"
#include "oracles.hpp"

using namespace dkdv;

namespace {

// Closed-form ratio of sech^2(x/s):
//   int u^3 = 16 s / 15, ||u||^2 = 4 s / 3, ||u_x||^2 = 16 / (15 s).
double family_ratio(double s) {
  return (16.0 * s / 45.0) / std::pow(4.0 * s / 3.0 + 16.0 / (15.0 * s), 1.5);
}

double family_scan_max() {
  double best = 0.0;
  for (int i = 1; i <= 200000; ++i) best = std::max(best, family_ratio(i * 1e-4));
  return best;
}

const PotentialWellConstants& consts512() {
  static const auto c = estimate_k0(make_grid(80, 512), 1);
  return c;
}

}  // namespace

TEST(Ratio, AmplitudeInvariant) {
  auto g = make_grid(80, 256);
  auto u = random_h1(g, 3, 1.0, 40);
  const double r = sobolev_ratio(u);
  for (double lam : {0.1, 3.0, 250.0}) EXPECT_NEAR(sobolev_ratio(lam * u), r, 1e-14);
  EXPECT_EQ(sobolev_ratio(Field(g)), 0.0);
}

TEST(Ratio, FamilyHasInteriorMaximum) {
  auto g = make_grid(80, 1024);
  std::vector<double> vals;
  for (double s : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double r = sech2_family_ratio(g, s);
    EXPECT_NEAR(r, family_ratio(s), 1e-8) << "s = " << s;
    vals.push_back(r);
  }
  const double interior = *std::max_element(vals.begin() + 1, vals.end() - 1);
  EXPECT_LT(vals.front(), interior);
  EXPECT_LT(vals.back(), interior);
}

TEST(EstimateK0, MatchesFamilyOracle) {
  const double oracle_k0 = family_scan_max();
  EXPECT_NEAR(oracle_k0, std::sqrt(5.0) / 18.0, 1e-9);
  const auto& c = consts512();
  EXPECT_NEAR(c.k0, 0.1242, 1e-4);
  EXPECT_GE(c.k0, oracle_k0 - 1e-9);
  EXPECT_GE(c.k0, c.family_k0);
  EXPECT_NEAR(c.family_width, 2.0, 1e-4);
  EXPECT_LT(c.edge_tail, 1e-10);
  EXPECT_FALSE(c.method_log.empty());
  EXPECT_NEAR(h1_norm(c.maximizer), 1.0, 1e-12);
  EXPECT_NEAR(sobolev_ratio(c.maximizer), c.k0, 1e-12);
}

TEST(EstimateK0, GridStableAndMonotoneInEffort) {
  const auto coarse = estimate_k0(make_grid(80, 512), 0);
  const auto fine = estimate_k0(make_grid(80, 1024), 0);
  EXPECT_LT(std::abs(coarse.k0 - fine.k0), 1e-4);
  const auto more = estimate_k0(make_grid(80, 512), 3);
  EXPECT_GE(more.k0, coarse.k0);
}

TEST(EstimateK0, RejectsCoarseGrid) {
  EXPECT_THROW(estimate_k0(make_grid(80, 128), 0), ConfigError);
  EXPECT_THROW(estimate_k0(make_grid(30, 512), 0), ConfigError);
}

TEST(WellFunction, Values) {
  for (double k0 : {0.05, 0.124226, 1.0}) {
    const auto c = constants_from_k0(k0);
    EXPECT_EQ(f_eval(0.0, k0), 0.0);
    EXPECT_NEAR(c.d, c.xi1 * c.xi1 / 6.0, 1e-15 * c.d);
    EXPECT_NEAR(f_eval(c.xi1, k0), c.d, 1e-12 * std::max(1.0, c.d));
    EXPECT_NEAR(f_eval(3 * c.xi1, k0), -4.5 * c.xi1 * c.xi1, 1e-12 * c.xi1 * c.xi1);
  }
  EXPECT_THROW(constants_from_k0(0.0), ConfigError);
}

TEST(SolveXi2, SpecialLevels) {
  const double k0 = std::sqrt(5.0) / 18.0;
  const auto c = constants_from_k0(k0);
  auto at_d = solve_xi2(c.d, k0);
  EXPECT_EQ(at_d.upper, c.xi1);
  EXPECT_NEAR(solve_xi2(0.0, k0).upper, 1.5 * c.xi1, 1e-10);
  EXPECT_THROW(solve_xi2(1.01 * c.d, k0), ConfigError);
  EXPECT_THROW(solve_xi2(-0.1, k0), ConfigError);
}

TEST(SolveXi2, RootsBracketXi1) {
  const double k0 = std::sqrt(5.0) / 18.0;
  const auto c = constants_from_k0(k0);
  for (double frac : {0.01, 0.25, 0.5, 0.9, 0.999}) {
    const double e = frac * c.d;
    auto r = solve_xi2(e, k0);
    EXPECT_LT(r.lower, c.xi1);
    EXPECT_GT(r.upper, c.xi1);
    EXPECT_NEAR(f_eval(r.upper, k0), e, 1e-10);
    EXPECT_NEAR(f_eval(r.lower, k0), e, 1e-10);
    if (frac == 0.5) {
      EXPECT_LT(r.upper, 1.5 * c.xi1);
      // sign change across the root
      EXPECT_GT(f_eval(r.upper * (1 - 1e-6), k0), e);
      EXPECT_LT(f_eval(r.upper * (1 + 1e-6), k0), e);
    }
  }
}

TEST(Supercritical, RayAnalysis) {
  const auto& c = consts512();
  Field unit = c.maximizer;
  const Norms nm = norms(unit);
  const double q = nm.int_u3 / 3.0;
  EXPECT_LE(q, c.k0 + 1e-12);
  EXPECT_NEAR(q, c.k0, 1e-10);
  // Dense scan of E(lambda) = lambda^2 - q lambda^3 past its peak.
  double first_below = 0.0;
  for (double lam = 2.0 / (3.0 * q); lam < 1.0 / q; lam += 1e-5)
    if (lam * lam - q * lam * lam * lam < c.d) {
      first_below = lam;
      break;
    }
  // With q = k0 and lambda = s xi1 the crossing solves s^3 - 3 s^2 + 1/2 = 0
  // on (2, 3).
  double lo = 2.0, hi = 3.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (mid * mid * mid - 3 * mid * mid + 0.5 > 0 ? hi : lo) = mid;
  }
  EXPECT_NEAR(first_below / c.xi1, lo, 1e-4);

  auto u0 = construct_supercritical(c, 0.0);
  const double lam = h1_norm(u0);
  EXPECT_NEAR(lam, first_below, 2e-5);
}

TEST(Supercritical, PreconditionsAndMarginMonotone) {
  const auto& c = consts512();
  double prev = 0.0;
  for (double margin : {0.0, 0.1, 0.5, 0.9}) {
    auto u0 = construct_supercritical(c, margin);
    const Norms nm = norms(u0);
    const double e = nm.h1_sq - nm.int_u3 / 3.0;
    EXPECT_GT(std::sqrt(nm.h1_sq), c.xi1);
    EXPECT_LT(e, c.d * (1 - margin));
    EXPECT_GT(std::sqrt(nm.h1_sq), prev);
    prev = std::sqrt(nm.h1_sq);
  }
  EXPECT_THROW(construct_supercritical(c, 1.0), ConfigError);
  EXPECT_THROW(construct_supercritical(constants_from_k0(0.1), 0.1), ConfigError);
}

TEST(Vitillaro, SmallDataIsNotApplicable) {
  const auto& c = consts512();
  SolverConfig cfg;
  cfg.t_end = 1.0;
  auto rep = vitillaro_experiment(gaussian(c.maximizer.grid, 0.01, 1, 0), 0.01, cfg, c);
  EXPECT_FALSE(rep.preconditions_met);
  EXPECT_FALSE(rep.h1_above_xi1);
  EXPECT_EQ(rep.verdict, Verdict::not_applicable);
  EXPECT_TRUE(rep.series.records.empty());
}

TEST(Vitillaro, SupercriticalRun) {
  const auto& c = consts512();
  auto u0 = construct_supercritical(c, 0.1);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 5.0;
  cfg.record_stride = 10;
  auto rep = vitillaro_experiment(u0, 0.01, cfg, c);
  ASSERT_TRUE(rep.preconditions_met);
  EXPECT_GT(rep.xi2, rep.xi1);
  EXPECT_NEAR(rep.l3_floor, std::cbrt(c.k0) * rep.xi2, 1e-14);
  EXPECT_GE(rep.min_h1_over_run, 0.98 * rep.xi2);
  EXPECT_GE(rep.min_l3_over_run, 0.98 * rep.l3_floor);
  // ||u||^2 > 6 d and E < d force K = 3E - ||u||^2 < 0 from the start.
  EXPECT_FALSE(rep.k_nonneg_throughout);
  EXPECT_EQ(rep.first_k_negative_time, 0.0);
  EXPECT_EQ(rep.verdict, Verdict::pass);
}

TEST(Vitillaro, UndampedEnergyConstant) {
  const auto& c = consts512();
  auto u0 = construct_supercritical(c, 0.1);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 2.0;
  cfg.record_stride = 50;
  auto rep = vitillaro_experiment(u0, 0.0, cfg, c);
  ASSERT_TRUE(rep.preconditions_met);
  for (const auto& r : rep.series.records)
    EXPECT_NEAR(r.e_sec3, rep.e_initial, 1e-8 * std::abs(rep.e_initial) + 1e-10);
}

TEST(Vitillaro, EnergyDecreasesWhileKNonnegative) {
  // dE/dt = -mu K for constant damping; small positive data keep K >= 0.
  auto g = make_grid(80, 512);
  auto a = make_damping(g, DampingKind::constant, 0.05);
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 3.0;
  cfg.record_stride = 10;
  auto s = simulate(gaussian(g, 0.5, 2.0, 0.0), a, cfg);
  for (std::size_t i = 1; i < s.records.size(); ++i) {
    ASSERT_GE(s.records[i - 1].k_sec3, 0.0);
    EXPECT_LE(s.records[i].e_sec3, s.records[i - 1].e_sec3 + 1e-8);
  }
}
