#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dkdv/airy.hpp"
#include "dkdv/integrator.hpp"
#include "dkdv/mild.hpp"
#include "oracles.hpp"

using namespace dkdv;

namespace {

Trajectory from_fn(GridPtr g, double T, std::size_t n_t, auto&& slice_at) {
  Trajectory tr;
  tr.grid = g;
  for (std::size_t i = 0; i < n_t; ++i) {
    const double t = T * double(i) / double(n_t - 1);
    tr.times.push_back(t);
    Field f = slice_at(t);
    f.time_tag = t;
    tr.slices.push_back(std::move(f));
  }
  return tr;
}

double sup_abs(const Trajectory& tr) {
  double m = 0.0;
  for (const auto& f : tr.slices)
    for (double v : f.samples) m = std::max(m, std::abs(v));
  return m;
}

Field integrator_at(const Field& u0, const DampingProfile& a, double T) {
  SolverConfig cfg;
  cfg.dt = 1e-4;
  cfg.t_end = T;
  cfg.record_stride = 1000000;
  cfg.snapshot_times = {T};
  return simulate(u0, a, cfg).snapshots.back();
}

}  // namespace

TEST(KpvNorms, ZeroTrajectory) {
  auto g = make_grid(80, 128);
  auto k = kpv_norms(Trajectory::constant(Field(g), 1.0, 8));
  EXPECT_EQ(k.gamma1, 0.0);
  EXPECT_EQ(k.gamma2, 0.0);
  EXPECT_EQ(k.gamma3, 0.0);
  EXPECT_EQ(k.gamma4, 0.0);
  EXPECT_EQ(k.big_gamma, 0.0);
  EXPECT_THROW(kpv_norms(Trajectory{}), PreconditionError);
}

TEST(KpvNorms, TravelingSoliton) {
  auto g = make_grid(80, 512);
  auto tr = from_fn(g, 2.0, 33, [&](double t) { return soliton(g, 1.0, t); });
  auto k = kpv_norms(tr);
  EXPECT_NEAR(k.gamma1, std::sqrt(28.8), 1e-8);
  EXPECT_EQ(k.big_gamma, std::max({k.gamma1, k.gamma2, k.gamma3, k.gamma4}));
  // u = 3 sech^2(y), y = (x - t)/2: u_x = -3 sech^2 tanh, largest 2/sqrt(3)
  // at tanh^2 = 1/3; u_xx = (3/2) sech^2 (3 tanh^2 - 1), largest 1.5 at the
  // crest. The sup is taken over nodes, so the oracle samples the same nodes.
  double int2 = 0.0, int6 = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const double t = tr.times[i];
    double d1 = 0.0, d2 = 0.0;
    for (std::size_t j = 0; j < g->n(); ++j) {
      const double y = 0.5 * (g->x(j) - t);
      const double s2 = std::pow(oracle::sech(y), 2), th = std::tanh(y);
      d1 = std::max(d1, std::abs(3 * s2 * th));
      d2 = std::max(d2, std::abs(1.5 * s2 * (3 * th * th - 1)));
    }
    const double w = (i == 0 || i + 1 == tr.size() ? 0.5 : 1.0) * 2.0 / 32.0;
    int2 += w * d2 * d2;
    int6 += w * std::pow(d1, 6);
  }
  EXPECT_NEAR(k.gamma3, std::pow(int6, 1.0 / 6.0), 1e-10);
  EXPECT_NEAR(k.gamma2, std::sqrt(int2), 1e-10);
  EXPECT_NEAR(k.gamma3, std::pow(2.0, 1.0 / 6.0) * 2.0 / std::sqrt(3.0), 1e-3);
  EXPECT_NEAR(k.gamma2, std::sqrt(2.0) * 1.5, 1e-2);
}

TEST(KpvNorms, OneHomogeneous) {
  auto g = make_grid(80, 256);
  auto tr = from_fn(g, 1.0, 17, [&](double t) { return airy_propagate(random_h1(g, 3, 1.5, 40), t); });
  auto base = kpv_norms(tr);
  for (double lam : {2.5, -1.5, 1e-3}) {
    Trajectory s = tr;
    s *= lam;
    auto k = kpv_norms(s);
    const double l = std::abs(lam);
    EXPECT_NEAR(k.gamma1, l * base.gamma1, 1e-12 * l * base.gamma1);
    EXPECT_NEAR(k.gamma2, l * base.gamma2, 1e-12 * l * base.gamma2);
    EXPECT_NEAR(k.gamma3, l * base.gamma3, 1e-12 * l * base.gamma3);
    EXPECT_NEAR(k.gamma4, l * base.gamma4, 1e-12 * l * base.gamma4);
  }
}

TEST(Duhamel, ZeroForcing) {
  auto g = make_grid(80, 128);
  EXPECT_EQ(sup_abs(duhamel(Trajectory::constant(Field(g), 0.5, 9))), 0.0);
}

TEST(Duhamel, FreeWaveForcing) {
  auto g = make_grid(80, 256);
  auto v0 = random_h1(g, 4, 1.0, 40);
  auto forcing = from_fn(g, 0.7, 15, [&](double t) { return airy_propagate(v0, t); });
  auto phi = duhamel(forcing);
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double t = phi.times[i];
    auto expected = t * airy_propagate(v0, t);
    EXPECT_LT(oracle::max_abs_diff(phi.slices[i].samples, expected.samples), 1e-12);
  }
}

TEST(Duhamel, MatchesDirectTrapezoid) {
  auto g = make_grid(40, 128);
  auto forcing = from_fn(g, 0.4, 9, [&](double t) {
    return gaussian(g, 1.0 + t, 1.0, 3.0 * t) + std::sin(5 * t) * soliton(g, 1.0);
  });
  auto phi = duhamel(forcing);
  const double h = forcing.times[1];
  for (std::size_t i = 0; i < phi.size(); ++i) {
    Field ref(g);
    for (std::size_t j = 0; j <= i; ++j) {
      const double w = (j == 0 || j == i) ? 0.5 * h : h;
      if (i == 0) break;
      ref += w * airy_propagate(forcing.slices[j], forcing.times[i] - forcing.times[j]);
    }
    EXPECT_LT(oracle::max_abs_diff(phi.slices[i].samples, ref.samples), 1e-12);
  }
}

TEST(Duhamel, Linear) {
  auto g = make_grid(80, 128);
  auto a = from_fn(g, 0.5, 9, [&](double t) { return gaussian(g, 1, 1 + t, 0); });
  auto b = from_fn(g, 0.5, 9, [&](double t) { return soliton(g, 1, t); });
  auto lhs = duhamel(a + b);
  auto rhs = duhamel(a) + duhamel(b);
  EXPECT_LT(sup_abs(lhs - rhs), 1e-12);
}

TEST(Duhamel, BoundedByTimeIntegralOfForcing) {
  auto g = make_grid(80, 256);
  const double T = 0.5;
  auto forcing = from_fn(g, T, 33, [&](double t) { return random_h1(g, 11, 1.0 + t, 40); });
  std::vector<Field> battery{forcing.slices.front(), forcing.slices.back()};
  const double c1 = verify_linear_estimates(battery, T, 64).c1_empirical;
  const auto w = detail::trapezoid_weights(0.0, T, forcing.size());
  double l1 = 0.0;
  for (std::size_t i = 0; i < forcing.size(); ++i) l1 += w[i] * h1_norm(forcing.slices[i]);
  const double bound = std::max(1.0, c1) * l1 * (1 + 1e-9);
  EXPECT_LE(kpv_norms(duhamel(forcing)).gamma1, bound);
}

TEST(PicardMap, ZeroIsFixedPoint) {
  auto g = make_grid(80, 128);
  auto z = Trajectory::constant(Field(g), 0.05, 8);
  EXPECT_EQ(sup_abs(picard_map(z, Field(g), make_damping(g, DampingKind::constant, 1.0))), 0.0);
}

TEST(PicardMap, LinearLimit) {
  auto g = make_grid(80, 256);
  auto u0 = 1e-6 * soliton(g, 1.0);
  auto guess = Trajectory::constant(1e-6 * gaussian(g, 1, 1, 0), 0.05, 16);
  auto out = picard_map(guess, u0, zero_damping(g));
  for (std::size_t i = 0; i < out.size(); ++i)
    EXPECT_LT(oracle::max_abs_diff(out.slices[i].samples,
                                   airy_propagate(u0, out.times[i]).samples),
              1e-12);
}

TEST(PicardMap, MismatchedGrid) {
  auto g1 = make_grid(80, 128), g2 = make_grid(80, 256);
  auto z = Trajectory::constant(Field(g1), 0.05, 8);
  EXPECT_THROW(picard_map(z, Field(g2), zero_damping(g1)), GridMismatch);
  EXPECT_THROW(picard_map(z, Field(g1), zero_damping(g2)), GridMismatch);
}

TEST(PicardSolve, IteratesContract) {
  auto g = make_grid(80, 512);
  auto a = make_damping(g, DampingKind::right_step, 1.0, 10, 4);
  auto sol = picard_solve(soliton(g, 1.0), a, 0.05, 1e-10, 50, 64);
  const auto& d = sol.distances;
  ASSERT_GE(d.size(), 4u);
  for (std::size_t k = 1; k < d.size(); ++k) EXPECT_LT(d[k], 0.5 * d[k - 1]) << "k " << k;
}

TEST(PicardSolve, ZeroDataConvergesAtOnce) {
  auto g = make_grid(80, 128);
  auto sol = picard_solve(Field(g), zero_damping(g), 0.05, 1e-8, 10);
  EXPECT_EQ(sol.iterations, 1u);
  EXPECT_EQ(sup_abs(sol.solution), 0.0);
}

TEST(PicardSolve, AgreesWithIntegrator) {
  auto g = make_grid(80, 512);
  auto u0 = soliton(g, 1.0);
  auto z = zero_damping(g);
  auto ref = integrator_at(u0, z, 0.05);
  auto sol = picard_solve(u0, z, 0.05, 1e-8, 100, 64);
  EXPECT_LT(h1_distance(sol.solution.slices.back(), ref), 1e-5);
}

TEST(PicardSolve, TrapezoidOrderInTimeSamples) {
  auto g = make_grid(80, 512);
  auto u0 = soliton(g, 1.0);
  auto a = make_damping(g, DampingKind::right_step, 1.0, 10, 4);
  auto ref = integrator_at(u0, a, 0.05);
  std::vector<double> err;
  for (std::size_t nt : {32u, 64u, 128u}) {
    auto sol = picard_solve(u0, a, 0.05, 1e-11, 100, nt);
    err.push_back(h1_distance(sol.solution.slices.back(), ref));
  }
  for (std::size_t i = 1; i < err.size(); ++i) {
    EXPECT_GT(err[i - 1] / err[i], 3.5);
    EXPECT_LT(err[i - 1] / err[i], 4.5);
  }
}

TEST(PicardSolve, FixedPointResidual) {
  auto g = make_grid(80, 256);
  auto u0 = gaussian(g, 2.0, 1.0, 0.0);
  auto a = make_damping(g, DampingKind::sponge, 1.0, 30, 8);
  const double tol = 1e-9;
  auto sol = picard_solve(u0, a, 0.05, tol, 100, 32);
  auto again = picard_map(sol.solution, u0, a);
  EXPECT_LT(sup_h1_distance(again, sol.solution), 2 * tol);
}

TEST(PicardSolve, NonConvergenceCarriesLog) {
  auto g = make_grid(80, 256);
  try {
    picard_solve(soliton(g, 1.0), zero_damping(g), 0.05, 1e-14, 2);
    FAIL() << "expected non-convergence";
  } catch (const PicardNonConvergence& e) {
    EXPECT_EQ(e.log().size(), 2u);
  }
}

TEST(PicardSolve, NormsWithinContractionBall) {
  // Measured linear constant in place of c1 over the admissible window.
  auto g = make_grid(80, 512);
  auto u0 = gaussian(g, 0.5, 2.0, 0.0);
  auto a = make_damping(g, DampingKind::sponge, 0.2, 30, 10);
  const double h1 = h1_norm(u0);
  std::vector<Field> battery{u0};
  const double c1_probe = verify_linear_estimates(battery, 0.01, 64).c1_empirical;
  const double c1 = std::max(c1_probe, 1.0 + 1e-9);
  auto rep = t_kappa(h1, a.w2inf_norm, c1);
  auto sol = picard_solve(u0, a, rep.t_kappa, 1e-10, 100, 16);
  EXPECT_LE(kpv_norms(sol.solution).big_gamma, 1.05 * rep.kappa);
}

TEST(TKappa, DegenerateCase) {
  auto rep = t_kappa(0.0, 1.0, 2.0);
  EXPECT_NEAR(rep.t_kappa, 1.0 / (8.0 * std::numbers::sqrt2), 1e-6);
  EXPECT_GE(rep.lhs_at_t, 1.0 - 1e-5);
  EXPECT_LT(rep.lhs_at_t, 1.0);
  EXPECT_EQ(rep.kappa, 0.0);
  EXPECT_DOUBLE_EQ(rep.c2, 8.0 * (1.0 + std::numbers::sqrt2));
}

TEST(TKappa, UnitNormsAgainstBisection) {
  auto lhs = [](double T) {
    const double c1 = 2.0, c2 = 4.0 * (1.0 + std::sqrt(2.0)) * c1;
    return 4.0 * std::sqrt(2.0) * c1 * T + 2.0 * c1 * c2 * std::sqrt(T) * (1.0 + T);
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (lhs(mid) < 1.0 ? lo : hi) = mid;
  }
  auto rep = t_kappa(1.0, 1.0, 2.0);
  EXPECT_NEAR(rep.t_kappa, lo, 1e-6 * lo * 10);
  EXPECT_NEAR(rep.t_kappa, 1.67e-4, 0.01e-4);
  EXPECT_LT(rep.lhs_at_t, 1.0);
  EXPECT_DOUBLE_EQ(rep.kappa, 4.0);
}

TEST(TKappa, MonotoneAndEdgeCases) {
  double prev = 1.0;
  for (double h1 : {0.0, 0.1, 1.0, 10.0}) {
    auto rep = t_kappa(h1, 0.5, 2.0);
    EXPECT_LT(rep.t_kappa, prev);
    EXPECT_GT(rep.t_kappa, 0.0);
    prev = rep.t_kappa;
  }
  EXPECT_EQ(t_kappa(0.0, 0.0).t_kappa, std::nextafter(1.0, 0.0));
  EXPECT_THROW(t_kappa(1.0, 1.0, 1.0), ConfigError);
  EXPECT_THROW(t_kappa(-1.0, 1.0), ConfigError);
}
