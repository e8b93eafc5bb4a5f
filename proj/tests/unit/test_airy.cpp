#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dkdv/airy.hpp"
#include "oracles.hpp"

using namespace dkdv;
using std::numbers::pi;

TEST(Airy, ZeroTimeIsIdentity) {
  auto g = make_grid(80, 256);
  auto f = oracle::random_band_field(g, 4, 50);
  EXPECT_LT(oracle::max_abs_diff(airy_propagate(f, 0.0).samples, f.samples), 1e-14);
}

TEST(Airy, SingleModeSolution) {
  auto g = make_grid(2 * pi, 64);
  const double t = 0.37;
  for (int k = 1; k <= 10; ++k) {
    auto v0 = sample(g, [k](double x) { return std::cos(k * x); });
    auto v = airy_propagate(v0, t);
    for (std::size_t j = 0; j < g->n(); ++j)
      ASSERT_NEAR(v[j], std::cos(k * g->x(j) + k * k * k * t), 1e-12) << "k = " << k;
  }
}

TEST(Airy, SolvesLinearEquationPointwise) {
  // d/dt S(t)v = -d_xxx S(t)v, checked by a centered time difference.
  auto g = make_grid(40, 128);
  auto v0 = oracle::random_band_field(g, 8, 12);
  const double t = 0.3, h = 1e-4;
  auto dv = airy_propagate(v0, t + h) - airy_propagate(v0, t - h);
  dv *= 1.0 / (2 * h);
  auto d3 = spectral_derivative(airy_propagate(v0, t), 3);
  EXPECT_LT(oracle::max_abs_diff(dv.samples, (-1.0 * d3).samples), 1e-6);
}

TEST(Airy, UnitaryInL2AndH1) {
  auto g = make_grid(80, 512);
  std::mt19937 rng(12);
  std::normal_distribution<double> nd;
  Field v0(g);
  for (auto& x : v0.samples) x = nd(rng);
  auto v = airy_propagate(v0, 3.7);
  auto n0 = norms(v0), n1 = norms(v);
  EXPECT_LT(std::abs(n1.l2_sq - n0.l2_sq) / n0.l2_sq, 1e-12);
  EXPECT_LT(std::abs(n1.h1_sq - n0.h1_sq) / n0.h1_sq, 1e-12);
}

TEST(Airy, GroupLaw) {
  auto g = make_grid(80, 256);
  auto f = oracle::random_band_field(g, 6, 60);
  for (auto [s, t] : {std::pair{1.5, -3.0}, {10.0, -10.0}, {-7.25, 4.5}, {9.9, 9.9}}) {
    auto lhs = airy_propagate(airy_propagate(f, s), t);
    auto rhs = airy_propagate(f, s + t);
    EXPECT_LT(oracle::max_abs_diff(lhs.samples, rhs.samples), 1e-12) << s << " " << t;
  }
}

TEST(Airy, CommutesWithDerivative) {
  auto g = make_grid(80, 256);
  auto f = oracle::random_band_field(g, 7, 60);
  for (int order : {1, 2, 3}) {
    auto a = airy_propagate(spectral_derivative(f, order), 2.3);
    auto b = spectral_derivative(airy_propagate(f, 2.3), order);
    double scale = 0.0;
    for (double v : a.samples) scale = std::max(scale, std::abs(v));
    EXPECT_LT(oracle::max_abs_diff(a.samples, b.samples) / scale, 1e-12);
  }
}

TEST(LinearEstimates, RejectsDegenerateInput) {
  auto g = make_grid(80, 128);
  std::vector<Field> zero{Field(g)};
  EXPECT_THROW(verify_linear_estimates(zero, 1.0, 64), ConfigError);
  std::vector<Field> none;
  EXPECT_THROW(verify_linear_estimates(none, 1.0, 64), ConfigError);
  std::vector<Field> one{gaussian(g, 1, 1, 0)};
  EXPECT_THROW(verify_linear_estimates(one, 1.0, 63), ConfigError);
}

TEST(LinearEstimates, SingleModeSmoothingClosedForm) {
  auto g = make_grid(2 * pi, 64);
  std::vector<Field> b{sample(g, [](double x) { return std::cos(x); })};
  auto rep = verify_linear_estimates(b, 1.0, 1025);
  // |d_x S(t) cos x| = |sin(x + t)|, so int_{-1}^{1} sin^2(x+t) dt
  // = 1 - cos(2x) sin(2) / 2, largest at x = pi/2.
  const double expected = std::sqrt(1.0 + std::sin(2.0) / 2.0) / std::sqrt(pi);
  EXPECT_NEAR(rep.smoothing_ratio, expected, 1e-5);
  // sup over |t| <= 1 of cos^2(x+t): 1 when [x-1, x+1] contains a multiple
  // of pi, otherwise the larger endpoint value.
  const double sup_int = oracle::integrate(
      [](double x) {
        if (std::floor((x + 1) / pi) > std::floor((x - 1) / pi) || std::abs(x) <= 1) return 1.0;
        return std::max(std::pow(std::cos(x - 1), 2), std::pow(std::cos(x + 1), 2));
      },
      -pi, pi);
  EXPECT_NEAR(rep.maximal_ratio, std::sqrt(sup_int) / 2.0 / std::sqrt(2 * pi), 2e-2);
  // ||S(t) cos||_inf = 1 at every t.
  EXPECT_NEAR(rep.strichartz_ratio, std::pow(2.0, 1.0 / 6.0) / std::sqrt(pi), 1e-3);
  EXPECT_TRUE(std::isfinite(rep.c1_empirical));
  EXPECT_DOUBLE_EQ(rep.c1_empirical,
                   std::max({rep.strichartz_ratio, rep.maximal_ratio, rep.smoothing_ratio}));
}

TEST(LinearEstimates, ConstantGrowsWithBattery) {
  auto g = make_grid(80, 256);
  std::vector<InitialDataSpec> specs;
  double prev = 0.0;
  for (int i = 0; i < 4; ++i) {
    InitialDataSpec s;
    s.kind = i % 2 ? InitialKind::random_h1 : InitialKind::gaussian;
    s.seed = 10 + i;
    s.sigma = 0.5 + i;
    s.band = 30;
    specs.push_back(s);
    auto rep = verify_linear_estimates(g, 0.5, specs, 64);
    EXPECT_EQ(rep.battery_size, specs.size());
    EXPECT_GT(rep.strichartz_ratio, 0.0);
    EXPECT_GT(rep.maximal_ratio, 0.0);
    EXPECT_GT(rep.smoothing_ratio, 0.0);
    EXPECT_GE(rep.c1_empirical, prev);
    prev = rep.c1_empirical;
  }
}
