#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "gfront/stats.hpp"

using namespace gfront;

TEST_CASE("linear fit recovers exact lines") {
  std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  std::vector<double> y{1.0, 3.0, 5.0, 7.0};
  LinFit f = fit_linear(x, y);
  CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.slope_se == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(f.n == 4);
}

TEST_CASE("linear fit against hand-computed values") {
  // x = {1,2,3,4}, y = {2, 3, 5, 4}: mx=2.5, my=3.5, sxx=5, sxy=4
  std::vector<double> x{1.0, 2.0, 3.0, 4.0};
  std::vector<double> y{2.0, 3.0, 5.0, 4.0};
  LinFit f = fit_linear(x, y);
  CHECK(f.slope == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(f.intercept == doctest::Approx(1.5).epsilon(1e-14));
  // residuals: y_hat = {2.3, 3.1, 3.9, 4.7} -> r = {-.3, -.1, 1.1, -.7}
  // ssr = 0.09+0.01+1.21+0.49 = 1.8, syy = 5.0, r2 = 1 - 1.8/5
  CHECK(f.r2 == doctest::Approx(1.0 - 1.8 / 5.0).epsilon(1e-13));
  // s2 = 1.8/2 = 0.9; se_slope = sqrt(0.9/5)
  CHECK(f.slope_se == doctest::Approx(std::sqrt(0.18)).epsilon(1e-13));
  CHECK(f.intercept_se ==
        doctest::Approx(std::sqrt(0.9 * (0.25 + 6.25 / 5.0))).epsilon(1e-13));

  CHECK_THROWS_AS(fit_linear(std::vector<double>{1.0},
                             std::vector<double>{2.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(fit_linear(std::vector<double>{1.0, 1.0},
                             std::vector<double>{2.0, 3.0}),
                  std::invalid_argument);
}

TEST_CASE("noisy fit stays within standard errors") {
  Rng rng(2024);
  std::vector<double> x, y;
  for (int i = 0; i < 400; ++i) {
    double xi = i / 40.0;
    x.push_back(xi);
    // symmetric noise of width 0.2
    y.push_back(3.0 * xi - 1.0 + 0.2 * rng.symmetric());
  }
  LinFit f = fit_linear(x, y);
  CHECK(std::abs(f.slope - 3.0) < 4.0 * f.slope_se);
  CHECK(std::abs(f.intercept + 1.0) < 4.0 * f.intercept_se);
  CHECK(f.r2 > 0.99);
}

TEST_CASE("survival curve from samples") {
  SurvivalCurve s = survival_curve({2.0, 1.0, 2.0, 3.0});
  REQUIRE(s.level.size() == 3);
  CHECK(s.level[0] == 1.0);
  CHECK(s.prob[0] == doctest::Approx(1.0));
  CHECK(s.level[1] == 2.0);
  CHECK(s.prob[1] == doctest::Approx(0.75));
  CHECK(s.level[2] == 3.0);
  CHECK(s.prob[2] == doctest::Approx(0.25));
  CHECK_THROWS_AS(survival_curve({}), std::invalid_argument);
}

TEST_CASE("quantiles interpolate") {
  std::vector<double> s{1.0, 2.0, 3.0, 4.0, 5.0};
  CHECK(quantile(s, 0.0) == 1.0);
  CHECK(quantile(s, 1.0) == 5.0);
  CHECK(quantile(s, 0.5) == doctest::Approx(3.0));
  CHECK(quantile(s, 0.25) == doctest::Approx(2.0));
  CHECK(quantile(s, 0.1) == doctest::Approx(1.4));
}

TEST_CASE("concavity detector") {
  std::vector<double> x{0.0, 1.0, 2.0, 3.0};
  std::vector<double> ycave{0.0, 1.0, 1.5, 1.75};
  std::vector<double> yvex{0.0, 1.0, 3.0, 6.0};
  CHECK(concave(x, ycave, 1e-12));
  CHECK(!concave(x, yvex, 1e-12));
  CHECK(concave(x, yvex, 10.0));  // slack swallows the convexity
  std::vector<double> yline{0.0, 1.0, 2.0, 3.0};
  CHECK(concave(x, yline, 1e-12));
}

TEST_CASE("stretched exponential tail fit") {
  // exact curve: S(l) = exp(-2 l^0.5)
  SurvivalCurve s;
  for (int i = 1; i <= 60; ++i) {
    double l = 0.05 * i;
    s.level.push_back(l);
    s.prob.push_back(std::exp(-2.0 * std::sqrt(l)));
  }
  TailFit t = fit_exp_power_tail(s, 0.001, 0.999);
  CHECK(t.b == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(t.a == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(t.r2 == doctest::Approx(1.0).epsilon(1e-12));

  // sampled variant: inverse-CDF draws of the same law
  Rng rng(7);
  std::vector<double> draws;
  for (int i = 0; i < 20000; ++i) {
    double u = rng.uniform();
    if (u <= 0.0) continue;
    draws.push_back(std::pow(-std::log(1.0 - u) / 2.0, 2.0));
  }
  TailFit ts = fit_exp_power_tail(survival_curve(std::move(draws)), 0.01, 0.7);
  CHECK(ts.points > 100);
  CHECK(ts.b == doctest::Approx(0.5).epsilon(0.08));

  // degenerate curve: too few usable points reports zero fit
  SurvivalCurve tiny;
  tiny.level = {1.0};
  tiny.prob = {1.0};
  TailFit td = fit_exp_power_tail(tiny, 0.01, 0.7);
  CHECK(td.points == 0);
  CHECK(td.b == 0.0);
}

TEST_CASE("bootstrap resampling is deterministic in the rng") {
  Rng a(5), b(5);
  auto ia = resample_indices(a, 100);
  auto ib = resample_indices(b, 100);
  CHECK(ia == ib);
  for (size_t i : ia) CHECK(i < 100);
}
