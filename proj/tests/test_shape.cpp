#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gfront/environment.hpp"
#include "gfront/front.hpp"
#include "gfront/rng.hpp"
#include "gfront/shape.hpp"

using namespace gfront;

namespace {

EnvFactory constant_family(int dim, const Vec& v) {
  return [dim, v](uint64_t) { return std::make_unique<ConstantField>(dim, v); };
}

/// Exact passage time for constant drift c with |c| < 1: the reachable set at
/// time t is the ball of radius t around t*c, so theta solves |y - t c| = t.
double drift_passage(const Vec& y, const Vec& c) {
  const double yc = dot(y, c);
  const double c2 = norm2(c);
  return (std::sqrt(yc * yc + (1.0 - c2) * norm2(y)) - yc) / (1.0 - c2);
}

/// Test-local piecewise-linear interpolation, written independently of the
/// library's sampler so partition checks do not reuse the code under test.
Vec lerp_path(const std::vector<Vec>& gamma, double t) {
  t = std::min(std::max(t, 0.0), 1.0);
  const double s = t * double(gamma.size() - 1);
  size_t i = size_t(s);
  if (i >= gamma.size() - 1) i = gamma.size() - 2;
  const double w = s - double(i);
  return (1.0 - w) * gamma[i] + w * gamma[i + 1];
}

/// Recompute the signed alternating sum from a returned partition.
Vec partition_sum(const std::vector<Vec>& gamma, const SignedPartition& p) {
  Vec f{};
  for (size_t k = 0; k + 1 < p.t.size(); ++k) {
    const Vec a = lerp_path(gamma, p.t[k]);
    const Vec b = lerp_path(gamma, p.t[k + 1]);
    f = f + double(p.sign[k]) * (b - a);
  }
  return f;
}

}  // namespace

TEST_CASE("passage matrix against exact drift-free times") {
  EnvParams ep;
  ep.amplitude = 0.0;
  std::vector<uint64_t> seeds{1, 2};
  std::vector<Vec> dirs{Vec{1.0, 0.0}, Vec{0.6, 0.8}};
  std::vector<double> radii{6.0, 12.0};
  ThetaOptions opts;
  ThetaMatrix m = measure_theta(ep, seeds, dirs, radii, opts);

  REQUIRE(m.theta.size() == 8);
  // targets snap to cell centers, so allow a couple of cells of slack
  for (size_t s = 0; s < 2; ++s)
    for (size_t d = 0; d < 2; ++d)
      for (size_t r = 0; r < 2; ++r)
        CHECK(std::abs(m.at(s, d, r) - radii[r]) < 2.0 * opts.grid_h + 1e-6);
}

TEST_CASE("passage matrix against exact constant-drift times") {
  const Vec c{0.3, 0.1};
  std::vector<uint64_t> seeds{1};
  std::vector<Vec> dirs{Vec{1.0, 0.0}, Vec{0.6, 0.8}, Vec{-1.0, 0.0}};
  std::vector<double> radii{5.0, 10.0};
  ThetaOptions opts;
  ThetaMatrix m = measure_theta(constant_family(2, c), seeds, dirs, radii,
                                opts);
  for (size_t d = 0; d < dirs.size(); ++d)
    for (size_t r = 0; r < radii.size(); ++r) {
      const double exact = drift_passage(radii[r] * dirs[d], c);
      // straight lattice paths exist along these directions, so the only
      // error sources are cell snapping and single-precision arrival storage
      CHECK(std::abs(m.at(0, d, r) - exact) < 0.35);
      CHECK(m.at(0, d, r) > exact - 2e-4 * exact);
    }
}

TEST_CASE("drift-free rate estimate extrapolates to one") {
  EnvParams ep;
  ep.amplitude = 0.0;
  std::vector<uint64_t> seeds{1, 2, 3};
  std::vector<double> radii{5.0, 10.0, 20.0};
  ThetaEstimate est = estimate_theta_bar(
      lattice_family(ep), seeds, Vec{1.0, 0.0}, radii, ThetaOptions{});
  CHECK(est.theta_bar == doctest::Approx(1.0).epsilon(0.02));
  CHECK(est.radii == radii);
  CHECK(est.means.size() == 3);
}

TEST_CASE("constant-drift rate estimate matches the closed form") {
  const Vec c{0.25, 0.0};
  std::vector<uint64_t> seeds{1, 2};
  std::vector<double> radii{5.0, 10.0, 20.0};
  for (const Vec& e : {Vec{1.0, 0.0}, Vec{0.0, 1.0}}) {
    ThetaEstimate est = estimate_theta_bar(constant_family(2, c), seeds, e,
                                           radii, ThetaOptions{});
    const double exact = drift_passage(e, c);  // 1-homogeneous in |y|
    CHECK(est.theta_bar == doctest::Approx(exact).epsilon(0.02));
  }
}

TEST_CASE("split-sample rate estimates agree within their uncertainty") {
  EnvParams ep;
  ep.amplitude = 0.5;
  std::vector<uint64_t> a{1, 2, 3, 4}, b{11, 12, 13, 14};
  std::vector<double> radii{5.0, 10.0, 20.0};
  const Vec e{1.0, 0.0};
  ThetaOptions opts;
  ThetaEstimate ea = estimate_theta_bar(lattice_family(ep), a, e, radii, opts);
  ThetaEstimate eb = estimate_theta_bar(lattice_family(ep), b, e, radii, opts);
  CHECK(ea.theta_bar > 0.0);
  CHECK(eb.theta_bar > 0.0);
  CHECK(std::abs(ea.theta_bar - eb.theta_bar) <
        3.0 * (ea.halfwidth + eb.halfwidth) + 0.05);
}

TEST_CASE("three-dimensional drift-free passage is near the axis distance") {
  EnvParams ep;
  ep.dim = 3;
  ep.amplitude = 0.0;
  std::vector<uint64_t> seeds{1};
  std::vector<Vec> dirs{Vec{0.0, 0.0, 1.0}};
  std::vector<double> radii{6.0};
  ThetaOptions opts;
  opts.grid_h = 0.25;
  ThetaMatrix m = measure_theta(ep, seeds, dirs, radii, opts);
  CHECK(std::abs(m.at(0, 0, 0) - 6.0) < 2.0 * opts.grid_h + 1e-6);
}

TEST_CASE("passage measurement input validation") {
  EnvParams ep;
  ep.amplitude = 0.0;
  std::vector<uint64_t> seeds{1};
  std::vector<Vec> dirs{Vec{1.0, 0.0}};
  std::vector<double> radii{4.0, 8.0};
  ThetaOptions opts;
  CHECK_THROWS_AS(measure_theta(ep, {}, dirs, radii, opts),
                  std::invalid_argument);
  CHECK_THROWS_AS(measure_theta(ep, seeds, {}, radii, opts),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      measure_theta(ep, seeds, dirs, std::vector<double>{8.0, 4.0}, opts),
      std::invalid_argument);
  CHECK_THROWS_AS(
      measure_theta(ep, seeds, dirs, std::vector<double>{-1.0, 4.0}, opts),
      std::invalid_argument);

  ThetaMatrix m = measure_theta(ep, seeds, dirs, radii, opts);
  CHECK_THROWS_AS(estimate_theta_bar(m, 0, opts), std::invalid_argument);
  std::vector<uint64_t> two{1, 2};
  ThetaMatrix m2 = measure_theta(ep, two, dirs, radii, opts);
  CHECK_THROWS_AS(estimate_theta_bar(m2, 5, opts), std::invalid_argument);
  ThetaMatrix m1 = measure_theta(ep, two, dirs, std::vector<double>{4.0}, opts);
  CHECK_THROWS_AS(estimate_theta_bar(m1, 0, opts), std::invalid_argument);
}

TEST_CASE("direction grids are unit length and well spread") {
  auto d2 = direction_grid(2, 8);
  REQUIRE(d2.size() == 8);
  CHECK(d2[0][0] == doctest::Approx(1.0));
  CHECK(d2[0][1] == doctest::Approx(0.0));
  for (const Vec& e : d2) {
    CHECK(norm(e) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(e[2] == 0.0);
  }
  CHECK(d2[2][1] == doctest::Approx(1.0));

  auto d3 = direction_grid(3, 100);
  REQUIRE(d3.size() == 100);
  double zmin = 1.0, zmax = -1.0;
  for (const Vec& e : d3) {
    CHECK(norm(e) == doctest::Approx(1.0).epsilon(1e-12));
    zmin = std::min(zmin, e[2]);
    zmax = std::max(zmax, e[2]);
  }
  CHECK(zmin < -0.9);
  CHECK(zmax > 0.9);

  CHECK_THROWS_AS(direction_grid(4, 8), std::invalid_argument);
  CHECK_THROWS_AS(direction_grid(2, 0), std::invalid_argument);
}

TEST_CASE("unit rates build the unit ball") {
  auto dirs = direction_grid(2, 32);
  std::vector<double> theta(32, 1.0);
  EffectiveShape s = build_shape(dirs, theta);
  CHECK(s.dim == 2);
  REQUIRE(s.hull_d2.size() == 32);
  // support values of the inscribed 32-gon sit within cos(pi/32) of the ball
  CHECK(effective_H(s, Vec{3.0, 4.0}) == doctest::Approx(5.0).epsilon(0.01));
  CHECK(effective_H(s, Vec{1.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(shape_contains(s, Vec{0.9, 0.0}));
  CHECK(shape_contains(s, Vec{0.0, 0.0}));
  CHECK(!shape_contains(s, Vec{1.1, 0.0}));
  CHECK(!shape_contains(s, Vec{0.8, 0.8}));

  // doubling every rate halves the set
  std::vector<double> twice(32, 2.0);
  EffectiveShape s2 = build_shape(dirs, twice);
  CHECK(effective_H(s2, Vec{3.0, 4.0}) ==
        doctest::Approx(0.5 * effective_H(s, Vec{3.0, 4.0})).epsilon(1e-12));
}

TEST_CASE("build_shape input validation") {
  auto dirs = direction_grid(2, 32);
  std::vector<double> theta(32, 1.0);
  CHECK_THROWS_AS(build_shape(direction_grid(2, 8), std::vector<double>(8, 1.0)),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_shape(dirs, std::vector<double>(31, 1.0)),
                  std::invalid_argument);
  std::vector<double> bad = theta;
  bad[7] = 0.0;
  CHECK_THROWS_AS(build_shape(dirs, bad), std::invalid_argument);
  CHECK_THROWS_AS(build_shape(dirs, theta, std::vector<double>(3, 0.1)),
                  std::invalid_argument);
}

TEST_CASE("support function is subadditive, homogeneous, and monotone") {
  Rng rng(99);
  for (int dim : {2, 3}) {
    auto dirs = direction_grid(dim, 64);
    std::vector<double> theta(64), bigger(64);
    for (size_t i = 0; i < 64; ++i) {
      theta[i] = 0.5 + 1.5 * rng.uniform();
      bigger[i] = theta[i] * 1.1;  // larger rate, smaller set
    }
    EffectiveShape s = build_shape(dirs, theta);
    EffectiveShape small = build_shape(dirs, bigger);
    CHECK(s.dim == dim);
    for (int it = 0; it < 5000; ++it) {
      Vec p = rng.direction(dim) * (0.1 + 5.0 * rng.uniform());
      Vec q = rng.direction(dim) * (0.1 + 5.0 * rng.uniform());
      CHECK(effective_H(s, p + q) <=
            effective_H(s, p) + effective_H(s, q) + 1e-9);
      CHECK(effective_H(s, 1.7 * p) ==
            doctest::Approx(1.7 * effective_H(s, p)).epsilon(1e-12));
      CHECK(effective_H(s, p) + effective_H(s, -p) >= -1e-12);
      CHECK(effective_H(small, p) <= effective_H(s, p) + 1e-12);
    }
    // every boundary point is contained; rates in [0.5, 2] keep the set in
    // the ball of radius 2, so 4.5x any boundary point must land outside
    for (const Vec& v : s.vertices) {
      CHECK(shape_contains(s, 0.95 * v));
      CHECK(!shape_contains(s, 4.5 * v));
    }
  }
}

TEST_CASE("passage defect is near zero for aligned drift-free splits") {
  EnvParams ep;
  ep.amplitude = 0.0;
  std::vector<uint64_t> seeds{1, 2};
  std::vector<std::pair<Vec, Vec>> pairs{
      {Vec{4.0, 0.0}, Vec{3.0, 0.0}},
      {Vec{0.0, 5.0}, Vec{0.0, 2.0}},
      {Vec{3.0, 0.0}, Vec{0.0, 4.0}},
  };
  DefectReport rep =
      subadditivity_defect(lattice_family(ep), seeds, pairs, ThetaOptions{});
  REQUIRE(rep.defect.size() == 3);
  // collinear splits of a straight line are tight
  CHECK(std::abs(rep.defect[0]) < 0.5);
  CHECK(std::abs(rep.defect[1]) < 0.5);
  // right-angle split: |(3,4)| - 3 - 4 = -2
  CHECK(rep.defect[2] == doctest::Approx(-2.0).epsilon(0.15));
  CHECK(rep.max_defect < 0.5);
  CHECK(rep.reversed[2] == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("passage defect stays bounded above in random media") {
  EnvParams ep;
  ep.amplitude = 0.5;
  std::vector<uint64_t> seeds{1, 2, 3, 4};
  std::vector<std::pair<Vec, Vec>> pairs{
      {Vec{5.0, 0.0}, Vec{5.0, 0.0}},
      {Vec{0.0, 4.0}, Vec{0.0, 4.0}},
  };
  DefectReport rep =
      subadditivity_defect(lattice_family(ep), seeds, pairs, ThetaOptions{});
  // mean passage is subadditive up to sampling noise and cell snapping
  CHECK(rep.max_defect < 1.0);
}

TEST_CASE("signed partition halves a straight path") {
  std::vector<Vec> gamma;
  const Vec y{3.0, 1.0};
  for (int i = 0; i <= 100; ++i) gamma.push_back((i / 100.0) * y);
  SignedPartition p = hobby_rice_partition(gamma, 2, 1e-8);
  REQUIRE(p.t.size() == 4);
  REQUIRE(p.sign.size() == 3);
  CHECK(p.t.front() == 0.0);
  CHECK(p.t.back() == 1.0);
  CHECK(std::is_sorted(p.t.begin(), p.t.end()));
  CHECK(p.residual <= 1e-8);

  // |x| = 1 and the increments are the squares of the sphere point
  double n2 = 0.0;
  for (double c : p.sphere) n2 += c * c;
  CHECK(n2 == doctest::Approx(1.0).epsilon(1e-12));
  for (size_t k = 0; k < 3; ++k)
    CHECK(p.t[k + 1] - p.t[k] ==
          doctest::Approx(p.sphere[k] * p.sphere[k]).epsilon(1e-9));

  // for a line the signed time increments cancel exactly
  double signed_len = 0.0;
  for (size_t k = 0; k < 3; ++k)
    signed_len += p.sign[k] * (p.t[k + 1] - p.t[k]);
  CHECK(std::abs(signed_len) < 1e-8);
  CHECK(norm(partition_sum(gamma, p)) < 1e-7);
}

TEST_CASE("signed partition zeroes random broken paths") {
  Rng rng(7);
  for (int rep = 0; rep < 4; ++rep) {
    // three random segments, densely resampled
    std::vector<Vec> knots{Vec{}};
    for (int s = 0; s < 3; ++s)
      knots.push_back(knots.back() + rng.direction(2) * (0.5 + rng.uniform()));
    std::vector<Vec> gamma;
    for (int i = 0; i <= 200; ++i) {
      const double t = i / 200.0 * 3.0;
      const int s = std::min(int(t), 2);
      const double w = t - s;
      gamma.push_back((1.0 - w) * knots[s] + w * knots[s + 1]);
    }

    SignedPartition p = hobby_rice_partition(gamma, 2, 1e-6);
    CHECK(p.residual <= 1e-6);
    CHECK(norm(partition_sum(gamma, p)) <= 2e-6);

    // brute-force certificate that a near-zero exists at all
    double best = 1e30;
    for (int mask = 0; mask < 8; ++mask)
      for (int i = 0; i <= 100; ++i)
        for (int j = i; j <= 100; ++j) {
          const double t1 = i / 100.0, t2 = j / 100.0;
          Vec f{};
          const double sg0 = (mask & 1) ? 1.0 : -1.0;
          const double sg1 = (mask & 2) ? 1.0 : -1.0;
          const double sg2 = (mask & 4) ? 1.0 : -1.0;
          f = f + sg0 * (lerp_path(gamma, t1) - gamma.front());
          f = f + sg1 * (lerp_path(gamma, t2) - lerp_path(gamma, t1));
          f = f + sg2 * (gamma.back() - lerp_path(gamma, t2));
          best = std::min(best, norm(f));
        }
    CHECK(best < 0.05);  // coarse grid, existence only
    CHECK(p.residual <= best + 1e-6);
  }
}

TEST_CASE("signed partition on a closed loop") {
  std::vector<Vec> knots{Vec{0.0, 0.0}, Vec{1.0, 0.0}, Vec{1.0, 1.0},
                         Vec{0.0, 1.0}, Vec{0.0, 0.0}};
  std::vector<Vec> gamma;
  for (int i = 0; i <= 200; ++i) {
    const double t = i / 200.0 * 4.0;
    const int s = std::min(int(t), 3);
    const double w = t - s;
    gamma.push_back((1.0 - w) * knots[s] + w * knots[s + 1]);
  }
  SignedPartition p = hobby_rice_partition(gamma, 2, 1e-7);
  CHECK(p.residual <= 1e-7);
  CHECK(norm(partition_sum(gamma, p)) <= 1e-6);
}

TEST_CASE("signed partition input validation") {
  std::vector<Vec> gamma{Vec{}, Vec{1.0, 0.0}};
  CHECK_THROWS_AS(hobby_rice_partition(gamma, 4, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(hobby_rice_partition(gamma, 2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(
      hobby_rice_partition(std::vector<Vec>{Vec{}}, 2, 1e-6),
      std::invalid_argument);
}

TEST_CASE("halving a drift-free geodesic splits time and displacement") {
  EnvParams ep;
  ep.amplitude = 0.0;
  LatticeEnvironment env(1, ep);
  const Vec y{6.0, 0.0};
  HalvingReport rep = halving_check(env, y, 1e-6, ThetaOptions{});
  CHECK(rep.theta == doctest::Approx(6.0).epsilon(0.05));
  CHECK(rep.residual <= 1e-6);
  CHECK(rep.segments <= 1);  // (d+1)/2 segments for d = 2
  CHECK(rep.sum_plus == doctest::Approx(3.0).epsilon(0.2));
  CHECK(rep.sum_minus == doctest::Approx(3.0).epsilon(0.2));
  // the plus intervals always carry half the endpoint displacement
  CHECK(norm(rep.half_displacement - 0.5 * y) < 0.2);
}

TEST_CASE("halving report in random media keeps the universal identities") {
  EnvParams ep;
  ep.amplitude = 0.6;
  LatticeEnvironment env(7, ep);
  const Vec y{5.0, 2.0};
  HalvingReport rep = halving_check(env, y, 1e-6, ThetaOptions{});
  CHECK(rep.residual <= 1e-6);
  CHECK(rep.segments <= 1);
  CHECK(rep.sum_plus > 0.0);
  CHECK(rep.sum_minus >= 0.0);
  // the direct passage can't beat the concatenation across the partition
  CHECK(rep.theta <= rep.sum_plus + rep.sum_minus + 0.5);
  CHECK(norm(rep.half_displacement - 0.5 * y) < 0.2);
}

TEST_CASE("halving the empty displacement is trivial") {
  EnvParams ep;
  ep.amplitude = 0.0;
  LatticeEnvironment env(1, ep);
  HalvingReport rep = halving_check(env, Vec{}, 1e-6, ThetaOptions{});
  CHECK(rep.theta == 0.0);
  CHECK(rep.sum_plus == 0.0);
  CHECK(rep.sum_minus == 0.0);
  CHECK(rep.segments == 0);
}

TEST_CASE("shape and support tables round-trip through csv") {
  auto dirs = direction_grid(2, 16);
  std::vector<double> theta(16, 1.25), hw(16, 0.01);
  EffectiveShape s = build_shape(dirs, theta, hw);

  const std::string sp = "/tmp/shape_test.csv";
  const std::string hp = "/tmp/support_test.csv";
  write_shape_csv(s, sp);
  write_H_csv(s, 24, hp);

  std::ifstream in(sp);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("#", 0) == 0);
  std::getline(in, line);
  CHECK(line == "dir_x,dir_y,dir_z,angle,theta_bar,halfwidth,vx,vy,vz");
  int rows = 0;
  while (std::getline(in, line)) {
    double a, b, c, d, e, f, g, h, i;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf",
                        &a, &b, &c, &d, &e, &f, &g, &h, &i) == 9);
    CHECK(e == doctest::Approx(1.25));
    ++rows;
  }
  CHECK(rows == 16);

  std::ifstream hin(hp);
  REQUIRE(hin.good());
  std::getline(hin, line);
  CHECK(line.rfind("#", 0) == 0);
  std::getline(hin, line);
  CHECK(line == "p_x,p_y,p_z,H");
  rows = 0;
  while (std::getline(hin, line)) {
    double a, b, c, d;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &a, &b, &c, &d) == 4);
    CHECK(d == doctest::Approx(1.0 / 1.25).epsilon(0.02));
    ++rows;
  }
  CHECK(rows == 24);
  std::remove(sp.c_str());
  std::remove(hp.c_str());
}
