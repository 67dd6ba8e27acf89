#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gfront/environment.hpp"
#include "gfront/geometry.hpp"

namespace gfront {

/// First-passage measurements theta(0, R e) for a grid of directions and
/// radii, one forward front per seed (a single front serves every direction
/// and radius). Passage times are cell-center arrivals at pitch grid_h.
struct ThetaMatrix {
  std::vector<uint64_t> seeds;
  std::vector<Vec> directions;  // unit vectors
  std::vector<double> radii;    // increasing
  std::vector<double> theta;    // [seed][direction][radius], flattened
  double grid_h = 1.0 / 8.0;

  double at(size_t s, size_t d, size_t r) const {
    return theta[(s * directions.size() + d) * radii.size() + r];
  }
};

struct ThetaOptions {
  double grid_h = 1.0 / 8.0;
  int stencil_cells = 0;       // forwarded to the front (0 = default)
  double grow_factor = 1.35;   // grid enlargement on boundary truncation
  bool pure_recip = false;     // bias regressor 1/R instead of R^{-1/2} log^2 R
  int bootstrap = 200;         // resamples for the intercept halfwidth
  uint64_t bootstrap_seed = 2;
};

/// Measures theta(0, R e) for every (seed, direction, radius). The grid from
/// each seed starts at a modest margin over max R and regrows by grow_factor
/// whenever a target's arrival is not certified ahead of the boundary touch.
ThetaMatrix measure_theta(const EnvFactory& family,
                          std::span<const uint64_t> seeds,
                          std::span<const Vec> directions,
                          std::span<const double> radii,
                          const ThetaOptions& opts = {});
ThetaMatrix measure_theta(const EnvParams& params,
                          std::span<const uint64_t> seeds,
                          std::span<const Vec> directions,
                          std::span<const double> radii,
                          const ThetaOptions& opts = {});

/// Extrapolation of mean theta(0, R e)/R to R = infinity for one direction.
struct ThetaEstimate {
  Vec direction{};
  double theta_bar = 1.0;  // fitted intercept
  double halfwidth = 0.0;  // bootstrap 95% halfwidth of the intercept
  double bias_amp = 0.0;   // coefficient of the bias regressor
  bool residual_flag = false;  // a fit residual exceeds the per-radius noise
  std::vector<double> radii;
  std::vector<double> means;       // mean theta/R per radius
  std::vector<double> halfwidths;  // 1.96 se per radius
};

/// Fits mean(R) = theta_bar + a z(R) with the subadditivity-bias regressor
/// z(R) = R^{-1/2} log^2 R (or 1/R with pure_recip); the halfwidth comes from
/// bootstrap resampling of seeds, which preserves the cross-radius coupling
/// of per-seed fronts. residual_flag reports fit residuals exceeding the
/// per-radius Monte Carlo halfwidths (radii too few or too close).
ThetaEstimate estimate_theta_bar(const ThetaMatrix& m, size_t dir_index,
                                 const ThetaOptions& opts = {});

/// One-direction convenience: measures and extrapolates in one call.
ThetaEstimate estimate_theta_bar(const EnvFactory& family,
                                 std::span<const uint64_t> seeds, const Vec& e,
                                 std::span<const double> radii,
                                 const ThetaOptions& opts = {});

/// Uniform direction set: evenly spaced angles in d = 2, a Fibonacci sphere
/// lattice in d = 3.
std::vector<Vec> direction_grid(int dim, int count);

/// Directional passage rate theta_bar on a unit-vector grid and the set
/// S = {x : theta_bar(x) <= 1} it induces by 1-homogeneity. Raw boundary
/// points e/theta_bar(e) are kept as-is (the set need not be convex); the
/// support function taken as a max over them is automatically the convex
/// hull's, and hull_d2 stores that hull explicitly in d = 2.
struct EffectiveShape {
  int dim = 2;
  std::vector<Vec> directions;
  std::vector<double> theta_bar;
  std::vector<double> halfwidth;   // zero when unknown
  std::vector<Vec> vertices;       // e / theta_bar(e), per direction
  std::vector<Vec> hull_d2;        // d = 2 only: convex hull, counterclockwise
};

/// Assembles the shape from directional samples. Requires >= 16 directions
/// and positive theta_bar everywhere.
EffectiveShape build_shape(const std::vector<Vec>& directions,
                           const std::vector<double>& theta_bar,
                           const std::vector<double>& halfwidth = {});

/// Support function H(p) = max over stored boundary points of p . v: convex,
/// 1-homogeneous, and monotone under shape inclusion by construction.
double effective_H(const EffectiveShape& shape, const Vec& p);

/// Whether x lies in the convexified S, tested against the support function
/// on the stored direction grid (exact in d = 2 for the hull polygon).
bool shape_contains(const EffectiveShape& shape, const Vec& x);

/// Monte Carlo subadditivity defect f(x+y) - f(x) - f(y) of the mean passage
/// time f, one front per seed serving all pairs.
struct DefectReport {
  std::vector<Vec> xs, ys;
  std::vector<double> defect;      // per pair
  std::vector<double> reversed;    // f(x) + f(y) - f(x+y), per pair
  double max_defect = 0.0;
};

DefectReport subadditivity_defect(const EnvFactory& family,
                                  std::span<const uint64_t> seeds,
                                  std::span<const std::pair<Vec, Vec>> pairs,
                                  const ThetaOptions& opts = {});

/// Signed partition 0 = t_0 < ... < t_{d+1} = 1 with signs delta_k making
/// |sum_k delta_k (gamma(t_k) - gamma(t_{k-1}))| small. Parameterized by a
/// point x on the d-sphere: t_k - t_{k-1} = x_k^2 and delta_k = sgn(x_k).
struct SignedPartition {
  std::vector<double> t;       // d + 2 breakpoints
  std::vector<int> sign;       // d + 1 signs in {-1, +1}
  double residual = 0.0;       // norm of the signed increment sum
  std::vector<double> sphere;  // the parameterizing point, |x| = 1
};

/// Finds a near-zero of the odd map f(x) = sum_k sgn(x_k) (gamma(t^x_k) -
/// gamma(t^x_{k-1})) on S^d: coarse grid search followed by damped Newton in
/// the sphere's tangent space. gamma is the piecewise-linear interpolant of
/// uniformly spaced samples on [0, 1]. A zero exists for every continuous
/// gamma (f is odd), so failing to reach `tol` within the budget throws.
SignedPartition hobby_rice_partition(std::span<const Vec> gamma, int dim,
                                     double tol, int grid_per_axis = 50,
                                     int max_newton = 80);

/// Splits a near-geodesic from 0 to y into two interleaved chains of equal
/// displacement y/2 via the signed partition of the backtracked path, then
/// measures the passage-time sum along each chain with fresh fronts. For an
/// exactly additive medium both sums are theta(0, y)/2.
struct HalvingReport {
  double theta = 0.0;       // measured theta(0, y)
  double sum_plus = 0.0;    // passage times across the +1 segments
  double sum_minus = 0.0;   // passage times across the complementary chain
  double residual = 0.0;    // partition residual
  Vec half_displacement{};  // total +1 segment displacement (should be y/2)
  size_t segments = 0;      // merged +1 segments, at most (d+1)/2
};

HalvingReport halving_check(const Environment& env, const Vec& y, double tol,
                            const ThetaOptions& opts = {});

/// CSV exports: per-direction theta_bar rows (angle parameterization in
/// d = 2, unit vector always) and a support-function table on a fresh
/// direction grid for downstream consumers.
void write_shape_csv(const EffectiveShape& shape, const std::string& path);
void write_H_csv(const EffectiveShape& shape, int count,
                 const std::string& path);

}  // namespace gfront
