#pragma once

#include <span>
#include <vector>

#include "gfront/rng.hpp"

namespace gfront {

struct LinFit {
  double slope = 0.0, intercept = 0.0;
  double r2 = 0.0;
  double slope_se = 0.0, intercept_se = 0.0;
  size_t n = 0;
};

/// Ordinary least squares y = slope x + intercept with standard errors from
/// the residual variance (n - 2 dof). Requires n >= 2 and nonconstant x.
LinFit fit_linear(std::span<const double> x, std::span<const double> y);

/// Empirical survival S(level_i) = P[X >= level_i] at the sorted distinct
/// sample values.
struct SurvivalCurve {
  std::vector<double> level;
  std::vector<double> prob;
};
SurvivalCurve survival_curve(std::vector<double> samples);

/// Quantile of an ascending-sorted sample by linear interpolation, q in [0,1].
double quantile(std::span<const double> sorted, double q);

/// True when the piecewise-linear interpolant of (x, y) is concave up to
/// `slack`: consecutive slopes may increase by at most slack. x strictly
/// increasing.
bool concave(std::span<const double> x, std::span<const double> y,
             double slack);

/// Bootstrap resample: n indices drawn uniformly with replacement.
std::vector<size_t> resample_indices(Rng& rng, size_t n);

/// 97.5% Student t quantile with df degrees of freedom (slope confidence
/// bands for small regressions). Exact table through df = 20, then a smooth
/// tail toward the normal quantile.
double student_t_975(int df);

/// Fit of a stretched-exponential survival S(l) = exp(-a l^b) by least
/// squares of log(-log S) against log l, over levels with prob inside
/// (smin, smax) (excludes the flat head and the noisy extreme tail).
struct TailFit {
  double a = 0.0, b = 0.0;
  double r2 = 0.0;
  size_t points = 0;
};
TailFit fit_exp_power_tail(const SurvivalCurve& s, double smin, double smax);

}  // namespace gfront
