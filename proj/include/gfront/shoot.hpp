#pragma once

#include <vector>

#include "gfront/environment.hpp"
#include "gfront/rng.hpp"

namespace gfront {

/// Piecewise-constant control on [0, T] with values in the closed unit ball.
/// Value k applies on [breaks[k], breaks[k+1]); breaks.front() = 0 and
/// breaks.back() = T.
struct PiecewiseControl {
  std::vector<double> breaks;
  std::vector<Vec> values;

  double duration() const { return breaks.empty() ? 0.0 : breaks.back(); }
  Vec at(double s) const;
  /// Throws if any value leaves the closed unit ball or breakpoints are not
  /// strictly increasing from 0.
  void validate(int dim) const;

  static PiecewiseControl constant(const Vec& a, double T);
  /// Uniformly random directions in the closed unit ball on `segments` equal
  /// subintervals.
  static PiecewiseControl random(Rng& rng, int dim, double T, int segments);
};

/// Controlled path X' = alpha(s) + V(X), X(0) = x0, integrated by classical
/// RK4 with steps aligned to the control breakpoints (each constant-control
/// span is integrated with ceil(span/substep) equal steps, so the fourth-order
/// error bound applies between breakpoints). Negative t integrates X' =
/// -(alpha + V(X)) over |t| (time reversal), with the control read on [0,|t|].
/// Returns the sampled points including x0 and the endpoint.
std::vector<Vec> shoot_path(const Environment& env, const Vec& x0,
                            const PiecewiseControl& control, double t,
                            double substep);

}  // namespace gfront
