#pragma once

#include "gfront/geometry.hpp"

namespace gfront {

/// Radial polynomial bump phi(x) = (1 - |x|^2/r^2)^k on |x| < r, zero outside.
/// k >= 3 keeps the field C^2 across the support boundary. All suprema of
/// derivatives are computed from the closed-form critical points of the
/// radial polynomials, so norm bounds derived from them are certified rather
/// than sampled.
class BumpProfile {
 public:
  explicit BumpProfile(double radius = 0.45, int smoothness = 3);

  double radius() const { return r_; }
  int smoothness() const { return k_; }

  double value(const Vec& dx) const;
  Vec gradient(const Vec& dx) const;
  Mat hessian(const Vec& dx, int dim) const;
  double laplacian(const Vec& dx, int dim) const;

  /// Radial gradient factor g(s) with grad phi = g(s) * dx, s = |dx|^2/r^2.
  /// Returns 0 outside the support. Hot-loop entry point.
  double gradient_factor(double dist2) const;

  double sup_value() const { return 1.0; }
  double sup_gradient() const { return sup_grad_; }
  /// Supremum of the Hessian operator norm.
  double sup_hessian() const { return sup_hess_; }
  double sup_laplacian(int dim) const;

 private:
  double r_, r2_, inv_r2_;
  int k_;
  double sup_grad_, sup_hess_, sup_lap2_, sup_lap3_;
};

}  // namespace gfront
