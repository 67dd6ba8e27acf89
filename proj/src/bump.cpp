#include "gfront/bump.hpp"

#include <algorithm>
#include <stdexcept>

namespace gfront {

namespace {

double ipow(double x, int n) {
  double r = 1.0;
  for (; n > 0; --n) r *= x;
  return r;
}

}  // namespace

BumpProfile::BumpProfile(double radius, int smoothness)
    : r_(radius), r2_(radius * radius), inv_r2_(1.0 / r2_), k_(smoothness) {
  if (!(radius > 0.0) || radius > 0.5)
    throw std::invalid_argument("bump radius must lie in (0, 1/2]");
  if (smoothness < 3)
    throw std::invalid_argument("bump smoothness must be >= 3 (C^2 field)");

  const double k = static_cast<double>(k_);

  // sup |grad phi|: (2k/r) sqrt(s) (1-s)^{k-1}, critical point s = 1/(2k-1).
  {
    double s = 1.0 / (2.0 * k - 1.0);
    sup_grad_ = (2.0 * k / r_) * std::sqrt(s) * ipow(1.0 - s, k_ - 1);
  }

  // Hessian eigenvalues: (2k/r^2) * { -(1-s)^{k-1},  (1-s)^{k-2}((2k-1)s-1) }.
  // |radial eigenvalue| peaks at s = 0 (value 1) or s = 3/(2k-1).
  {
    double s = 3.0 / (2.0 * k - 1.0);
    double interior =
        s < 1.0 ? ipow(1.0 - s, k_ - 2) * ((2.0 * k - 1.0) * s - 1.0) : 0.0;
    sup_hess_ = (2.0 * k * inv_r2_) * std::max(1.0, interior);
  }

  // Laplacian (2k/r^2)(1-s)^{k-2}(alpha s - d), alpha = 2(k-1)+d; candidates
  // s = 0 (value d) and the interior critical point of the positive branch.
  auto sup_lap = [&](int d) {
    double alpha = 2.0 * (k - 1.0) + d;
    double sc = (alpha + (k - 2.0) * d) / (alpha * (k - 1.0));
    double best = static_cast<double>(d);
    if (sc > 0.0 && sc < 1.0)
      best = std::max(best, std::abs(ipow(1.0 - sc, k_ - 2) * (alpha * sc - d)));
    return (2.0 * k * inv_r2_) * best;
  };
  sup_lap2_ = sup_lap(2);
  sup_lap3_ = sup_lap(3);
}

double BumpProfile::gradient_factor(double dist2) const {
  double s = dist2 * inv_r2_;
  if (s >= 1.0) return 0.0;
  return -(2.0 * k_ * inv_r2_) * ipow(1.0 - s, k_ - 1);
}

double BumpProfile::value(const Vec& dx) const {
  double s = norm2(dx) * inv_r2_;
  return s >= 1.0 ? 0.0 : ipow(1.0 - s, k_);
}

Vec BumpProfile::gradient(const Vec& dx) const {
  return gradient_factor(norm2(dx)) * dx;
}

Mat BumpProfile::hessian(const Vec& dx, int dim) const {
  Mat h;
  double s = norm2(dx) * inv_r2_;
  if (s >= 1.0) return h;
  double g = -(2.0 * k_ * inv_r2_) * ipow(1.0 - s, k_ - 1);
  double hf = (4.0 * k_ * (k_ - 1) * inv_r2_ * inv_r2_) * ipow(1.0 - s, k_ - 2);
  for (int i = 0; i < dim; ++i) {
    h(i, i) = g;
    for (int j = 0; j < dim; ++j) h(i, j) += hf * dx[i] * dx[j];
  }
  return h;
}

double BumpProfile::laplacian(const Vec& dx, int dim) const {
  double s = norm2(dx) * inv_r2_;
  if (s >= 1.0) return 0.0;
  double alpha = 2.0 * (k_ - 1.0) + dim;
  return (2.0 * k_ * inv_r2_) * ipow(1.0 - s, k_ - 2) * (alpha * s - dim);
}

double BumpProfile::sup_laplacian(int dim) const {
  return dim == 2 ? sup_lap2_ : sup_lap3_;
}

}  // namespace gfront
