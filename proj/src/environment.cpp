#include "gfront/environment.hpp"

#include <cmath>

namespace gfront {

namespace {

inline Vec cross(const Vec& a, const Vec& b) {
  return Vec{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
             a[0] * b[1] - a[1] * b[0]};
}

}  // namespace

LatticeEnvironment::LatticeEnvironment(uint64_t seed, const EnvParams& params)
    : seed_(seed), params_(params) {
  params_.validate();
  const BumpProfile& p = params_.profile;
  const double g = p.sup_gradient();
  const double delta = params_.div_knob;
  // Normalize coefficients so the certified sup of the incompressible part
  // is exactly `amplitude`. In d=3 the curl contribution is bounded by
  // |grad phi| * |(a_x,a_y,a_z)| <= sup_grad * sqrt(3) * scale.
  const double curl_gain = params_.dim == 2 ? 1.0 : std::sqrt(3.0);
  scale_ = params_.amplitude / (curl_gain * g);
  norms_.sup_v = scale_ * g * (curl_gain + delta);
  norms_.lip_v =
      std::max(1.0, scale_ * p.sup_hessian() * (curl_gain + delta));
  norms_.sup_div = delta * scale_ * p.sup_laplacian(params_.dim);
}

double LatticeEnvironment::div_knob_for(double target, const EnvParams& base) {
  const BumpProfile& p = base.profile;
  const double curl_gain = base.dim == 2 ? 1.0 : std::sqrt(3.0);
  const double scale = base.amplitude / (curl_gain * p.sup_gradient());
  return target / (scale * p.sup_laplacian(base.dim));
}

// Bump radius <= 1/2, so the open interval (x_i - r, x_i + r) holds at most
// one integer per axis: at most one site's support contains x.
template <typename F>
void LatticeEnvironment::for_each_support_site(const Vec& x, F&& f) const {
  const double r = params_.profile.radius();
  const double r2 = r * r;
  IVec lo, hi;
  for (int i = 0; i < params_.dim; ++i) {
    lo[i] = static_cast<int>(std::ceil(x[i] - r));
    hi[i] = static_cast<int>(std::floor(x[i] + r));
  }
  IVec v = lo;
  for (v[0] = lo[0]; v[0] <= hi[0]; ++v[0])
    for (v[1] = lo[1]; v[1] <= hi[1]; ++v[1])
      for (v[2] = lo[2]; v[2] <= hi[2]; ++v[2]) {
        Vec dx = x - to_vec(v);
        if (norm2(dx) < r2) f(v, dx);
      }
}

Vec LatticeEnvironment::velocity(const Vec& x) const {
  Vec out;
  const int d = params_.dim;
  const double delta = params_.div_knob;
  for_each_support_site(x, [&](const IVec& v, const Vec& dx) {
    const double gf = params_.profile.gradient_factor(norm2(dx));
    if (d == 2) {
      const double a = coefficient(v, 0);
      out[0] += -a * gf * dx[1];
      out[1] += a * gf * dx[0];
    } else {
      Vec a{coefficient(v, 0), coefficient(v, 1), coefficient(v, 2)};
      out += gf * cross(dx, a);
    }
    if (delta != 0.0) {
      const double b = coefficient(v, d);
      out += (delta * b * gf) * dx;
    }
  });
  return out;
}

Mat LatticeEnvironment::jacobian(const Vec& x) const {
  Mat out;
  const int d = params_.dim;
  const double delta = params_.div_knob;
  for_each_support_site(x, [&](const IVec& v, const Vec& dx) {
    const Mat h = params_.profile.hessian(dx, d);
    if (d == 2) {
      const double a = coefficient(v, 0);
      for (int j = 0; j < 2; ++j) {
        out(0, j) += -a * h(1, j);
        out(1, j) += a * h(0, j);
      }
    } else {
      Vec a{coefficient(v, 0), coefficient(v, 1), coefficient(v, 2)};
      // Row i of the curl Jacobian is (H row cross structure): J = M H with
      // M w = w x a.
      for (int l = 0; l < 3; ++l) {
        Vec hcol{h(0, l), h(1, l), h(2, l)};
        Vec jcol = cross(hcol, a);
        for (int i = 0; i < 3; ++i) out(i, l) += jcol[i];
      }
    }
    if (delta != 0.0) {
      const double b = coefficient(v, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out(i, j) += delta * b * h(i, j);
    }
  });
  return out;
}

void LatticeEnvironment::add_breakpoints(const Vec& p0, const Vec& p1,
                                         std::vector<double>& ts) const {
  const double r = params_.profile.radius();
  const Vec u = p1 - p0;
  const double a = norm2(u);
  if (a == 0.0) return;
  IVec lo, hi;
  for (int i = 0; i < params_.dim; ++i) {
    lo[i] = static_cast<int>(std::ceil(std::min(p0[i], p1[i]) - r));
    hi[i] = static_cast<int>(std::floor(std::max(p0[i], p1[i]) + r));
  }
  IVec v = lo;
  for (v[0] = lo[0]; v[0] <= hi[0]; ++v[0])
    for (v[1] = lo[1]; v[1] <= hi[1]; ++v[1])
      for (v[2] = lo[2]; v[2] <= hi[2]; ++v[2]) {
        const Vec w = p0 - to_vec(v);
        const double b = dot(w, u);
        const double c = norm2(w) - r * r;
        const double disc = b * b - a * c;
        if (disc <= 0.0) continue;  // segment misses (or grazes) the sphere
        const double s = std::sqrt(disc);
        for (double t : {(-b - s) / a, (-b + s) / a})
          if (t > 0.0 && t < 1.0) ts.push_back(t);
      }
}

double LatticeEnvironment::divergence(const Vec& x) const {
  const double delta = params_.div_knob;
  if (delta == 0.0) return 0.0;  // incompressible part is exactly div-free
  double out = 0.0;
  const int d = params_.dim;
  for_each_support_site(x, [&](const IVec& v, const Vec& dx) {
    out += delta * coefficient(v, d) * params_.profile.laplacian(dx, d);
  });
  return out;
}

LinearField::LinearField(int dim, const Mat& a, double box_radius)
    : dim_(dim), a_(a) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dim must be 2 or 3");
  double frob = 0.0;
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) frob += a(i, j) * a(i, j);
  frob = std::sqrt(frob);
  norms_.sup_v = frob * std::sqrt(static_cast<double>(dim)) * box_radius;
  norms_.lip_v = std::max(1.0, frob);
  norms_.sup_div = std::abs(a.trace());
}

}  // namespace gfront
