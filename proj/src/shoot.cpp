#include "gfront/shoot.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gfront {

Vec PiecewiseControl::at(double s) const {
  if (values.empty()) return Vec{};
  auto it = std::upper_bound(breaks.begin(), breaks.end(), s);
  size_t k = it == breaks.begin() ? 0 : static_cast<size_t>(it - breaks.begin()) - 1;
  return values[std::min(k, values.size() - 1)];
}

void PiecewiseControl::validate(int dim) const {
  if (breaks.size() != values.size() + 1)
    throw std::invalid_argument("control needs one more breakpoint than values");
  if (breaks.front() != 0.0)
    throw std::invalid_argument("control must start at time 0");
  for (size_t i = 1; i < breaks.size(); ++i)
    if (breaks[i] <= breaks[i - 1])
      throw std::invalid_argument("control breakpoints must increase");
  for (const Vec& v : values) {
    if (norm(v) > 1.0 + 1e-12)
      throw std::invalid_argument("control value leaves the closed unit ball");
    for (int i = dim; i < 3; ++i)
      if (v[i] != 0.0)
        throw std::invalid_argument("control value has components beyond dim");
  }
}

PiecewiseControl PiecewiseControl::constant(const Vec& a, double T) {
  PiecewiseControl c;
  c.breaks = {0.0, T};
  c.values = {a};
  return c;
}

PiecewiseControl PiecewiseControl::random(Rng& rng, int dim, double T,
                                          int segments) {
  PiecewiseControl c;
  for (int k = 0; k <= segments; ++k) c.breaks.push_back(T * k / segments);
  for (int k = 0; k < segments; ++k) c.values.push_back(rng.in_ball(dim, 1.0));
  return c;
}

std::vector<Vec> shoot_path(const Environment& env, const Vec& x0,
                            const PiecewiseControl& control, double t,
                            double substep) {
  control.validate(env.dim());
  if (substep <= 0.0) throw std::invalid_argument("substep must be positive");
  const double T = std::abs(t);
  if (control.duration() < T - 1e-12)
    throw std::invalid_argument("control shorter than the requested horizon");
  const double sign = t < 0.0 ? -1.0 : 1.0;

  std::vector<Vec> path{x0};
  Vec x = x0;
  double s = 0.0;
  // integrate each constant-control span with equal RK4 steps
  for (size_t k = 0; k < control.values.size() && s < T - 1e-15; ++k) {
    double hi = std::min(control.breaks[k + 1], T);
    if (hi <= s) continue;
    const Vec a = control.values[k];
    double span = hi - s;
    int n = std::max(1, static_cast<int>(std::ceil(span / substep)));
    double dt = span / n;
    for (int i = 0; i < n; ++i) {
      auto f = [&](const Vec& p) { return sign * (a + env.velocity(p)); };
      Vec k1 = f(x);
      Vec k2 = f(x + (0.5 * dt) * k1);
      Vec k3 = f(x + (0.5 * dt) * k2);
      Vec k4 = f(x + dt * k3);
      x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      path.push_back(x);
    }
    s = hi;
  }
  return path;
}

}  // namespace gfront
