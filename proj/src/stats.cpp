#include "gfront/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gfront {

LinFit fit_linear(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("x/y length mismatch");
  const size_t n = x.size();
  if (n < 2) throw std::invalid_argument("need at least two points");
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("x must not be constant");
  LinFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double r = y[i] - (f.slope * x[i] + f.intercept);
    ssr += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  if (n > 2) {
    double s2 = ssr / (n - 2);
    f.slope_se = std::sqrt(s2 / sxx);
    f.intercept_se = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return f;
}

SurvivalCurve survival_curve(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("no samples");
  std::sort(samples.begin(), samples.end());
  SurvivalCurve s;
  const double n = static_cast<double>(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    if (i > 0 && samples[i] == samples[i - 1]) continue;
    s.level.push_back(samples[i]);
    s.prob.push_back((n - i) / n);  // P[X >= samples[i]]
  }
  return s;
}

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("no samples");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  double pos = q * (sorted.size() - 1);
  size_t lo = static_cast<size_t>(pos);
  double frac = pos - lo;
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

bool concave(std::span<const double> x, std::span<const double> y,
             double slack) {
  if (x.size() != y.size() || x.size() < 3) return true;
  double prev = (y[1] - y[0]) / (x[1] - x[0]);
  for (size_t i = 2; i < x.size(); ++i) {
    double cur = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
    if (cur > prev + slack) return false;
    prev = cur;
  }
  return true;
}

std::vector<size_t> resample_indices(Rng& rng, size_t n) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = rng.below(n);
  return idx;
}

double student_t_975(int df) {
  static const double q[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447,
                             2.365,  2.306, 2.262, 2.228, 2.201, 2.179,
                             2.160,  2.145, 2.131, 2.120, 2.110, 2.101,
                             2.093,  2.086};
  if (df < 1) return std::numeric_limits<double>::infinity();
  if (df <= 20) return q[df - 1];
  return 1.96 + 2.4 / df;  // smooth tail toward the normal quantile
}

TailFit fit_exp_power_tail(const SurvivalCurve& s, double smin, double smax) {
  std::vector<double> lx, ly;
  for (size_t i = 0; i < s.level.size(); ++i) {
    double p = s.prob[i];
    if (p <= smin || p >= smax) continue;
    if (s.level[i] <= 0.0) continue;
    lx.push_back(std::log(s.level[i]));
    ly.push_back(std::log(-std::log(p)));
  }
  TailFit t;
  t.points = lx.size();
  if (lx.size() < 2) return t;  // not enough usable tail, a/b stay 0
  LinFit f = fit_linear(lx, ly);
  t.b = f.slope;
  t.a = std::exp(f.intercept);
  t.r2 = f.r2;
  return t;
}

}  // namespace gfront
