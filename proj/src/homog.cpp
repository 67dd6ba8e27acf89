#include "gfront/homog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

#include "gfront/front.hpp"
#include "gfront/stats.hpp"

namespace gfront {

namespace {

/// Front seeded at `from`, certified untruncated up to tau: the covering
/// radius regrows until the boundary-touch time clears tau, capped by the
/// rigorous speed bound (1 + sup|V|) tau, at which the certificate must hold.
FrontField certified_front(const Environment& env, const Vec& from, double tau,
                           const MicroOptions& opts) {
  const double cap = (1.0 + env.norms().sup_v) * tau + 4.0;
  double radius = std::min(opts.radius_hint * tau + 4.0, cap);
  FrontParams fp;
  fp.stencil_cells = opts.stencil_cells;
  fp.store_pops = false;
  for (;;) {
    Grid g = Grid::covering(env.dim(), radius, opts.grid_h);
    for (int i = 0; i < env.dim(); ++i) g.lo[i] += from[i];
    FrontField f(env, g, std::span<const Vec>(&from, 1), fp);
    f.evolve_to(tau);
    if (f.boundary_touch_time() > tau) return f;
    if (radius >= cap)
      throw std::runtime_error("front escaped its rigorous speed bound");
    radius = std::min(radius * opts.grow, cap);
  }
}

/// Duration-cumulative occupied set straight from the arrival field (works
/// without the pop log).
std::vector<uint8_t> arrival_mask(const FrontField& f, double t) {
  std::vector<uint8_t> mask(f.grid().size(), 0);
  for (size_t i = 0; i < mask.size(); ++i) mask[i] = f.arrival(i) <= t;
  return mask;
}

void validate_times(std::span<const double> times) {
  if (times.empty()) throw std::invalid_argument("empty time list");
  if (times.front() <= 0.0) throw std::invalid_argument("times must be > 0");
  for (size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      throw std::invalid_argument("times must increase");
}

}  // namespace

double InitialData::operator()(const Vec& x) const {
  switch (kind) {
    case Kind::linear:
      return dot(ps[0], x) + cs[0];
    case Kind::cone:
      return -norm(x - apex);
    case Kind::max_linear: {
      double best = -std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < ps.size(); ++i)
        best = std::max(best, dot(ps[i], x) + cs[i]);
      return best;
    }
  }
  return 0.0;
}

InitialData InitialData::linear(const Vec& p, double c) {
  InitialData d;
  d.kind = Kind::linear;
  d.ps = {p};
  d.cs = {c};
  d.lip = norm(p);
  return d;
}

InitialData InitialData::cone(const Vec& a) {
  InitialData d;
  d.kind = Kind::cone;
  d.apex = a;
  d.lip = 1.0;
  return d;
}

InitialData InitialData::max_linear(std::span<const Vec> ps,
                                    std::span<const double> cs) {
  if (ps.empty() || ps.size() != cs.size())
    throw std::invalid_argument("max_linear needs matching nonempty lists");
  InitialData d;
  d.kind = Kind::max_linear;
  d.ps.assign(ps.begin(), ps.end());
  d.cs.assign(cs.begin(), cs.end());
  for (const Vec& p : ps) d.lip = std::max(d.lip, norm(p));
  return d;
}

std::vector<double> solve_u_eps_profile(const Environment& env,
                                        const InitialData& u0, double eps,
                                        std::span<const double> times,
                                        const Vec& x,
                                        const MicroOptions& opts) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  validate_times(times);

  std::vector<double> taus(times.size());
  for (size_t j = 0; j < times.size(); ++j) taus[j] = times[j] / eps;
  const Vec seed = (1.0 / eps) * x;
  FrontField f = certified_front(env, seed, taus.back(), opts);

  const Grid& g = f.grid();
  std::vector<double> best(times.size(),
                           -std::numeric_limits<double>::infinity());
  for (size_t i = 0; i < g.size(); ++i) {
    const double a = f.arrival(i);
    if (!(a <= taus.back())) continue;
    const size_t j =
        std::lower_bound(taus.begin(), taus.end(), a) - taus.begin();
    best[j] = std::max(best[j], u0(eps * g.center(g.decode(i))));
  }
  // occupied sets are nested in time, so suprema accumulate forward
  for (size_t j = 1; j < best.size(); ++j)
    best[j] = std::max(best[j], best[j - 1]);
  return best;
}

double solve_u_eps(const Environment& env, const InitialData& u0, double eps,
                   double t, const Vec& x, const MicroOptions& opts) {
  return solve_u_eps_profile(env, u0, eps, std::span<const double>(&t, 1), x,
                             opts)[0];
}

double solve_u_bar(const EffectiveShape& shape, const InitialData& u0,
                   double t, const Vec& x, int interior_samples) {
  if (t < 0.0) throw std::invalid_argument("t must be >= 0");
  if (t == 0.0) return u0(x);
  if (u0.kind != InitialData::Kind::cone) {
    // linear pieces: sup over x + t*shape of p.y + c = p.x + c + t H(p)
    double best = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < u0.ps.size(); ++i)
      best = std::max(best, dot(u0.ps[i], x) + u0.cs[i] +
                                t * effective_H(shape, u0.ps[i]));
    return best;
  }
  const int k = interior_samples > 0 ? interior_samples : 8;
  double best = u0(x);
  for (const Vec& v : shape.vertices)
    for (int s = 1; s <= k; ++s)
      best = std::max(best, u0(x + (t * s / k) * v));
  return best;
}

std::vector<uint8_t> rasterize_shape(const Grid& g, const EffectiveShape& shape,
                                     const Vec& x, double t) {
  if (t < 0.0) throw std::invalid_argument("t must be >= 0");
  std::vector<uint8_t> mask(g.size(), 0);
  if (t == 0.0) {
    const IVec c = g.cell_of(x);
    if (g.contains(c)) mask[g.index(c)] = 1;
    return mask;
  }
  const double inv = 1.0 / t;
  for (size_t i = 0; i < g.size(); ++i)
    if (shape_contains(shape, inv * (g.center(g.decode(i)) - x))) mask[i] = 1;
  return mask;
}

double hausdorff(const Grid& g, const std::vector<uint8_t>& a,
                 const std::vector<uint8_t>& b) {
  if (a.size() != g.size() || b.size() != g.size())
    throw std::invalid_argument("mask size does not match grid");
  const bool any_a = std::find(a.begin(), a.end(), uint8_t(1)) != a.end();
  const bool any_b = std::find(b.begin(), b.end(), uint8_t(1)) != b.end();
  if (!any_a || !any_b) throw std::invalid_argument("empty set");
  const std::vector<double> da = edt_squared(g, a);
  const std::vector<double> db = edt_squared(g, b);
  double worst = 0.0;
  for (size_t i = 0; i < g.size(); ++i) {
    if (a[i]) worst = std::max(worst, db[i]);
    if (b[i]) worst = std::max(worst, da[i]);
  }
  return g.h * std::sqrt(worst);
}

ShapeConvergenceReport shape_convergence_experiment(
    const EnvFactory& family, const EffectiveShape& shape,
    std::span<const double> times, std::span<const uint64_t> seeds,
    const MicroOptions& opts) {
  validate_times(times);
  if (seeds.empty()) throw std::invalid_argument("empty seed list");

  ShapeConvergenceReport rep;
  rep.times.assign(times.begin(), times.end());
  const size_t nt = times.size();
  std::vector<double> sum(nt, 0.0), sum2(nt, 0.0);
  for (uint64_t seed : seeds) {
    auto env = family(seed);
    FrontField f = certified_front(*env, Vec{}, times.back(), opts);
    for (size_t j = 0; j < nt; ++j) {
      const std::vector<uint8_t> occ = arrival_mask(f, times[j]);
      const std::vector<uint8_t> tgt =
          rasterize_shape(f.grid(), shape, Vec{}, times[j]);
      const double d = hausdorff(f.grid(), occ, tgt) / times[j];
      sum[j] += d;
      sum2[j] += d * d;
    }
  }
  const double n = static_cast<double>(seeds.size());
  rep.mean_dist.resize(nt);
  rep.sd_dist.assign(nt, 0.0);
  for (size_t j = 0; j < nt; ++j) {
    rep.mean_dist[j] = sum[j] / n;
    if (seeds.size() > 1)
      rep.sd_dist[j] = std::sqrt(std::max(
          0.0, (sum2[j] - n * rep.mean_dist[j] * rep.mean_dist[j]) / (n - 1)));
  }

  // decay fit with the log^2 factor removed; needs t > 1 and positive means
  std::vector<double> xs, ys;
  for (size_t j = 0; j < nt; ++j)
    if (times[j] > 1.05 && rep.mean_dist[j] > 0.0) {
      xs.push_back(std::log(times[j]));
      ys.push_back(std::log(rep.mean_dist[j] /
                            (std::log(times[j]) * std::log(times[j]))));
    }
  if (xs.size() >= 2) {
    const LinFit fit = fit_linear(xs, ys);
    rep.exponent = fit.slope;
    rep.amplitude = std::exp(fit.intercept);
    rep.r2 = fit.r2;
  }
  return rep;
}

RateReport homog_rate_experiment(const EnvFactory& family,
                                 const EffectiveShape& shape,
                                 const InitialData& u0, double T,
                                 std::span<const double> eps_list,
                                 std::span<const uint64_t> seeds,
                                 const MicroOptions& opts) {
  if (!(T > 0.0)) throw std::invalid_argument("T must be > 0");
  if (eps_list.empty()) throw std::invalid_argument("empty eps list");
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  for (double e : eps_list)
    if (!(e > 0.0) || !(T / e > 1.0))
      throw std::invalid_argument("eps must satisfy 0 < eps < T");

  RateReport rep;
  rep.T = T;
  rep.epsilons.assign(eps_list.begin(), eps_list.end());

  // deterministic probe lattice: 8 times, 32 points spread through the ball
  // of radius 3T/4; each seed probes the point indexed by its position
  const size_t npts = 32, ntimes = 8;
  rep.probe_times = ntimes;
  rep.probe_points = npts;
  std::vector<double> times(ntimes);
  for (size_t j = 0; j < ntimes; ++j)
    times[j] = T * static_cast<double>(j + 1) / static_cast<double>(ntimes);
  const int dim = shape.dim;
  std::vector<Vec> pts;
  const std::vector<Vec> dirs = direction_grid(dim, npts);
  for (size_t k = 0; k < npts; ++k) {
    const double frac = (static_cast<double>(k) + 0.5) / npts;
    pts.push_back((0.75 * T * std::pow(frac, 1.0 / dim)) * dirs[k]);
  }

  rep.sup_errors.assign(eps_list.size(), 0.0);
  rep.max_errors.assign(eps_list.size(), 0.0);
  for (size_t si = 0; si < seeds.size(); ++si) {
    // probe point keyed by seed value so split seed ranges stay mergeable
    const Vec& x = pts[seeds[si] % npts];
    std::vector<double> ubar(ntimes);
    for (size_t j = 0; j < ntimes; ++j)
      ubar[j] = solve_u_bar(shape, u0, times[j], x);
    auto env = family(seeds[si]);
    for (size_t ei = 0; ei < eps_list.size(); ++ei) {
      const std::vector<double> prof =
          solve_u_eps_profile(*env, u0, eps_list[ei], times, x, opts);
      double sup = 0.0;
      for (size_t j = 0; j < ntimes; ++j)
        sup = std::max(sup, std::abs(prof[j] - ubar[j]));
      rep.rows.push_back(RateRow{seeds[si], eps_list[ei], sup});
      rep.sup_errors[ei] += sup;
      rep.max_errors[ei] = std::max(rep.max_errors[ei], sup);
    }
  }
  for (double& v : rep.sup_errors) v /= static_cast<double>(seeds.size());

  std::vector<double> xs, ys;
  for (size_t ei = 0; ei < eps_list.size(); ++ei)
    if (rep.sup_errors[ei] > 0.0) {
      const double lg = std::log(T / eps_list[ei]);
      xs.push_back(std::log(T * eps_list[ei]));
      ys.push_back(std::log(rep.sup_errors[ei] / (lg * lg)));
    }
  if (xs.size() >= 3) {
    const LinFit fit = fit_linear(xs, ys);
    rep.exponent = fit.slope;
    rep.amplitude = std::exp(fit.intercept);
    rep.r2 = fit.r2;
    const double t = student_t_975(static_cast<int>(xs.size()) - 2);
    rep.ci_low = fit.slope - t * fit.slope_se;
    rep.ci_high = fit.slope + t * fit.slope_se;
    rep.contains_half = rep.ci_low <= 0.5 && 0.5 <= rep.ci_high;
  }
  return rep;
}

T0Estimate estimate_T0(const EnvFactory& family, const EffectiveShape& shape,
                       double constant_guess, std::span<const double> Ts,
                       std::span<const uint64_t> seeds,
                       const MicroOptions& opts) {
  if (!(constant_guess > 0.0))
    throw std::invalid_argument("constant_guess must be > 0");
  validate_times(Ts);
  if (Ts.front() <= 1.0)
    throw std::invalid_argument("horizons must exceed 1 (log^2 scaling)");
  if (seeds.empty()) throw std::invalid_argument("empty seed list");

  T0Estimate est;
  est.ts.assign(Ts.begin(), Ts.end());
  est.seeds.assign(seeds.begin(), seeds.end());
  est.guess = constant_guess;
  const size_t nT = Ts.size();

  for (uint64_t seed : seeds) {
    auto env = family(seed);
    FrontField f = certified_front(*env, Vec{}, Ts.back(), opts);
    std::vector<double> dist(nT);
    for (size_t k = 0; k < nT; ++k) {
      const std::vector<uint8_t> occ = arrival_mask(f, Ts[k]);
      const std::vector<uint8_t> tgt =
          rasterize_shape(f.grid(), shape, Vec{}, Ts[k]);
      dist[k] = hausdorff(f.grid(), occ, tgt);
    }
    // bound at horizon T uses the worst probed time underneath it
    std::vector<uint8_t> ok(nT);
    double running = 0.0;
    for (size_t k = 0; k < nT; ++k) {
      running = std::max(running, dist[k]);
      const double lg = std::log(Ts[k]);
      ok[k] = running <= constant_guess * std::sqrt(Ts[k]) * lg * lg;
    }
    size_t first_good = nT;  // smallest k with ok true from k onward
    for (size_t k = nT; k-- > 0;) {
      if (!ok[k]) break;
      first_good = k;
    }
    if (first_good == nT) {
      est.t0.push_back(std::numeric_limits<double>::infinity());
      est.censored.push_back(1);
    } else {
      est.t0.push_back(Ts[first_good]);
      est.censored.push_back(0);
    }
  }

  const double n = static_cast<double>(seeds.size());
  std::vector<double> xs, ys;
  for (size_t k = 0; k < nT; ++k) {
    size_t alive = 0;
    for (double t0 : est.t0)
      if (t0 > Ts[k]) ++alive;
    if (alive == 0) continue;
    est.tail_t.push_back(Ts[k]);
    est.tail_log_surv.push_back(std::log(static_cast<double>(alive) / n));
    xs.push_back(std::pow(std::log(Ts[k]), 1.5));
    ys.push_back(est.tail_log_surv.back());
  }
  if (xs.size() >= 2) {
    const LinFit fit = fit_linear(xs, ys);
    est.envelope_c = -fit.slope;
  }
  if (xs.size() >= 3) est.log_survival_concave = concave(xs, ys, 1e-9);
  return est;
}

void write_rate_csv(const RateReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << std::setprecision(17);
  out << "# rescaled-solution error rows; sup over the probe lattice of "
         "|u_eps - u_bar| per (seed, eps)\n";
  out << "# horizon T = " << report.T << ", exponent = " << report.exponent
      << " in [" << report.ci_low << ", " << report.ci_high
      << "], amplitude = " << report.amplitude << ", r2 = " << report.r2
      << '\n';
  out << "seed,eps,sup_err\n";
  for (const RateRow& r : report.rows)
    out << r.seed << ',' << r.eps << ',' << r.sup_err << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_t0_csv(const T0Estimate& est, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << std::setprecision(17);
  out << "# smallest probed horizon with the scaled shape bound holding "
         "onward; guess = "
      << est.guess << ", envelope_c = " << est.envelope_c << '\n';
  out << "seed,t0,censored\n";
  for (size_t i = 0; i < est.t0.size(); ++i)
    out << est.seeds[i] << ',' << est.t0[i] << ','
        << int(est.censored[i]) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace gfront
