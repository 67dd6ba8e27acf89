#include "gfront/shape.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <stdexcept>

#include "gfront/front.hpp"
#include "gfront/grid.hpp"
#include "gfront/stats.hpp"

namespace gfront {

namespace {

/// Forward front seeded at `from`, certified on every target: the covering
/// grid regrows until each target's arrival lands ahead of the boundary-touch
/// time (arrivals finalized before the front reaches the grid margin are
/// unaffected by truncation).
FrontField front_between(const Environment& env, const Vec& from,
                         std::span<const Vec> targets,
                         const ThetaOptions& opts) {
  double rmax = 0.0;
  for (const Vec& t : targets) rmax = std::max(rmax, norm(t - from));
  double radius = 1.25 * rmax + 2.0;
  FrontParams fp;
  fp.stencil_cells = opts.stencil_cells;
  fp.store_pops = false;
  for (int attempt = 0;; ++attempt) {
    Grid g = Grid::covering(env.dim(), radius, opts.grid_h);
    for (int i = 0; i < env.dim(); ++i) g.lo[i] += from[i];
    FrontField f(env, g, std::span<const Vec>(&from, 1), fp);
    std::vector<size_t> cells;
    cells.reserve(targets.size());
    for (const Vec& t : targets) cells.push_back(g.index(g.cell_of(t)));
    const double last = f.evolve_until_cells(cells, 1e30);
    if (last < FrontField::kInf && last <= f.boundary_touch_time()) return f;
    if (attempt >= 12)
      throw std::runtime_error(
          "passage times not certified: front trapped or grid budget small");
    radius *= opts.grow_factor;
  }
}

double bias_regressor(double r, bool pure_recip) {
  return pure_recip ? 1.0 / r : std::log(r) * std::log(r) / std::sqrt(r);
}

/// Piecewise-linear interpolation of uniformly spaced samples on [0, 1].
Vec interp_path(std::span<const Vec> gamma, double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double s = t * static_cast<double>(gamma.size() - 1);
  const size_t i = std::min(static_cast<size_t>(s), gamma.size() - 2);
  const double w = s - static_cast<double>(i);
  return (1.0 - w) * gamma[i] + w * gamma[i + 1];
}

/// The proof's odd map on the sphere: t_k - t_{k-1} = x_k^2, delta_k =
/// sgn(x_k). Assumes |x| = 1; the last breakpoint is pinned to 1 exactly.
Vec odd_map(std::span<const Vec> gamma, int dim, const double* x) {
  Vec F{};
  double acc = 0.0;
  Vec prev = gamma.front();
  for (int k = 0; k <= dim; ++k) {
    acc += x[k] * x[k];
    const double tk = k == dim ? 1.0 : std::min(acc, 1.0);
    const Vec cur = interp_path(gamma, tk);
    const double sgn = x[k] < 0.0 ? -1.0 : 1.0;
    F = F + sgn * (cur - prev);
    prev = cur;
  }
  return F;
}

void normalize_inplace(std::vector<double>& x) {
  double n2 = 0.0;
  for (double v : x) n2 += v * v;
  const double n = std::sqrt(n2);
  if (n == 0.0) {
    x.assign(x.size(), 0.0);
    x[0] = 1.0;
    return;
  }
  for (double& v : x) v /= n;
}

/// Gaussian elimination with partial pivoting on an n x n system; the
/// partition search needs n <= 4.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, int n) {
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-14) return false;
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double m = a[r * n + col] / a[col * n + col];
      for (int c = col; c < n; ++c) a[r * n + c] -= m * a[col * n + c];
      b[r] -= m * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * b[c];
    b[r] = s / a[r * n + r];
  }
  return true;
}

}  // namespace

ThetaMatrix measure_theta(const EnvFactory& family,
                          std::span<const uint64_t> seeds,
                          std::span<const Vec> directions,
                          std::span<const double> radii,
                          const ThetaOptions& opts) {
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  if (directions.empty()) throw std::invalid_argument("empty direction list");
  if (radii.empty()) throw std::invalid_argument("empty radius list");
  for (size_t i = 0; i + 1 < radii.size(); ++i)
    if (!(radii[i] < radii[i + 1]))
      throw std::invalid_argument("radii must increase");
  if (radii.front() <= 0.0) throw std::invalid_argument("radii must be > 0");

  ThetaMatrix m;
  m.seeds.assign(seeds.begin(), seeds.end());
  m.directions.assign(directions.begin(), directions.end());
  m.radii.assign(radii.begin(), radii.end());
  m.grid_h = opts.grid_h;
  m.theta.resize(seeds.size() * directions.size() * radii.size());

  std::vector<Vec> targets;
  targets.reserve(directions.size() * radii.size());
  for (const Vec& e : directions)
    for (double r : radii) targets.push_back(r * e);

  size_t out = 0;
  for (uint64_t seed : seeds) {
    auto env = family(seed);
    FrontField f = front_between(*env, Vec{}, targets, opts);
    for (const Vec& t : targets) m.theta[out++] = first_passage(f, t);
  }
  return m;
}

ThetaMatrix measure_theta(const EnvParams& params,
                          std::span<const uint64_t> seeds,
                          std::span<const Vec> directions,
                          std::span<const double> radii,
                          const ThetaOptions& opts) {
  return measure_theta(lattice_family(params), seeds, directions, radii, opts);
}

ThetaEstimate estimate_theta_bar(const ThetaMatrix& m, size_t dir_index,
                                 const ThetaOptions& opts) {
  const size_t nr = m.radii.size(), ns = m.seeds.size();
  if (nr < 2) throw std::invalid_argument("need at least two radii");
  if (ns < 2) throw std::invalid_argument("need at least two seeds");
  if (dir_index >= m.directions.size())
    throw std::invalid_argument("direction index out of range");

  ThetaEstimate est;
  est.direction = m.directions[dir_index];
  est.radii = m.radii;

  std::vector<double> z(nr);
  for (size_t r = 0; r < nr; ++r)
    z[r] = bias_regressor(m.radii[r], opts.pure_recip);

  auto column_means = [&](std::span<const size_t> idx,
                          std::vector<double>& out) {
    out.assign(nr, 0.0);
    for (size_t s : idx)
      for (size_t r = 0; r < nr; ++r)
        out[r] += m.at(s, dir_index, r) / m.radii[r];
    for (double& v : out) v /= static_cast<double>(idx.size());
  };

  std::vector<size_t> all(ns);
  for (size_t s = 0; s < ns; ++s) all[s] = s;
  column_means(all, est.means);

  est.halfwidths.assign(nr, 0.0);
  for (size_t r = 0; r < nr; ++r) {
    double ss = 0.0;
    for (size_t s = 0; s < ns; ++s) {
      const double d = m.at(s, dir_index, r) / m.radii[r] - est.means[r];
      ss += d * d;
    }
    est.halfwidths[r] =
        1.96 * std::sqrt(ss / static_cast<double>(ns - 1) /
                         static_cast<double>(ns));
  }

  const LinFit fit = fit_linear(z, est.means);
  est.theta_bar = fit.intercept;
  est.bias_amp = fit.slope;
  for (size_t r = 0; r < nr; ++r) {
    const double resid =
        std::abs(est.means[r] - (fit.intercept + fit.slope * z[r]));
    if (resid > est.halfwidths[r] + 1e-12) est.residual_flag = true;
  }

  Rng rng(opts.bootstrap_seed ^ (0x9e3779b97f4a7c15ull * (dir_index + 1)));
  std::vector<double> boots;
  boots.reserve(opts.bootstrap);
  std::vector<double> bm;
  for (int b = 0; b < opts.bootstrap; ++b) {
    const std::vector<size_t> idx = resample_indices(rng, ns);
    column_means(idx, bm);
    boots.push_back(fit_linear(z, bm).intercept);
  }
  std::sort(boots.begin(), boots.end());
  est.halfwidth = (quantile(boots, 0.975) - quantile(boots, 0.025)) / 2.0;
  return est;
}

ThetaEstimate estimate_theta_bar(const EnvFactory& family,
                                 std::span<const uint64_t> seeds, const Vec& e,
                                 std::span<const double> radii,
                                 const ThetaOptions& opts) {
  const ThetaMatrix m =
      measure_theta(family, seeds, std::span<const Vec>(&e, 1), radii, opts);
  return estimate_theta_bar(m, 0, opts);
}

std::vector<Vec> direction_grid(int dim, int count) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dim must be 2 or 3");
  if (count < 1) throw std::invalid_argument("count must be >= 1");
  std::vector<Vec> out;
  out.reserve(count);
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * M_PI * k / count;
      out.push_back(Vec{std::cos(a), std::sin(a)});
    }
    return out;
  }
  // Fibonacci sphere: near-uniform spread without clustering at the poles
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < count; ++k) {
    const double zc = 1.0 - 2.0 * (k + 0.5) / count;
    const double rc = std::sqrt(std::max(0.0, 1.0 - zc * zc));
    const double a = golden * k;
    out.push_back(Vec{rc * std::cos(a), rc * std::sin(a), zc});
  }
  return out;
}

EffectiveShape build_shape(const std::vector<Vec>& directions,
                           const std::vector<double>& theta_bar,
                           const std::vector<double>& halfwidth) {
  if (directions.size() < 16)
    throw std::invalid_argument("need at least 16 directions");
  if (theta_bar.size() != directions.size())
    throw std::invalid_argument("theta_bar size mismatch");
  if (!halfwidth.empty() && halfwidth.size() != directions.size())
    throw std::invalid_argument("halfwidth size mismatch");
  for (double t : theta_bar)
    if (!(t > 0.0)) throw std::invalid_argument("theta_bar must be positive");

  EffectiveShape s;
  s.dim = 2;
  for (const Vec& e : directions)
    if (e[2] != 0.0) s.dim = 3;
  s.directions = directions;
  s.theta_bar = theta_bar;
  s.halfwidth = halfwidth.empty()
                    ? std::vector<double>(directions.size(), 0.0)
                    : halfwidth;
  s.vertices.reserve(directions.size());
  for (size_t i = 0; i < directions.size(); ++i)
    s.vertices.push_back((1.0 / theta_bar[i]) * directions[i]);

  if (s.dim == 2) {
    // Andrew monotone chain on the boundary points
    std::vector<Vec> pts = s.vertices;
    std::sort(pts.begin(), pts.end(), [](const Vec& a, const Vec& b) {
      return a[0] != b[0] ? a[0] < b[0] : a[1] < b[1];
    });
    auto cross = [](const Vec& o, const Vec& a, const Vec& b) {
      return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    };
    std::vector<Vec> hull(2 * pts.size());
    size_t k = 0;
    for (const Vec& p : pts) {
      while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
      hull[k++] = p;
    }
    const size_t lower = k + 1;
    for (size_t i = pts.size(); i-- > 0;) {
      const Vec& p = pts[i];
      while (k >= lower && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
      hull[k++] = p;
    }
    hull.resize(k - 1);  // last point repeats the first
    s.hull_d2 = std::move(hull);
  }
  return s;
}

double effective_H(const EffectiveShape& shape, const Vec& p) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec& v : shape.vertices) best = std::max(best, dot(p, v));
  return best;
}

bool shape_contains(const EffectiveShape& shape, const Vec& x) {
  if (shape.dim == 2) {
    const auto& h = shape.hull_d2;
    for (size_t i = 0; i < h.size(); ++i) {
      const Vec& a = h[i];
      const Vec& b = h[(i + 1) % h.size()];
      const double cr =
          (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]);
      if (cr < -1e-12) return false;
    }
    return true;
  }
  // support-function test on the stored direction grid
  for (size_t i = 0; i < shape.directions.size(); ++i)
    if (dot(x, shape.directions[i]) >
        effective_H(shape, shape.directions[i]) + 1e-12)
      return false;
  return true;
}

DefectReport subadditivity_defect(const EnvFactory& family,
                                  std::span<const uint64_t> seeds,
                                  std::span<const std::pair<Vec, Vec>> pairs,
                                  const ThetaOptions& opts) {
  if (seeds.empty()) throw std::invalid_argument("empty seed list");
  if (pairs.empty()) throw std::invalid_argument("empty pair list");

  std::map<std::array<double, 3>, size_t> slot;
  std::vector<Vec> targets;
  auto intern = [&](const Vec& v) {
    auto [it, fresh] = slot.try_emplace(v.c, targets.size());
    if (fresh) targets.push_back(v);
    return it->second;
  };
  struct PairSlots {
    size_t x, y, xy;
  };
  std::vector<PairSlots> ps;
  ps.reserve(pairs.size());
  for (const auto& [x, y] : pairs)
    ps.push_back(PairSlots{intern(x), intern(y), intern(x + y)});

  std::vector<double> mean(targets.size(), 0.0);
  for (uint64_t seed : seeds) {
    auto env = family(seed);
    FrontField f = front_between(*env, Vec{}, targets, opts);
    for (size_t i = 0; i < targets.size(); ++i)
      mean[i] += first_passage(f, targets[i]);
  }
  for (double& v : mean) v /= static_cast<double>(seeds.size());

  DefectReport rep;
  for (size_t i = 0; i < ps.size(); ++i) {
    rep.xs.push_back(pairs[i].first);
    rep.ys.push_back(pairs[i].second);
    const double d = mean[ps[i].xy] - mean[ps[i].x] - mean[ps[i].y];
    rep.defect.push_back(d);
    rep.reversed.push_back(-d);
    rep.max_defect = std::max(rep.max_defect, d);
  }
  return rep;
}

SignedPartition hobby_rice_partition(std::span<const Vec> gamma, int dim,
                                     double tol, int grid_per_axis,
                                     int max_newton) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dim must be 2 or 3");
  if (gamma.size() < 2)
    throw std::invalid_argument("gamma needs at least two samples");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  const int n = dim + 1;  // sphere ambient dimension

  auto fnorm = [&](const std::vector<double>& x) {
    return norm(odd_map(gamma, dim, x.data()));
  };

  // coarse sweep in hyperspherical angles, keeping the best few starts
  struct Start {
    double f;
    std::vector<double> x;
  };
  std::vector<Start> starts;
  const int na = dim;  // angle count for S^{dim}
  std::vector<int> idx(na, 0);
  std::vector<double> ang(na), x(n);
  for (;;) {
    for (int i = 0; i < na; ++i) {
      const double span = i + 1 == na ? 2.0 * M_PI : M_PI;
      ang[i] = span * (idx[i] + 0.5) / grid_per_axis;
    }
    double sprod = 1.0;
    for (int i = 0; i < na; ++i) {
      x[i] = sprod * std::cos(ang[i]);
      sprod *= std::sin(ang[i]);
    }
    x[na] = sprod;
    const double f = fnorm(x);
    starts.push_back(Start{f, x});
    std::push_heap(starts.begin(), starts.end(),
                   [](const Start& a, const Start& b) { return a.f < b.f; });
    if (starts.size() > 8) {
      std::pop_heap(starts.begin(), starts.end(),
                    [](const Start& a, const Start& b) { return a.f < b.f; });
      starts.pop_back();
    }
    int c = 0;
    while (c < na && ++idx[c] == grid_per_axis) idx[c++] = 0;
    if (c == na) break;
  }
  std::sort(starts.begin(), starts.end(),
            [](const Start& a, const Start& b) { return a.f < b.f; });

  std::vector<double> best_x = starts.front().x;
  double best_f = starts.front().f;

  auto newton_polish = [&](std::vector<double>& cur, double& cf) {
    for (int it = 0; it < max_newton && cf > 0.5 * tol; ++it) {
      // numeric Jacobian of the sphere-restricted map
      const double h = 1e-7;
      const Vec F0 = odd_map(gamma, dim, cur.data());
      std::vector<double> J(static_cast<size_t>(n) * n, 0.0);
      for (int c = 0; c < n; ++c) {
        std::vector<double> xp = cur;
        xp[c] += h;
        normalize_inplace(xp);
        const Vec Fp = odd_map(gamma, dim, xp.data());
        for (int r = 0; r < dim; ++r) J[r * n + c] = (Fp[r] - F0[r]) / h;
      }
      // tangency row keeps the step on the sphere
      for (int c = 0; c < n; ++c) J[dim * n + c] = cur[c];
      std::vector<double> rhs(n, 0.0);
      for (int r = 0; r < dim; ++r) rhs[r] = -F0[r];
      if (!solve_dense(J, rhs, n)) break;
      bool improved = false;
      double lambda = 1.0;
      for (int half = 0; half < 10; ++half, lambda *= 0.5) {
        std::vector<double> trial = cur;
        for (int c = 0; c < n; ++c) trial[c] += lambda * rhs[c];
        normalize_inplace(trial);
        const double tf = fnorm(trial);
        if (tf < cf) {
          cur = std::move(trial);
          cf = tf;
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
  };

  for (const Start& st : starts) {
    if (best_f <= 0.5 * tol) break;
    std::vector<double> cur = st.x;
    double cf = st.f;
    newton_polish(cur, cf);
    if (cf > 0.5 * tol) {
      // the odd map has kinks where a sphere component crosses zero; when
      // Newton stalls there, shrink a 5^n sample box onto the minimum instead
      double w = 0.5;
      std::vector<double> trial(n), center(n);
      for (int round = 0; round < 60 && cf > 0.5 * tol; ++round) {
        center = cur;
        std::vector<int> off(n, -2);
        for (;;) {
          for (int c = 0; c < n; ++c) trial[c] = center[c] + 0.5 * w * off[c];
          normalize_inplace(trial);
          const double tf = fnorm(trial);
          if (tf < cf) {
            cf = tf;
            cur = trial;
          }
          int c = 0;
          for (; c < n; ++c) {
            if (++off[c] <= 2) break;
            off[c] = -2;
          }
          if (c == n) break;
        }
        w *= 0.45;
      }
      newton_polish(cur, cf);
    }
    if (cf < best_f) {
      best_f = cf;
      best_x = cur;
    }
  }

  if (best_f > tol)
    throw std::runtime_error(
        "signed partition stalled above tolerance: resample gamma more "
        "densely or relax tol");

  normalize_inplace(best_x);
  SignedPartition part;
  part.sphere = best_x;
  part.t.resize(n + 1);
  part.sign.resize(n);
  part.t[0] = 0.0;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    acc += best_x[k] * best_x[k];
    part.t[k + 1] = k + 1 == n ? 1.0 : std::min(acc, 1.0);
    part.sign[k] = best_x[k] < 0.0 ? -1 : 1;
  }
  part.residual = best_f;
  return part;
}

HalvingReport halving_check(const Environment& env, const Vec& y, double tol,
                            const ThetaOptions& opts) {
  const int d = env.dim();
  HalvingReport rep;
  if (norm(y) == 0.0) return rep;  // empty path halves trivially

  FrontField f = front_between(env, Vec{}, std::span<const Vec>(&y, 1), opts);
  rep.theta = first_passage(f, y);
  const BacktrackPath bp = backtrack_path(f, y);

  // resample the near-geodesic uniformly in arrival time
  const size_t nsamp = std::max<size_t>(512, 4 * bp.points.size());
  std::vector<Vec> gamma(nsamp);
  const double total = bp.times.back();
  size_t seg = 0;
  for (size_t j = 0; j < nsamp; ++j) {
    const double tj = total * static_cast<double>(j) /
                      static_cast<double>(nsamp - 1);
    while (seg + 2 < bp.times.size() && bp.times[seg + 1] < tj) ++seg;
    const double dt = bp.times[seg + 1] - bp.times[seg];
    const double w =
        dt > 0.0 ? std::clamp((tj - bp.times[seg]) / dt, 0.0, 1.0) : 1.0;
    gamma[j] = (1.0 - w) * bp.points[seg] + w * bp.points[seg + 1];
  }

  SignedPartition part = hobby_rice_partition(gamma, d, tol);
  rep.residual = part.residual;

  // orient the signs so the plus chain carries the fewer runs
  int plus_runs = 0, minus_runs = 0, prev = 0;
  for (int s : part.sign) {
    if (s != prev) (s > 0 ? plus_runs : minus_runs)++;
    prev = s;
  }
  if (plus_runs > minus_runs)
    for (int& s : part.sign) s = -s;

  std::vector<std::pair<double, double>> plus;
  bool open_run = false;
  for (size_t k = 0; k < part.sign.size(); ++k) {
    if (part.sign[k] > 0) {
      if (open_run)
        plus.back().second = part.t[k + 1];
      else
        plus.emplace_back(part.t[k], part.t[k + 1]);
      open_run = true;
    } else {
      open_run = false;
    }
  }
  rep.segments = plus.size();

  auto theta_between = [&](const Vec& a, const Vec& b) -> double {
    if (norm(b - a) < 1e-12) return 0.0;
    FrontField ff = front_between(env, a, std::span<const Vec>(&b, 1), opts);
    return first_passage(ff, b);
  };

  Vec cursor = gamma.front();
  for (const auto& [s, t] : plus) {
    const Vec a = interp_path(gamma, s);
    const Vec b = interp_path(gamma, t);
    rep.half_displacement = rep.half_displacement + (b - a);
    rep.sum_plus += theta_between(a, b);
    rep.sum_minus += theta_between(cursor, a);
    cursor = b;
  }
  rep.sum_minus += theta_between(cursor, gamma.back());
  return rep;
}

void write_shape_csv(const EffectiveShape& shape, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << std::setprecision(17);
  out << "# effective shape: direction (unit), azimuth angle [rad], passage "
         "rate theta_bar [time/length], halfwidth, boundary point "
         "[length]\n";
  out << "dir_x,dir_y,dir_z,angle,theta_bar,halfwidth,vx,vy,vz\n";
  for (size_t i = 0; i < shape.directions.size(); ++i) {
    const Vec& e = shape.directions[i];
    const Vec& v = shape.vertices[i];
    out << e[0] << ',' << e[1] << ',' << e[2] << ','
        << std::atan2(e[1], e[0]) << ',' << shape.theta_bar[i] << ','
        << shape.halfwidth[i] << ',' << v[0] << ',' << v[1] << ',' << v[2]
        << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_H_csv(const EffectiveShape& shape, int count,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << std::setprecision(17);
  out << "# support function on a fresh direction grid: H [length/time] "
         "is the max of p . v over shape boundary points\n";
  out << "p_x,p_y,p_z,H\n";
  for (const Vec& p : direction_grid(shape.dim, count))
    out << p[0] << ',' << p[1] << ',' << p[2] << ','
        << effective_H(shape, p) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace gfront
