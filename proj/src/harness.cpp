#include "gfront/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "gfront/environment.hpp"
#include "gfront/flux.hpp"
#include "gfront/front.hpp"
#include "gfront/grid.hpp"
#include "gfront/homog.hpp"
#include "gfront/percolation.hpp"
#include "gfront/shape.hpp"
#include "gfront/stats.hpp"

namespace gfront {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

/// A budget cap was hit; the run stops claiming seeds and flags truncation.
/// Distinct from ConfigError (user mistake) and plain exceptions (bugs).
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

/// Shortest round-trip decimal: values land in CSV rows and column names, so
/// the same double must always print the same bytes.
std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size())
    throw ConfigError("key '" + key + "': expected a number, got '" + t + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

/// FNV-1a over the sorted key=value listing: stable under reordering because
/// the map iterates in key order.
uint64_t fnv1a(const std::string& s, uint64_t h) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// ---------------------------------------------------------------------------
// Experiment definitions. Each experiment declares its allowed keys, its
// record columns (with unit annotations), a per-seed observable vector that
// depends only on (config, seed), and its summary statistics.
// ---------------------------------------------------------------------------

const std::vector<std::string> kExperiments = {
    "waiting-time-tail", "flux-tail",  "cluster-stats",
    "shape-estimate",    "homog-rate", "skeleton-validate"};

const std::vector<std::string> kCommonKeys = {
    "experiment",       "dim",          "amplitude", "div_knob",
    "budget_wall_seconds", "budget_cells"};

std::vector<std::string> allowed_keys(const std::string& experiment) {
  std::vector<std::string> keys = kCommonKeys;
  auto add = [&keys](std::initializer_list<const char*> more) {
    for (const char* k : more) keys.push_back(k);
  };
  if (experiment == "waiting-time-tail")
    add({"grid_h", "t_cap", "tail_smin", "tail_smax"});
  else if (experiment == "flux-tail")
    add({"R1", "eps_flux", "R0_list", "radius_steps", "flux_budget",
         "quad_order"});
  else if (experiment == "cluster-stats")
    add({"p", "R", "n_bad"});
  else if (experiment == "shape-estimate")
    add({"grid_h", "dirs", "radii", "pure_recip", "bootstrap"});
  else if (experiment == "homog-rate")
    add({"grid_h", "T", "eps_list", "px", "py", "pz", "shape_dirs",
         "shape_seeds", "shape_radii", "shape_grid_h", "radius_hint"});
  else if (experiment == "skeleton-validate")
    add({"p", "pair_dist"});
  else
    throw ConfigError("key 'experiment': unknown experiment '" + experiment +
                      "'");
  return keys;
}

EnvParams env_params(const Config& cfg) {
  EnvParams p;
  p.dim = static_cast<int>(cfg.get_int("dim", 2));
  p.amplitude = cfg.get_double("amplitude", 2.0);
  p.div_knob = cfg.get_double("div_knob", 0.0);
  p.validate();
  return p;
}

void require_cells(double cells, const Config& cfg) {
  double cap = cfg.get_double("budget_cells", 64e6);
  if (cells > cap)
    throw BudgetError("grid of " + format_double(cells) +
                      " cells exceeds budget_cells = " + format_double(cap));
}

std::vector<std::string> columns_for(const Config& cfg) {
  const std::string exp = cfg.get_string("experiment");
  std::vector<std::string> cols;
  if (exp == "waiting-time-tail") {
    cols = {"W (time)"};
  } else if (exp == "flux-tail") {
    for (double r0 : cfg.get_list("R0_list", {2, 3, 4, 5})) {
      cols.push_back("ok_R0_" + format_double(r0) + " (1)");
      cols.push_back("worst_ratio_R0_" + format_double(r0) + " (1)");
    }
  } else if (exp == "cluster-stats") {
    cols = {"has_open (1)", "cluster_size (sites)", "max_bad (sites)",
            "event (1)", "open_frac (1)"};
  } else if (exp == "shape-estimate") {
    int ndir = static_cast<int>(cfg.get_int("dirs", 16));
    auto radii = cfg.get_list("radii", {4, 8, 12});
    for (int d = 0; d < ndir; ++d)
      for (size_t r = 0; r < radii.size(); ++r)
        cols.push_back("t_d" + std::to_string(d) + "_r" +
                       format_double(radii[r]) + " (time)");
  } else if (exp == "homog-rate") {
    for (double e : cfg.get_list("eps_list", {0.25, 0.125, 0.0625, 0.03125}))
      cols.push_back("err_eps_" + format_double(e) + " (u)");
  } else if (exp == "skeleton-validate") {
    cols = {"valid (1)",          "points (1)",        "detours (1)",
            "gap_max (lattice)",  "closed (sites)",    "dist (lattice)"};
  } else {
    throw ConfigError("key 'experiment': unknown experiment '" + exp + "'");
  }
  return cols;
}

// --- per-seed observables ---------------------------------------------------

std::vector<double> run_waiting_time(const Config& cfg, uint64_t seed) {
  EnvParams p = env_params(cfg);
  double h = cfg.get_double("grid_h", 1.0 / 8.0);
  double t_cap = cfg.get_double("t_cap", 8.0);
  LatticeEnvironment env(seed, p);
  double radius = (1.0 + env.norms().sup_v) * t_cap + 1.5;
  require_cells(std::pow(2.0 * radius / h, p.dim), cfg);
  Grid g = Grid::covering(p.dim, radius, h);
  return {waiting_time(env, g, Vec{}, t_cap)};
}

std::vector<double> run_flux_tail(const Config& cfg, uint64_t seed) {
  EnvParams p = env_params(cfg);
  double R1 = cfg.get_double("R1", 8.0);
  double eps = cfg.get_double("eps_flux", 0.2);
  auto r0s = cfg.get_list("R0_list", {2, 3, 4, 5});
  int steps = static_cast<int>(cfg.get_int("radius_steps", 4));
  auto budget = static_cast<size_t>(cfg.get_int("flux_budget", 200000));
  int quad = static_cast<int>(cfg.get_int("quad_order", 6));
  LatticeEnvironment env(seed, p);
  std::vector<double> out;
  for (double r0 : r0s) {
    FluxEventReport rep = check_flux_event(env, R1, r0, eps, steps, budget,
                                           quad);
    out.push_back(rep.holds ? 1.0 : 0.0);
    out.push_back(rep.worst_ratio);
  }
  return out;
}

std::vector<double> run_cluster_stats(const Config& cfg, uint64_t seed) {
  int dim = static_cast<int>(cfg.get_int("dim", 2));
  double p = cfg.get_double("p", 0.95);
  int R = static_cast<int>(cfg.get_int("R", 12));
  int n = static_cast<int>(cfg.get_int("n_bad", 4));
  int half = R + n;
  IVec lo{-half, -half, dim == 3 ? -half : 0};
  IVec hi{half, half, dim == 3 ? half : 0};
  PercolationField field = synthetic_field(seed, dim, lo, hi, p);
  BigClusterReport rep = big_open_cluster(field, R, n);
  double frac = static_cast<double>(field.open_count()) /
                static_cast<double>(field.size());
  return {rep.has_open ? 1.0 : 0.0, static_cast<double>(rep.cluster.size()),
          static_cast<double>(rep.max_bad_size), rep.event_holds ? 1.0 : 0.0,
          frac};
}

ThetaOptions theta_options(const Config& cfg) {
  ThetaOptions opts;
  opts.grid_h = cfg.get_double("grid_h", 1.0 / 8.0);
  opts.pure_recip = cfg.get_int("pure_recip", 0) != 0;
  opts.bootstrap = static_cast<int>(cfg.get_int("bootstrap", 200));
  return opts;
}

std::vector<double> run_shape_estimate(const Config& cfg, uint64_t seed) {
  EnvParams p = env_params(cfg);
  int ndir = static_cast<int>(cfg.get_int("dirs", 16));
  auto radii = cfg.get_list("radii", {4, 8, 12});
  ThetaOptions opts = theta_options(cfg);
  double rmax = radii.empty() ? 0.0 : radii.back();
  require_cells(std::pow(2.0 * (1.25 * rmax + 4.0) / opts.grid_h, p.dim), cfg);
  auto dirs = direction_grid(p.dim, ndir);
  uint64_t seeds[1] = {seed};
  ThetaMatrix m = measure_theta(p, seeds, dirs, radii, opts);
  std::vector<double> out;
  out.reserve(dirs.size() * radii.size());
  for (size_t d = 0; d < dirs.size(); ++d)
    for (size_t r = 0; r < radii.size(); ++r) out.push_back(m.at(0, d, r));
  return out;
}

/// The reference shape for homog-rate comes from its own fixed seed block,
/// independent of the seed range being run, so split ranges and reruns see
/// the identical effective shape.
EffectiveShape homog_reference_shape(const Config& cfg) {
  EnvParams p = env_params(cfg);
  int ndir = static_cast<int>(cfg.get_int("shape_dirs", 32));
  auto radii = cfg.get_list("shape_radii", {4, 8, 12});
  int nseed = static_cast<int>(cfg.get_int("shape_seeds", 8));
  ThetaOptions opts;
  opts.grid_h = cfg.get_double("shape_grid_h", 1.0 / 8.0);
  std::vector<uint64_t> seeds(static_cast<size_t>(nseed));
  for (size_t i = 0; i < seeds.size(); ++i) seeds[i] = 1000000000ull + i;
  auto dirs = direction_grid(p.dim, ndir);
  ThetaMatrix m = measure_theta(p, seeds, dirs, radii, opts);
  std::vector<double> tb(dirs.size()), hw(dirs.size());
  for (size_t d = 0; d < dirs.size(); ++d) {
    ThetaEstimate est = estimate_theta_bar(m, d, opts);
    tb[d] = est.theta_bar;
    hw[d] = est.halfwidth;
  }
  return build_shape(dirs, tb, hw);
}

InitialData homog_u0(const Config& cfg) {
  Vec p{cfg.get_double("px", 1.0), cfg.get_double("py", 0.0),
        cfg.get_double("pz", 0.0)};
  return InitialData::linear(p);
}

std::vector<double> run_homog_rate(const Config& cfg, uint64_t seed,
                                   const EffectiveShape& shape) {
  EnvParams p = env_params(cfg);
  double T = cfg.get_double("T", 8.0);
  auto eps_list = cfg.get_list("eps_list", {0.25, 0.125, 0.0625, 0.03125});
  MicroOptions opts;
  opts.grid_h = cfg.get_double("grid_h", 0.25);
  opts.radius_hint = cfg.get_double("radius_hint", 1.5);
  InitialData u0 = homog_u0(cfg);
  LatticeEnvironment env(seed, p);

  // Probe lattice shared with the in-module rate experiment: one point per
  // seed keyed by seed value, eight probe times up to T.
  const size_t npts = 32;
  auto dirs = direction_grid(p.dim, static_cast<int>(npts));
  std::vector<Vec> pts(npts);
  for (size_t k = 0; k < npts; ++k) {
    double frac = (static_cast<double>(k) + 0.5) / static_cast<double>(npts);
    pts[k] = (0.75 * T * std::pow(frac, 1.0 / p.dim)) * dirs[k];
  }
  const Vec& x = pts[seed % npts];
  std::vector<double> times(8);
  for (size_t j = 0; j < times.size(); ++j)
    times[j] = T * static_cast<double>(j + 1) / 8.0;
  std::vector<double> ubar(times.size());
  for (size_t j = 0; j < times.size(); ++j)
    ubar[j] = solve_u_bar(shape, u0, times[j], x);

  std::vector<double> out;
  for (double eps : eps_list) {
    double tau = times.back() / eps;
    double cap = (1.0 + env.norms().sup_v) * tau + 4.0;
    require_cells(std::pow(2.0 * cap / opts.grid_h, p.dim), cfg);
    std::vector<double> prof = solve_u_eps_profile(env, u0, eps, times, x,
                                                   opts);
    double sup = 0.0;
    for (size_t j = 0; j < times.size(); ++j)
      sup = std::max(sup, std::abs(prof[j] - ubar[j]));
    out.push_back(sup);
  }
  return out;
}

/// Cube cover of a segment: sites v whose closed unit cube [v - 1/2, v + 1/2]
/// meets the straight line from x to y. The l-inf distance from a site to the
/// segment is convex piecewise-linear in the parameter, so a ternary search
/// evaluates it exactly enough for the 1/2 threshold.
std::vector<IVec> segment_cover(const Vec& x, const Vec& y, int dim) {
  auto linf_to_segment = [&](const IVec& v) {
    auto at = [&](double t) {
      double m = 0.0;
      for (int i = 0; i < dim; ++i)
        m = std::max(m, std::abs(x[i] + t * (y[i] - x[i]) - v[i]));
      return m;
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
      double a = lo + (hi - lo) / 3.0, b = hi - (hi - lo) / 3.0;
      if (at(a) < at(b))
        hi = b;
      else
        lo = a;
    }
    return at(0.5 * (lo + hi));
  };
  IVec blo{}, bhi{};
  for (int i = 0; i < dim; ++i) {
    blo[i] = static_cast<int>(std::floor(std::min(x[i], y[i]) - 0.5));
    bhi[i] = static_cast<int>(std::ceil(std::max(x[i], y[i]) + 0.5));
  }
  std::vector<IVec> cover;
  IVec v{};
  int zlo = dim == 3 ? blo[2] : 0, zhi = dim == 3 ? bhi[2] : 0;
  for (v[2] = zlo; v[2] <= zhi; ++v[2])
    for (v[1] = blo[1]; v[1] <= bhi[1]; ++v[1])
      for (v[0] = blo[0]; v[0] <= bhi[0]; ++v[0])
        if (linf_to_segment(v) <= 0.5 + 1e-9) cover.push_back(v);
  return cover;
}

std::vector<double> run_skeleton_validate(const Config& cfg, uint64_t seed) {
  int dim = static_cast<int>(cfg.get_int("dim", 2));
  double p = cfg.get_double("p", 0.95);
  double dist = cfg.get_double("pair_dist", 40.0);
  int half = static_cast<int>(std::ceil(dist / 2.0)) + 10;
  IVec lo{-half, -half, dim == 3 ? -half : 0};
  IVec hi{half, half, dim == 3 ? half : 0};
  PercolationField field = synthetic_field(seed, dim, lo, hi, p);

  // Endpoint pair: separation just under pair_dist along e1, jittered
  // transversely so paths sample different rows of the field.
  Rng rng(hash_combine(seed, 0x736b656cull));
  double l0 = dist / 2.0 - 2.0;
  Vec x{-l0, rng.uniform(-2.0, 2.0), 0.0};
  Vec y{l0, rng.uniform(-2.0, 2.0), 0.0};
  if (dim == 3) {
    x[2] = rng.uniform(-2.0, 2.0);
    y[2] = rng.uniform(-2.0, 2.0);
  }

  SkeletonPath path;
  try {
    path = skeleton_path(field, x, y);
  } catch (const std::invalid_argument&) {
    // no open cluster serves both endpoints: a valid negative sample
    return {0.0, 0.0, 0.0, 0.0, 0.0, norm(y - x)};
  }
  double gap_max = 0.0;
  for (size_t i = 0; i + 1 < path.points.size(); ++i)
    gap_max = std::max(gap_max, norm(path.points[i + 1] - path.points[i]));

  // cl(A) for the skeleton length bound, with A the cube cover of the
  // segment: sites whose closed unit cube meets the straight line x -> y.
  size_t closed = closed_hull(field, segment_cover(x, y, dim)).size();
  return {1.0,
          static_cast<double>(path.points.size()),
          static_cast<double>(path.detours),
          gap_max,
          static_cast<double>(closed),
          norm(y - x)};
}

// --- summary fits -----------------------------------------------------------

size_t column_index(const std::vector<std::string>& columns,
                    const std::string& name) {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end())
    throw std::runtime_error("missing expected column '" + name + "'");
  return static_cast<size_t>(it - columns.begin());
}

std::vector<double> column_values(const std::vector<std::vector<double>>& rows,
                                  size_t idx) {
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r.at(idx));
  return v;
}

void summarize_waiting(const Config& cfg,
                       const std::vector<std::string>& columns,
                       const std::vector<std::vector<double>>& rows,
                       std::map<std::string, double>& st) {
  auto w = column_values(rows, column_index(columns, "W (time)"));
  std::vector<double> finite;
  for (double v : w)
    if (std::isfinite(v)) finite.push_back(v);
  st["censored"] = static_cast<double>(w.size() - finite.size());
  st["W_mean"] = mean_of(finite);
  if (finite.size() >= 2) {
    SurvivalCurve s = survival_curve(finite);
    TailFit fit = fit_exp_power_tail(s, cfg.get_double("tail_smin", 0.002),
                                     cfg.get_double("tail_smax", 0.5));
    st["tail_a"] = fit.a;
    st["tail_b"] = fit.b;
    st["tail_r2"] = fit.r2;
    st["tail_points"] = static_cast<double>(fit.points);
  }
}

void summarize_flux(const Config& cfg, const std::vector<std::string>& columns,
                    const std::vector<std::vector<double>>& rows,
                    std::map<std::string, double>& st) {
  int dim = static_cast<int>(cfg.get_int("dim", 2));
  auto r0s = cfg.get_list("R0_list", {2, 3, 4, 5});
  std::vector<double> xs, ys;
  for (double r0 : r0s) {
    std::string tag = format_double(r0);
    auto ok = column_values(rows, column_index(columns, "ok_R0_" + tag +
                                                            " (1)"));
    double fails = 0.0;
    for (double v : ok) fails += (v == 0.0) ? 1.0 : 0.0;
    double prob = ok.empty() ? 0.0 : fails / static_cast<double>(ok.size());
    st["fail_prob_R0_" + tag] = prob;
    if (prob > 0.0) {
      xs.push_back(std::pow(r0, dim - 1));
      ys.push_back(std::log(prob));
    }
  }
  if (xs.size() >= 2) {
    LinFit f = fit_linear(xs, ys);
    st["flux_fit_slope"] = f.slope;
    st["flux_fit_intercept"] = f.intercept;
    st["flux_fit_r2"] = f.r2;
    st["flux_fit_points"] = static_cast<double>(f.n);
  }
}

void summarize_cluster(const std::vector<std::string>& columns,
                       const std::vector<std::vector<double>>& rows,
                       std::map<std::string, double>& st) {
  st["event_prob"] =
      mean_of(column_values(rows, column_index(columns, "event (1)")));
  st["has_open_prob"] =
      mean_of(column_values(rows, column_index(columns, "has_open (1)")));
  st["cluster_size_mean"] = mean_of(
      column_values(rows, column_index(columns, "cluster_size (sites)")));
  st["max_bad_mean"] =
      mean_of(column_values(rows, column_index(columns, "max_bad (sites)")));
  st["open_frac_mean"] =
      mean_of(column_values(rows, column_index(columns, "open_frac (1)")));
}

/// Rebuilds the ThetaMatrix from the record table (rows may come from any
/// union of seed ranges) and reruns the per-direction extrapolation.
void summarize_shape(const Config& cfg, const std::vector<std::string>& columns,
                     const std::vector<uint64_t>& seeds,
                     const std::vector<std::vector<double>>& rows,
                     std::map<std::string, double>& st,
                     EffectiveShape* shape_out) {
  EnvParams p = env_params(cfg);
  int ndir = static_cast<int>(cfg.get_int("dirs", 16));
  auto radii = cfg.get_list("radii", {4, 8, 12});
  ThetaOptions opts = theta_options(cfg);
  ThetaMatrix m;
  m.seeds = seeds;
  m.directions = direction_grid(p.dim, ndir);
  m.radii = radii;
  m.grid_h = opts.grid_h;
  m.theta.reserve(rows.size() * m.directions.size() * radii.size());
  for (const auto& row : rows)
    for (int d = 0; d < ndir; ++d)
      for (size_t r = 0; r < radii.size(); ++r)
        m.theta.push_back(row.at(column_index(
            columns, "t_d" + std::to_string(d) + "_r" +
                         format_double(radii[r]) + " (time)")));
  if (seeds.size() < 2 || radii.size() < 2) {
    st["fit_skipped"] = 1.0;  // extrapolation needs >= 2 seeds and radii
    return;
  }
  std::vector<double> tb(m.directions.size()), hw(m.directions.size());
  double flags = 0.0;
  for (size_t d = 0; d < m.directions.size(); ++d) {
    ThetaEstimate est = estimate_theta_bar(m, d, opts);
    tb[d] = est.theta_bar;
    hw[d] = est.halfwidth;
    flags += est.residual_flag ? 1.0 : 0.0;
  }
  st["theta_bar_mean"] = mean_of(tb);
  st["theta_bar_min"] = *std::min_element(tb.begin(), tb.end());
  st["theta_bar_max"] = *std::max_element(tb.begin(), tb.end());
  st["halfwidth_max"] = *std::max_element(hw.begin(), hw.end());
  st["residual_flags"] = flags;
  if (shape_out) *shape_out = build_shape(m.directions, tb, hw);
}

void summarize_homog(const Config& cfg, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows,
                     std::map<std::string, double>& st) {
  double T = cfg.get_double("T", 8.0);
  auto eps_list = cfg.get_list("eps_list", {0.25, 0.125, 0.0625, 0.03125});
  std::vector<double> xs, ys;
  for (double e : eps_list) {
    auto errs = column_values(
        rows, column_index(columns, "err_eps_" + format_double(e) + " (u)"));
    double m = mean_of(errs);
    st["mean_err_eps_" + format_double(e)] = m;
    if (m > 0.0) {
      double lg = std::log(T / e);
      xs.push_back(std::log(T * e));
      ys.push_back(std::log(m / (lg * lg)));
    }
  }
  if (xs.size() >= 3) {
    LinFit f = fit_linear(xs, ys);
    st["rate_exponent"] = f.slope;
    st["rate_amplitude"] = std::exp(f.intercept);
    st["rate_r2"] = f.r2;
    double t = student_t_975(static_cast<int>(f.n) - 2);
    st["rate_ci_low"] = f.slope - t * f.slope_se;
    st["rate_ci_high"] = f.slope + t * f.slope_se;
    st["rate_contains_half"] =
        (st["rate_ci_low"] <= 0.5 && 0.5 <= st["rate_ci_high"]) ? 1.0 : 0.0;
  }
}

void summarize_skeleton(const std::vector<std::string>& columns,
                        const std::vector<std::vector<double>>& rows,
                        std::map<std::string, double>& st) {
  auto valid = column_values(rows, column_index(columns, "valid (1)"));
  auto pts = column_values(rows, column_index(columns, "points (1)"));
  auto det = column_values(rows, column_index(columns, "detours (1)"));
  auto gap = column_values(rows, column_index(columns, "gap_max (lattice)"));
  auto closed = column_values(rows, column_index(columns, "closed (sites)"));
  auto dist = column_values(rows, column_index(columns, "dist (lattice)"));
  st["valid_frac"] = mean_of(valid);
  double gmax = 0.0, cmax = 0.0, dsum = 0.0, n = 0.0;
  for (size_t i = 0; i < valid.size(); ++i) {
    if (valid[i] == 0.0) continue;
    gmax = std::max(gmax, gap[i]);
    cmax = std::max(cmax, pts[i] / (4.0 * (dist[i] + closed[i])));
    dsum += det[i];
    n += 1.0;
  }
  st["gap_max"] = gmax;
  st["length_const_max"] = cmax;  // k / (4 (|x-y| + |cl(A)|)), want <= 1
  st["detours_mean"] = n > 0.0 ? dsum / n : 0.0;
}

// --- persistence ------------------------------------------------------------

std::string record_line(uint64_t seed, const std::vector<double>& values) {
  std::string line = std::to_string(seed);
  for (double v : values) {
    line.push_back(',');
    line += format_double(v);
  }
  return line;
}

std::string header_line(const std::vector<std::string>& columns) {
  std::string line = "seed";
  for (const auto& c : columns) {
    line.push_back(',');
    line += c;
  }
  return line;
}

/// Parses a records.csv body: '#' comments, one header, then seed,value
/// rows. Lines are returned verbatim so rewrites are byte-stable.
struct RecordTable {
  std::vector<std::string> columns;
  std::vector<uint64_t> seeds;           // ascending
  std::vector<std::vector<double>> rows;  // parallel to seeds
  std::map<uint64_t, std::string> lines;  // verbatim row text by seed
};

RecordTable read_records(const std::string& path,
                         const std::vector<std::string>& expect_columns) {
  RecordTable t;
  std::ifstream in(path);
  if (!in) return t;
  std::map<uint64_t, std::vector<double>> by_seed;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      saw_header = true;
      auto cols = split(line, ',');
      t.columns.assign(cols.begin() + 1, cols.end());
      if (!expect_columns.empty() && t.columns != expect_columns)
        throw std::runtime_error("records file " + path +
                                 " has mismatched columns for this config");
      continue;
    }
    auto parts = split(line, ',');
    if (parts.size() != t.columns.size() + 1)
      throw std::runtime_error("records file " + path +
                               " has a malformed row: " + line);
    uint64_t seed = std::strtoull(parts[0].c_str(), nullptr, 10);
    std::vector<double> vals;
    vals.reserve(parts.size() - 1);
    for (size_t i = 1; i < parts.size(); ++i)
      vals.push_back(std::strtod(parts[i].c_str(), nullptr));
    t.lines[seed] = line;
    by_seed[seed] = std::move(vals);
  }
  // The maps iterate in seed order, so a hand-merged unsorted file still
  // yields an ascending table.
  for (auto& [seed, vals] : by_seed) {
    t.seeds.push_back(seed);
    t.rows.push_back(std::move(vals));
  }
  return t;
}

void write_config_txt(const Config& cfg, const std::string& path) {
  std::ofstream out(path);
  for (const auto& [k, v] : cfg.entries()) out << k << " = " << v << "\n";
}

void write_summary_txt(const RunSummary& sum, double wall_seconds,
                       const std::string& path) {
  std::ofstream out(path);
  out << std::setprecision(17);
  out << "experiment = " << sum.experiment << "\n";
  out << "digest = " << sum.digest << "\n";
  out << "seeds_done = " << sum.seeds_done << "\n";
  out << "seeds_skipped = " << sum.seeds_skipped << "\n";
  out << "truncated = " << (sum.truncated ? 1 : 0) << "\n";
  for (const auto& [k, v] : sum.stats) out << k << " = " << v << "\n";
  out << "wall_seconds = " << wall_seconds << "\n";
}

/// Atomic replace: write to a temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& body) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << body;
    if (!out) throw std::runtime_error("cannot write " + tmp);
  }
  fs::rename(tmp, path);
}

// --- plots ------------------------------------------------------------------

void write_plots(const Config& cfg, const std::vector<std::string>& columns,
                 const std::vector<uint64_t>& seeds,
                 const std::vector<std::vector<double>>& rows,
                 const std::map<std::string, double>& st,
                 const std::string& dir) {
  const std::string exp = cfg.get_string("experiment");
  (void)seeds;
  if (exp == "waiting-time-tail") {
    auto w = column_values(rows, column_index(columns, "W (time)"));
    std::vector<double> finite;
    for (double v : w)
      if (std::isfinite(v)) finite.push_back(v);
    if (finite.size() < 2) return;
    SurvivalCurve s = survival_curve(finite);
    PlotSeries pts, fit;
    for (size_t i = 0; i < s.level.size(); ++i) {
      if (s.prob[i] <= 0.0) continue;
      pts.x.push_back(s.level[i]);
      pts.y.push_back(std::log(s.prob[i]));
    }
    auto a = st.find("tail_a");
    auto b = st.find("tail_b");
    if (a != st.end() && b != st.end() && a->second > 0.0) {
      for (double lam = s.level.front(); lam <= s.level.back();
           lam += (s.level.back() - s.level.front()) / 64.0) {
        fit.x.push_back(lam);
        fit.y.push_back(-a->second * std::pow(lam, b->second));
      }
    }
    write_scatter_svg(dir + "/survival.svg", "waiting time tail",
                      "W (time)", "log P[W >= w]", pts, fit);
  } else if (exp == "flux-tail") {
    int dim = static_cast<int>(cfg.get_int("dim", 2));
    PlotSeries pts, fit;
    for (double r0 : cfg.get_list("R0_list", {2, 3, 4, 5})) {
      auto it = st.find("fail_prob_R0_" + format_double(r0));
      if (it == st.end() || it->second <= 0.0) continue;
      pts.x.push_back(std::pow(r0, dim - 1));
      pts.y.push_back(std::log(it->second));
    }
    auto sl = st.find("flux_fit_slope");
    auto ic = st.find("flux_fit_intercept");
    if (sl != st.end() && ic != st.end() && pts.x.size() >= 2) {
      fit.x = {pts.x.front(), pts.x.back()};
      fit.y = {ic->second + sl->second * pts.x.front(),
               ic->second + sl->second * pts.x.back()};
    }
    write_scatter_svg(dir + "/fluxtail.svg", "flux event failure tail",
                      "R0^(d-1) (1)", "log P[fail]", pts, fit);
  } else if (exp == "cluster-stats") {
    auto sizes = column_values(
        rows, column_index(columns, "cluster_size (sites)"));
    if (sizes.size() < 2) return;
    SurvivalCurve s = survival_curve(sizes);
    PlotSeries pts;
    for (size_t i = 0; i < s.level.size(); ++i) {
      if (s.prob[i] <= 0.0) continue;
      pts.x.push_back(s.level[i]);
      pts.y.push_back(std::log(s.prob[i]));
    }
    write_scatter_svg(dir + "/sizes.svg", "largest open cluster size",
                      "sites (1)", "log P[size >= s]", pts, {});
  } else if (exp == "homog-rate") {
    double T = cfg.get_double("T", 8.0);
    PlotSeries pts, fit;
    for (double e : cfg.get_list("eps_list", {0.25, 0.125, 0.0625, 0.03125})) {
      auto it = st.find("mean_err_eps_" + format_double(e));
      if (it == st.end() || it->second <= 0.0) continue;
      double lg = std::log(T / e);
      pts.x.push_back(std::log(T * e));
      pts.y.push_back(std::log(it->second / (lg * lg)));
    }
    auto sl = st.find("rate_exponent");
    auto am = st.find("rate_amplitude");
    if (sl != st.end() && am != st.end() && pts.x.size() >= 2) {
      double lo = *std::min_element(pts.x.begin(), pts.x.end());
      double hi = *std::max_element(pts.x.begin(), pts.x.end());
      fit.x = {lo, hi};
      fit.y = {std::log(am->second) + sl->second * lo,
               std::log(am->second) + sl->second * hi};
    }
    write_scatter_svg(dir + "/rate.svg", "homogenization rate",
                      "log(T eps)", "log(sup err / log^2(T/eps))", pts, fit);
  } else if (exp == "skeleton-validate") {
    PlotSeries pts, line;
    size_t iv = column_index(columns, "valid (1)");
    size_t ip = column_index(columns, "points (1)");
    size_t ic = column_index(columns, "closed (sites)");
    size_t id = column_index(columns, "dist (lattice)");
    for (const auto& r : rows) {
      if (r[iv] == 0.0) continue;
      pts.x.push_back(r[id] + r[ic]);
      pts.y.push_back(r[ip]);
    }
    if (!pts.x.empty()) {
      double hi = *std::max_element(pts.x.begin(), pts.x.end());
      line.x = {0.0, hi};
      line.y = {0.0, 4.0 * hi};
    }
    write_scatter_svg(dir + "/lengths.svg", "skeleton length bound",
                      "|x-y| + |cl(A)| (1)", "points (1)", pts, line);
  }
  // shape-estimate plots are drawn from the rebuilt shape by the caller.
}

void write_shape_outputs(const Config& cfg,
                         const std::vector<std::string>& columns,
                         const std::vector<uint64_t>& seeds,
                         const std::vector<std::vector<double>>& rows,
                         const std::string& dir) {
  if (cfg.get_string("experiment") != "shape-estimate") return;
  std::map<std::string, double> st;
  EffectiveShape shape;
  summarize_shape(cfg, columns, seeds, rows, st, &shape);
  if (st.count("fit_skipped")) return;
  write_shape_csv(shape, dir + "/shape.csv");
  write_H_csv(shape, 128, dir + "/support.csv");
  PlotSeries pts, hull;
  for (const Vec& v : shape.vertices) {
    pts.x.push_back(v[0]);
    pts.y.push_back(v[1]);
  }
  for (const Vec& v : shape.hull_d2) {
    hull.x.push_back(v[0]);
    hull.y.push_back(v[1]);
  }
  if (!hull.x.empty()) {  // close the polygon
    hull.x.push_back(hull.x.front());
    hull.y.push_back(hull.y.front());
  }
  write_scatter_svg(dir + "/shape.svg", "effective shape boundary", "x", "y",
                    pts, hull);
}

}  // namespace

// --- Config -----------------------------------------------------------------

Config Config::parse_text(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) +
                        ": expected key = value, got '" + s + "'");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    for (char c : key)
      if (std::isspace(static_cast<unsigned char>(c)))
        throw ConfigError("key '" + key + "': keys are single tokens");
    if (cfg.kv_.count(key)) throw ConfigError("duplicate key '" + key + "'");
    cfg.kv_[key] = value;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream body;
  body << in.rdbuf();
  return parse_text(body.str());
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::get_string(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

std::string Config::get_string(const std::string& key,
                               const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  return parse_double(key, get_string(key));
}

double Config::get_double(const std::string& key, double fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : parse_double(key, it->second);
}

int64_t Config::get_int(const std::string& key) const {
  const std::string t = trim(get_string(key));
  char* end = nullptr;
  long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size())
    throw ConfigError("key '" + key + "': expected an integer, got '" + t +
                      "'");
  return v;
}

int64_t Config::get_int(const std::string& key, int64_t fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::vector<double> Config::get_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& item : split(get_string(key), ',')) {
    if (trim(item).empty())
      throw ConfigError("key '" + key + "': empty list item");
    out.push_back(parse_double(key, item));
  }
  return out;
}

std::vector<double> Config::get_list(
    const std::string& key, const std::vector<double>& fallback) const {
  return has(key) ? get_list(key) : fallback;
}

void Config::set(const std::string& key, const std::string& value) {
  kv_[key] = value;
}

std::string Config::digest() const {
  uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& [k, v] : kv_) h = fnv1a(k + "=" + v + "\n", h);
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void Config::restrict_keys(const std::vector<std::string>& allowed) const {
  for (const auto& [k, v] : kv_) {
    (void)v;
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ConfigError("unknown key '" + k + "' for experiment " +
                        get_string("experiment", "?"));
  }
}

// --- summaries --------------------------------------------------------------

std::map<std::string, double> summarize_records(
    const Config& cfg, const std::vector<std::string>& columns,
    const std::vector<uint64_t>& seeds,
    const std::vector<std::vector<double>>& rows) {
  std::map<std::string, double> st;
  st["seeds"] = static_cast<double>(seeds.size());
  if (rows.empty()) return st;
  const std::string exp = cfg.get_string("experiment");
  if (exp == "waiting-time-tail")
    summarize_waiting(cfg, columns, rows, st);
  else if (exp == "flux-tail")
    summarize_flux(cfg, columns, rows, st);
  else if (exp == "cluster-stats")
    summarize_cluster(columns, rows, st);
  else if (exp == "shape-estimate")
    summarize_shape(cfg, columns, seeds, rows, st, nullptr);
  else if (exp == "homog-rate")
    summarize_homog(cfg, columns, rows, st);
  else if (exp == "skeleton-validate")
    summarize_skeleton(columns, rows, st);
  else
    throw ConfigError("key 'experiment': unknown experiment '" + exp + "'");
  return st;
}

// --- runner -----------------------------------------------------------------

RunSummary run_experiment(const Config& cfg_in, const std::string& out_dir,
                          uint64_t seed_begin, uint64_t seed_end,
                          int workers) {
  Config cfg = cfg_in;
  const std::string exp = cfg.get_string("experiment");
  cfg.restrict_keys(allowed_keys(exp));
  if (seed_end < seed_begin)
    throw ConfigError("seed range [" + std::to_string(seed_begin) + ", " +
                      std::to_string(seed_end) + ") is reversed");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  const double budget_wall = cfg.get_double("budget_wall_seconds", 1e9);
  const auto t_start = Clock::now();
  auto wall = [&t_start]() {
    return std::chrono::duration<double>(Clock::now() - t_start).count();
  };

  RunSummary sum;
  sum.experiment = exp;
  sum.digest = cfg.digest();
  sum.columns = columns_for(cfg);
  fs::path dir = fs::path(out_dir) / (exp + "-" + sum.digest);
  fs::create_directories(dir);
  sum.dir = dir.string();
  const std::string records_path = (dir / "records.csv").string();
  write_config_txt(cfg, (dir / "config.txt").string());

  // Shared reference data computed once per run (never per seed).
  EffectiveShape ref_shape;
  if (exp == "homog-rate") ref_shape = homog_reference_shape(cfg);

  // Idempotence: seeds already on disk are skipped, their rows reused.
  RecordTable existing = read_records(records_path, sum.columns);
  std::vector<uint64_t> tasks;
  for (uint64_t s = seed_begin; s < seed_end; ++s) {
    if (existing.lines.count(s))
      ++sum.seeds_skipped;
    else
      tasks.push_back(s);
  }

  auto run_one = [&](uint64_t seed) -> std::vector<double> {
    if (exp == "waiting-time-tail") return run_waiting_time(cfg, seed);
    if (exp == "flux-tail") return run_flux_tail(cfg, seed);
    if (exp == "cluster-stats") return run_cluster_stats(cfg, seed);
    if (exp == "shape-estimate") return run_shape_estimate(cfg, seed);
    if (exp == "homog-rate") return run_homog_rate(cfg, seed, ref_shape);
    return run_skeleton_validate(cfg, seed);
  };

  // Worker pool over seeds: claims ascend through an atomic counter, results
  // land in per-task slots, and the main thread commits them in task order
  // (append + flush per seed) so the file bytes never depend on the worker
  // count. The last worker to exit tombstones unclaimed tasks so the
  // committer cannot block on a seed nobody will run.
  std::mutex mu;
  std::condition_variable cv;
  std::vector<std::optional<std::vector<double>>> slot(tasks.size());
  std::vector<char> state(tasks.size(), 0);  // 0 pending, 1 done, 2 skipped
  std::atomic<size_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  int active = workers;

  auto worker = [&]() {
    for (;;) {
      if (stop.load()) break;
      size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      char verdict = 2;
      std::vector<double> vals;
      if (wall() > budget_wall) {
        stop.store(true);
      } else {
        try {
          vals = run_one(tasks[i]);
          verdict = 1;
        } catch (const BudgetError&) {
          stop.store(true);
        } catch (...) {
          std::lock_guard<std::mutex> lk(mu);
          if (!error) error = std::current_exception();
          stop.store(true);
        }
      }
      {
        std::lock_guard<std::mutex> lk(mu);
        slot[i] = std::move(vals);
        state[i] = verdict;
      }
      cv.notify_all();
      if (verdict == 2) break;
    }
    std::lock_guard<std::mutex> lk(mu);
    if (--active == 0)
      for (auto& s : state)
        if (s == 0) s = 2;
    cv.notify_all();
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);

  std::map<uint64_t, std::string> fresh_lines;
  {
    std::ofstream out(records_path, std::ios::binary | std::ios::app);
    if (existing.lines.empty() && existing.columns.empty()) {
      out << "# experiment = " << exp << "\n";
      out << "# config = " << sum.digest << "\n";
      out << header_line(sum.columns) << "\n";
      out.flush();
    }
    for (size_t i = 0; i < tasks.size(); ++i) {
      std::unique_lock<std::mutex> lk(mu);
      cv.wait(lk, [&] { return state[i] != 0; });
      if (state[i] != 1) {
        sum.truncated = true;
        continue;
      }
      std::string line = record_line(tasks[i], *slot[i]);
      lk.unlock();
      out << line << "\n";
      out.flush();  // crash loses at most the in-flight seed
      fresh_lines[tasks[i]] = std::move(line);
      ++sum.seeds_done;
    }
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);

  // Merge-equivalence rewrite: fold the fresh rows into the prior table and
  // rewrite sorted by seed, so any union of seed ranges converges to the
  // same bytes as a one-shot run.
  for (auto& [seed, line] : fresh_lines) existing.lines[seed] = line;
  std::string body = "# experiment = " + exp + "\n# config = " + sum.digest +
                     "\n" + header_line(sum.columns) + "\n";
  for (const auto& [seed, line] : existing.lines) body += line + "\n";
  write_file_atomic(records_path, body);

  // Summaries and plots from the full on-disk table (pre-existing rows count).
  RecordTable all = read_records(records_path, sum.columns);
  sum.stats = summarize_records(cfg, sum.columns, all.seeds, all.rows);
  write_plots(cfg, sum.columns, all.seeds, all.rows, sum.stats, sum.dir);
  write_shape_outputs(cfg, sum.columns, all.seeds, all.rows, sum.dir);
  write_summary_txt(sum, wall(), (dir / "summary.txt").string());
  return sum;
}

// --- report -----------------------------------------------------------------

std::string build_report(const std::string& results_dir) {
  std::vector<fs::path> runs;
  if (fs::exists(results_dir))
    for (const auto& entry : fs::directory_iterator(results_dir))
      if (entry.is_directory() && fs::exists(entry.path() / "records.csv"))
        runs.push_back(entry.path());
  if (runs.empty())
    throw std::runtime_error("no completed runs under '" + results_dir + "'");
  std::sort(runs.begin(), runs.end());

  std::ostringstream rep;
  rep << std::setprecision(10);
  for (const fs::path& dir : runs) {
    Config cfg = Config::parse_file((dir / "config.txt").string());
    const std::string exp = cfg.get_string("experiment");
    std::vector<std::string> expect = columns_for(cfg);
    RecordTable t = read_records((dir / "records.csv").string(), {});
    for (const auto& c : expect)
      if (std::find(t.columns.begin(), t.columns.end(), c) == t.columns.end())
        throw std::runtime_error("missing expected column '" + c + "' in " +
                                 (dir / "records.csv").string());
    rep << "== " << exp << " [" << cfg.digest() << "] ==\n";
    rep << "seeds = " << t.seeds.size() << "\n";
    if (t.seeds.size() < 2) rep << "single seed: no confidence intervals\n";
    for (size_t c = 0; c < t.columns.size(); ++c) {
      auto vals = column_values(t.rows, c);
      std::vector<double> finite;
      for (double v : vals)
        if (std::isfinite(v)) finite.push_back(v);
      double m = mean_of(finite);
      double sd = sd_of(finite, m);
      rep << "  " << t.columns[c] << ": mean = " << m << ", sd = " << sd;
      if (finite.size() >= 2) {
        double half = student_t_975(static_cast<int>(finite.size()) - 1) *
                      sd / std::sqrt(static_cast<double>(finite.size()));
        rep << ", ci95 = [" << (m - half) << ", " << (m + half) << "]";
      }
      if (finite.size() != vals.size())
        rep << ", censored = " << (vals.size() - finite.size());
      rep << "\n";
    }
    auto st = summarize_records(cfg, t.columns, t.seeds, t.rows);
    for (const auto& [k, v] : st)
      rep << "  " << k << " = " << std::setprecision(17) << v
          << std::setprecision(10) << "\n";
    write_plots(cfg, t.columns, t.seeds, t.rows, st, dir.string());
    write_shape_outputs(cfg, t.columns, t.seeds, t.rows, dir.string());
    rep << "\n";
  }
  std::string text = rep.str();
  write_file_atomic((fs::path(results_dir) / "report.txt").string(), text);
  return text;
}

// --- SVG --------------------------------------------------------------------

void write_scatter_svg(const std::string& path, const std::string& title,
                       const std::string& xlabel, const std::string& ylabel,
                       const PlotSeries& points, const PlotSeries& line) {
  const double W = 640, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  auto grow = [&](const PlotSeries& s) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  };
  grow(points);
  grow(line);
  if (!std::isfinite(xlo)) {
    xlo = 0;
    xhi = 1;
    ylo = 0;
    yhi = 1;
  }
  if (xhi - xlo < 1e-12) xhi = xlo + 1;
  if (yhi - ylo < 1e-12) yhi = ylo + 1;
  auto px = [&](double x) {
    return ml + (x - xlo) / (xhi - xlo) * (W - ml - mr);
  };
  auto py = [&](double y) {
    return H - mb - (y - ylo) / (yhi - ylo) * (H - mt - mb);
  };
  std::ostringstream os;
  os << std::setprecision(8);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
     << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H
     << "\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        "font-size=\"16\">" << title << "</text>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr
     << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
     << "\" y2=\"" << H - mb << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    double fx = xlo + (xhi - xlo) * k / 4.0;
    double fy = ylo + (yhi - ylo) * k / 4.0;
    os << "<text x=\"" << px(fx) << "\" y=\"" << H - mb + 18
       << "\" text-anchor=\"middle\" font-size=\"11\">" << std::setprecision(4)
       << fx << std::setprecision(8) << "</text>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << py(fy) + 4
       << "\" text-anchor=\"end\" font-size=\"11\">" << std::setprecision(4)
       << fy << std::setprecision(8) << "</text>\n";
  }
  os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 12
     << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel
     << "</text>\n";
  os << "<text x=\"16\" y=\"" << (mt + H - mb) / 2
     << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
     << (mt + H - mb) / 2 << ")\">" << ylabel << "</text>\n";
  if (line.x.size() >= 2) {
    os << "<polyline fill=\"none\" stroke=\"#c0392b\" stroke-width=\"1.5\" "
          "points=\"";
    for (size_t i = 0; i < line.x.size(); ++i)
      os << px(line.x[i]) << "," << py(line.y[i]) << " ";
    os << "\"/>\n";
  }
  for (size_t i = 0; i < points.x.size(); ++i) {
    if (!std::isfinite(points.x[i]) || !std::isfinite(points.y[i])) continue;
    os << "<circle cx=\"" << px(points.x[i]) << "\" cy=\"" << py(points.y[i])
       << "\" r=\"3\" fill=\"#2980b9\"/>\n";
  }
  os << "</svg>\n";
  write_file_atomic(path, os.str());
}

}  // namespace gfront
