#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gfront/environment.hpp"
#include "gfront/geometry.hpp"
#include "gfront/grid.hpp"
#include "gfront/shape.hpp"

namespace gfront {

/// Lipschitz initial data for the macroscopic problem. Presets keep enough
/// structure that the effective solver can evaluate suprema exactly where the
/// geometry allows (linear and max-of-linear data).
struct InitialData {
  enum class Kind { linear, cone, max_linear };
  Kind kind = Kind::linear;
  std::vector<Vec> ps;      // slopes (one for linear, several for max_linear)
  std::vector<double> cs;   // offsets matching ps
  Vec apex;                 // cone center
  double lip = 0.0;         // certified Lipschitz constant

  double operator()(const Vec& x) const;

  static InitialData linear(const Vec& p, double c = 0.0);
  static InitialData cone(const Vec& a);
  static InitialData max_linear(std::span<const Vec> ps,
                                std::span<const double> cs);
};

/// Controls for the microscopic fronts behind the rescaled solver. The
/// covering radius starts at radius_hint * horizon and regrows by grow until
/// the front is certified untruncated at the final probe time.
struct MicroOptions {
  double grid_h = 0.125;
  int stencil_cells = 0;  // 0 -> dimension default
  double radius_hint = 1.5;
  double grow = 1.35;
};

/// Rescaled solution via the control representation: the supremum of u0 over
/// eps * (occupied set at time t/eps of a front seeded at x/eps). One front
/// serves every requested time; times must be positive and increasing.
std::vector<double> solve_u_eps_profile(const Environment& env,
                                        const InitialData& u0, double eps,
                                        std::span<const double> times,
                                        const Vec& x,
                                        const MicroOptions& opts = {});
double solve_u_eps(const Environment& env, const InitialData& u0, double eps,
                   double t, const Vec& x, const MicroOptions& opts = {});

/// Effective solution: the supremum of u0 over x + t * shape. Exact for
/// linear and max-of-linear data through the support function; the cone is
/// sampled on boundary vertices and shrunk copies of them (interior_samples
/// scales per ray; 0 picks a default).
double solve_u_bar(const EffectiveShape& shape, const InitialData& u0,
                   double t, const Vec& x, int interior_samples = 0);

/// Cell-center mask of x + t * shape on g. t = 0 marks only x's cell.
std::vector<uint8_t> rasterize_shape(const Grid& g, const EffectiveShape& shape,
                                     const Vec& x, double t);

/// Exact discrete Hausdorff distance between two nonempty masks on the same
/// grid, in physical units (cell-center point sets, two distance transforms).
double hausdorff(const Grid& g, const std::vector<uint8_t>& a,
                 const std::vector<uint8_t>& b);

/// Normalized shape distance dist_H(R_t(0)/t, S) per time, Monte Carlo over
/// seeds, with a decay fit of the mean against t^{-1/2} log^2 t (exponent is
/// the fitted power of t after removing the log^2 factor; expect about -1/2).
struct ShapeConvergenceReport {
  std::vector<double> times;
  std::vector<double> mean_dist;
  std::vector<double> sd_dist;
  double exponent = 0.0;
  double amplitude = 0.0;
  double r2 = 0.0;
};
ShapeConvergenceReport shape_convergence_experiment(
    const EnvFactory& family, const EffectiveShape& shape,
    std::span<const double> times, std::span<const uint64_t> seeds,
    const MicroOptions& opts = {});

/// Homogenization-rate experiment: per (seed, eps) one front probes several
/// times at one space point drawn from a fixed probe lattice, sup errors
/// |u_eps - u_bar| are aggregated per eps, and the fit removes the paper-form
/// log^2 correction before regressing on log(T * eps).
struct RateRow {
  uint64_t seed = 0;
  double eps = 0.0;
  double sup_err = 0.0;
};
struct RateReport {
  std::vector<double> epsilons;
  std::vector<double> sup_errors;  // mean over seeds of per-seed sup
  std::vector<double> max_errors;  // max over seeds
  std::vector<RateRow> rows;
  double exponent = 0.0;   // fitted power of (T * eps); reference value 1/2
  double amplitude = 0.0;
  double r2 = 0.0;
  double ci_low = 0.0;     // 95% interval for the exponent
  double ci_high = 0.0;
  bool contains_half = false;
  double T = 0.0;
  size_t probe_times = 0;
  size_t probe_points = 0;
};
RateReport homog_rate_experiment(const EnvFactory& family,
                                 const EffectiveShape& shape,
                                 const InitialData& u0, double T,
                                 std::span<const double> eps_list,
                                 std::span<const uint64_t> seeds,
                                 const MicroOptions& opts = {});

/// Per-seed smallest probed horizon beyond which the scaled shape distance
/// stays under the guessed constant, plus the empirical tail of that horizon.
struct T0Estimate {
  std::vector<double> ts;         // probed horizons (each > 1, increasing)
  std::vector<uint64_t> seeds;
  std::vector<double> t0;         // +inf when censored
  std::vector<uint8_t> censored;
  double guess = 0.0;
  std::vector<double> tail_t;     // horizons with positive survival
  std::vector<double> tail_log_surv;
  double envelope_c = 0.0;        // slope of -log S against log^{3/2} T
  bool log_survival_concave = true;
};
T0Estimate estimate_T0(const EnvFactory& family, const EffectiveShape& shape,
                       double constant_guess, std::span<const double> Ts,
                       std::span<const uint64_t> seeds,
                       const MicroOptions& opts = {});

void write_rate_csv(const RateReport& report, const std::string& path);
void write_t0_csv(const T0Estimate& est, const std::string& path);

}  // namespace gfront
