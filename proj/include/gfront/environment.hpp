#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "gfront/bump.hpp"
#include "gfront/geometry.hpp"
#include "gfront/rng.hpp"

namespace gfront {

/// Certified global bounds for a velocity field. lip_v is floored at 1 by
/// convention so quantities like cone lengths stay finite for flat fields.
struct FieldNorms {
  double sup_v = 0.0;
  double lip_v = 1.0;
  double sup_div = 0.0;
};

/// |div V| level certified safe for the volume-growth experiments. The
/// growth argument needs the divergence bulk term eps |R_t| to stay under
/// half the boundary term |dR_t|; with the unit-ball lower bound on the
/// reachable set this holds with an order-of-magnitude margin for
/// eps <= 1/20 in d <= 3. Pair with LatticeEnvironment::div_knob_for to
/// build fields at exactly this certified sup_div.
inline constexpr double kGrowthSafeDivergence = 0.05;

/// A time-independent velocity field V on R^d, d in {2,3}. Implementations
/// are immutable after construction and safe for concurrent reads.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual int dim() const = 0;
  virtual Vec velocity(const Vec& x) const = 0;
  virtual Mat jacobian(const Vec& x) const = 0;
  virtual double divergence(const Vec& x) const = 0;
  /// Certified bounds, valid on all of R^d unless the concrete type says
  /// otherwise (LinearField certifies on a stated box only).
  virtual FieldNorms norms() const = 0;
  /// Appends parameters t in (0,1) along the segment p0 + t*(p1-p0) at which
  /// the field loses smoothness (e.g. compact-support boundaries). Between
  /// consecutive breakpoints the field restricted to the segment is smooth;
  /// quadratures split there. Default: smooth everywhere, appends nothing.
  virtual void add_breakpoints(const Vec& p0, const Vec& p1,
                               std::vector<double>& ts) const {
    (void)p0;
    (void)p1;
    (void)ts;
  }
};

struct EnvParams {
  int dim = 2;
  double amplitude = 1.0;
  double div_knob = 0.0;  // scales the compressible (gradient) component
  BumpProfile profile{};

  void validate() const {
    if (dim != 2 && dim != 3) throw std::invalid_argument("dim must be 2 or 3");
    if (amplitude < 0.0) throw std::invalid_argument("amplitude must be >= 0");
    if (div_knob < 0.0) throw std::invalid_argument("div_knob must be >= 0");
  }
};

/// Random lattice-bump field with unit range of dependence.
///
/// d=2: V0 = perp-grad of psi, psi(x) = sum_v a_v phi(x - v) over v in Z^2.
/// d=3: V0 = curl of (psi_1, psi_2, psi_3) built the same way.
/// Compressible part: div_knob * sum_v b_v grad phi(x - v).
/// Coefficients are uniform on [-1,1], hashed from (seed, site, component)
/// and scaled so the certified sup norm of V0 equals `amplitude`. Bump
/// radius <= 1/2 makes supports site-disjoint, hence exact unit range of
/// dependence and exact stationarity under integer shifts.
class LatticeEnvironment final : public Environment {
 public:
  LatticeEnvironment(uint64_t seed, const EnvParams& params);

  int dim() const override { return params_.dim; }
  Vec velocity(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;
  double divergence(const Vec& x) const override;
  FieldNorms norms() const override { return norms_; }
  /// Bump-support sphere crossings; between them the field restricted to the
  /// segment is a polynomial.
  void add_breakpoints(const Vec& p0, const Vec& p1,
                       std::vector<double>& ts) const override;

  uint64_t seed() const { return seed_; }
  const EnvParams& params() const { return params_; }

  /// Scaled coefficient of a lattice site. Components 0..dim-1 drive the
  /// incompressible part (one stream function in d=2, three potentials in
  /// d=3); component dim drives the gradient part.
  double coefficient(const IVec& site, int comp) const {
    return scale_ * to_symmetric(site_hash(seed_, site, static_cast<uint64_t>(comp)));
  }

  /// div_knob value that makes the certified sup_div equal target.
  static double div_knob_for(double target, const EnvParams& base);

 private:
  template <typename F>
  void for_each_support_site(const Vec& x, F&& f) const;

  uint64_t seed_;
  EnvParams params_;
  double scale_;  // per-coefficient magnitude bound
  FieldNorms norms_;
};

/// V identically equal to a constant vector (the zero field as special case).
class ConstantField final : public Environment {
 public:
  ConstantField(int dim, const Vec& v) : dim_(dim), v_(v) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("dim must be 2 or 3");
  }
  int dim() const override { return dim_; }
  Vec velocity(const Vec&) const override { return v_; }
  Mat jacobian(const Vec&) const override { return Mat{}; }
  double divergence(const Vec&) const override { return 0.0; }
  FieldNorms norms() const override { return FieldNorms{norm(v_), 1.0, 0.0}; }

 private:
  int dim_;
  Vec v_;
};

/// V(x) = A x. Norms are certified on the stated box radius only; intended
/// for oracle tests against matrix-exponential trajectories.
class LinearField final : public Environment {
 public:
  LinearField(int dim, const Mat& a, double box_radius = 10.0);
  int dim() const override { return dim_; }
  Vec velocity(const Vec& x) const override { return mul(a_, x); }
  Mat jacobian(const Vec&) const override { return a_; }
  double divergence(const Vec&) const override { return a_.trace(); }
  FieldNorms norms() const override { return norms_; }

 private:
  int dim_;
  Mat a_;
  FieldNorms norms_;
};

/// Sign-flipped view of another field, for backward reachability.
class FlippedEnvironment final : public Environment {
 public:
  explicit FlippedEnvironment(const Environment& base) : base_(&base) {}
  int dim() const override { return base_->dim(); }
  Vec velocity(const Vec& x) const override { return -base_->velocity(x); }
  Mat jacobian(const Vec& x) const override { return -1.0 * base_->jacobian(x); }
  double divergence(const Vec& x) const override { return -base_->divergence(x); }
  FieldNorms norms() const override { return base_->norms(); }
  void add_breakpoints(const Vec& p0, const Vec& p1,
                       std::vector<double>& ts) const override {
    base_->add_breakpoints(p0, p1, ts);
  }

 private:
  const Environment* base_;
};

/// Seed-indexed family of environments: the Monte Carlo experiments draw
/// independent realizations through one of these.
using EnvFactory = std::function<std::unique_ptr<Environment>(uint64_t seed)>;

/// Lattice-bump family with fixed parameters.
inline EnvFactory lattice_family(const EnvParams& params) {
  params.validate();
  return [params](uint64_t seed) -> std::unique_ptr<Environment> {
    return std::make_unique<LatticeEnvironment>(seed, params);
  };
}

}  // namespace gfront
