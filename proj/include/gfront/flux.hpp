#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gfront/environment.hpp"

namespace gfront {

/// Gauss-Legendre rule on [-1, 1]: (node, weight) pairs, Newton-refined roots
/// of the Legendre polynomial. Exact for polynomials of degree 2*order - 1.
std::vector<std::pair<double, double>> gauss_legendre(int order);

/// Axis-aligned (d-1)-dimensional cube: the set of x with x[axis] fixed at
/// center[axis] and |x[j] - center[j]| <= radius on the tangent axes. The
/// orientation gives the unit normal nu = sign * e_axis.
struct FaceCube {
  Vec center;
  double radius = 1.0;
  int axis = 0;
  int sign = 1;
};

struct QuadValue {
  double value = 0.0;
  double error = 0.0;  // estimated from an order-bumped recomputation
};

/// Flux integral of V . nu over the face. Along the in-face axis the segment
/// is split at the field's smoothness breakpoints, so each Gauss panel sees a
/// smooth integrand (for lattice fields a polynomial, making the default
/// order exact for bump smoothness <= 6). The d=3 outer tangent axis uses
/// composite panels whose length is halved until the value settles; that
/// direction converges at roughly third order, so the reported error (the
/// last change) overstates the residual. In d=2 the first halving already
/// agrees to roundoff.
QuadValue cube_flux(const Environment& env, const FaceCube& face,
                    int quad_order = 6);

struct FluxEventReport {
  double R1 = 0.0, R0 = 0.0, eps = 0.0;
  bool holds = true;
  FaceCube worst_cube{};
  double worst_ratio = 0.0;  // max |flux| / (eps (2r)^{d-1})
  size_t cubes_checked = 0;
  size_t family_size = 0;  // exhaustive family before any budget thinning
  bool budget_hit = false;
};

/// Tests membership in the event "every axis-aligned (d-1)-cube inside
/// Q_{R1} with radius in [R0, R1] has |flux| <= eps * area", over the
/// discrete family with centers on a lattice of pitch min(eps/(4 lip_v),
/// R0/4) and an arithmetic radius sweep. When the family exceeds `budget`
/// the lattice pitch is scaled up uniformly (budget_hit is set and the
/// verdict is a sampled sub-family statement).
FluxEventReport check_flux_event(const Environment& env, double R1, double R0,
                                 double eps, int radius_steps = 4,
                                 size_t budget = 200000, int quad_order = 6);

/// Patch mask over the boundary of Q_R = [-R, R]^d; every face splits into
/// cells_per_side^{d-1} equal patches. Face f has normal axis f/2 with
/// orientation + for even f, - for odd f.
struct BoundaryMask {
  int dim = 2;
  double R = 1.0;
  int cells_per_side = 8;
  std::vector<uint8_t> bits;

  BoundaryMask(int dim_, double R_, int cells);
  size_t patches_per_face() const;
  size_t face_count() const { return static_cast<size_t>(2 * dim); }
  FaceCube patch(size_t face, size_t idx) const;
  void set(size_t face, size_t idx, bool v);
  bool get(size_t face, size_t idx) const;
  void fill(bool v);
};

struct SubsetFlux {
  double flux = 0.0;
  double cut_measure = 0.0;  // (d-2)-measure of the relative boundary of D
  double quad_error = 0.0;
};

/// Outward flux over the masked subset D of the boundary of Q_R, plus the
/// discrete measure of the boundary of D inside the cube surface. In d=2 the
/// four edges are walked as one cycle and transitions are counted exactly
/// (a count, the 0-dimensional measure); in d=3 transitions are counted
/// within each face and weighted by the patch side (cross-face gluing is not
/// stitched, so rims between faces carry no cut).
SubsetFlux boundary_subset_flux(const Environment& env,
                                const BoundaryMask& mask, int quad_order = 6);

}  // namespace gfront
