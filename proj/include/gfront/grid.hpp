#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gfront/geometry.hpp"

namespace gfront {

/// Axis-aligned cell lattice of pitch h. Cell c (multi-index) has center
/// lo + (c + 1/2) h and covers the half-open cube [lo + c h, lo + (c+1) h).
struct Grid {
  int dim = 2;
  double h = 1.0 / 16.0;
  IVec n{1, 1, 1};  // cells per axis; n[i] = 1 for unused axes
  Vec lo;

  /// Grid centered on the origin: index n/2 maps to the exact origin, so
  /// lattice-point targets are cell centers (no half-cell offset).
  static Grid centered(int dim, int cells_per_axis, double h) {
    Grid g;
    g.dim = dim;
    g.h = h;
    for (int i = 0; i < dim; ++i) {
      g.n[i] = cells_per_axis;
      g.lo[i] = -(cells_per_axis / 2 + 0.5) * h;
    }
    return g;
  }

  /// Smallest origin-centered grid covering [-radius, radius]^dim.
  static Grid covering(int dim, double radius, double h) {
    int half = static_cast<int>(std::ceil(radius / h)) + 1;
    return centered(dim, 2 * half + 1, h);
  }

  size_t size() const {
    return static_cast<size_t>(n[0]) * static_cast<size_t>(n[1]) *
           static_cast<size_t>(n[2]);
  }
  size_t index(const IVec& c) const {
    return (static_cast<size_t>(c[2]) * n[1] + c[1]) * n[0] + c[0];
  }
  IVec decode(size_t idx) const {
    int x = static_cast<int>(idx % n[0]);
    idx /= n[0];
    int y = static_cast<int>(idx % n[1]);
    int z = static_cast<int>(idx / n[1]);
    return IVec{x, y, z};
  }
  Vec center(const IVec& c) const {
    Vec r;
    for (int i = 0; i < dim; ++i) r[i] = lo[i] + (c[i] + 0.5) * h;
    return r;
  }
  bool contains(const IVec& c) const {
    for (int i = 0; i < 3; ++i)
      if (c[i] < 0 || c[i] >= n[i]) return false;
    return true;
  }
  /// Cell containing point x; may fall outside the index range.
  IVec cell_of(const Vec& x) const {
    IVec c;
    for (int i = 0; i < dim; ++i)
      c[i] = static_cast<int>(std::floor((x[i] - lo[i]) / h));
    return c;
  }
  Box bounds() const {
    Box b;
    b.lo = lo;
    for (int i = 0; i < dim; ++i) b.hi[i] = lo[i] + n[i] * h;
    return b;
  }
  bool same_layout(const Grid& o) const {
    return dim == o.dim && h == o.h && n == o.n && lo == o.lo;
  }
};

/// Exact squared Euclidean distance transform (in cell units) to the set of
/// nonzero cells of mask. Cells of an empty mask get a large finite value.
std::vector<double> edt_squared(const Grid& g, const std::vector<uint8_t>& mask);

}  // namespace gfront
