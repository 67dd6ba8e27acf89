#include "gfront/grid.hpp"

#include <limits>

namespace gfront {

namespace {

constexpr double kFar = 1e30;

// One-dimensional lower envelope of parabolas (Felzenszwalb-Huttenlocher).
void dt1d(std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
          std::vector<double>& z, int len) {
  int k = 0;
  v[0] = 0;
  z[0] = -kFar;
  z[1] = kFar;
  for (int q = 1; q < len; ++q) {
    double s;
    for (;;) {
      int p = v[k];
      s = ((f[q] + q * static_cast<double>(q)) -
           (f[p] + p * static_cast<double>(p))) /
          (2.0 * (q - p));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kFar;
  }
  k = 0;
  for (int q = 0; q < len; ++q) {
    while (z[k + 1] < q) ++k;
    double dq = q - static_cast<double>(v[k]);
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

std::vector<double> edt_squared(const Grid& g, const std::vector<uint8_t>& mask) {
  const size_t total = g.size();
  std::vector<double> dist(total);
  for (size_t i = 0; i < total; ++i) dist[i] = mask[i] ? 0.0 : kFar;

  const int nx = g.n[0], ny = g.n[1], nz = g.n[2];
  const int maxn = std::max(nx, std::max(ny, nz));
  std::vector<double> f(maxn), d(maxn), z(maxn + 1);
  std::vector<int> v(maxn);

  // Pass along x.
  for (int zz = 0; zz < nz; ++zz)
    for (int y = 0; y < ny; ++y) {
      size_t base = (static_cast<size_t>(zz) * ny + y) * nx;
      for (int x = 0; x < nx; ++x) f[x] = dist[base + x];
      dt1d(f, d, v, z, nx);
      for (int x = 0; x < nx; ++x) dist[base + x] = d[x];
    }
  // Pass along y.
  if (ny > 1)
    for (int zz = 0; zz < nz; ++zz)
      for (int x = 0; x < nx; ++x) {
        size_t base = static_cast<size_t>(zz) * ny * nx + x;
        for (int y = 0; y < ny; ++y) f[y] = dist[base + static_cast<size_t>(y) * nx];
        dt1d(f, d, v, z, ny);
        for (int y = 0; y < ny; ++y) dist[base + static_cast<size_t>(y) * nx] = d[y];
      }
  // Pass along z.
  if (nz > 1)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        size_t base = static_cast<size_t>(y) * nx + x;
        size_t stride = static_cast<size_t>(ny) * nx;
        for (int zz = 0; zz < nz; ++zz) f[zz] = dist[base + zz * stride];
        dt1d(f, d, v, z, nz);
        for (int zz = 0; zz < nz; ++zz) dist[base + zz * stride] = d[zz];
      }
  return dist;
}

}  // namespace gfront
