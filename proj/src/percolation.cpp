#include "gfront/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "gfront/front.hpp"
#include "gfront/grid.hpp"

namespace gfront {

namespace {

void validate_box(int dim, const IVec& lo, const IVec& hi) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dim must be 2 or 3");
  for (int i = 0; i < dim; ++i)
    if (lo[i] > hi[i])
      throw std::invalid_argument("box corners out of order");
  for (int i = dim; i < 3; ++i)
    if (lo[i] != 0 || hi[i] != 0)
      throw std::invalid_argument("unused box axes must be pinned to 0");
}

void validate_sites(int dim, const std::vector<IVec>& sites) {
  for (const IVec& v : sites)
    for (int i = dim; i < 3; ++i)
      if (v[i] != 0)
        throw std::invalid_argument("unused site axes must be 0");
}

// the 3^d - 1 neighbor offsets, in scan order for deterministic searches
std::vector<IVec> neighbor_offsets(int dim) {
  std::vector<IVec> out;
  const int zr = dim == 3 ? 1 : 0;
  for (int z = -zr; z <= zr; ++z)
    for (int y = -1; y <= 1; ++y)
      for (int x = -1; x <= 1; ++x) {
        if (x == 0 && y == 0 && z == 0) continue;
        out.push_back(IVec{x, y, z});
      }
  return out;
}

bool set_connected(int dim, const std::vector<IVec>& sites) {
  if (sites.size() <= 1) return true;
  auto offs = neighbor_offsets(dim);
  SiteSet pending(sites.begin() + 1, sites.end());
  std::vector<IVec> stack{sites[0]};
  while (!stack.empty()) {
    IVec cur = stack.back();
    stack.pop_back();
    for (const IVec& o : offs) {
      auto it = pending.find(cur + o);
      if (it != pending.end()) {
        stack.push_back(*it);
        pending.erase(it);
      }
    }
  }
  return pending.empty();
}

// parameter interval of {a + t (b - a), t in [0, 1]} inside sigma({v});
// returns (1, 0) when empty. Boundary inclusive, exact comparisons.
std::pair<double, double> cube_interval(const Vec& a, const Vec& b,
                                        const IVec& v, int dim) {
  double t0 = 0.0, t1 = 1.0;
  for (int i = 0; i < dim; ++i) {
    const double u = b[i] - a[i];
    const double lo = v[i] - 0.5 - a[i], hi = v[i] + 0.5 - a[i];
    if (u == 0.0) {
      if (lo > 0.0 || hi < 0.0) return {1.0, 0.0};
    } else {
      double ta = lo / u, tb = hi / u;
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
    }
    if (t0 > t1) return {1.0, 0.0};
  }
  return {t0, t1};
}

// integer sites whose unit cube can touch the segment [a, b]
template <typename F>
void for_sites_near_segment(const Vec& a, const Vec& b, int dim, F&& f) {
  IVec lo{}, hi{};
  for (int i = 0; i < dim; ++i) {
    lo[i] = static_cast<int>(std::ceil(std::min(a[i], b[i]) - 0.5));
    hi[i] = static_cast<int>(std::floor(std::max(a[i], b[i]) + 0.5));
  }
  IVec v{};
  for (v[2] = lo[2]; v[2] <= hi[2]; ++v[2])
    for (v[1] = lo[1]; v[1] <= hi[1]; ++v[1])
      for (v[0] = lo[0]; v[0] <= hi[0]; ++v[0]) f(v);
}

// integer sites v with x in sigma({v}); 2^m candidates on cube faces
template <typename F>
void for_covering_sites(const Vec& x, int dim, F&& f) {
  int a[3] = {0, 0, 0}, b[3] = {0, 0, 0};
  for (int i = 0; i < dim; ++i) {
    a[i] = static_cast<int>(std::ceil(x[i] - 0.5));
    b[i] = static_cast<int>(std::floor(x[i] + 0.5));
  }
  IVec v{};
  for (v[2] = a[2]; v[2] <= b[2]; ++v[2])
    for (v[1] = a[1]; v[1] <= b[1]; ++v[1])
      for (v[0] = a[0]; v[0] <= b[0]; ++v[0]) f(v);
}

}  // namespace

size_t PercolationField::size() const {
  size_t n = 1;
  for (int i = 0; i < 3; ++i)
    n *= static_cast<size_t>(hi[i] - lo[i] + 1);
  return n;
}

bool PercolationField::contains(const IVec& v) const {
  for (int i = 0; i < 3; ++i)
    if (v[i] < lo[i] || v[i] > hi[i]) return false;
  return true;
}

size_t PercolationField::index(const IVec& v) const {
  if (!contains(v)) throw std::out_of_range("site outside the field domain");
  const size_t e0 = static_cast<size_t>(hi[0] - lo[0] + 1);
  const size_t e1 = static_cast<size_t>(hi[1] - lo[1] + 1);
  return (static_cast<size_t>(v[2] - lo[2]) * e1 +
          static_cast<size_t>(v[1] - lo[1])) *
             e0 +
         static_cast<size_t>(v[0] - lo[0]);
}

IVec PercolationField::decode(size_t idx) const {
  const size_t e0 = static_cast<size_t>(hi[0] - lo[0] + 1);
  const size_t e1 = static_cast<size_t>(hi[1] - lo[1] + 1);
  IVec v;
  v[0] = lo[0] + static_cast<int>(idx % e0);
  v[1] = lo[1] + static_cast<int>((idx / e0) % e1);
  v[2] = lo[2] + static_cast<int>(idx / (e0 * e1));
  return v;
}

size_t PercolationField::open_count() const {
  size_t n = 0;
  for (uint8_t b : open_) n += b;
  return n;
}

PercolationField synthetic_field(uint64_t seed, int dim, const IVec& lo,
                                 const IVec& hi, double p) {
  validate_box(dim, lo, hi);
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("p must lie in [0, 1]");
  PercolationField f;
  f.dim = dim;
  f.lo = lo;
  f.hi = hi;
  f.seed = seed;
  f.p = p;
  f.open_.resize(f.size());
  for (size_t i = 0; i < f.open_.size(); ++i)
    f.open_[i] = to_unit(site_hash(seed, f.decode(i), 0)) < p ? 1 : 0;
  return f;
}

PercolationField good_site_field(const Environment& env, const IVec& lo,
                                 const IVec& hi, double tau,
                                 const GoodSiteOptions& opts) {
  const int d = env.dim();
  validate_box(d, lo, hi);
  if (tau < 0.0) throw std::invalid_argument("tau must be >= 0");
  if (opts.grid_h <= 0.0) throw std::invalid_argument("grid_h must be > 0");
  const double pr =
      opts.probe_radius > 0.0 ? opts.probe_radius : std::sqrt(double(d));

  PercolationField f;
  f.dim = d;
  f.lo = lo;
  f.hi = hi;
  f.from_fronts = true;
  f.tau = tau;
  f.dep_radius = (1.0 + env.norms().sup_v) * tau + std::sqrt(double(d));
  if (auto* le = dynamic_cast<const LatticeEnvironment*>(&env))
    f.seed = le->seed();
  f.open_.assign(f.size(), 0);
  if (tau == 0.0) return f;  // positive-distance probes need positive time

  std::vector<Vec> probes;
  probes.push_back(Vec{});
  for (int i = 0; i < d; ++i) {
    Vec e{};
    e[i] = pr;
    probes.push_back(e);
    e[i] = -pr;
    probes.push_back(e);
  }

  // grid must hold both the reachable set and the sibling probes
  const double radius =
      std::max((1.0 + env.norms().sup_v) * tau, 2.0 * pr) + 4.0 * opts.grid_h;
  FrontParams fp;
  fp.store_pops = false;
  for (size_t idx = 0; idx < f.size(); ++idx) {
    const Vec vc = to_vec(f.decode(idx));
    bool ok = true;
    for (size_t j = 0; j < probes.size() && ok; ++j) {
      const Vec src = vc + probes[j];
      Grid g = Grid::covering(d, radius, opts.grid_h);
      for (int i = 0; i < d; ++i) g.lo[i] += src[i];
      FrontField fr(env, g, std::span<const Vec>(&src, 1), fp);
      fr.evolve_to(tau);
      for (size_t k = 0; k < probes.size() && ok; ++k) {
        if (k == j) continue;
        if (!(first_passage(fr, vc + probes[k]) <= tau)) ok = false;
      }
    }
    f.open_[idx] = ok ? 1 : 0;
  }
  return f;
}

std::vector<Cluster> clusters(const PercolationField& field) {
  auto offs = neighbor_offsets(field.dim);
  std::vector<int> cid(field.size(), -1);
  std::vector<Cluster> out;
  std::vector<size_t> stack, members;
  for (size_t start = 0; start < field.size(); ++start) {
    if (cid[start] >= 0) continue;
    Cluster c;
    c.id = static_cast<int>(out.size());
    c.open = field.open_[start] != 0;
    cid[start] = c.id;
    stack.assign(1, start);
    members.clear();
    while (!stack.empty()) {
      const size_t cur = stack.back();
      stack.pop_back();
      members.push_back(cur);
      const IVec site = field.decode(cur);
      for (const IVec& o : offs) {
        const IVec nb = site + o;
        if (!field.contains(nb)) continue;
        const size_t ni = field.index(nb);
        if (cid[ni] >= 0 || (field.open_[ni] != 0) != c.open) continue;
        cid[ni] = c.id;
        stack.push_back(ni);
      }
    }
    std::sort(members.begin(), members.end());
    c.sites.reserve(members.size());
    for (size_t m : members) c.sites.push_back(field.decode(m));
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<IVec> closed_hull(const PercolationField& field,
                              const std::vector<IVec>& S) {
  auto offs = neighbor_offsets(field.dim);
  std::vector<uint8_t> in(field.size(), 0);
  std::vector<size_t> stack;
  auto push_closed = [&](const IVec& v) {
    if (!field.contains(v)) return;
    const size_t i = field.index(v);
    if (in[i] || field.open_[i]) return;
    in[i] = 1;
    stack.push_back(i);
  };
  for (const IVec& s : S) {
    if (!field.contains(s)) continue;
    push_closed(s);
    for (const IVec& o : offs) push_closed(s + o);
  }
  std::vector<size_t> hull;
  while (!stack.empty()) {
    const size_t cur = stack.back();
    stack.pop_back();
    hull.push_back(cur);
    const IVec site = field.decode(cur);
    for (const IVec& o : offs) push_closed(site + o);
  }
  std::sort(hull.begin(), hull.end());
  std::vector<IVec> out;
  out.reserve(hull.size());
  for (size_t i : hull) out.push_back(field.decode(i));
  return out;
}

std::pair<std::vector<IVec>, std::vector<IVec>> boundaries(
    int dim, const std::vector<IVec>& E) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dim must be 2 or 3");
  validate_sites(dim, E);
  auto offs = neighbor_offsets(dim);
  SiteSet in(E.begin(), E.end());
  SiteSet outer_set;
  std::vector<IVec> inner;
  for (const IVec& v : in) {
    bool edge = false;
    for (const IVec& o : offs) {
      const IVec nb = v + o;
      if (!in.count(nb)) {
        edge = true;
        outer_set.insert(nb);
      }
    }
    if (edge) inner.push_back(v);
  }
  std::vector<IVec> outer(outer_set.begin(), outer_set.end());
  std::sort(inner.begin(), inner.end());
  std::sort(outer.begin(), outer.end());
  return {std::move(inner), std::move(outer)};
}

std::pair<std::vector<IVec>, std::vector<IVec>> boundaries(
    const PercolationField& field, const std::vector<IVec>& E) {
  return boundaries(field.dim, E);
}

bool check_unicoherence(int dim, const IVec& cube_lo, const IVec& cube_hi,
                        const std::vector<IVec>& C) {
  validate_box(dim, cube_lo, cube_hi);
  if (C.empty()) throw std::invalid_argument("C must be nonempty");
  validate_sites(dim, C);
  auto in_cube = [&](const IVec& v) {
    for (int i = 0; i < 3; ++i)
      if (v[i] < cube_lo[i] || v[i] > cube_hi[i]) return false;
    return true;
  };
  SiteSet cset(C.begin(), C.end());
  for (const IVec& v : cset)
    if (!in_cube(v)) throw std::invalid_argument("C must lie inside the cube");
  {
    std::vector<IVec> cvec(cset.begin(), cset.end());
    if (!set_connected(dim, cvec))
      throw std::invalid_argument("C must be connected");
  }

  auto offs = neighbor_offsets(dim);
  SiteSet seen;  // complement sites already assigned to a component
  IVec v{cube_lo};
  for (v[2] = cube_lo[2]; v[2] <= cube_hi[2]; ++v[2])
    for (v[1] = cube_lo[1]; v[1] <= cube_hi[1]; ++v[1])
      for (v[0] = cube_lo[0]; v[0] <= cube_hi[0]; ++v[0]) {
        if (cset.count(v) || seen.count(v)) continue;
        // flood the component D of cube \ C containing v
        SiteSet comp;
        std::vector<IVec> stack{v};
        comp.insert(v);
        seen.insert(v);
        while (!stack.empty()) {
          const IVec cur = stack.back();
          stack.pop_back();
          for (const IVec& o : offs) {
            const IVec nb = cur + o;
            if (!in_cube(nb) || cset.count(nb) || comp.count(nb)) continue;
            comp.insert(nb);
            seen.insert(nb);
            stack.push_back(nb);
          }
        }
        // boundaries relative to the cube
        std::vector<IVec> inner;
        SiteSet outer_set;
        for (const IVec& s : comp) {
          bool edge = false;
          for (const IVec& o : offs) {
            const IVec nb = s + o;
            if (!in_cube(nb) || comp.count(nb)) continue;
            edge = true;
            outer_set.insert(nb);
          }
          if (edge) inner.push_back(s);
        }
        std::vector<IVec> outer(outer_set.begin(), outer_set.end());
        if (!set_connected(dim, inner)) return false;
        if (!set_connected(dim, outer)) return false;
      }
  return true;
}

bool check_unicoherence(const PercolationField& field, const IVec& cube_lo,
                        const IVec& cube_hi, const std::vector<IVec>& C) {
  return check_unicoherence(field.dim, cube_lo, cube_hi, C);
}

SolidRegion::SolidRegion(int dim, std::vector<IVec> sites) : dim_(dim) {
  if (dim != 2 && dim != 3) throw std::invalid_argument("dim must be 2 or 3");
  validate_sites(dim, sites);
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  sites_ = std::move(sites);
  set_.insert(sites_.begin(), sites_.end());
}

bool SolidRegion::contains(const Vec& x) const {
  for (int i = dim_; i < 3; ++i)
    if (x[i] != 0.0) return false;
  bool hit = false;
  for_covering_sites(x, dim_, [&](const IVec& v) {
    if (set_.count(v)) hit = true;
  });
  return hit;
}

SolidRegion solidify(int dim, const std::vector<IVec>& sites) {
  return SolidRegion(dim, sites);
}

BigClusterReport big_open_cluster(const PercolationField& field, int R,
                                  int n) {
  if (R < 0 || n < 0) throw std::invalid_argument("R and n must be >= 0");
  const int d = field.dim;
  IVec blo{}, bhi{};
  for (int i = 0; i < d; ++i) {
    blo[i] = -(R + n);
    bhi[i] = R + n;
  }
  if (!field.contains(blo) || !field.contains(bhi))
    throw std::invalid_argument("search cube must lie inside the domain");

  auto offs = neighbor_offsets(d);
  auto in_box = [&](const IVec& v) {
    for (int i = 0; i < 3; ++i)
      if (v[i] < blo[i] || v[i] > bhi[i]) return false;
    return true;
  };
  auto meets_core = [&](const IVec& v) {
    for (int i = 0; i < d; ++i)
      if (v[i] < -R || v[i] > R) return false;
    return true;
  };

  // open clusters within the box; keep the largest (first in scan order
  // among ties, since earlier scans win strict comparisons only)
  std::vector<uint8_t> mark(field.size(), 0);  // 1 = in chosen cluster
  std::vector<uint8_t> vis(field.size(), 0);
  std::vector<IVec> best;
  std::vector<IVec> stack, current;
  IVec v{};
  for (v[2] = blo[2]; v[2] <= bhi[2]; ++v[2])
    for (v[1] = blo[1]; v[1] <= bhi[1]; ++v[1])
      for (v[0] = blo[0]; v[0] <= bhi[0]; ++v[0]) {
        const size_t vi = field.index(v);
        if (vis[vi] || !field.open_[vi]) continue;
        current.clear();
        stack.assign(1, v);
        vis[vi] = 1;
        while (!stack.empty()) {
          const IVec cur = stack.back();
          stack.pop_back();
          current.push_back(cur);
          for (const IVec& o : offs) {
            const IVec nb = cur + o;
            if (!in_box(nb)) continue;
            const size_t ni = field.index(nb);
            if (vis[ni] || !field.open_[ni]) continue;
            vis[ni] = 1;
            stack.push_back(nb);
          }
        }
        if (current.size() > best.size()) best = current;
      }

  BigClusterReport rep;
  rep.has_open = !best.empty();
  std::sort(best.begin(), best.end(),
            [&](const IVec& a, const IVec& b) {
              return field.index(a) < field.index(b);
            });
  for (const IVec& s : best) mark[field.index(s)] = 1;
  rep.cluster = std::move(best);

  // complement components of the box and their sizes
  std::fill(vis.begin(), vis.end(), 0);
  for (v[2] = blo[2]; v[2] <= bhi[2]; ++v[2])
    for (v[1] = blo[1]; v[1] <= bhi[1]; ++v[1])
      for (v[0] = blo[0]; v[0] <= bhi[0]; ++v[0]) {
        const size_t vi = field.index(v);
        if (vis[vi] || mark[vi]) continue;
        size_t comp_size = 0;
        bool meets = false;
        stack.assign(1, v);
        vis[vi] = 1;
        while (!stack.empty()) {
          const IVec cur = stack.back();
          stack.pop_back();
          ++comp_size;
          if (meets_core(cur)) meets = true;
          for (const IVec& o : offs) {
            const IVec nb = cur + o;
            if (!in_box(nb)) continue;
            const size_t ni = field.index(nb);
            if (vis[ni] || mark[ni]) continue;
            vis[ni] = 1;
            stack.push_back(nb);
          }
        }
        if (meets) rep.max_bad_size = std::max(rep.max_bad_size, comp_size);
      }
  rep.event_holds =
      rep.has_open && rep.max_bad_size <= static_cast<size_t>(n);
  return rep;
}

double SkeletonPath::length() const {
  double total = 0.0;
  for (size_t i = 0; i + 1 < points.size(); ++i)
    total += norm(points[i + 1] - points[i]);
  return total;
}

SkeletonPath skeleton_path(const PercolationField& field, const Vec& x,
                           const Vec& y) {
  const int d = field.dim;
  for (int i = d; i < 3; ++i)
    if (x[i] != 0.0 || y[i] != 0.0)
      throw std::invalid_argument("unused axes of x and y must be 0");
  auto offs = neighbor_offsets(d);
  auto cls = clusters(field);
  std::vector<int> cid(field.size(), -1);  // open-cluster id per site
  for (const Cluster& c : cls)
    if (c.open)
      for (const IVec& s : c.sites) cid[field.index(s)] = c.id;

  auto covering_ids = [&](const Vec& p, std::vector<int>& ids) {
    ids.clear();
    for_covering_sites(p, d, [&](const IVec& v) {
      if (!field.contains(v)) return;
      const int id = cid[field.index(v)];
      if (id >= 0) ids.push_back(id);
    });
  };
  std::vector<int> idsx, idsy;
  covering_ids(x, idsx);
  covering_ids(y, idsy);
  int cstar = -1;
  size_t cstar_size = 0;
  for (int i : idsx)
    for (int j : idsy)
      if (i == j) {
        const size_t sz = cls[i].sites.size();
        if (cstar < 0 || sz > cstar_size ||
            (sz == cstar_size && i < cstar)) {
          cstar = i;
          cstar_size = sz;
        }
      }
  if (cstar < 0)
    throw std::invalid_argument("x and y are not near a common open cluster");

  auto in_cluster = [&](const IVec& v) {
    return field.contains(v) && cid[field.index(v)] == cstar;
  };
  auto near_cluster = [&](const Vec& p) {
    bool hit = false;
    for_covering_sites(p, d, [&](const IVec& v) {
      if (in_cluster(v)) hit = true;
    });
    return hit;
  };

  SkeletonPath path;
  path.points.push_back(x);
  path.cases.push_back(0);

  const double sqd = std::sqrt(static_cast<double>(d));
  const Vec dvec = y - x;
  const double seg_len = norm(dvec);
  const Vec dir = seg_len > 0.0 ? (1.0 / seg_len) * dvec : Vec{};
  SiteSet witnessed;  // first site (scan order) of each detoured component
  const size_t kcap = 256 + 8 * static_cast<size_t>(std::ceil(seg_len)) +
                      27 * field.size();

  Vec cur = x;
  while (true) {
    if (path.points.size() > kcap)
      throw std::logic_error("skeleton exceeded its point budget");
    if (norm(y - cur) <= sqd) {  // case 1: terminal hop
      path.points.push_back(y);
      path.cases.push_back(1);
      break;
    }
    const Vec z = cur + sqd * dir;
    if (near_cluster(z)) {  // case 2: straight advance
      path.points.push_back(z);
      path.cases.push_back(2);
      cur = z;
      continue;
    }
    // case 3: find the last cluster-covered point of [cur, z] ...
    double tbest = 0.0;
    for_sites_near_segment(cur, z, d, [&](const IVec& v) {
      if (!in_cluster(v)) return;
      auto [a, b] = cube_interval(cur, z, v, d);
      if (a <= b) tbest = std::max(tbest, b);
    });
    const Vec xt = cur + tbest * (z - cur);
    // ... and the blocking site whose cube covers the segment just past it
    bool found = false, offdomain = false;
    IVec wit{};
    for_sites_near_segment(cur, z, d, [&](const IVec& v) {
      auto [a, b] = cube_interval(cur, z, v, d);
      if (!(a <= b && a <= tbest && b > tbest)) return;
      if (!field.contains(v)) {
        offdomain = true;
        return;
      }
      if (cid[field.index(v)] == cstar) return;
      if (!found || v < wit) {
        wit = v;
        found = true;
      }
    });
    if (!found) {
      if (offdomain)
        throw std::invalid_argument(
            "skeleton construction leaves the field domain");
      throw std::logic_error("no blocking site past the last covered point");
    }
    // blocking component F of domain \ cluster, and its first site
    SiteSet fset{wit};
    IVec rep = wit;
    {
      std::vector<IVec> stack{wit};
      while (!stack.empty()) {
        const IVec c = stack.back();
        stack.pop_back();
        for (const IVec& o : offs) {
          const IVec nb = c + o;
          if (!field.contains(nb) || in_cluster(nb) || fset.count(nb))
            continue;
          fset.insert(nb);
          if (field.index(nb) < field.index(rep)) rep = nb;
          stack.push_back(nb);
        }
      }
    }
    if (witnessed.count(rep))
      throw std::logic_error("revisited a blocking component");
    witnessed.insert(rep);
    // outer boundary of F within the domain (all cluster sites)
    SiteSet bound;
    for (const IVec& s : fset)
      for (const IVec& o : offs) {
        const IVec nb = s + o;
        if (field.contains(nb) && !fset.count(nb)) bound.insert(nb);
      }
    // walk start: boundary site whose cube holds xt. Membership is tested in
    // parameter space, where tbest is exact by construction (abutting cube
    // faces yield bitwise-equal interval ends); reconstructing coordinates
    // first could drift one ulp across a face and lose the site.
    bool has_p1 = false;
    IVec p1{};
    for (const IVec& v : bound) {
      auto [a, b] = cube_interval(cur, z, v, d);
      if (a > b || a > tbest || b < tbest) continue;
      if (!has_p1 || v < p1) {
        p1 = v;
        has_p1 = true;
      }
    }
    if (!has_p1)
      throw std::logic_error("no boundary site covers the blocked point");
    // walk end: boundary site in the segment's cube cover maximizing the
    // projection on y - x
    bool has_pl = false;
    IVec pl{};
    double best_proj = 0.0;
    for (const IVec& s : bound) {
      auto [a, b] = cube_interval(x, y, s, d);
      if (a > b) continue;
      const double proj = dot(to_vec(s), dvec);
      if (!has_pl || proj > best_proj ||
          (proj == best_proj && s < pl)) {
        pl = s;
        best_proj = proj;
        has_pl = true;
      }
    }
    if (!has_pl)
      throw std::logic_error("no boundary site meets the segment cover");
    // shortest boundary walk p1 -> pl (outer boundary is connected)
    std::vector<IVec> walk;
    {
      std::unordered_map<IVec, IVec, IVecHash> parent;
      std::queue<IVec> q;
      q.push(p1);
      parent.emplace(p1, p1);
      bool reached = p1 == pl;
      while (!q.empty() && !reached) {
        const IVec c = q.front();
        q.pop();
        for (const IVec& o : offs) {
          const IVec nb = c + o;
          if (!bound.count(nb) || parent.count(nb)) continue;
          parent.emplace(nb, c);
          if (nb == pl) {
            reached = true;
            break;
          }
          q.push(nb);
        }
      }
      if (!reached && !(p1 == pl))
        throw std::logic_error("detour boundary walk failed");
      for (IVec c = pl;; c = parent.at(c)) {
        walk.push_back(c);
        if (c == p1) break;
      }
      std::reverse(walk.begin(), walk.end());
    }
    path.points.push_back(xt);
    path.cases.push_back(3);
    for (const IVec& s : walk) {
      path.points.push_back(to_vec(s));
      path.cases.push_back(3);
    }
    // rejoin the segment as close to y as sigma({pl}) allows
    auto [ra, rb] = cube_interval(x, y, pl, d);
    if (ra > rb) throw std::logic_error("rejoin cube misses the segment");
    const Vec rejoin = x + rb * dvec;
    path.points.push_back(rejoin);
    path.cases.push_back(3);
    ++path.detours;
    cur = rejoin;
  }
  return path;
}

void dump_field(const PercolationField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << std::setprecision(17);
  out << "# percolation field v1\n";
  out << "# dim=" << field.dim << " lo=" << field.lo[0] << ','
      << field.lo[1] << ',' << field.lo[2] << " hi=" << field.hi[0] << ','
      << field.hi[1] << ',' << field.hi[2] << '\n';
  out << "# source=" << (field.from_fronts ? "fronts" : "synthetic")
      << " seed=" << field.seed << " p=" << field.p << " tau=" << field.tau
      << " dep_radius=" << field.dep_radius << '\n';
  out << "first=" << (field.open_.empty() ? 0 : int(field.open_[0])) << '\n';
  uint8_t val = field.open_.empty() ? 0 : field.open_[0];
  size_t run = 0;
  bool first_run = true;
  for (uint8_t b : field.open_) {
    if (b == val) {
      ++run;
      continue;
    }
    out << (first_run ? "" : ",") << run;
    first_run = false;
    val = b;
    run = 1;
  }
  if (run > 0) out << (first_run ? "" : ",") << run;
  out << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

PercolationField load_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  auto next_line = [&]() {
    if (!std::getline(in, line))
      throw std::runtime_error("truncated field dump: " + path);
  };
  next_line();
  if (line != "# percolation field v1")
    throw std::runtime_error("unrecognized field dump header: " + path);
  PercolationField f;
  next_line();
  if (std::sscanf(line.c_str(), "# dim=%d lo=%d,%d,%d hi=%d,%d,%d", &f.dim,
                  &f.lo[0], &f.lo[1], &f.lo[2], &f.hi[0], &f.hi[1],
                  &f.hi[2]) != 7)
    throw std::runtime_error("corrupt domain line: " + path);
  next_line();
  {
    char src[16] = {0};
    unsigned long long seed = 0;
    if (std::sscanf(line.c_str(),
                    "# source=%15s seed=%llu p=%lf tau=%lf dep_radius=%lf",
                    src, &seed, &f.p, &f.tau, &f.dep_radius) != 5)
      throw std::runtime_error("corrupt provenance line: " + path);
    f.seed = seed;
    f.from_fronts = std::string(src) == "fronts";
  }
  next_line();
  int first = 0;
  if (std::sscanf(line.c_str(), "first=%d", &first) != 1)
    throw std::runtime_error("corrupt run-length header: " + path);
  next_line();
  validate_box(f.dim, f.lo, f.hi);
  f.open_.reserve(f.size());
  uint8_t val = first ? 1 : 0;
  std::stringstream runs(line);
  std::string tok;
  while (std::getline(runs, tok, ',')) {
    const size_t run = std::stoull(tok);
    f.open_.insert(f.open_.end(), run, val);
    val = 1 - val;
  }
  if (f.open_.size() != f.size())
    throw std::runtime_error("run lengths do not cover the domain: " + path);
  return f;
}

void write_skeleton_csv(const SkeletonPath& path, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file);
  out << std::setprecision(17);
  out << "# skeleton path; x,y,z in lattice units; case 0 start, 1 terminal "
         "hop, 2 straight advance, 3 detour\n";
  out << "x,y,z,case\n";
  for (size_t i = 0; i < path.points.size(); ++i)
    out << path.points[i][0] << ',' << path.points[i][1] << ','
        << path.points[i][2] << ',' << path.cases[i] << '\n';
  if (!out) throw std::runtime_error("write failed: " + file);
}

}  // namespace gfront
