#pragma once

#include <cstdint>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "gfront/environment.hpp"
#include "gfront/geometry.hpp"
#include "gfront/rng.hpp"

namespace gfront {

struct IVecHash {
  size_t operator()(const IVec& v) const {
    uint64_t h = 0x9e3779b97f4a7c15ull;
    for (int i = 0; i < 3; ++i)
      h = hash_combine(h, static_cast<uint64_t>(static_cast<int64_t>(v[i])));
    return static_cast<size_t>(h);
  }
};
using SiteSet = std::unordered_set<IVec, IVecHash>;

/// Boolean site field on a finite lattice box. Adjacency throughout this
/// module is l-infinity nearest-neighbor: every site has 3^d - 1 neighbors.
/// Immutable after construction; all queries are read-only.
struct PercolationField {
  int dim = 2;
  IVec lo{}, hi{};  // inclusive corners; unused axes pinned to [0, 0]
  std::vector<uint8_t> open_;

  // provenance
  bool from_fronts = false;  // false: synthetic i.i.d.
  uint64_t seed = 0;
  double p = 0.0;           // Bernoulli parameter (synthetic)
  double tau = 0.0;         // passage-time bound (front-derived)
  double dep_radius = 0.0;  // dependence radius (1 + sup_v) tau + sqrt(d)

  size_t size() const;
  bool contains(const IVec& v) const;
  size_t index(const IVec& v) const;  // scan order: x fastest, z slowest
  IVec decode(size_t idx) const;
  bool open(const IVec& v) const { return open_[index(v)] != 0; }
  size_t open_count() const;
};

/// i.i.d. Bernoulli(p) sites, deterministic in (seed, site).
PercolationField synthetic_field(uint64_t seed, int dim, const IVec& lo,
                                 const IVec& hi, double p);

struct GoodSiteOptions {
  double grid_h = 1.0 / 8.0;    // front resolution for the passage times
  double probe_radius = 0.0;    // 0 = sqrt(d)
};

/// Site v is open iff every ordered probe pair (x, y) from the 2d+1-point
/// stencil {v, v +- probe_radius e_i} has first passage time <= tau. The
/// finite stencil stands in for the continuum ball quantifier; passage times
/// are front arrivals at grid resolution opts.grid_h, so the field is a
/// resolution-dependent surrogate. dep_radius reports (1+sup_v) tau + sqrt(d).
PercolationField good_site_field(const Environment& env, const IVec& lo,
                                 const IVec& hi, double tau,
                                 const GoodSiteOptions& opts = {});

/// Maximal connected set of constant openness. ids run in scan order of each
/// cluster's first site, so they are deterministic.
struct Cluster {
  std::vector<IVec> sites;  // sorted in scan order
  bool open = false;
  int id = 0;
};

std::vector<Cluster> clusters(const PercolationField& field);

/// Closed hull cl(S): BFS through closed sites rooted at the closed sites of
/// S together with the closed sites adjacent to S. The second root family
/// means an all-open S still picks up the closed clusters hugging it; with a
/// closed S this reduces to the closed sites closed-path-connected to S.
/// Result is sorted in scan order. Sites of S outside the domain are ignored.
std::vector<IVec> closed_hull(const PercolationField& field,
                              const std::vector<IVec>& S);

/// Inner and outer lattice boundaries of E: inner = sites of E with a lattice
/// neighbor outside E, outer = sites outside E with a neighbor in E. Both are
/// computed in the enclosing lattice (the outer boundary may leave the field
/// domain) and returned sorted lexicographically.
std::pair<std::vector<IVec>, std::vector<IVec>> boundaries(
    int dim, const std::vector<IVec>& E);
std::pair<std::vector<IVec>, std::vector<IVec>> boundaries(
    const PercolationField& field, const std::vector<IVec>& E);

/// Theorem check: for every connected component D of cube \ C, the inner and
/// outer boundaries of D relative to the cube ({x in D : some in-cube
/// neighbor outside D} and {x in cube \ D : some neighbor in D}) are
/// connected. Relative boundaries are the reading under which the statement
/// is a theorem for every connected C: the global convention would add the
/// cube frame to the inner boundary and disconnect it whenever C sits deep
/// inside. Throws if C is empty, not connected, or not inside the cube.
bool check_unicoherence(int dim, const IVec& cube_lo, const IVec& cube_hi,
                        const std::vector<IVec>& C);
bool check_unicoherence(const PercolationField& field, const IVec& cube_lo,
                        const IVec& cube_hi, const std::vector<IVec>& C);

/// Solidification sigma(E) = E + [-1/2, 1/2]^d, boundary inclusive. Volume
/// equals |E| because distinct unit cubes have disjoint interiors.
class SolidRegion {
 public:
  SolidRegion(int dim, std::vector<IVec> sites);
  bool contains(const Vec& x) const;
  double volume() const { return static_cast<double>(sites_.size()); }
  const std::vector<IVec>& sites() const { return sites_; }
  int dim() const { return dim_; }

 private:
  int dim_ = 2;
  std::vector<IVec> sites_;  // deduplicated, sorted
  SiteSet set_;
};

SolidRegion solidify(int dim, const std::vector<IVec>& sites);

struct BigClusterReport {
  bool has_open = false;       // distinct failure flag for fields with no
                               // open site in the search cube
  std::vector<IVec> cluster;   // largest open cluster in Q_{R+n}, scan order
  size_t max_bad_size = 0;     // largest component of Q_{R+n} \ cluster
                               // meeting Q_R
  bool event_holds = false;    // has_open and max_bad_size <= n
};

/// Largest open cluster of the field restricted to the centered cube Q_{R+n}
/// (ties broken by first site in scan order), and the size of the worst
/// complement component that meets Q_R. Requires Q_{R+n} inside the domain.
BigClusterReport big_open_cluster(const PercolationField& field, int R, int n);

/// Points x = x_0, ..., x_k = y with |x_{i+1} - x_i| <= sqrt(d), every point
/// inside sigma({v}) for some open v. cases[i] tags the step that produced
/// points[i]: 1 terminal hop, 2 straight advance, 3 detour; the start point
/// carries 0.
struct SkeletonPath {
  std::vector<Vec> points;
  std::vector<int> cases;
  size_t detours = 0;  // number of case-3 instances

  double length() const;  // sum of hop lengths
};

/// Straight-line walk from x to y along the segment, advancing sqrt(d) per
/// step while the target stays near the chosen open cluster, and detouring
/// along the outer boundary of each blocking component (a component of
/// domain \ cluster) to the boundary site in the segment's cube cover that
/// maximizes p . (y - x), then rejoining the segment as close to y as that
/// site's cube allows. The cluster is the largest one whose solidification
/// contains both x and y. Throws invalid_argument when no open cluster is
/// near both endpoints or the construction needs sites outside the domain;
/// throws logic_error if a detour revisits a component (the construction
/// guarantees it cannot; a revisit means a bug) or the point budget blows.
SkeletonPath skeleton_path(const PercolationField& field, const Vec& x,
                           const Vec& y);

/// Run-length-encoded dump: '#' header with domain and provenance, then the
/// first bit value and comma-separated run lengths. load_field inverts it.
void dump_field(const PercolationField& field, const std::string& path);
PercolationField load_field(const std::string& path);

/// CSV point list: columns x,y,z (lattice units) and the case tag.
void write_skeleton_csv(const SkeletonPath& path, const std::string& file);

}  // namespace gfront
