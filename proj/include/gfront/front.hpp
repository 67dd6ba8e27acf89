#pragma once

#include <limits>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "gfront/environment.hpp"
#include "gfront/grid.hpp"

namespace gfront {

/// Raised when a query needs front data past the time the front hit the grid
/// boundary (results beyond that time would be truncated).
struct FrontTruncated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FrontParams {
  int stencil_cells = 0;        // hop radius in cells; 0 = default (5 in 2d, 3 in 3d)
  double sample_spacing = 1.0;  // field sample pitch along hops, in units of h
  double dt = 0.0;              // reporting/epoch granularity; 0 = CFL default
  bool backward = false;        // propagate with -V (backward reachability)
  bool store_pops = true;       // keep the pop log (snapshots, volumes)
};

/// Hop set: all coprime integer offsets within a Euclidean cell radius.
struct Stencil {
  struct Hop {
    IVec off;
    Vec unit;          // normalized direction
    double len_cells;  // Euclidean length in cells
    int nsamples;      // field samples along the hop
  };
  std::vector<Hop> hops;
  int reach = 0;

  static Stencil make(int dim, int radius_cells, double sample_spacing);
};

/// Expanding reachable-set front on a grid.
///
/// Arrival times solve a shortest-time relaxation over straight hops between
/// cell centers; the admissible speed along a hop with direction u is
/// V.u + sqrt(1 - |V_perp|^2) (the support function of the unit control ball
/// shifted by the drift), integrated along the hop by the midpoint rule.
/// Cells finalize in nondecreasing arrival order, so the front can be evolved
/// incrementally to any time horizon and queried for every t below it.
class FrontField {
 public:
  FrontField(const Environment& env, const Grid& grid, std::span<const Vec> seeds,
             FrontParams params = {});

  /// Finalize every cell with arrival <= t.
  void evolve_to(double t);
  /// Evolve until all target cells are finalized; returns the arrival of the
  /// last one, or +inf if some target stays unreached up to t_cap.
  double evolve_until_cells(std::span<const size_t> targets, double t_cap);

  const Grid& grid() const { return grid_; }
  const Environment& environment() const { return *env_; }
  const Stencil& stencil() const { return stencil_; }
  double t_now() const { return t_now_; }
  double dt() const { return dt_; }
  double sup_speed() const { return speed_cap_; }

  double arrival(size_t cell) const {
    return state_[cell] == 2 ? arrival_[cell] : kInf;
  }
  double arrival(const IVec& c) const { return arrival(grid_.index(c)); }
  bool occupied(size_t cell, double t) const {
    return state_[cell] == 2 && arrival_[cell] <= t;
  }
  /// First time the front finalized a cell within one stencil reach of the
  /// grid edge; +inf while untouched. Quantities read past this time are
  /// truncated by the domain.
  double boundary_touch_time() const { return boundary_touch_; }

  size_t pop_count() const { return pop_cells_.size(); }
  const std::vector<uint32_t>& pop_cells() const { return pop_cells_; }
  const std::vector<float>& pop_times() const { return pop_times_; }
  /// Number of cells finalized with arrival <= t (needs store_pops).
  size_t pops_before(double t) const;
  std::vector<uint8_t> occupied_mask(double t) const;

  /// External arrival offer (used by the guaranteed-expansion dilation).
  void offer(size_t cell, double t);

  static constexpr double kInf = std::numeric_limits<double>::infinity();

 private:
  struct Entry {
    float t;
    uint32_t cell;
    bool operator>(const Entry& o) const {
      return t != o.t ? t > o.t : cell > o.cell;
    }
  };

  void finalize(uint32_t cell, float t);
  double hop_time(const Vec& from, const Stencil::Hop& hop) const;

  const Environment* env_;
  Grid grid_;
  FrontParams params_;
  Stencil stencil_;
  double speed_cap_;  // 1 + sup_v
  double dt_;
  double t_now_ = 0.0;
  double boundary_touch_ = kInf;
  double flip_ = 1.0;
  std::vector<float> arrival_;
  std::vector<uint8_t> state_;  // 0 virgin, 1 queued, 2 done
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> heap_;
  std::vector<uint32_t> pop_cells_;
  std::vector<float> pop_times_;
};

/// Forward reachable-set front from seed points, evolved to t_max.
FrontField evolve_front(const Environment& env, const Grid& grid,
                        std::span<const Vec> seeds, double t_max,
                        FrontParams params = {});

/// Backward variant: arrival(c) is the first time a controlled path started
/// at c can reach a target (propagation with the drift sign flipped).
FrontField evolve_front_backward(const Environment& env, const Grid& grid,
                                 std::span<const Vec> targets, double t_max,
                                 FrontParams params = {});

/// Arrival time at the cell containing y; +inf if unreached so far.
double first_passage(const FrontField& front, const Vec& y);

/// Discrete near-geodesic recovered by steepest descent through the arrival
/// field: from y's cell, repeatedly step to the stencil neighbor with the
/// smallest arrival until a seed (arrival 0) is reached. Returned in forward
/// order; times are the arrivals, so times.front() == 0 and times.back() is
/// the passage time of y's cell. Throws if y's cell is outside the grid or
/// unreached.
struct BacktrackPath {
  std::vector<Vec> points;   // cell centers
  std::vector<double> times;
};
BacktrackPath backtrack_path(const FrontField& front, const Vec& y);

/// First time the forward front from x covers the closed ball B_{1/2}(x).
/// Throws FrontTruncated if the grid boundary interferes first; +inf if the
/// cover is incomplete at t_cap.
double waiting_time(const Environment& env, const Grid& grid, const Vec& x,
                    double t_cap, FrontParams params = {});

/// h^d times the number of cells reached by time t.
double reachable_volume(const FrontField& front, double t);

struct GrowthProfile {
  double total = 0.0;      // perimeter estimate of the occupied region
  double advancing = 0.0;  // subset where V . nu >= -1/2
  size_t boundary_cells = 0;
};

/// Boundary measure of the occupied region at time t, with outward normals
/// from the smoothed occupancy gradient. Faces are weighted by the normal
/// projection, which removes the first-order staircase bias of a raw face
/// count.
GrowthProfile boundary_growth_profile(const FrontField& front, double t);

/// Samples the controllability cone at x0 (length 1/(2 lip (1+sup)), opening
/// B_{1/2}(V(x0))) and checks containment in the time-1 front within 2h.
bool cone_check(const Environment& env, const Vec& x0, double h = 1.0 / 32.0,
                int ndirs = 16, int nradii = 8);

struct GuaranteedFront {
  double rho;
  FrontField front;  // arrival field realizes the guaranteed-expansion times
};

/// Reachability with guaranteed expansion: every rho units of evolved time
/// the occupied set is dilated by the closed unit ball (arrivals stamped at
/// the epoch time). rho >= t_max degenerates to plain front evolution.
GuaranteedFront guaranteed_evolve(const Environment& env, const Grid& grid,
                                  const Vec& x, double t_max, double rho,
                                  FrontParams params = {});

/// Debug dump: '#' header lines (grid, dt, t_now, label) then cell,arrival CSV.
void dump_front(const FrontField& front, std::ostream& os,
                const std::string& label);

}  // namespace gfront
