#include "gfront/front.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <unordered_set>

namespace gfront {

namespace {

int gcd3(int a, int b, int c) {
  return std::gcd(std::abs(a), std::gcd(std::abs(b), std::abs(c)));
}

}  // namespace

Stencil Stencil::make(int dim, int radius_cells, double sample_spacing) {
  Stencil s;
  s.reach = radius_cells;
  const int r = radius_cells;
  const double r2 = static_cast<double>(r) * r;
  IVec o;
  int zlo = dim == 3 ? -r : 0, zhi = dim == 3 ? r : 0;
  for (o[0] = -r; o[0] <= r; ++o[0])
    for (o[1] = -r; o[1] <= r; ++o[1])
      for (o[2] = zlo; o[2] <= zhi; ++o[2]) {
        double n2 = static_cast<double>(o[0]) * o[0] +
                    static_cast<double>(o[1]) * o[1] +
                    static_cast<double>(o[2]) * o[2];
        if (n2 == 0.0 || n2 > r2) continue;
        if (gcd3(o[0], o[1], o[2]) != 1) continue;
        Hop h;
        h.off = o;
        h.len_cells = std::sqrt(n2);
        h.unit = (1.0 / h.len_cells) * to_vec(o);
        h.nsamples = std::max(1, static_cast<int>(std::ceil(h.len_cells / sample_spacing)));
        s.hops.push_back(h);
      }
  return s;
}

FrontField::FrontField(const Environment& env, const Grid& grid,
                       std::span<const Vec> seeds, FrontParams params)
    : env_(&env), grid_(grid), params_(params) {
  if (grid_.dim != env.dim())
    throw std::invalid_argument("grid/environment dimension mismatch");
  if (params_.stencil_cells <= 0)
    params_.stencil_cells = grid_.dim == 2 ? 5 : 3;
  stencil_ = Stencil::make(grid_.dim, params_.stencil_cells, params_.sample_spacing);
  speed_cap_ = 1.0 + env.norms().sup_v;
  const double dt_cfl = grid_.h / (2.0 * speed_cap_);
  dt_ = params_.dt > 0.0 ? params_.dt : dt_cfl;
  if (dt_ > dt_cfl * (1.0 + 1e-12))
    throw std::invalid_argument("dt violates the CFL contract h/(2(1+sup_v))");
  flip_ = params_.backward ? -1.0 : 1.0;

  arrival_.assign(grid_.size(), std::numeric_limits<float>::infinity());
  state_.assign(grid_.size(), 0);
  if (seeds.empty()) throw std::invalid_argument("empty seed set");
  for (const Vec& s : seeds) {
    IVec c = grid_.cell_of(s);
    if (!grid_.contains(c)) throw std::invalid_argument("seed outside grid");
    size_t idx = grid_.index(c);
    arrival_[idx] = 0.0f;
    state_[idx] = 1;
    heap_.push(Entry{0.0f, static_cast<uint32_t>(idx)});
  }
}

double FrontField::hop_time(const Vec& from, const Stencil::Hop& hop) const {
  const double len = hop.len_cells * grid_.h;
  const double step = len / hop.nsamples;
  double tau = 0.0;
  for (int j = 0; j < hop.nsamples; ++j) {
    Vec p = from + ((j + 0.5) * step) * hop.unit;
    Vec v = flip_ * env_->velocity(p);
    double vpar = dot(v, hop.unit);
    double vperp2 = std::max(0.0, norm2(v) - vpar * vpar);
    double disc = 1.0 - vperp2;
    if (disc <= 0.0) return kInf;  // drift too strong transversally
    double speed = vpar + std::sqrt(disc);
    if (speed <= 1e-12) return kInf;  // no forward progress on this line
    tau += step / speed;
  }
  return tau;
}

void FrontField::finalize(uint32_t cell, float t) {
  state_[cell] = 2;
  if (params_.store_pops) {
    pop_cells_.push_back(cell);
    pop_times_.push_back(t);
  }
  const IVec ci = grid_.decode(cell);
  for (int i = 0; i < grid_.dim; ++i)
    if (ci[i] < stencil_.reach || ci[i] >= grid_.n[i] - stencil_.reach) {
      if (t < boundary_touch_) boundary_touch_ = t;
      break;
    }
  const Vec xc = grid_.center(ci);
  const double tc = t;
  const double inv_cap = 1.0 / speed_cap_;
  for (const Stencil::Hop& hop : stencil_.hops) {
    IVec ni = ci + hop.off;
    bool in = true;
    for (int i = 0; i < grid_.dim; ++i)
      if (ni[i] < 0 || ni[i] >= grid_.n[i]) {
        in = false;
        break;
      }
    if (!in) continue;
    size_t nidx = grid_.index(ni);
    if (state_[nidx] == 2) continue;
    float cur = arrival_[nidx];
    if (tc + hop.len_cells * grid_.h * inv_cap >= cur) continue;  // cannot win
    double tau = hop_time(xc, hop);
    float cand = static_cast<float>(tc + tau);
    if (cand < cur) {
      arrival_[nidx] = cand;
      state_[nidx] = std::max<uint8_t>(state_[nidx], 1);
      heap_.push(Entry{cand, static_cast<uint32_t>(nidx)});
    }
  }
}

void FrontField::evolve_to(double t) {
  while (!heap_.empty()) {
    Entry e = heap_.top();
    if (static_cast<double>(e.t) > t) break;
    heap_.pop();
    if (state_[e.cell] == 2 || e.t > arrival_[e.cell]) continue;  // stale
    finalize(e.cell, e.t);
  }
  t_now_ = std::max(t_now_, t);
}

double FrontField::evolve_until_cells(std::span<const size_t> targets,
                                      double t_cap) {
  std::unordered_set<uint32_t> pending;
  double done_max = 0.0;
  for (size_t t : targets) {
    if (state_[t] == 2)
      done_max = std::max(done_max, static_cast<double>(arrival_[t]));
    else
      pending.insert(static_cast<uint32_t>(t));
  }
  while (!pending.empty()) {
    if (heap_.empty()) {
      t_now_ = std::max(t_now_, t_cap);
      return kInf;
    }
    Entry e = heap_.top();
    if (static_cast<double>(e.t) > t_cap) {
      t_now_ = std::max(t_now_, t_cap);
      return kInf;
    }
    heap_.pop();
    if (state_[e.cell] == 2 || e.t > arrival_[e.cell]) continue;
    finalize(e.cell, e.t);
    t_now_ = std::max(t_now_, static_cast<double>(e.t));
    auto it = pending.find(e.cell);
    if (it != pending.end()) {
      pending.erase(it);
      done_max = std::max(done_max, static_cast<double>(e.t));
    }
  }
  return done_max;
}

size_t FrontField::pops_before(double t) const {
  auto it = std::upper_bound(pop_times_.begin(), pop_times_.end(),
                             static_cast<float>(t));
  return static_cast<size_t>(it - pop_times_.begin());
}

std::vector<uint8_t> FrontField::occupied_mask(double t) const {
  std::vector<uint8_t> mask(grid_.size(), 0);
  size_t k = pops_before(t);
  for (size_t i = 0; i < k; ++i) mask[pop_cells_[i]] = 1;
  return mask;
}

void FrontField::offer(size_t cell, double t) {
  if (state_[cell] == 2) return;
  float ft = static_cast<float>(t);
  if (ft < arrival_[cell]) {
    arrival_[cell] = ft;
    state_[cell] = std::max<uint8_t>(state_[cell], 1);
    heap_.push(Entry{ft, static_cast<uint32_t>(cell)});
  }
}

FrontField evolve_front(const Environment& env, const Grid& grid,
                        std::span<const Vec> seeds, double t_max,
                        FrontParams params) {
  FrontField f(env, grid, seeds, params);
  f.evolve_to(t_max);
  return f;
}

FrontField evolve_front_backward(const Environment& env, const Grid& grid,
                                 std::span<const Vec> targets, double t_max,
                                 FrontParams params) {
  params.backward = true;
  FrontField f(env, grid, targets, params);
  f.evolve_to(t_max);
  return f;
}

double first_passage(const FrontField& front, const Vec& y) {
  IVec c = front.grid().cell_of(y);
  if (!front.grid().contains(c))
    throw std::invalid_argument("query point outside grid");
  return front.arrival(c);
}

BacktrackPath backtrack_path(const FrontField& front, const Vec& y) {
  const Grid& g = front.grid();
  IVec c = g.cell_of(y);
  if (!g.contains(c)) throw std::invalid_argument("query point outside grid");
  size_t cell = g.index(c);
  if (front.arrival(cell) == FrontField::kInf)
    throw std::invalid_argument("target cell not reached by the front");
  BacktrackPath path;
  for (;;) {
    const IVec ci = g.decode(cell);
    path.points.push_back(g.center(ci));
    path.times.push_back(front.arrival(cell));
    if (front.arrival(cell) == 0.0) break;
    // a finalized non-seed cell was relaxed from a strictly earlier neighbor,
    // so the argmin step always makes progress and the walk terminates
    double best = front.arrival(cell);
    size_t next = cell;
    for (const Stencil::Hop& hop : front.stencil().hops) {
      const IVec ni = ci + hop.off;
      if (!g.contains(ni)) continue;
      const double a = front.arrival(g.index(ni));
      if (a < best) {
        best = a;
        next = g.index(ni);
      }
    }
    if (next == cell)
      throw std::logic_error("arrival field has a non-seed local minimum");
    cell = next;
  }
  std::reverse(path.points.begin(), path.points.end());
  std::reverse(path.times.begin(), path.times.end());
  return path;
}

double waiting_time(const Environment& env, const Grid& grid, const Vec& x,
                    double t_cap, FrontParams params) {
  FrontField f(env, grid, std::span<const Vec>(&x, 1), params);
  std::vector<size_t> targets;
  const double rad = 0.5 + 1e-12;
  IVec clo = grid.cell_of(x - Vec{rad, rad, grid.dim == 3 ? rad : 0.0});
  IVec chi = grid.cell_of(x + Vec{rad, rad, grid.dim == 3 ? rad : 0.0});
  IVec c;
  int z0 = grid.dim == 3 ? clo[2] : 0, z1 = grid.dim == 3 ? chi[2] : 0;
  for (c[0] = clo[0]; c[0] <= chi[0]; ++c[0])
    for (c[1] = clo[1]; c[1] <= chi[1]; ++c[1])
      for (c[2] = z0; c[2] <= z1; ++c[2]) {
        if (!grid.contains(c)) throw FrontTruncated("B_1/2 exceeds the grid");
        if (norm(grid.center(c) - x) <= rad) targets.push_back(grid.index(c));
      }
  double w = f.evolve_until_cells(targets, t_cap);
  if (f.boundary_touch_time() < w)
    throw FrontTruncated("front reached the grid boundary before covering B_1/2");
  return w;
}

double reachable_volume(const FrontField& front, double t) {
  if (t > front.t_now() + 1e-12)
    throw std::invalid_argument("volume queried past the evolved horizon");
  double cells = static_cast<double>(front.pops_before(t));
  double hd = 1.0;
  for (int i = 0; i < front.grid().dim; ++i) hd *= front.grid().h;
  return cells * hd;
}

GrowthProfile boundary_growth_profile(const FrontField& front, double t) {
  if (t > front.t_now() + 1e-12)
    throw std::invalid_argument("profile queried past the evolved horizon");
  const Grid& g = front.grid();
  GrowthProfile out;
  const int d = g.dim;
  double hface = 1.0;
  for (int i = 0; i < d - 1; ++i) hface *= g.h;

  auto occ = [&](const IVec& c) {
    return g.contains(c) && front.occupied(g.index(c), t);
  };

  std::vector<uint32_t> const& cells = front.pop_cells();
  size_t k = front.pops_before(t);
  for (size_t i = 0; i < k; ++i) {
    IVec c = g.decode(cells[i]);
    // exposed faces
    std::vector<int> faces;  // +axis encoded as axis, -axis as axis+3
    for (int a = 0; a < d; ++a) {
      IVec p = c, m = c;
      ++p[a];
      --m[a];
      if (!occ(p)) faces.push_back(a);
      if (!occ(m)) faces.push_back(a + 3);
    }
    if (faces.empty()) continue;
    ++out.boundary_cells;
    // occupancy-gradient normal over the 3^d neighborhood
    Vec grad;
    IVec o;
    int zlo = d == 3 ? -1 : 0, zhi = d == 3 ? 1 : 0;
    for (o[0] = -1; o[0] <= 1; ++o[0])
      for (o[1] = -1; o[1] <= 1; ++o[1])
        for (o[2] = zlo; o[2] <= zhi; ++o[2]) {
          if (o[0] == 0 && o[1] == 0 && o[2] == 0) continue;
          if (occ(c + o)) grad += (1.0 / norm2(to_vec(o))) * to_vec(o);
        }
    Vec nu = -1.0 * grad;
    double nn = norm(nu);
    if (nn < 1e-12) {
      nu = Vec{};
      nu[faces[0] % 3] = faces[0] < 3 ? 1.0 : -1.0;
    } else {
      nu = (1.0 / nn) * nu;
    }
    double w = 0.0;
    for (int f : faces) {
      double comp = f < 3 ? nu[f] : -nu[f - 3];
      w += std::max(0.0, comp);
    }
    w *= hface;
    out.total += w;
    if (dot(front.environment().velocity(g.center(c)), nu) >= -0.5)
      out.advancing += w;
  }
  return out;
}

bool cone_check(const Environment& env, const Vec& x0, double h, int ndirs,
                int nradii) {
  FieldNorms nm = env.norms();
  const double cone_len = 1.0 / (2.0 * nm.lip_v * (1.0 + nm.sup_v));
  const int d = env.dim();

  Grid g = Grid::covering(d, (1.0 + nm.sup_v) * 1.0 + 4.0 * h, h);
  for (int i = 0; i < d; ++i) g.lo[i] += x0[i];
  FrontField f(env, g, std::span<const Vec>(&x0, 1), FrontParams{});
  f.evolve_to(1.0);

  const Vec v0 = env.velocity(x0);
  for (int j = 0; j < ndirs; ++j) {
    Vec u;
    if (d == 2) {
      double a = 2.0 * M_PI * j / ndirs;
      u = Vec{std::cos(a), std::sin(a)};
    } else {
      // Fibonacci sphere
      double zc = 1.0 - 2.0 * (j + 0.5) / ndirs;
      double rr = std::sqrt(std::max(0.0, 1.0 - zc * zc));
      double a = j * 2.39996322972865332;
      u = Vec{rr * std::cos(a), rr * std::sin(a), zc};
    }
    for (int i = 1; i <= nradii; ++i) {
      double t = cone_len * i / nradii;
      Vec p = x0 + t * (v0 + 0.5 * u);
      // occupied within 2h of p at time 1
      bool ok = false;
      IVec pc = g.cell_of(p);
      IVec o;
      int zlo = d == 3 ? -2 : 0, zhi = d == 3 ? 2 : 0;
      for (o[0] = -2; o[0] <= 2 && !ok; ++o[0])
        for (o[1] = -2; o[1] <= 2 && !ok; ++o[1])
          for (o[2] = zlo; o[2] <= zhi && !ok; ++o[2]) {
            IVec c = pc + o;
            if (!g.contains(c)) continue;
            if (f.occupied(g.index(c), 1.0) && norm(g.center(c) - p) <= 2.0 * h)
              ok = true;
          }
      if (!ok) return false;
    }
  }
  return true;
}

GuaranteedFront guaranteed_evolve(const Environment& env, const Grid& grid,
                                  const Vec& x, double t_max, double rho,
                                  FrontParams params) {
  if (rho <= 0.0) throw std::invalid_argument("rho must be positive");
  FrontField f(env, grid, std::span<const Vec>(&x, 1), params);
  if (rho < f.dt()) throw std::invalid_argument("rho below the step scale dt");
  const double inv_h2 = 1.0 / (grid.h * grid.h);
  for (int k = 1; k * rho < t_max * (1.0 - 1e-12); ++k) {
    const double tk = k * rho;
    f.evolve_to(tk);
    std::vector<uint8_t> mask = f.occupied_mask(tk);
    std::vector<double> d2 = edt_squared(grid, mask);
    const double thr = inv_h2 * (1.0 + 1e-9);  // closed unit ball in cell units
    for (size_t i = 0; i < d2.size(); ++i)
      if (d2[i] <= thr) f.offer(i, tk);
  }
  f.evolve_to(t_max);
  return GuaranteedFront{rho, std::move(f)};
}

void dump_front(const FrontField& front, std::ostream& os,
                const std::string& label) {
  const Grid& g = front.grid();
  os << "# front dump: " << label << "\n";
  os << "# dim=" << g.dim << " n=" << g.n[0] << 'x' << g.n[1] << 'x' << g.n[2]
     << " h=" << g.h << " lo=" << g.lo << "\n";
  os << "# dt=" << front.dt() << " t_now=" << front.t_now()
     << " boundary_touch=" << front.boundary_touch_time() << "\n";
  os << "cell,arrival\n";
  for (size_t i = 0; i < front.pop_count(); ++i)
    os << front.pop_cells()[i] << ',' << front.pop_times()[i] << "\n";
}

}  // namespace gfront
