#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>

namespace gfront {

/// Fixed-capacity vector for spatial dimension d in {2,3}. Unused components
/// stay exactly zero, so dot products and norms are dimension-agnostic.
struct Vec {
  std::array<double, 3> c{0.0, 0.0, 0.0};

  Vec() = default;
  Vec(double x, double y) : c{x, y, 0.0} {}
  Vec(double x, double y, double z) : c{x, y, z} {}

  double& operator[](int i) { return c[static_cast<size_t>(i)]; }
  double operator[](int i) const { return c[static_cast<size_t>(i)]; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < 3; ++i) c[i] += o.c[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < 3; ++i) c[i] -= o.c[i];
    return *this;
  }
  Vec& operator*=(double s) {
    for (int i = 0; i < 3; ++i) c[i] *= s;
    return *this;
  }

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend Vec operator-(const Vec& a) { return Vec{-a.c[0], -a.c[1], -a.c[2]}; }
  friend bool operator==(const Vec& a, const Vec& b) { return a.c == b.c; }
};

inline double dot(const Vec& a, const Vec& b) {
  return a.c[0] * b.c[0] + a.c[1] * b.c[1] + a.c[2] * b.c[2];
}
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }
inline Vec normalized(const Vec& a) {
  double n = norm(a);
  return n > 0.0 ? (1.0 / n) * a : a;
}

/// Integer lattice site / cell multi-index, zero-padded like Vec.
struct IVec {
  std::array<int, 3> c{0, 0, 0};

  IVec() = default;
  IVec(int x, int y) : c{x, y, 0} {}
  IVec(int x, int y, int z) : c{x, y, z} {}

  int& operator[](int i) { return c[static_cast<size_t>(i)]; }
  int operator[](int i) const { return c[static_cast<size_t>(i)]; }

  friend IVec operator+(IVec a, const IVec& b) {
    for (int i = 0; i < 3; ++i) a.c[i] += b.c[i];
    return a;
  }
  friend IVec operator-(IVec a, const IVec& b) {
    for (int i = 0; i < 3; ++i) a.c[i] -= b.c[i];
    return a;
  }
  friend bool operator==(const IVec& a, const IVec& b) { return a.c == b.c; }
  friend bool operator!=(const IVec& a, const IVec& b) { return a.c != b.c; }
  friend bool operator<(const IVec& a, const IVec& b) { return a.c < b.c; }
};

inline Vec to_vec(const IVec& v) {
  return Vec{static_cast<double>(v[0]), static_cast<double>(v[1]),
             static_cast<double>(v[2])};
}
inline int linf(const IVec& a, const IVec& b) {
  int m = 0;
  for (int i = 0; i < 3; ++i) m = std::max(m, std::abs(a.c[i] - b.c[i]));
  return m;
}

inline std::ostream& operator<<(std::ostream& os, const Vec& v) {
  return os << '(' << v[0] << ',' << v[1] << ',' << v[2] << ')';
}
inline std::ostream& operator<<(std::ostream& os, const IVec& v) {
  return os << '(' << v[0] << ',' << v[1] << ',' << v[2] << ')';
}

/// Dense 3x3 matrix; for d=2 the third row/column is zero.
struct Mat {
  std::array<std::array<double, 3>, 3> m{};

  double& operator()(int i, int j) {
    return m[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }
  double operator()(int i, int j) const {
    return m[static_cast<size_t>(i)][static_cast<size_t>(j)];
  }

  double trace() const { return m[0][0] + m[1][1] + m[2][2]; }

  friend Mat operator+(Mat a, const Mat& b) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a.m[i][j] += b.m[i][j];
    return a;
  }
  friend Mat operator*(double s, Mat a) {
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a.m[i][j] *= s;
    return a;
  }
};

inline Vec mul(const Mat& a, const Vec& x) {
  Vec r;
  for (int i = 0; i < 3; ++i)
    r[i] = a(i, 0) * x[0] + a(i, 1) * x[1] + a(i, 2) * x[2];
  return r;
}

/// Axis-aligned box [lo, hi].
struct Box {
  Vec lo, hi;
  bool contains(const Vec& x, int dim) const {
    for (int i = 0; i < dim; ++i)
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
  }
};

}  // namespace gfront
