//---------------------------------------------------------------------------//
// Copyright 2026 the maglab developers.
// SPDX-License-Identifier: Apache-2.0
//---------------------------------------------------------------------------//
//! \file linalg.hpp
//! Small fixed-size vector and matrix types used throughout the library.
//---------------------------------------------------------------------------//
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace maglab {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  constexpr double operator[](int i) const { return i == 0 ? x : y; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr Vec2 operator/(Vec2 a, double s) { return a *= (1.0 / s); }

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
//! z-component of the planar cross product a x b.
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
//! Counter-clockwise rotation by a quarter turn.
constexpr Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }

//! Row-major 2x2 matrix [[a, b], [c, d]].
struct Mat2 {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 diag(double p, double q) { return {p, 0.0, 0.0, q}; }
  static Mat2 rotation(double angle) {
    const double cs = std::cos(angle), sn = std::sin(angle);
    return {cs, -sn, sn, cs};
  }
  static constexpr Mat2 from_columns(const Vec2& c0, const Vec2& c1) {
    return {c0.x, c1.x, c0.y, c1.y};
  }

  constexpr double operator()(int i, int j) const {
    return i == 0 ? (j == 0 ? a : b) : (j == 0 ? c : d);
  }
  constexpr Vec2 col(int j) const { return j == 0 ? Vec2{a, c} : Vec2{b, d}; }
  constexpr double det() const { return a * d - b * c; }
  constexpr double trace() const { return a + d; }
  constexpr Mat2 transpose() const { return {a, c, b, d}; }
  constexpr Mat2 inverse() const {
    const double k = 1.0 / det();
    return {d * k, -b * k, -c * k, a * k};
  }

  constexpr Mat2& operator+=(const Mat2& o) { a += o.a; b += o.b; c += o.c; d += o.d; return *this; }
  constexpr Mat2& operator-=(const Mat2& o) { a -= o.a; b -= o.b; c -= o.c; d -= o.d; return *this; }
  constexpr Mat2& operator*=(double s) { a *= s; b *= s; c *= s; d *= s; return *this; }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;
};

constexpr Mat2 operator+(Mat2 x, const Mat2& y) { return x += y; }
constexpr Mat2 operator-(Mat2 x, const Mat2& y) { return x -= y; }
constexpr Mat2 operator*(double s, Mat2 x) { return x *= s; }
constexpr Mat2 operator*(Mat2 x, double s) { return x *= s; }
constexpr Mat2 operator*(const Mat2& x, const Mat2& y) {
  return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
          x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}
constexpr Vec2 operator*(const Mat2& m, const Vec2& v) {
  return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}

inline double frobenius(const Mat2& m) {
  return std::sqrt(m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d);
}

//! Largest singular value, closed form for 2x2.
inline double spectral_norm(const Mat2& m) {
  const double s = m.a * m.a + m.b * m.b + m.c * m.c + m.d * m.d;
  const double dt = m.det();
  const double disc = std::sqrt(std::max(0.0, s * s - 4.0 * dt * dt));
  return std::sqrt(0.5 * (s + disc));
}

inline double max_abs(const Mat2& m) {
  return std::max(std::max(std::abs(m.a), std::abs(m.b)),
                  std::max(std::abs(m.c), std::abs(m.d)));
}

//! Matrix power for small non-negative exponents.
inline Mat2 power(Mat2 m, int n) {
  Mat2 r = Mat2::identity();
  while (n > 0) {
    if (n & 1) r = r * m;
    m = m * m;
    n >>= 1;
  }
  return r;
}

//! Matrix exponential of a traceless 2x2 matrix (closed form).
inline Mat2 expm_traceless(const Mat2& A) {
  // A^2 = -det(A) I for trace-free A.
  const double q = -A.det();
  double ch, sh;
  if (q > 0) {
    const double s = std::sqrt(q);
    ch = std::cosh(s);
    sh = std::sinh(s) / s;
  } else if (q < 0) {
    const double s = std::sqrt(-q);
    ch = std::cos(s);
    sh = std::sin(s) / s;
  } else {
    ch = 1.0;
    sh = 1.0;
  }
  return ch * Mat2::identity() + sh * A;
}

}  // namespace maglab
