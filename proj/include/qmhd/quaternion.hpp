#pragma once

/*! \file
 *  \brief Real quaternions x0 + x1 e1 + x2 e2 + x3 e3 with e1 e2 = e3, ei^2 = -1.
 *
 *  Component order is (s, v1, v2, v3) everywhere, including every file format.
 */

#include <array>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace qmhd {

struct Quaternion {
  double s = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double v3 = 0.0;

  constexpr Quaternion() = default;
  constexpr Quaternion(double s_, double a, double b, double c) : s(s_), v1(a), v2(b), v3(c) {}

  static constexpr Quaternion scalar(double s_) { return {s_, 0.0, 0.0, 0.0}; }
  static constexpr Quaternion vector(double a, double b, double c) { return {0.0, a, b, c}; }
  static constexpr Quaternion e(int axis) {
    return {0.0, axis == 0 ? 1.0 : 0.0, axis == 1 ? 1.0 : 0.0, axis == 2 ? 1.0 : 0.0};
  }

  constexpr double operator[](int i) const { return i == 0 ? s : i == 1 ? v1 : i == 2 ? v2 : v3; }
  constexpr double& operator[](int i) { return i == 0 ? s : i == 1 ? v1 : i == 2 ? v2 : v3; }

  constexpr bool is_pure() const { return s == 0.0; }

  constexpr Quaternion& operator+=(const Quaternion& o) {
    s += o.s; v1 += o.v1; v2 += o.v2; v3 += o.v3;
    return *this;
  }
  constexpr Quaternion& operator-=(const Quaternion& o) {
    s -= o.s; v1 -= o.v1; v2 -= o.v2; v3 -= o.v3;
    return *this;
  }
  constexpr Quaternion& operator*=(double a) {
    s *= a; v1 *= a; v2 *= a; v3 *= a;
    return *this;
  }

  friend constexpr bool operator==(const Quaternion&, const Quaternion&) = default;
};

constexpr Quaternion operator+(Quaternion a, const Quaternion& b) { return a += b; }
constexpr Quaternion operator-(Quaternion a, const Quaternion& b) { return a -= b; }
constexpr Quaternion operator-(const Quaternion& a) { return {-a.s, -a.v1, -a.v2, -a.v3}; }
constexpr Quaternion operator*(Quaternion a, double k) { return a *= k; }
constexpr Quaternion operator*(double k, Quaternion a) { return a *= k; }
constexpr Quaternion operator/(Quaternion a, double k) { return a *= (1.0 / k); }

/// Hamilton product.
constexpr Quaternion qmul(const Quaternion& a, const Quaternion& b) {
  return {a.s * b.s - a.v1 * b.v1 - a.v2 * b.v2 - a.v3 * b.v3,
          a.s * b.v1 + b.s * a.v1 + a.v2 * b.v3 - a.v3 * b.v2,
          a.s * b.v2 + b.s * a.v2 + a.v3 * b.v1 - a.v1 * b.v3,
          a.s * b.v3 + b.s * a.v3 + a.v1 * b.v2 - a.v2 * b.v1};
}

constexpr Quaternion operator*(const Quaternion& a, const Quaternion& b) { return qmul(a, b); }

constexpr Quaternion conj(const Quaternion& q) { return {q.s, -q.v1, -q.v2, -q.v3}; }
constexpr double sc(const Quaternion& q) { return q.s; }
constexpr Quaternion vec(const Quaternion& q) { return {0.0, q.v1, q.v2, q.v3}; }

constexpr double norm_sq(const Quaternion& q) { return q.s * q.s + q.v1 * q.v1 + q.v2 * q.v2 + q.v3 * q.v3; }
inline double abs(const Quaternion& q) { return std::sqrt(norm_sq(q)); }

/// Euclidean dot product of the vector parts.
constexpr double dot3(const Quaternion& a, const Quaternion& b) { return a.v1 * b.v1 + a.v2 * b.v2 + a.v3 * b.v3; }

constexpr Quaternion cross3(const Quaternion& a, const Quaternion& b) {
  return {0.0, a.v2 * b.v3 - a.v3 * b.v2, a.v3 * b.v1 - a.v1 * b.v3, a.v1 * b.v2 - a.v2 * b.v1};
}

/// Splits the product of two pure quaternions into (-x.y, x cross y).
inline std::pair<double, Quaternion> product_split(const Quaternion& x, const Quaternion& y) {
  if (!x.is_pure() || !y.is_pure()) {
    throw std::invalid_argument("product_split: both factors must be pure quaternions");
  }
  return {-dot3(x, y), cross3(x, y)};
}

/// Product p * q where p = (0, a) is pure; the hot path of every kernel sum.
constexpr Quaternion pure_mul(double a1, double a2, double a3, const Quaternion& q) {
  return {-(a1 * q.v1 + a2 * q.v2 + a3 * q.v3),
          a1 * q.s + a2 * q.v3 - a3 * q.v2,
          a2 * q.s + a3 * q.v1 - a1 * q.v3,
          a3 * q.s + a1 * q.v2 - a2 * q.v1};
}

inline std::ostream& operator<<(std::ostream& os, const Quaternion& q) {
  return os << '(' << q.s << ", " << q.v1 << ", " << q.v2 << ", " << q.v3 << ')';
}

}  // namespace qmhd
