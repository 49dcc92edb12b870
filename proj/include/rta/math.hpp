#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include "rta/jet.hpp"

namespace rta {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

inline double wrap_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

using Vec3 = std::array<double, 3>;
using Vec4 = std::array<double, 4>;
using Mat43 = std::array<std::array<double, 3>, 4>;

template <class T>
using TVec3 = std::array<T, 3>;
template <class T>
using TVec4 = std::array<T, 4>;

template <class T>
TVec3<T> to_t(const Vec3& v) {
  return {T(v[0]), T(v[1]), T(v[2])};
}

template <class T>
T dot(const TVec3<T>& a, const TVec3<T>& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

template <class T>
TVec3<T> cross(const TVec3<T>& a, const TVec3<T>& b) {
  return {a[1] * b[2] - a[2] * b[1],
          a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 v_add(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 v_sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 v_scale(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

// Scalar-last unit quaternion encoding the rotation that takes Hill-frame
// coordinates into body-frame coordinates.
struct Quaternion {
  double q1 = 0.0, q2 = 0.0, q3 = 0.0, q4 = 1.0;

  static Quaternion identity() { return {}; }

  static Quaternion from_axis_angle(const Vec3& axis, double angle) {
    const double n = rta::norm(axis);
    if (n <= 0.0) throw std::domain_error("from_axis_angle: zero axis");
    const double s = std::sin(0.5 * angle) / n;
    return {axis[0] * s, axis[1] * s, axis[2] * s, std::cos(0.5 * angle)};
  }

  double norm() const { return std::sqrt(q1 * q1 + q2 * q2 + q3 * q3 + q4 * q4); }

  Quaternion normalized() const {
    const double n = norm();
    if (!(n > 0.0)) throw std::domain_error("Quaternion::normalized: zero norm");
    return {q1 / n, q2 / n, q3 / n, q4 / n};
  }

  Quaternion conjugate() const { return {-q1, -q2, -q3, q4}; }

  Vec4 as_vec4() const { return {q1, q2, q3, q4}; }

  static Quaternion from_vec4(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
};

// Product composing frame transforms: the attitude matrix of the product is
// the product of the factors' attitude matrices.
inline Quaternion quat_multiply(const Quaternion& a, const Quaternion& b) {
  const Vec3 av{a.q1, a.q2, a.q3};
  const Vec3 bv{b.q1, b.q2, b.q3};
  const Vec3 c = cross(av, bv);
  return {a.q4 * bv[0] + b.q4 * av[0] - c[0],
          a.q4 * bv[1] + b.q4 * av[1] - c[1],
          a.q4 * bv[2] + b.q4 * av[2] - c[2],
          a.q4 * b.q4 - dot(av, bv)};
}

inline Quaternion quat_inverse(const Quaternion& q) {
  const double n2 = q.q1 * q.q1 + q.q2 * q.q2 + q.q3 * q.q3 + q.q4 * q.q4;
  if (!(n2 > 0.0)) throw std::domain_error("quat_inverse: zero norm");
  return {-q.q1 / n2, -q.q2 / n2, -q.q3 / n2, q.q4 / n2};
}

// Kinematic map: q_dot = 1/2 * Xi(q) * omega.
inline Mat43 xi_matrix(const Quaternion& q) {
  return {{{q.q4, -q.q3, q.q2},
           {q.q3, q.q4, -q.q1},
           {-q.q2, q.q1, q.q4},
           {-q.q1, -q.q2, -q.q3}}};
}

// Applies the attitude matrix A(q): coordinates of v move from the Hill frame
// into the body frame.
template <class T>
TVec3<T> rotate_hill_to_body(const TVec4<T>& q, const TVec3<T>& v) {
  const T s = q[3] * q[3] - (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]);
  const T qv = q[0] * v[0] + q[1] * v[1] + q[2] * v[2];
  const TVec3<T> c = {q[1] * v[2] - q[2] * v[1],
                      q[2] * v[0] - q[0] * v[2],
                      q[0] * v[1] - q[1] * v[0]};
  TVec3<T> out;
  for (int i = 0; i < 3; ++i) out[i] = s * v[i] + 2.0 * (qv * q[i]) - 2.0 * (q[3] * c[i]);
  return out;
}

template <class T>
TVec3<T> rotate_body_to_hill(const TVec4<T>& q, const TVec3<T>& v) {
  const TVec4<T> qc = {-q[0], -q[1], -q[2], q[3]};
  return rotate_hill_to_body<T>(qc, v);
}

inline Vec3 rotate_to_hill(const Quaternion& q, const Vec3& body_vec) {
  if (std::abs(q.norm() - 1.0) > 1e-6)
    throw std::domain_error("rotate_to_hill: quaternion is not unit norm");
  if (std::abs(norm(body_vec) - 1.0) > 1e-9)
    throw std::domain_error("rotate_to_hill: vector is not unit norm");
  return rotate_body_to_hill<double>(q.as_vec4(), body_vec);
}

inline Vec3 rotate_to_body(const Quaternion& q, const Vec3& hill_vec) {
  if (std::abs(q.norm() - 1.0) > 1e-6)
    throw std::domain_error("rotate_to_body: quaternion is not unit norm");
  if (std::abs(norm(hill_vec) - 1.0) > 1e-9)
    throw std::domain_error("rotate_to_body: vector is not unit norm");
  return rotate_hill_to_body<double>(q.as_vec4(), hill_vec);
}

}  // namespace rta
