#pragma once

#include <array>
#include <cmath>
#include <utility>

namespace rta {

// Forward-mode dual number with N partial-derivative slots. The scalar type T
// may itself be a Jet, which yields exact second-order information for the
// lifted barrier constraints.
template <class T, int N>
struct Jet {
  T v{};
  std::array<T, N> d{};

  Jet() = default;
  Jet(double s) : v(s) {}  // constants promote with zero derivative

  static Jet of(T value) {
    Jet j;
    j.v = std::move(value);
    return j;
  }
  static Jet variable(T value, int slot) {
    Jet j = of(std::move(value));
    j.d[slot] = T(1.0);
    return j;
  }
};

inline double scalar_value(double x) { return x; }

template <class T, int N>
double scalar_value(const Jet<T, N>& x) {
  return scalar_value(x.v);
}

template <class T, int N>
Jet<T, N> operator-(const Jet<T, N>& a) {
  Jet<T, N> r;
  r.v = -a.v;
  for (int k = 0; k < N; ++k) r.d[k] = -a.d[k];
  return r;
}

template <class T, int N>
Jet<T, N> operator+(const Jet<T, N>& a, const Jet<T, N>& b) {
  Jet<T, N> r;
  r.v = a.v + b.v;
  for (int k = 0; k < N; ++k) r.d[k] = a.d[k] + b.d[k];
  return r;
}

template <class T, int N>
Jet<T, N> operator+(const Jet<T, N>& a, double b) {
  Jet<T, N> r = a;
  r.v = a.v + b;
  return r;
}

template <class T, int N>
Jet<T, N> operator+(double a, const Jet<T, N>& b) {
  return b + a;
}

template <class T, int N>
Jet<T, N> operator-(const Jet<T, N>& a, const Jet<T, N>& b) {
  Jet<T, N> r;
  r.v = a.v - b.v;
  for (int k = 0; k < N; ++k) r.d[k] = a.d[k] - b.d[k];
  return r;
}

template <class T, int N>
Jet<T, N> operator-(const Jet<T, N>& a, double b) {
  Jet<T, N> r = a;
  r.v = a.v - b;
  return r;
}

template <class T, int N>
Jet<T, N> operator-(double a, const Jet<T, N>& b) {
  Jet<T, N> r = -b;
  r.v = a - b.v;
  return r;
}

template <class T, int N>
Jet<T, N> operator*(const Jet<T, N>& a, const Jet<T, N>& b) {
  Jet<T, N> r;
  r.v = a.v * b.v;
  for (int k = 0; k < N; ++k) r.d[k] = a.d[k] * b.v + a.v * b.d[k];
  return r;
}

template <class T, int N>
Jet<T, N> operator*(const Jet<T, N>& a, double b) {
  Jet<T, N> r;
  r.v = a.v * b;
  for (int k = 0; k < N; ++k) r.d[k] = a.d[k] * b;
  return r;
}

template <class T, int N>
Jet<T, N> operator*(double a, const Jet<T, N>& b) {
  return b * a;
}

template <class T, int N>
Jet<T, N> operator/(const Jet<T, N>& a, const Jet<T, N>& b) {
  Jet<T, N> r;
  r.v = a.v / b.v;
  for (int k = 0; k < N; ++k) r.d[k] = (a.d[k] - r.v * b.d[k]) / b.v;
  return r;
}

template <class T, int N>
Jet<T, N> operator/(const Jet<T, N>& a, double b) {
  Jet<T, N> r;
  r.v = a.v / b;
  for (int k = 0; k < N; ++k) r.d[k] = a.d[k] / b;
  return r;
}

template <class T, int N>
Jet<T, N> operator/(double a, const Jet<T, N>& b) {
  Jet<T, N> r;
  r.v = a / b.v;
  for (int k = 0; k < N; ++k) r.d[k] = -(r.v * b.d[k]) / b.v;
  return r;
}

template <class T, int N>
bool operator<(const Jet<T, N>& a, const Jet<T, N>& b) {
  return scalar_value(a) < scalar_value(b);
}
template <class T, int N>
bool operator<(const Jet<T, N>& a, double b) {
  return scalar_value(a) < b;
}
template <class T, int N>
bool operator>(const Jet<T, N>& a, double b) {
  return scalar_value(a) > b;
}

template <class T, int N>
Jet<T, N> sin(const Jet<T, N>& x) {
  using std::cos;
  using std::sin;
  Jet<T, N> r;
  r.v = sin(x.v);
  const T c = cos(x.v);
  for (int k = 0; k < N; ++k) r.d[k] = c * x.d[k];
  return r;
}

template <class T, int N>
Jet<T, N> cos(const Jet<T, N>& x) {
  using std::cos;
  using std::sin;
  Jet<T, N> r;
  r.v = cos(x.v);
  const T ms = -sin(x.v);
  for (int k = 0; k < N; ++k) r.d[k] = ms * x.d[k];
  return r;
}

template <class T, int N>
Jet<T, N> sqrt(const Jet<T, N>& x) {
  using std::sqrt;
  Jet<T, N> r;
  r.v = sqrt(x.v);
  const T half_inv = T(0.5) / r.v;
  for (int k = 0; k < N; ++k) r.d[k] = half_inv * x.d[k];
  return r;
}

template <class T, int N>
Jet<T, N> abs(const Jet<T, N>& x) {
  return scalar_value(x) < 0.0 ? -x : x;
}

inline double max0(double x) { return x > 0.0 ? x : 0.0; }

template <class T, int N>
Jet<T, N> max0(const Jet<T, N>& x) {
  if (scalar_value(x) > 0.0) return x;
  return Jet<T, N>{};
}

inline double acos_clamped(double x) {
  if (x >= 1.0) return 0.0;
  if (x <= -1.0) return std::acos(-1.0);
  return std::acos(x);
}

// d/dx acos(x) = -1/sqrt(1-x^2) blows up at the poles; the magnitude is
// capped so barrier rows stay bounded there.
inline constexpr double kAcosDerivFloor = 1e-6;

template <class T, int N>
Jet<T, N> acos_clamped(const Jet<T, N>& x) {
  using std::sqrt;
  const double xv = scalar_value(x);
  Jet<T, N> r;
  if (xv >= 1.0 || xv <= -1.0) {
    r.v = T(xv >= 1.0 ? 0.0 : std::acos(-1.0));
    return r;
  }
  r.v = acos_clamped(x.v);
  T denom = sqrt(T(1.0) - x.v * x.v);
  if (scalar_value(denom) < kAcosDerivFloor) denom = T(kAcosDerivFloor);
  for (int k = 0; k < N; ++k) r.d[k] = -(x.d[k] / denom);
  return r;
}

}  // namespace rta
