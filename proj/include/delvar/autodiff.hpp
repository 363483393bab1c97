#pragma once

// Forward-mode scalar types used to differentiate integrands without symbolic
// manipulation.
//
//   Dual<T>  value plus one directional derivative.
//   Jet<T>   truncated Taylor series in time, coefficient type T (double or
//            Dual<double>).  Jet<Dual<double>> carries the time series of a
//            single partial derivative along a path.

#include <array>
#include <cmath>
#include <cstdlib>
#include <type_traits>

namespace delvar {

template <typename T>
struct Dual {
  T v{};
  T d{};

  Dual() = default;
  Dual(double constant) : v(constant), d(0.0) {}  // NOLINT: constants promote implicitly
  Dual(T value, T derivative) : v(value), d(derivative) {}
};

inline double value(double x) { return x; }

template <typename T>
double value(const Dual<T>& x) {
  return value(x.v);
}

// ---------------------------------------------------------------- Dual ops

template <typename T>
Dual<T> operator-(const Dual<T>& a) {
  return {-a.v, -a.d};
}
template <typename T>
Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) {
  return {a.v + b.v, a.d + b.d};
}
template <typename T>
Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) {
  return {a.v - b.v, a.d - b.d};
}
template <typename T>
Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d};
}
template <typename T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  T q = a.v / b.v;
  return {q, (a.d - q * b.d) / b.v};
}
template <typename T>
Dual<T> operator+(const Dual<T>& a, double b) {
  return {a.v + b, a.d};
}
template <typename T>
Dual<T> operator+(double a, const Dual<T>& b) {
  return {a + b.v, b.d};
}
template <typename T>
Dual<T> operator-(const Dual<T>& a, double b) {
  return {a.v - b, a.d};
}
template <typename T>
Dual<T> operator-(double a, const Dual<T>& b) {
  return {a - b.v, -b.d};
}
template <typename T>
Dual<T> operator*(const Dual<T>& a, double b) {
  return {a.v * b, a.d * b};
}
template <typename T>
Dual<T> operator*(double a, const Dual<T>& b) {
  return {a * b.v, a * b.d};
}
template <typename T>
Dual<T> operator/(const Dual<T>& a, double b) {
  return {a.v / b, a.d / b};
}
template <typename T>
Dual<T> operator/(double a, const Dual<T>& b) {
  return Dual<T>(a) / b;
}
template <typename T>
Dual<T>& operator+=(Dual<T>& a, const Dual<T>& b) {
  a = a + b;
  return a;
}
template <typename T>
Dual<T>& operator-=(Dual<T>& a, const Dual<T>& b) {
  a = a - b;
  return a;
}
template <typename T>
Dual<T>& operator*=(Dual<T>& a, const Dual<T>& b) {
  a = a * b;
  return a;
}

template <typename T>
Dual<T> sin(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {sin(a.v), cos(a.v) * a.d};
}
template <typename T>
Dual<T> cos(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {cos(a.v), -(sin(a.v) * a.d)};
}
template <typename T>
Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  T e = exp(a.v);
  return {e, e * a.d};
}
template <typename T>
Dual<T> log(const Dual<T>& a) {
  using std::log;
  return {log(a.v), a.d / a.v};
}
template <typename T>
Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  T r = sqrt(a.v);
  return {r, a.d / (2.0 * r)};
}
template <typename T>
Dual<T> abs(const Dual<T>& a) {
  return value(a.v) < 0.0 ? -a : a;
}
template <typename T>
Dual<T> pow(const Dual<T>& a, double p) {
  using std::pow;
  return {pow(a.v, p), p * pow(a.v, p - 1.0) * a.d};
}

// ---------------------------------------------------------------- Jet

inline constexpr int kMaxJetOrder = 10;

template <typename T>
struct Jet {
  /// Taylor coefficients: c[r] = (1/r!) d^r/dt^r of the represented quantity.
  std::array<T, kMaxJetOrder + 1> c{};
  /// Highest meaningful coefficient; constants carry kMaxJetOrder so that
  /// binary operations truncate to the shorter operand.
  int order = kMaxJetOrder;

  Jet() = default;
  Jet(double constant) {  // NOLINT: constants promote implicitly
    c[0] = T(constant);
    for (int r = 1; r <= kMaxJetOrder; ++r) c[r] = T(0.0);
  }

  static Jet truncated(int ord) {
    Jet j(0.0);
    j.order = ord;
    return j;
  }
};

template <typename T>
double value(const Jet<T>& x) {
  return value(x.c[0]);
}

namespace detail {
inline int min_order(int a, int b) { return a < b ? a : b; }
}  // namespace detail

template <typename T>
Jet<T> operator-(const Jet<T>& a) {
  Jet<T> r = Jet<T>::truncated(a.order);
  for (int k = 0; k <= a.order; ++k) r.c[k] = -a.c[k];
  return r;
}
template <typename T>
Jet<T> operator+(const Jet<T>& a, const Jet<T>& b) {
  Jet<T> r = Jet<T>::truncated(detail::min_order(a.order, b.order));
  for (int k = 0; k <= r.order; ++k) r.c[k] = a.c[k] + b.c[k];
  return r;
}
template <typename T>
Jet<T> operator-(const Jet<T>& a, const Jet<T>& b) {
  Jet<T> r = Jet<T>::truncated(detail::min_order(a.order, b.order));
  for (int k = 0; k <= r.order; ++k) r.c[k] = a.c[k] - b.c[k];
  return r;
}
template <typename T>
Jet<T> operator*(const Jet<T>& a, const Jet<T>& b) {
  Jet<T> r = Jet<T>::truncated(detail::min_order(a.order, b.order));
  for (int k = 0; k <= r.order; ++k) {
    T s = a.c[0] * b.c[k];
    for (int i = 1; i <= k; ++i) s = s + a.c[i] * b.c[k - i];
    r.c[k] = s;
  }
  return r;
}
template <typename T>
Jet<T> operator/(const Jet<T>& a, const Jet<T>& b) {
  Jet<T> r = Jet<T>::truncated(detail::min_order(a.order, b.order));
  for (int k = 0; k <= r.order; ++k) {
    T s = a.c[k];
    for (int i = 1; i <= k; ++i) s = s - b.c[i] * r.c[k - i];
    r.c[k] = s / b.c[0];
  }
  return r;
}
template <typename T>
Jet<T> operator+(const Jet<T>& a, double b) {
  Jet<T> r = a;
  r.c[0] = r.c[0] + b;
  return r;
}
template <typename T>
Jet<T> operator+(double a, const Jet<T>& b) {
  return b + a;
}
template <typename T>
Jet<T> operator-(const Jet<T>& a, double b) {
  Jet<T> r = a;
  r.c[0] = r.c[0] - b;
  return r;
}
template <typename T>
Jet<T> operator-(double a, const Jet<T>& b) {
  Jet<T> r = -b;
  r.c[0] = r.c[0] + a;
  return r;
}
template <typename T>
Jet<T> operator*(const Jet<T>& a, double b) {
  Jet<T> r = Jet<T>::truncated(a.order);
  for (int k = 0; k <= a.order; ++k) r.c[k] = a.c[k] * b;
  return r;
}
template <typename T>
Jet<T> operator*(double a, const Jet<T>& b) {
  return b * a;
}
template <typename T>
Jet<T> operator/(const Jet<T>& a, double b) {
  return a * (1.0 / b);
}
template <typename T>
Jet<T> operator/(double a, const Jet<T>& b) {
  return Jet<T>(a) / b;
}
template <typename T>
Jet<T>& operator+=(Jet<T>& a, const Jet<T>& b) {
  a = a + b;
  return a;
}
template <typename T>
Jet<T>& operator-=(Jet<T>& a, const Jet<T>& b) {
  a = a - b;
  return a;
}
template <typename T>
Jet<T>& operator*=(Jet<T>& a, const Jet<T>& b) {
  a = a * b;
  return a;
}

template <typename T>
Jet<T> exp(const Jet<T>& a) {
  using std::exp;
  Jet<T> r = Jet<T>::truncated(a.order);
  r.c[0] = exp(a.c[0]);
  for (int k = 1; k <= a.order; ++k) {
    T s = a.c[1] * r.c[k - 1];
    for (int i = 2; i <= k; ++i) s = s + double(i) * a.c[i] * r.c[k - i];
    r.c[k] = s / double(k);
  }
  return r;
}
template <typename T>
Jet<T> log(const Jet<T>& a) {
  using std::log;
  Jet<T> r = Jet<T>::truncated(a.order);
  r.c[0] = log(a.c[0]);
  for (int k = 1; k <= a.order; ++k) {
    T s = a.c[k];
    for (int i = 1; i < k; ++i) s = s - (double(i) / double(k)) * r.c[i] * a.c[k - i];
    r.c[k] = s / a.c[0];
  }
  return r;
}
namespace detail {
template <typename T>
void sin_cos(const Jet<T>& a, Jet<T>& s, Jet<T>& co) {
  using std::cos;
  using std::sin;
  s = Jet<T>::truncated(a.order);
  co = Jet<T>::truncated(a.order);
  s.c[0] = sin(a.c[0]);
  co.c[0] = cos(a.c[0]);
  for (int k = 1; k <= a.order; ++k) {
    T ss = a.c[1] * co.c[k - 1];
    T cc = a.c[1] * s.c[k - 1];
    for (int i = 2; i <= k; ++i) {
      ss = ss + double(i) * a.c[i] * co.c[k - i];
      cc = cc + double(i) * a.c[i] * s.c[k - i];
    }
    s.c[k] = ss / double(k);
    co.c[k] = -(cc / double(k));
  }
}
}  // namespace detail
template <typename T>
Jet<T> sin(const Jet<T>& a) {
  Jet<T> s, c;
  detail::sin_cos(a, s, c);
  return s;
}
template <typename T>
Jet<T> cos(const Jet<T>& a) {
  Jet<T> s, c;
  detail::sin_cos(a, s, c);
  return c;
}
template <typename T>
Jet<T> sqrt(const Jet<T>& a) {
  using std::sqrt;
  Jet<T> r = Jet<T>::truncated(a.order);
  r.c[0] = sqrt(a.c[0]);
  for (int k = 1; k <= a.order; ++k) {
    T s = a.c[k];
    for (int i = 1; i < k; ++i) s = s - r.c[i] * r.c[k - i];
    r.c[k] = s / (2.0 * r.c[0]);
  }
  return r;
}
template <typename T>
Jet<T> abs(const Jet<T>& a) {
  return value(a) < 0.0 ? -a : a;
}
/// Real power a^p for a with nonzero leading coefficient.
template <typename T>
Jet<T> pow(const Jet<T>& a, double p) {
  using std::pow;
  Jet<T> r = Jet<T>::truncated(a.order);
  r.c[0] = pow(a.c[0], p);
  for (int k = 1; k <= a.order; ++k) {
    T s = (p - double(k - 1)) * a.c[1] * r.c[k - 1];
    for (int i = 2; i <= k; ++i) s = s + (p * double(i) - double(k - i)) * a.c[i] * r.c[k - i];
    r.c[k] = s / (double(k) * a.c[0]);
  }
  return r;
}

// ---------------------------------------------------------------- generic helpers

/// Integer power by repeated squaring; valid for negative bases on every scalar type.
template <typename S>
S ipow(const S& base, int exponent) {
  if (exponent < 0) return S(1.0) / ipow(base, -exponent);
  S result(1.0);
  S b = base;
  int e = exponent;
  bool first = true;
  while (e > 0) {
    if (e & 1) {
      result = first ? b : result * b;
      first = false;
    }
    e >>= 1;
    if (e > 0) b = b * b;
  }
  return result;
}

using D1 = Dual<double>;
using J1 = Jet<double>;
using JD = Jet<Dual<double>>;

/// Jet of the identity map t -> t expanded about t0.
inline J1 time_jet(double t0, int order) {
  J1 j = J1::truncated(order);
  j.c[0] = t0;
  if (order >= 1) j.c[1] = 1.0;
  return j;
}

/// d^r/dt^r from a Taylor coefficient.
inline double factorial(int r) {
  double f = 1.0;
  for (int i = 2; i <= r; ++i) f *= i;
  return f;
}

}  // namespace delvar
