#pragma once

// Double-double arithmetic (~106-bit significand). Classic error-free
// transformations: Dekker two_sum / fma-based two_prod, Bailey-style
// renormalisation. Only the operations the library needs are provided.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace mcgap {

namespace detail {

inline double two_sum(double a, double b, double& err) {
  double s = a + b;
  double bb = s - a;
  err = (a - (s - bb)) + (b - bb);
  return s;
}

// Requires |a| >= |b|.
inline double quick_two_sum(double a, double b, double& err) {
  double s = a + b;
  err = b - (s - a);
  return s;
}

inline double two_prod(double a, double b, double& err) {
  double p = a * b;
  err = std::fma(a, b, -p);
  return p;
}

}  // namespace detail

struct dd {
  double hi = 0.0;
  double lo = 0.0;

  constexpr dd() = default;
  constexpr dd(double h) : hi(h), lo(0.0) {}
  constexpr dd(double h, double l) : hi(h), lo(l) {}

  explicit operator double() const { return hi; }

  static dd renorm(double h, double l) {
    double e;
    double s = detail::quick_two_sum(h, l, e);
    return dd(s, e);
  }
};

inline double to_double(const dd& a) { return a.hi; }
inline double to_double(double a) { return a; }

inline dd operator+(const dd& a, const dd& b) {
  double e1, e2;
  double s = detail::two_sum(a.hi, b.hi, e1);
  double t = detail::two_sum(a.lo, b.lo, e2);
  e1 += t;
  s = detail::quick_two_sum(s, e1, e1);
  e1 += e2;
  return dd::renorm(s, e1);
}

inline dd operator-(const dd& a) { return dd(-a.hi, -a.lo); }
inline dd operator-(const dd& a, const dd& b) { return a + (-b); }

inline dd operator*(const dd& a, const dd& b) {
  double e;
  double p = detail::two_prod(a.hi, b.hi, e);
  e += a.hi * b.lo + a.lo * b.hi;
  return dd::renorm(p, e);
}

inline dd operator/(const dd& a, const dd& b) {
  double q1 = a.hi / b.hi;
  dd r = a - b * dd(q1);
  double q2 = r.hi / b.hi;
  r = r - b * dd(q2);
  double q3 = r.hi / b.hi;
  double e;
  double s = detail::quick_two_sum(q1, q2, e);
  dd q = dd::renorm(s, e) + dd(q3);
  return q;
}

inline dd operator+(const dd& a, double b) { return a + dd(b); }
inline dd operator+(double a, const dd& b) { return dd(a) + b; }
inline dd operator-(const dd& a, double b) { return a - dd(b); }
inline dd operator-(double a, const dd& b) { return dd(a) - b; }
inline dd operator*(const dd& a, double b) { return a * dd(b); }
inline dd operator*(double a, const dd& b) { return dd(a) * b; }
inline dd operator/(const dd& a, double b) { return a / dd(b); }
inline dd operator/(double a, const dd& b) { return dd(a) / b; }

inline dd& operator+=(dd& a, const dd& b) { return a = a + b; }
inline dd& operator-=(dd& a, const dd& b) { return a = a - b; }
inline dd& operator*=(dd& a, const dd& b) { return a = a * b; }
inline dd& operator/=(dd& a, const dd& b) { return a = a / b; }

inline bool operator<(const dd& a, const dd& b) {
  return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo);
}
inline bool operator>(const dd& a, const dd& b) { return b < a; }
inline bool operator<=(const dd& a, const dd& b) { return !(b < a); }
inline bool operator>=(const dd& a, const dd& b) { return !(a < b); }
inline bool operator==(const dd& a, const dd& b) { return a.hi == b.hi && a.lo == b.lo; }
inline bool operator!=(const dd& a, const dd& b) { return !(a == b); }

inline dd abs(const dd& a) { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? -a : a; }

inline dd sqrt(const dd& a) {
  if (a.hi == 0.0 && a.lo == 0.0) return dd(0.0);
  double y = std::sqrt(a.hi);
  // One Newton step in dd doubles the accuracy of the double seed.
  dd yd(y);
  return yd + (a - yd * yd) / (2.0 * y);
}

namespace ddc {
// hi/lo splittings of the usual constants (QD library values).
inline constexpr dd pi{3.141592653589793116e+00, 1.224646799147353207e-16};
inline constexpr dd two_pi{6.283185307179586232e+00, 2.449293598294706414e-16};
inline constexpr dd half_pi{1.570796326794896558e+00, 6.123233995736766036e-17};
inline constexpr dd ln2{6.931471805599452862e-01, 2.319046813846299558e-17};
}  // namespace ddc

inline dd exp(const dd& a) {
  if (a.hi > 709.0) return dd(std::numeric_limits<double>::infinity());
  if (a.hi < -745.0) return dd(0.0);
  double k = std::nearbyint(a.hi / ddc::ln2.hi);
  dd r = a - ddc::ln2 * dd(k);
  // |r| <= ln2/2; plain Taylor summation.
  dd sum = dd(1.0) + r;
  dd term = r;
  for (int n = 2; n <= 26; ++n) {
    term = term * r / double(n);
    sum += term;
    if (std::fabs(term.hi) < 1e-35 * std::fabs(sum.hi)) break;
  }
  return sum * dd(std::ldexp(1.0, int(k)));
}

inline dd log(const dd& a) {
  double y = std::log(a.hi);
  dd yd(y);
  return yd + a * exp(-yd) - 1.0;
}

namespace detail {

inline dd sin_taylor(const dd& t) {
  dd t2 = t * t;
  dd term = t, sum = t;
  for (int n = 1; n <= 14; ++n) {
    term = -term * t2 / double((2 * n) * (2 * n + 1));
    sum += term;
    if (std::fabs(term.hi) < 1e-36) break;
  }
  return sum;
}

inline dd cos_taylor(const dd& t) {
  dd t2 = t * t;
  dd term(1.0), sum(1.0);
  for (int n = 1; n <= 14; ++n) {
    term = -term * t2 / double((2 * n - 1) * (2 * n));
    sum += term;
    if (std::fabs(term.hi) < 1e-36) break;
  }
  return sum;
}

inline void sincos_reduced(const dd& a, dd& s, dd& c) {
  double k = std::nearbyint(a.hi / ddc::two_pi.hi);
  dd r = a - ddc::two_pi * dd(k);
  double j = std::nearbyint(r.hi / ddc::half_pi.hi);
  dd t = r - ddc::half_pi * dd(j);
  dd st = sin_taylor(t), ct = cos_taylor(t);
  int q = int(j) & 3;
  if (int(j) < 0) q = (q + 4) & 3;
  switch (q) {
    case 0: s = st; c = ct; break;
    case 1: s = ct; c = -st; break;
    case 2: s = -st; c = -ct; break;
    default: s = -ct; c = st; break;
  }
}

}  // namespace detail

inline dd sin(const dd& a) {
  dd s, c;
  detail::sincos_reduced(a, s, c);
  return s;
}

inline dd cos(const dd& a) {
  dd s, c;
  detail::sincos_reduced(a, s, c);
  return c;
}

inline dd pow_int(dd base, int e) {
  bool inv = e < 0;
  unsigned n = inv ? unsigned(-long(e)) : unsigned(e);
  dd r(1.0);
  while (n) {
    if (n & 1u) r *= base;
    base *= base;
    n >>= 1;
  }
  return inv ? dd(1.0) / r : r;
}

// Generic helpers so numeric kernels can be templated on double / dd.
inline double sqrt_r(double x) { return std::sqrt(x); }
inline dd sqrt_r(const dd& x) { return sqrt(x); }
inline double exp_r(double x) { return std::exp(x); }
inline dd exp_r(const dd& x) { return exp(x); }
inline double log_r(double x) { return std::log(x); }
inline dd log_r(const dd& x) { return log(x); }
inline double abs_r(double x) { return std::fabs(x); }
inline dd abs_r(const dd& x) { return abs(x); }

template <class Real>
inline constexpr int real_digits10() {
  if constexpr (std::is_same_v<Real, dd>) return 31;
  else return 15;
}

}  // namespace mcgap
