#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace mcgap {

// Exact arbitrary-precision rational. cpp_rational keeps the canonical form
// (denominator > 0, gcd(|num|, den) = 1) after every operation.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt rat_num(const Rational& r) { return boost::multiprecision::numerator(r); }
inline BigInt rat_den(const Rational& r) { return boost::multiprecision::denominator(r); }

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string to_string(const Rational& r) {
  if (rat_den(r) == 1) return rat_num(r).str();
  return rat_num(r).str() + "/" + rat_den(r).str();
}

inline Rational rational_from_string(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rational(BigInt(s));
  return Rational(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
}

inline BigInt binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt r = 1;
  for (unsigned i = 0; i < k; ++i) {
    r *= n - i;
    r /= i + 1;
  }
  return r;
}

inline BigInt factorial(unsigned n) {
  BigInt r = 1;
  for (unsigned i = 2; i <= n; ++i) r *= i;
  return r;
}

// Gamma(a + 1/2) / Gamma(b + 1/2) for integers a >= b >= 0, by telescoping
// the half-integer product. Exact; no floating Gamma involved.
inline Rational gamma_half_ratio(unsigned a, unsigned b) {
  Rational r = 1;
  for (unsigned i = b; i < a; ++i) r *= Rational(2 * i + 1, 2);
  return r;
}

inline Rational pow_rational(const Rational& base, unsigned e) {
  Rational r = 1;
  for (unsigned i = 0; i < e; ++i) r *= base;
  return r;
}

}  // namespace mcgap
