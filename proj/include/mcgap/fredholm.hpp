#pragma once

// Fredholm determinant of the Airy kernel on L^2(s, inf) by Nystrom
// discretisation: Gauss-Legendre in t on (0,1) through the rational map
// x = s + t/(1-t), symmetrised with square-root weights. The determinant is
// accumulated in double-double throughout.

#include "mcgap/airy.hpp"
#include "mcgap/dd.hpp"
#include "mcgap/errors.hpp"
#include "mcgap/linalg.hpp"

#include <cmath>
#include <vector>

namespace mcgap {

struct FredholmResult {
  double s = 0.0;
  double f2 = 0.0;
  int n_nodes = 0;
  double self_error = 0.0;
};

namespace fredholm_detail {

// Airy kernel K(x,y) with the exact diagonal limit Ai'(x)^2 - x Ai(x)^2.
inline dd kernel(double x, double y, const AiryValueDD& ax, const AiryValueDD& ay) {
  if (x == y) return ax.ai_prime * ax.ai_prime - dd(x) * ax.ai * ax.ai;
  return (ax.ai * ay.ai_prime - ax.ai_prime * ay.ai) / (dd(x) - dd(y));
}

struct Discretisation {
  std::vector<double> x;
  std::vector<dd> sqrt_w;
  Matrix<dd> sym_kernel;  // sqrt(w_i) K(x_i, x_j) sqrt(w_j)
};

inline Discretisation discretise(double s, int n) {
  if (n < 8) throw NodeCountTooSmall("fredholm_det_airy: need n_nodes >= 8");
  std::vector<dd> t, w;
  gauss_legendre_on(dd(0.0), dd(1.0), n, t, w);
  Discretisation d;
  d.x.resize(std::size_t(n));
  d.sqrt_w.resize(std::size_t(n));
  std::vector<AiryValueDD> av(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    dd om = dd(1.0) - t[std::size_t(i)];
    dd xi = dd(s) + t[std::size_t(i)] / om;
    d.x[std::size_t(i)] = xi.hi;
    d.sqrt_w[std::size_t(i)] = sqrt(w[std::size_t(i)]) / om;  // sqrt(w / (1-t)^2)
    av[std::size_t(i)] = airy_ai_dd(d.x[std::size_t(i)]);
  }
  d.sym_kernel = Matrix<dd>(std::size_t(n), std::size_t(n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      dd v = kernel(d.x[std::size_t(i)], d.x[std::size_t(j)], av[std::size_t(i)], av[std::size_t(j)]) *
             d.sqrt_w[std::size_t(i)] * d.sqrt_w[std::size_t(j)];
      d.sym_kernel(std::size_t(i), std::size_t(j)) = v;
      d.sym_kernel(std::size_t(j), std::size_t(i)) = v;
    }
  return d;
}

inline double det_at(double s, int n) {
  Discretisation d = discretise(s, n);
  std::size_t nn = std::size_t(n);
  Matrix<dd> m(nn, nn);
  for (std::size_t i = 0; i < nn; ++i)
    for (std::size_t j = 0; j < nn; ++j)
      m(i, j) = (i == j ? dd(1.0) : dd(0.0)) - d.sym_kernel(i, j);
  return to_double(lu_determinant(m));
}

}  // namespace fredholm_detail

inline FredholmResult fredholm_det_airy(double s, int n_nodes) {
  FredholmResult r;
  r.s = s;
  r.n_nodes = n_nodes;
  r.f2 = fredholm_detail::det_at(s, n_nodes);
  double coarse = fredholm_detail::det_at(s, std::max(8, n_nodes / 2));
  r.self_error = std::fabs(r.f2 - coarse);
  return r;
}

// Doubles the node count until the determinant stabilises.
inline FredholmResult fredholm_det_airy_converged(double s, double tol = 1e-12, int n_start = 40,
                                                  int n_cap = 320) {
  int n = n_start;
  double prev = fredholm_detail::det_at(s, n);
  while (n < n_cap) {
    int n2 = 2 * n;
    double cur = fredholm_detail::det_at(s, n2);
    if (std::fabs(cur - prev) < tol) {
      FredholmResult r;
      r.s = s;
      r.f2 = cur;
      r.n_nodes = n2;
      r.self_error = std::fabs(cur - prev);
      return r;
    }
    prev = cur;
    n = n2;
  }
  throw NotConverged("fredholm_det_airy_converged: node cap reached at s = " + std::to_string(s));
}

// Spectrum of the discretised (symmetrised) kernel; Nystrom eigenvalues of
// the Airy kernel restricted to (s, inf) must lie in [0, 1].
inline std::vector<double> airy_kernel_spectrum(double s, int n_nodes) {
  fredholm_detail::Discretisation d = fredholm_detail::discretise(s, n_nodes);
  return jacobi_eigenvalues(d.sym_kernel);
}

}  // namespace mcgap
