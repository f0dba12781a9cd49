#pragma once

// Minimal dense linear algebra, templated on the scalar so the same kernels
// run in double and double-double. Sizes here are small (n <= a few hundred);
// clarity and determinism beat BLAS.

#include "mcgap/dd.hpp"
#include "mcgap/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace mcgap {

template <class Real>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_(rows * cols, Real(0)) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Real& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  const Real& operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<Real> a_;
};

// Determinant by LU with partial pivoting. Destroys its argument.
template <class Real>
Real lu_determinant(Matrix<Real>& m) {
  const std::size_t n = m.rows();
  Real det(1);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    Real best = abs_r(m(c, c));
    for (std::size_t r = c + 1; r < n; ++r) {
      Real v = abs_r(m(r, c));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(piv, j), m(c, j));
      det = -det;
    }
    Real d = m(c, c);
    if (to_double(d) == 0.0) return Real(0);
    det *= d;
    for (std::size_t r = c + 1; r < n; ++r) {
      Real f = m(r, c) / d;
      if (to_double(f) == 0.0) continue;
      for (std::size_t j = c + 1; j < n; ++j) m(r, j) -= f * m(c, j);
    }
  }
  return det;
}

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
template <class Real>
std::vector<double> jacobi_eigenvalues(Matrix<Real> a, int max_sweeps = 60) {
  const std::size_t n = a.rows();
  double scale = 1e-300;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) scale = std::max(scale, std::fabs(to_double(a(p, q))));
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    Real off(0);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (to_double(off) < 1e-68 * scale * scale * double(n * n)) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::fabs(to_double(a(p, q))) <= 1e-40 * scale) {
          a(p, q) = Real(0);
          a(q, p) = Real(0);
          continue;
        }
        Real theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        double th = to_double(theta);
        Real t;
        if (std::fabs(th) > 1e15) {
          t = 1.0 / (2.0 * theta);
        } else {
          Real sign = th >= 0.0 ? Real(1) : Real(-1);
          t = sign / (abs_r(theta) + sqrt_r(theta * theta + 1.0));
        }
        Real c = 1.0 / sqrt_r(t * t + 1.0);
        Real s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          Real akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          Real apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = to_double(a(i, i));
  std::sort(eig.begin(), eig.end());
  return eig;
}

// Gauss-Legendre nodes and weights on (-1, 1). Newton iteration on P_n with
// the Tricomi cosine initial guess; accurate to the Real's precision.
template <class Real>
void gauss_legendre(int n, std::vector<Real>& nodes, std::vector<Real>& weights) {
  nodes.assign(std::size_t(n), Real(0));
  weights.assign(std::size_t(n), Real(0));
  int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    Real x(std::cos(M_PI * (double(i) + 0.75) / (double(n) + 0.5)));
    Real dp(0);
    for (int it = 0; it < 12; ++it) {
      Real p0(1), p1(0);
      for (int j = 0; j < n; ++j) {
        Real p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - double(j) * p2) / double(j + 1);
      }
      dp = double(n) * (x * p0 - p1) / (x * x - 1.0);
      Real dx = p0 / dp;
      x -= dx;
      if (std::fabs(to_double(dx)) < 1e-34) break;
    }
    nodes[std::size_t(i)] = -x;
    nodes[std::size_t(n - 1 - i)] = x;
    Real w = 2.0 / ((1.0 - x * x) * dp * dp);
    weights[std::size_t(i)] = w;
    weights[std::size_t(n - 1 - i)] = w;
  }
}

// Nodes/weights mapped to the interval (a, b).
template <class Real>
void gauss_legendre_on(Real a, Real b, int n, std::vector<Real>& nodes, std::vector<Real>& weights) {
  gauss_legendre(n, nodes, weights);
  Real half = (b - a) * 0.5, mid = (a + b) * 0.5;
  for (int i = 0; i < n; ++i) {
    nodes[std::size_t(i)] = mid + half * nodes[std::size_t(i)];
    weights[std::size_t(i)] *= half;
  }
}

// ---- banded LU (double), used by the collocation solvers ---------------
//
// Row-major band storage: band(i, j) for |i - j| <= kl (below) / ku (above),
// stored as entry(i, j - i + kl) in a (kl + ku + 1)-wide strip, plus kl
// extra columns of fill-in for partial pivoting.

class BandedMatrix {
 public:
  BandedMatrix(std::size_t n, std::size_t kl, std::size_t ku)
      : n_(n), kl_(kl), ku_(ku), width_(2 * kl + ku + 1), a_(n * width_, 0.0) {}

  std::size_t size() const { return n_; }
  std::size_t kl() const { return kl_; }
  std::size_t ku() const { return ku_; }

  double& at(std::size_t i, std::size_t j) { return a_[i * width_ + (j + kl_ - i)]; }
  double at(std::size_t i, std::size_t j) const { return a_[i * width_ + (j + kl_ - i)]; }

  bool in_band(std::size_t i, std::size_t j) const {
    return j + kl_ >= i && j <= i + kl_ + ku_;
  }

  void clear() { std::fill(a_.begin(), a_.end(), 0.0); }

  // LU factorisation with partial pivoting followed by a solve; the matrix
  // is consumed. Throws on numerical singularity.
  void factor_solve(std::vector<double>& rhs) {
    std::vector<std::size_t> perm(n_);
    for (std::size_t c = 0; c < n_; ++c) {
      std::size_t rmax = std::min(n_ - 1, c + kl_);
      std::size_t piv = c;
      double best = std::fabs(at(c, c));
      for (std::size_t r = c + 1; r <= rmax; ++r) {
        double v = std::fabs(at(r, c));
        if (v > best) {
          best = v;
          piv = r;
        }
      }
      if (best == 0.0 || !std::isfinite(best))
        throw NoConvergence("banded LU: singular pivot at column " + std::to_string(c));
      perm[c] = piv;
      std::size_t cmax = std::min(n_ - 1, c + kl_ + ku_);
      if (piv != c) {
        for (std::size_t j = c; j <= cmax; ++j) std::swap(at(piv, j), at(c, j));
        std::swap(rhs[piv], rhs[c]);
      }
      double d = at(c, c);
      for (std::size_t r = c + 1; r <= rmax; ++r) {
        double f = at(r, c) / d;
        if (f == 0.0) continue;
        at(r, c) = 0.0;
        for (std::size_t j = c + 1; j <= cmax; ++j) at(r, j) -= f * at(c, j);
        rhs[r] -= f * rhs[c];
      }
    }
    for (std::size_t ii = n_; ii-- > 0;) {
      std::size_t jmax = std::min(n_ - 1, ii + kl_ + ku_);
      double s = rhs[ii];
      for (std::size_t j = ii + 1; j <= jmax; ++j) s -= at(ii, j) * rhs[j];
      rhs[ii] = s / at(ii, ii);
    }
  }

 private:
  std::size_t n_, kl_, ku_, width_;
  std::vector<double> a_;
};

}  // namespace mcgap
