#pragma once

// Two-point BVP solver for first-order systems y' = f(x, y), y in R^m:
// MIRK4 (Lobatto IIIA three-stage) collocation on an arbitrary mesh, damped
// Newton iteration, banded LU for the linearised steps. Boundary conditions
// are component values at the two ends, which is all the hierarchy needs.

#include "mcgap/errors.hpp"
#include "mcgap/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace mcgap {

class BvpSystem {
 public:
  virtual ~BvpSystem() = default;
  virtual int dim() const = 0;
  virtual void eval(double x, const double* y, double* f) const = 0;
  // Row-major m x m Jacobian df/dy.
  virtual void jacobian(double x, const double* y, double* jac) const = 0;
};

struct BoundaryValue {
  int component = 0;
  double value = 0.0;
};

struct BvpOptions {
  double newton_tol = 1e-11;
  int max_newton_iter = 30;
  int max_damping_halvings = 10;
  bool throw_on_failure = true;
  bool trace = false;  // iteration log on stderr
};

struct BvpResult {
  bool converged = false;
  double residual_norm = 0.0;  // scaled sup-norm of the collocation residual
  int iterations = 0;
};

class BvpSolution {
 public:
  BvpSolution() = default;
  BvpSolution(std::vector<double> mesh, int m)
      : mesh_(std::move(mesh)), m_(m), y_(mesh_.size() * std::size_t(m), 0.0) {}

  const std::vector<double>& mesh() const { return mesh_; }
  int dim() const { return m_; }
  std::size_t nodes() const { return mesh_.size(); }

  double* at(std::size_t i) { return y_.data() + i * std::size_t(m_); }
  const double* at(std::size_t i) const { return y_.data() + i * std::size_t(m_); }
  double value(std::size_t i, int comp) const { return at(i)[comp]; }

  std::vector<double>& raw() { return y_; }
  const std::vector<double>& raw() const { return y_; }

  std::size_t locate(double x) const {
    auto it = std::upper_bound(mesh_.begin(), mesh_.end(), x);
    std::size_t i = std::size_t(std::distance(mesh_.begin(), it));
    if (i == 0) return 0;
    if (i >= mesh_.size()) return mesh_.size() - 2;
    return i - 1;
  }

  // Cubic Hermite interpolation of component `comp`; `dcomp` names the
  // component carrying its derivative (the usual chain layout has
  // dcomp = comp + 1).
  double interpolate(double x, int comp, int dcomp) const {
    std::size_t i = locate(x);
    double h = mesh_[i + 1] - mesh_[i];
    double t = (x - mesh_[i]) / h;
    double y0 = value(i, comp), y1 = value(i + 1, comp);
    double d0 = value(i, dcomp) * h, d1 = value(i + 1, dcomp) * h;
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * d0 +
           (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * d1;
  }

 private:
  std::vector<double> mesh_;
  int m_ = 0;
  std::vector<double> y_;
};

namespace collocation_detail {

struct Workspace {
  std::vector<double> f_lo, f_hi, f_mid, y_mid, j_lo, j_hi, j_mid, tmp1, tmp2;
  void resize(int m) {
    f_lo.resize(std::size_t(m));
    f_hi.resize(std::size_t(m));
    f_mid.resize(std::size_t(m));
    y_mid.resize(std::size_t(m));
    j_lo.resize(std::size_t(m) * std::size_t(m));
    j_hi.resize(std::size_t(m) * std::size_t(m));
    j_mid.resize(std::size_t(m) * std::size_t(m));
    tmp1.resize(std::size_t(m) * std::size_t(m));
    tmp2.resize(std::size_t(m) * std::size_t(m));
  }
};

// MIRK4 residual on one interval, scaled by 1/h.
inline void interval_residual(const BvpSystem& sys, double x0, double x1, const double* y0,
                              const double* y1, Workspace& w, double* phi) {
  int m = sys.dim();
  double h = x1 - x0;
  sys.eval(x0, y0, w.f_lo.data());
  sys.eval(x1, y1, w.f_hi.data());
  for (int c = 0; c < m; ++c)
    w.y_mid[std::size_t(c)] = 0.5 * (y0[c] + y1[c]) + h / 8.0 * (w.f_lo[std::size_t(c)] - w.f_hi[std::size_t(c)]);
  sys.eval(x0 + 0.5 * h, w.y_mid.data(), w.f_mid.data());
  for (int c = 0; c < m; ++c) {
    double s = y1[c] - y0[c] -
               h / 6.0 * (w.f_lo[std::size_t(c)] + 4.0 * w.f_mid[std::size_t(c)] + w.f_hi[std::size_t(c)]);
    phi[c] = s / h;
  }
}

}  // namespace collocation_detail

class BvpSolver {
 public:
  BvpSolver(const BvpSystem& sys, std::vector<double> mesh, std::vector<BoundaryValue> left,
            std::vector<BoundaryValue> right, BvpOptions opts = {})
      : sys_(sys), mesh_(std::move(mesh)), left_(std::move(left)), right_(std::move(right)), opts_(opts) {
    if (mesh_.size() < 3) throw UsageError("BvpSolver: mesh too small");
    if (int(left_.size() + right_.size()) != sys_.dim())
      throw UsageError("BvpSolver: boundary condition count must equal system order");
  }

  // Newton iteration from the initial guess stored in `sol`.
  BvpResult solve(BvpSolution& sol) {
    const int m = sys_.dim();
    const std::size_t n_nodes = mesh_.size();
    const std::size_t n = n_nodes * std::size_t(m);
    const std::size_t p = left_.size();
    collocation_detail::Workspace w;
    w.resize(m);

    std::vector<double> residual(n), delta(n), trial;
    BvpResult res;
    double norm = assemble_residual(sol, w, residual);
    for (int it = 0; it < opts_.max_newton_iter; ++it) {
      res.iterations = it;
      res.residual_norm = norm;
      if (norm < opts_.newton_tol) {
        res.converged = true;
        return res;
      }
      BandedMatrix jac(n, p + std::size_t(m) - 1, 2 * std::size_t(m) - 1 - p);
      assemble_jacobian(sol, w, jac);
      delta = residual;
      for (auto& v : delta) v = -v;
      jac.factor_solve(delta);

      // Damped step: halve until the residual norm drops.
      double lambda = 1.0;
      bool accepted = false;
      trial = sol.raw();
      for (int halv = 0; halv <= opts_.max_damping_halvings; ++halv) {
        for (std::size_t i = 0; i < n; ++i) trial[i] = sol.raw()[i] + lambda * delta[i];
        BvpSolution tsol = sol;
        tsol.raw() = trial;
        double tnorm = assemble_residual(tsol, w, residual);
        if (std::isfinite(tnorm) && tnorm < (1.0 - 0.25 * lambda) * norm) {
          sol.raw() = trial;
          norm = tnorm;
          accepted = true;
          break;
        }
        lambda *= 0.5;
      }
      if (opts_.trace)
        std::fprintf(stderr, "  newton it=%d norm=%.3e lambda=%.4f accepted=%d\n", it, norm,
                     lambda, int(accepted));
      if (!accepted) {
        // Residual no longer improves; re-assemble for an honest report.
        norm = assemble_residual(sol, w, residual);
        break;
      }
    }
    res.residual_norm = norm;
    res.converged = norm < opts_.newton_tol;
    if (!res.converged && opts_.throw_on_failure)
      throw NoConvergence("BvpSolver: Newton stalled at residual " + std::to_string(norm));
    return res;
  }

 private:
  double assemble_residual(const BvpSolution& sol, collocation_detail::Workspace& w,
                           std::vector<double>& r) const {
    const int m = sys_.dim();
    const std::size_t n_nodes = mesh_.size();
    const std::size_t p = left_.size();
    for (std::size_t c = 0; c < p; ++c)
      r[c] = sol.value(0, left_[c].component) - left_[c].value;
    for (std::size_t i = 0; i + 1 < n_nodes; ++i) {
      collocation_detail::interval_residual(sys_, mesh_[i], mesh_[i + 1], sol.at(i), sol.at(i + 1),
                                            w, r.data() + p + i * std::size_t(m));
    }
    std::size_t base = p + (n_nodes - 1) * std::size_t(m);
    for (std::size_t c = 0; c < right_.size(); ++c)
      r[base + c] = sol.value(n_nodes - 1, right_[c].component) - right_[c].value;
    double norm = 0.0;
    for (double v : r) norm = std::max(norm, std::fabs(v));
    return norm;
  }

  void assemble_jacobian(const BvpSolution& sol, collocation_detail::Workspace& w,
                         BandedMatrix& jac) const {
    const int m = sys_.dim();
    const std::size_t mm = std::size_t(m);
    const std::size_t n_nodes = mesh_.size();
    const std::size_t p = left_.size();
    jac.clear();
    for (std::size_t c = 0; c < p; ++c)
      jac.at(c, std::size_t(left_[c].component)) = 1.0;

    for (std::size_t i = 0; i + 1 < n_nodes; ++i) {
      double x0 = mesh_[i], x1 = mesh_[i + 1], h = x1 - x0;
      const double* y0 = sol.at(i);
      const double* y1 = sol.at(i + 1);
      sys_.eval(x0, y0, w.f_lo.data());
      sys_.eval(x1, y1, w.f_hi.data());
      for (int c = 0; c < m; ++c)
        w.y_mid[std::size_t(c)] =
            0.5 * (y0[c] + y1[c]) + h / 8.0 * (w.f_lo[std::size_t(c)] - w.f_hi[std::size_t(c)]);
      sys_.jacobian(x0, y0, w.j_lo.data());
      sys_.jacobian(x1, y1, w.j_hi.data());
      sys_.jacobian(x0 + 0.5 * h, w.y_mid.data(), w.j_mid.data());

      // d(phi)/dy0 = (-I - h/6 (J0 + 4 Jm (I/2 + h/8 J0))) / h
      // d(phi)/dy1 = ( I - h/6 (J1 + 4 Jm (I/2 - h/8 J1))) / h
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          double jm_j0 = 0.0, jm_j1 = 0.0;
          for (int k = 0; k < m; ++k) {
            jm_j0 += w.j_mid[std::size_t(a * m + k)] * w.j_lo[std::size_t(k * m + b)];
            jm_j1 += w.j_mid[std::size_t(a * m + k)] * w.j_hi[std::size_t(k * m + b)];
          }
          double id = (a == b) ? 1.0 : 0.0;
          double d0 = (-id - h / 6.0 * (w.j_lo[std::size_t(a * m + b)] +
                                        4.0 * (0.5 * w.j_mid[std::size_t(a * m + b)] + h / 8.0 * jm_j0))) / h;
          double d1 = (id - h / 6.0 * (w.j_hi[std::size_t(a * m + b)] +
                                       4.0 * (0.5 * w.j_mid[std::size_t(a * m + b)] - h / 8.0 * jm_j1))) / h;
          std::size_t row = p + i * mm + std::size_t(a);
          jac.at(row, i * mm + std::size_t(b)) += d0;
          jac.at(row, (i + 1) * mm + std::size_t(b)) += d1;
        }
      }
    }

    std::size_t base = p + (n_nodes - 1) * mm;
    for (std::size_t c = 0; c < right_.size(); ++c)
      jac.at(base + c, (n_nodes - 1) * mm + std::size_t(right_[c].component)) = 1.0;
  }

  const BvpSystem& sys_;
  std::vector<double> mesh_;
  std::vector<BoundaryValue> left_, right_;
  BvpOptions opts_;
};

// Piecewise-uniform mesh builder. Regions are (x_end, h) pairs walked from
// x_start; every region boundary lands exactly on a node.
inline std::vector<double> build_mesh(double x_start, const std::vector<std::pair<double, double>>& regions) {
  std::vector<double> mesh{x_start};
  double x = x_start;
  for (const auto& [x_end, h] : regions) {
    if (x_end <= x) continue;
    int n = std::max(1, int(std::ceil((x_end - x) / h - 1e-9)));
    double hh = (x_end - x) / n;
    for (int i = 1; i <= n; ++i) mesh.push_back(x + hh * i);
    x = x_end;
  }
  return mesh;
}

// Integral of the cubic Hermite interpolant given values and derivatives
// at the mesh nodes, restricted to [a, b] (which must be node-aligned).
inline double hermite_quadrature(const std::vector<double>& mesh, const std::vector<double>& v,
                                 const std::vector<double>& dv, double a, double b) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < mesh.size(); ++i) {
    if (mesh[i] < a - 1e-12 || mesh[i + 1] > b + 1e-12) continue;
    double h = mesh[i + 1] - mesh[i];
    acc += 0.5 * h * (v[i] + v[i + 1]) + h * h / 12.0 * (dv[i] - dv[i + 1]);
  }
  return acc;
}

}  // namespace mcgap
