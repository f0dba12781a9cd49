#pragma once

// Hastings-McLeod solution of Painleve II (alpha = 0): q'' = 2q^3 + x q with
// q ~ Ai(x) as x -> +inf and q ~ sqrt(-x/2) as x -> -inf, solved as a
// two-point BVP by MIRK4 collocation, plus the Tracy-Widom log-CDF integral
//   log F2(s) = int_s^inf (s - x) q(x)^2 dx.

#include "mcgap/airy.hpp"
#include "mcgap/collocation.hpp"
#include "mcgap/errors.hpp"

#include <cmath>
#include <vector>

namespace mcgap {

struct HastingsMcleodProfile {
  std::vector<double> x;
  std::vector<double> q;
  std::vector<double> qp;

  double q_at(double xx, const BvpSolution& /*unused*/) const = delete;
};

namespace hm_detail {

class PainleveII : public BvpSystem {
 public:
  int dim() const override { return 2; }
  void eval(double x, const double* y, double* f) const override {
    f[0] = y[1];
    f[1] = 2.0 * y[0] * y[0] * y[0] + x * y[0];
  }
  void jacobian(double x, const double* y, double* j) const override {
    j[0] = 0.0;
    j[1] = 1.0;
    j[2] = 6.0 * y[0] * y[0] + x;
    j[3] = 0.0;
  }
};

// Left asymptote sqrt(-x/2) (1 + x^{-3}/8 - 73 x^{-6}/128 + ...).
inline double left_asymptote(double x) {
  double ix3 = 1.0 / (x * x * x);
  return std::sqrt(-x / 2.0) * (1.0 + 0.125 * ix3 - (73.0 / 128.0) * ix3 * ix3);
}

}  // namespace hm_detail

class HastingsMcleod {
 public:
  explicit HastingsMcleod(double x_min = -12.0, double x_max = 8.0, double h = 0.004) {
    if (!(x_min < 0.0 && 0.0 < x_max)) throw UsageError("hastings_mcleod: need x_min < 0 < x_max");
    mesh_ = build_mesh(x_min, {{x_max, h}});
    hm_detail::PainleveII sys;
    double q_right = airy_ai(x_max).ai;
    double q_left = hm_detail::left_asymptote(x_min);
    BvpSolver solver(sys, mesh_, {{0, q_left}}, {{0, q_right}});
    sol_ = BvpSolution(mesh_, 2);
    for (std::size_t i = 0; i < mesh_.size(); ++i) {
      double x = mesh_[i];
      // seed: left asymptote below zero, Airy decay above
      double g = x < 0.0 ? std::sqrt(-x / 2.0 + 0.1) : airy_ai(x).ai;
      sol_.at(i)[0] = g;
      sol_.at(i)[1] = x < 0.0 ? -0.25 / std::sqrt(0.1 - x / 2.0 + 0.1) : airy_ai(x).ai_prime;
    }
    result_ = solver.solve(sol_);
  }

  const std::vector<double>& mesh() const { return mesh_; }
  double x_min() const { return mesh_.front(); }
  double x_max() const { return mesh_.back(); }
  bool converged() const { return result_.converged; }
  double newton_residual() const { return result_.residual_norm; }

  double q(double x) const {
    if (x < mesh_.front() || x > mesh_.back())
      throw DomainExceeded("hastings_mcleod: x outside profile range");
    return sol_.interpolate(x, 0, 1);
  }
  double q_prime(double x) const {
    if (x < mesh_.front() || x > mesh_.back())
      throw DomainExceeded("hastings_mcleod: x outside profile range");
    return sol_.interpolate(x, 1, -1000);  // derivative of q' uses the ODE
  }

  double q_node(std::size_t i) const { return sol_.value(i, 0); }
  double qp_node(std::size_t i) const { return sol_.value(i, 1); }

  // Independent residual of q'' - 2q^3 - xq using an 8th-order stencil on
  // the q' component (the solver itself never sees this stencil).
  double equation_residual_sup() const {
    static const double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
    double h = mesh_[1] - mesh_[0];
    double sup = 0.0;
    for (std::size_t i = 4; i + 4 < mesh_.size(); ++i) {
      double d = 0.0;
      for (int o = 1; o <= 4; ++o)
        d += c[o - 1] * (sol_.value(i + std::size_t(o), 1) - sol_.value(i - std::size_t(o), 1));
      d /= h;
      double x = mesh_[i], qq = sol_.value(i, 0);
      sup = std::max(sup, std::fabs(d - (2.0 * qq * qq * qq + x * qq)));
    }
    return sup;
  }

  // log F2(s) = int_s^inf (s-x) q(x)^2 dx with the tail beyond x_max bounded
  // through the Airy asymptote; the bound is returned via *tail_bound.
  double tw_logcdf(double s, double* tail_bound = nullptr) const {
    if (s < mesh_.front())
      throw DomainExceeded("tw_logcdf: s below the solved profile");
    double X = mesh_.back();
    double tail = (std::fabs(X - s) + 1.0) * airy_ai(X).ai * airy_ai(X).ai / std::sqrt(X);
    if (tail_bound) *tail_bound = tail;
    if (s >= X) return 0.0;

    // integrand g = (s-x) q^2 with g' = -q^2 + 2 (s-x) q q'
    std::size_t i0 = sol_.locate(s);
    double acc = 0.0;
    std::vector<double> xs, v, dv;
    for (std::size_t i = i0 + 1; i < mesh_.size(); ++i) {
      double x = mesh_[i], qq = sol_.value(i, 0), qp = sol_.value(i, 1);
      xs.push_back(x);
      v.push_back((s - x) * qq * qq);
      dv.push_back(-qq * qq + 2.0 * (s - x) * qq * qp);
    }
    acc += hermite_quadrature(xs, v, dv, xs.front(), xs.back());
    // partial cell [s, mesh_[i0+1]] by 5-point Gauss on the Hermite interpolant
    {
      double a = s, b = mesh_[i0 + 1];
      static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                   0.5384693101056831, 0.9061798459386640};
      static const double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                   0.4786286704993665, 0.2369268850561891};
      double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (int j = 0; j < 5; ++j) {
        double x = mid + half * gx[j];
        double qq = sol_.interpolate(x, 0, 1);
        acc += half * gw[j] * (s - x) * qq * qq;
      }
    }
    return acc;
  }

  const BvpSolution& solution() const { return sol_; }

 private:
  std::vector<double> mesh_;
  BvpSolution sol_;
  BvpResult result_;
};

}  // namespace mcgap
