#pragma once

// Airy function Ai and its derivative in double-double precision.
// Maclaurin series for |x| <= x_switch (the cancellation there stays well
// inside the dd significand), standard large-|x| expansions beyond.

#include "mcgap/dd.hpp"

#include <cmath>
#include <string>

namespace mcgap {

struct AiryValue {
  double x = 0.0;
  double ai = 0.0;
  double ai_prime = 0.0;
  double est_abs_error = 0.0;
};

struct AiryValueDD {
  dd ai;
  dd ai_prime;
  double est_abs_error = 0.0;
};

namespace airy_detail {

// Ai(0), Ai'(0), 1/(2 sqrt(pi)), 1/sqrt(pi), pi/4 as hi/lo pairs.
inline constexpr dd kC1{0.3550280538878172, 2.05233632436212e-17};
inline constexpr dd kC2{-0.2588194037928068, 2.522243111610832e-17};
inline constexpr dd kInv2SqrtPi{0.28209479177387814, 3.83386490329147e-18};
inline constexpr dd kInvSqrtPi{0.5641895835477563, 7.66772980658294e-18};
inline constexpr dd kPiOver4{0.7853981633974483, 3.061616997868383e-17};

// Series/asymptotic crossover. Chosen where the two truncation-error
// estimates meet in dd: the Maclaurin cancellation costs ~2*zeta/ln(10)
// digits while the asymptotic optimal-truncation error is ~exp(-2*zeta);
// both are comfortably below 1e-13 at |x| = 12.
inline constexpr double kXSwitch = 12.0;

struct Raw {
  dd ai, aip;
  double err;
};

inline Raw maclaurin(double x) {
  // f'' = x f with f(0)=1, f'(0)=0 and g(0)=0, g'(0)=1; Ai = c1 f + c2 g.
  dd x3 = pow_int(dd(x), 3);
  dd f(1.0), fp(0.0), g(x), gp(1.0);
  dd tf(1.0), tg(x);
  double peak = std::fabs(x) + 1.0;
  for (int k = 0; k < 400; ++k) {
    tf = tf * x3 / double((3 * k + 2) * (3 * k + 3));
    dd tfp = (x == 0.0) ? dd(0.0) : tf * (3.0 * (k + 1)) / x;
    tg = tg * x3 / double((3 * k + 3) * (3 * k + 4));
    dd tgp = (x == 0.0) ? dd(0.0) : tg * (3.0 * (k + 1) + 1.0) / x;
    f += tf;
    fp += tfp;
    g += tg;
    gp += tgp;
    peak = std::max({peak, std::fabs(f.hi), std::fabs(g.hi), std::fabs(fp.hi), std::fabs(gp.hi)});
    if (std::fabs(tf.hi) < 1e-40 * peak && std::fabs(tg.hi) < 1e-40 * peak) break;
  }
  Raw r;
  r.ai = kC1 * f + kC2 * g;
  r.aip = kC1 * fp + kC2 * gp;
  r.err = peak * 0x1.0p-104 * 8.0;
  return r;
}

// u_k / v_k coefficient pair of the large-|x| expansions, advanced in place.
struct UV {
  dd u{1.0}, v{1.0};
  void advance(int k) {
    u = u * double((6 * k - 1) * (6 * k - 3) * (6 * k - 5)) / double(216 * k * (2 * k - 1));
    v = u * double(6 * k + 1) / double(1 - 6 * k);
  }
};

inline Raw asymptotic_pos(double x) {
  dd xd(x);
  dd sq = sqrt(xd);
  dd zeta = dd(2.0) / 3.0 * xd * sq;
  dd inv_zeta = dd(1.0) / zeta;
  dd su(1.0), sv(1.0), pw(1.0);
  UV uv;
  double last = 1.0;
  for (int k = 1; k <= 80; ++k) {
    uv.advance(k);
    pw *= -inv_zeta;
    double tu = std::fabs((uv.u * pw).hi);
    if (tu > last) break;  // past the optimal truncation point
    su += uv.u * pw;
    sv += uv.v * pw;
    last = tu;
    if (tu < 1e-38) break;
  }
  dd pre = kInv2SqrtPi * exp(-zeta);
  dd x14 = sqrt(sq);  // x^{1/4}
  Raw r;
  r.ai = pre / x14 * su;
  r.aip = -pre * x14 * sv;
  r.err = std::fabs((pre / x14).hi) * (last + 1e-31);
  return r;
}

inline Raw asymptotic_neg(double x) {
  dd z(-x);
  dd sq = sqrt(z);
  dd zeta = dd(2.0) / 3.0 * z * sq;
  dd inv2 = dd(1.0) / (zeta * zeta);
  // even/odd splits of the u- and v-series with alternating signs
  dd ue(1.0), uo(0.0), ve(1.0), vo(0.0);
  UV uv;
  dd pw_even(1.0);
  double last = 1.0;
  for (int k = 1; k <= 80; ++k) {
    uv.advance(k);
    dd term_u, term_v;
    if (k % 2 == 1) {  // odd index k = 2m+1: contributes to the odd sums
      dd pw = pw_even / zeta;  // zeta^{-k}
      int m = (k - 1) / 2;
      double sgn = (m % 2 == 0) ? 1.0 : -1.0;
      term_u = sgn * uv.u * pw;
      term_v = sgn * uv.v * pw;
      uo += term_u;
      vo += term_v;
    } else {  // even index k = 2m
      pw_even *= inv2;
      int m = k / 2;
      double sgn = (m % 2 == 0) ? 1.0 : -1.0;
      term_u = sgn * uv.u * pw_even;
      term_v = sgn * uv.v * pw_even;
      ue += term_u;
      ve += term_v;
    }
    double t = std::fabs(term_u.hi);
    if (t > last) break;
    last = t;
    if (t < 1e-38) break;
  }
  dd arg = zeta + kPiOver4;
  dd sn = sin(arg), cn = cos(arg);
  dd x14 = sqrt(sq);  // z^{1/4}
  Raw r;
  r.ai = kInvSqrtPi / x14 * (sn * ue - cn * uo);
  r.aip = -kInvSqrtPi * x14 * (cn * ve + sn * vo);
  r.err = std::fabs((kInvSqrtPi * x14).hi) * (last + 1e-31);
  return r;
}

inline Raw evaluate(double x) {
  if (x >= kXSwitch) return asymptotic_pos(x);
  if (x <= -kXSwitch) return asymptotic_neg(x);
  return maclaurin(x);
}

}  // namespace airy_detail

inline AiryValueDD airy_ai_dd(double x) {
  airy_detail::Raw r = airy_detail::evaluate(x);
  return AiryValueDD{r.ai, r.aip, r.err};
}

inline AiryValue airy_ai(double x) {
  airy_detail::Raw r = airy_detail::evaluate(x);
  AiryValue v;
  v.x = x;
  v.ai = r.ai.hi;
  v.ai_prime = r.aip.hi;
  v.est_abs_error = r.err + 1e-16 * (std::fabs(v.ai) + std::fabs(v.ai_prime));
  return v;
}

}  // namespace mcgap
