#include "mcgap/airy.hpp"
#include "mcgap/fredholm.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace mcgap;

namespace {

// Reference values (30-digit evaluation, stored as hi/lo pairs).
struct Ref {
  double x, ai_hi, ai_lo, aip_hi, aip_lo;
};
constexpr Ref kRefs[] = {
    {-14.5, -0.030597418939551424, 1.1785516177774289e-18, -1.0953212728805393, 5.002632324897595e-17},
    {-10.0, 0.04024123848644319, 7.860115872583012e-19, 0.99626504413279, 1.0665282929943753e-17},
    {-5.0, 0.35076100902411433, -1.4343622442789718e-17, 0.32719281855444315, -1.7638052673612232e-17},
    {-2.0, 0.22740742820168558, -3.7020336253601335e-18, 0.618259020741691, 7.011104359740996e-18},
    {-1.0, 0.5355608832923521, 4.423005201723525e-17, -0.01016056711664521, 2.7815255495697437e-19},
    {0.0, 0.3550280538878172, 2.05233632436212e-17, -0.2588194037928068, 2.522243111610832e-17},
    {0.5, 0.23169360648083348, 9.237069708445993e-18, -0.2249105326646839, -5.531201858663569e-18},
    {1.0, 0.13529241631288141, 1.626263492529767e-18, -0.1591474412967932, -1.1061510477710944e-17},
    {2.0, 0.03492413042327438, 6.367783122909129e-19, -0.05309038443365363, -4.575133702696549e-19},
    {5.0, 0.00010834442813607442, -4.8895296183967285e-21, -0.0002474138908684625, 3.910347168307017e-21},
    {9.5, 5.330263704617492e-10, -4.3168005573296395e-26, -1.6566394593740667e-09, 6.848128599017834e-26},
    {13.0, 3.981776078833335e-15, 1.9272090544832695e-31, -1.4432080573972625e-14, -7.104576670163e-31},
    {20.0, 1.6916728686705404e-27, -1.204637020510709e-43, -7.586391625748354e-27, -4.932340787025664e-43},
};

}  // namespace

TEST_CASE("airy_ai reproduces reference values in dd") {
  for (const Ref& r : kRefs) {
    AiryValueDD v = airy_ai_dd(r.x);
    dd ref_ai(r.ai_hi, r.ai_lo), ref_aip(r.aip_hi, r.aip_lo);
    double tol = std::max(v.est_abs_error, 1e-28);
    CHECK(std::fabs(to_double(v.ai - ref_ai)) <= tol);
    CHECK(std::fabs(to_double(v.ai_prime - ref_aip)) <= tol);
    CHECK(v.est_abs_error <= 1e-13);
  }
}

TEST_CASE("airy_ai closed forms at the origin and decay at x = 10") {
  AiryValue v0 = airy_ai(0.0);
  CHECK(v0.ai == Catch::Approx(0.355028053887817).epsilon(1e-13));
  CHECK(v0.ai_prime == Catch::Approx(-0.258819403792807).epsilon(1e-13));

  AiryValue v10 = airy_ai(10.0);
  CHECK(v10.ai > 0.0);
  CHECK(v10.ai < 1e-9);
}

TEST_CASE("est_abs_error bound holds on [-15, 10]") {
  for (double x = -15.0; x <= 10.0; x += 0.7) {
    AiryValue v = airy_ai(x);
    CHECK(v.est_abs_error <= 1e-12);
    CHECK(std::isfinite(v.ai));
    CHECK(std::isfinite(v.ai_prime));
    if (x >= 0.0) CHECK(v.ai > 0.0);
  }
}

TEST_CASE("series and asymptotics agree across the switch") {
  using namespace airy_detail;
  for (double x : {12.5, 13.0, 14.0, -12.5, -13.0, -14.0}) {
    Raw a = maclaurin(x);
    Raw b = x > 0 ? asymptotic_pos(x) : asymptotic_neg(x);
    double tol = 4.0 * (a.err + b.err) + 1e-30;
    CHECK(std::fabs(to_double(a.ai - b.ai)) <= tol);
    CHECK(std::fabs(to_double(a.aip - b.aip)) <= tol);
  }
}

TEST_CASE("airy ODE residual via central differences") {
  const double h = 1e-4;
  for (double x = -12.0; x <= 9.0; x += 1.3) {
    double lhs = (airy_ai(x + h).ai_prime - airy_ai(x - h).ai_prime) / (2 * h);
    double rhs = x * airy_ai(x).ai;
    CHECK(std::fabs(lhs - rhs) <= 1e-6 * (1.0 + std::fabs(rhs)));
  }
}

TEST_CASE("fredholm: interval emptying limit at s = +4") {
  FredholmResult r = fredholm_det_airy(4.0, 40);
  CHECK(r.f2 <= 1.0 + 1e-12);
  CHECK(r.f2 > 1.0 - 1e-4);
}

TEST_CASE("fredholm: diagonal kernel limit") {
  double x = -1.3;
  AiryValueDD ax = airy_ai_dd(x);
  double diag = to_double(fredholm_detail::kernel(x, x, ax, ax));
  double prev = 1e9;
  for (double h : {1e-1, 1e-2, 1e-3}) {
    AiryValueDD ay = airy_ai_dd(x + h);
    double off = to_double(fredholm_detail::kernel(x, x + h, ax, ay));
    double diff = std::fabs(off - diag);
    CHECK(diff < prev);
    CHECK(diff < 2.0 * h);
    prev = diff;
  }
}

TEST_CASE("fredholm: node-doubling self-convergence at s = -2") {
  double f60 = fredholm_detail::det_at(-2.0, 60);
  double f120 = fredholm_detail::det_at(-2.0, 120);
  CHECK(std::fabs(f60 - f120) < 1e-10);

  FredholmResult r = fredholm_det_airy(-2.0, 120);
  CHECK(r.self_error < 1e-9);
}

TEST_CASE("fredholm: geometric Nystrom convergence") {
  double ref = fredholm_detail::det_at(-4.0, 160);
  double prev_err = 1.0;
  for (int n : {20, 30, 40, 60}) {
    double err = std::fabs(fredholm_detail::det_at(-4.0, n) - ref);
    CHECK(err < prev_err);
    prev_err = err;
  }
  CHECK(prev_err < 1e-11);
}

TEST_CASE("fredholm: monotone in s with the right limits") {
  double prev = -1.0;
  for (double s = -6.0; s <= 4.01; s += 0.5) {
    double f = fredholm_detail::det_at(s, 60);
    CHECK(f >= prev - 1e-12);
    CHECK(f > 0.0);
    CHECK(f <= 1.0 + 1e-10);
    prev = f;
  }
  CHECK(fredholm_detail::det_at(4.0, 60) > 1.0 - 1e-4);
  CHECK(fredholm_detail::det_at(-8.0, 80) < 1e-15);
}

TEST_CASE("fredholm: kernel spectrum lies in [0, 1]") {
  for (double s : {-10.0, -6.0, -2.0, 0.0, 4.0}) {
    auto eig = airy_kernel_spectrum(s, 120);
    for (double e : eig) {
      CHECK(e >= -1e-12);
      CHECK(e <= 1.0 + 1e-10);
    }
  }
}

TEST_CASE("fredholm: node count validation") {
  CHECK_THROWS_AS(fredholm_det_airy(0.0, 4), NodeCountTooSmall);
}
