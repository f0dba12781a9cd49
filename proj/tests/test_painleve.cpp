#include "mcgap/painleve.hpp"

#include "mcgap/fredholm.hpp"
#include "mcgap/hastings_mcleod.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace mcgap;

namespace {

const P34Problem& problem_k1() {
  static P34Problem prob(make_hierarchy(1), 2.8);
  return prob;
}

const HastingsMcleod& hm() {
  static HastingsMcleod h;
  return h;
}

}  // namespace

TEST_CASE("background k=1 is x/2 exactly") {
  const auto& bg = problem_k1().background();
  for (std::size_t i = 0; i < bg.mesh().size(); i += 97) {
    CHECK(bg.u(i) == 0.5 * bg.mesh()[i]);
    CHECK(bg.jet(i)[1] == 0.5);
  }
  CHECK(bg.residual_sup() == 0.0);
}

TEST_CASE("background k=2 solves L_2[u] = x/2 on its window") {
  P34Problem prob(make_hierarchy(2), 1.0);
  const auto& bg = prob.background();
  CHECK(bg.residual_sup() < 1e-8);
  double L = -bg.mesh().front();
  CHECK(bg.u(0) == Catch::Approx(-std::sqrt(L / 6.0)).epsilon(0.01));
  // right tail on the asymptote +sqrt(x/6)
  double R = bg.mesh().back();
  CHECK(bg.u(bg.mesh().size() - 1) == Catch::Approx(std::sqrt(R / 6.0)).epsilon(0.01));
}

TEST_CASE("background k=3 matches its genuine asymptote") {
  P34Problem prob(make_hierarchy(3), 0.5);
  const auto& bg = prob.background();
  CHECK(bg.residual_sup() < 1e-7);
  double L = -bg.mesh().front();
  CHECK(bg.u(0) == Catch::Approx(-std::pow(L / 20.0, 1.0 / 3.0)).epsilon(0.02));
}

TEST_CASE("p34 k=1 at large s recovers the background") {
  P34Problem prob(make_hierarchy(1), 6.0);
  SolutionGrid g = prob.solve_cold(6.0);
  REQUIRE(g.converged);
  double sup = 0.0;
  for (std::size_t i = 0; i < g.x.size() && g.x[i] <= 0.0; ++i)
    sup = std::max(sup, std::fabs(g.u(i) - 0.5 * g.x[i]));
  CHECK(sup < 1e-3);
}

TEST_CASE("p34 k=1 at s=0 reproduces Hastings-McLeod through the gamma map") {
  const auto& prob = problem_k1();
  SolutionGrid g0 = prob.continue_to(0.0, prob.solve_cold(2.8));
  REQUIRE(g0.converged);

  const double gamma = -std::exp2(-1.0 / 3.0);
  const double c = std::exp2(1.0 / 3.0);
  double sup = 0.0;
  for (std::size_t i = 0; i < g0.x.size(); i += 3) {
    double x = g0.x[i];
    if (x > g0.x.back() - 3.0) continue;  // right boundary layer
    double t = gamma * x;
    if (t < hm().x_min() + 0.2 || t > hm().x_max() - 0.2) continue;
    double q = hm().q(t);
    double expect = 0.5 * x - c * q * q;
    sup = std::max(sup, std::fabs(g0.u(i) - expect));
  }
  CHECK(sup < 1e-5);
}

TEST_CASE("p34 k=1 diagnostics: equation residual and first integral") {
  const auto& prob = problem_k1();
  SolutionGrid g = prob.continue_to(-1.0, prob.solve_cold(2.8));
  GridDiagnostics d = diagnose(g, prob.spec().table);
  CHECK(d.equation_residual < 1e-7);
  CHECK(d.first_integral_residual < 1e-6 * (1.0 + d.k_sup * d.k_sup));
}

TEST_CASE("p34 flow-equation consistency between continuation neighbours") {
  const auto& prob = problem_k1();
  SolutionGrid a = prob.solve_cold(1.0);
  SolutionGrid b = prob.continue_to(0.95, a);
  double res = flow_consistency_residual(a, b, prob.spec().table);
  CHECK(res < 5.0 * 0.05 * 0.05 + 1e-6);
}

TEST_CASE("matching window guards a too-small domain") {
  P34Config cfg;
  cfg.L = 2.0;
  P34Problem prob(make_hierarchy(1), 0.5, cfg);
  CHECK_THROWS_AS(prob.continue_to(-1.5, prob.solve_cold(0.5)), MatchingWindowViolated);
}

TEST_CASE("gap curve k=1 matches the Fredholm oracle through the TW map") {
  const auto& prob = problem_k1();
  const double c = tw_scale_s();
  std::vector<double> s_tw, s_paper;
  for (double s = -4.0; s <= 2.01; s += 0.25) {
    s_tw.push_back(s);
    s_paper.push_back(c * s);
  }
  GapCurve curve = gap_curve(prob, s_paper);
  REQUIRE(curve.s.size() == s_tw.size());

  double supdev = 0.0;
  for (std::size_t i = 0; i < s_tw.size(); ++i) {
    double f2 = fredholm_det_airy(s_tw[i], 80).f2;
    supdev = std::max(supdev, std::fabs(std::exp(curve.log_p[i]) - f2));
    CHECK(curve.log_p[i] <= 1e-12);
    CHECK(curve.pdf[i] >= -1e-12);
  }
  CHECK(supdev < 1e-6);
  CHECK(curve.log_p.back() > -1e-2);
  CHECK(curve.max_flow_residual < curve.flow_threshold);
}
