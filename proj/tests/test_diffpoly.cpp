#include "mcgap/diffpoly.hpp"

#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace mcgap;
using mcgap::testing::Rng;

namespace {

DiffPoly u(int order = 0, int e = 1) { return DiffPoly::u(order, e); }

}  // namespace

TEST_CASE("ring operations: identities and inverses") {
  DiffPoly zero = u() - u();
  CHECK(zero.is_zero());
  CHECK(zero.term_count() == 0);

  DiffPoly up2 = u(1) * u(1);
  CHECK(up2.term_count() == 1);
  CHECK(up2.coefficient(DiffMonomial::var(1, 2)) == Rational(1));

  DiffPoly p = u(2) + Rational(3) * u(0, 2);
  CHECK(p * DiffPoly::constant(1) == p);
}

TEST_CASE("total derivative on the basic examples") {
  CHECK(u(0, 2).total_derivative() == Rational(2) * (u(0) * u(1)));

  DiffPoly p = u(2) + Rational(3) * u(0, 2);
  DiffPoly expect = u(3) + Rational(6) * (u(0) * u(1));
  CHECK(p.total_derivative() == expect);

  CHECK(DiffPoly::constant(Rational(1, 2)).total_derivative().is_zero());
}

TEST_CASE("integrate_exact on the basic examples") {
  DiffPoly flow = u(3) + Rational(6) * (u(0) * u(1));
  CHECK(flow.integrate_exact() == u(2) + Rational(3) * u(0, 2));

  CHECK(u(1).integrate_exact() == u(0));

  CHECK_THROWS_AS(u(0).integrate_exact(), NotExact);
  CHECK_THROWS_AS(DiffPoly::constant(1).integrate_exact(), NotExact);
  // nonlinear in its own top derivative
  CHECK_THROWS_AS(u(1, 2).integrate_exact(), NotExact);
}

TEST_CASE("eval on jets") {
  DiffPoly p = u(2) + Rational(3) * u(0, 2);
  Jet j{1.0, 0.0, 2.0};
  CHECK(p.eval(j) == Catch::Approx(5.0));

  CHECK(DiffPoly::constant(Rational(1, 2)).eval(Jet{0.0}) == Catch::Approx(0.5));

  CHECK_THROWS_AS(p.eval(Jet{1.0, 1.0}), JetTooShort);
}

TEST_CASE("commutativity, associativity, distributivity (randomised)") {
  Rng rng(0x1234);
  for (int it = 0; it < 60; ++it) {
    DiffPoly a = testing::random_poly(rng, 4, 8);
    DiffPoly b = testing::random_poly(rng, 4, 8);
    DiffPoly c = testing::random_poly(rng, 3, 8);
    CHECK(a + b == b + a);
    CHECK(a * b == b * a);
    CHECK(a * (b + c) == a * b + a * c);
    CHECK((a * b) * c == a * (b * c));
  }
}

TEST_CASE("d is a derivation up to weight 12") {
  Rng rng(0x5678);
  for (int it = 0; it < 60; ++it) {
    DiffPoly a = testing::random_poly(rng, 3, 6);
    DiffPoly b = testing::random_poly(rng, 3, 6);
    DiffPoly lhs = (a * b).total_derivative();
    DiffPoly rhs = a.total_derivative() * b + a * b.total_derivative();
    CHECK(lhs == rhs);
  }
}

TEST_CASE("integrate_exact inverts total_derivative") {
  Rng rng(0x9abc);
  for (int it = 0; it < 80; ++it) {
    DiffPoly q = testing::random_poly(rng, 5, 9);
    // remove any constant term: antiderivatives are normalised to q[0] = 0
    q -= DiffPoly::constant(q.constant_term());
    DiffPoly p = q.total_derivative();
    CHECK(p.integrate_exact() == q);
  }
}

TEST_CASE("integrate_exact agrees with the undetermined-coefficient oracle") {
  Rng rng(0xdef0);
  for (int it = 0; it < 40; ++it) {
    DiffPoly q = testing::random_poly(rng, 4, 8);
    q -= DiffPoly::constant(q.constant_term());
    DiffPoly p = q.total_derivative();

    DiffPoly oracle;
    REQUIRE(testing::integrate_by_ansatz(p, oracle));
    CHECK(oracle.total_derivative() == p);
    CHECK(p.integrate_exact() == oracle);

    // Spoil exactness with a pure power of u; both routes must refuse.
    DiffPoly bad = p + u(0, 2);
    DiffPoly dummy;
    CHECK_FALSE(testing::integrate_by_ansatz(bad, dummy));
    CHECK_THROWS_AS(bad.integrate_exact(), NotExact);
  }
}

TEST_CASE("grading: d raises every weight by one") {
  Rng rng(0x1111);
  for (int it = 0; it < 40; ++it) {
    DiffPoly p = testing::random_poly(rng, 4, 9);
    DiffPoly dp = p.total_derivative();
    for (const auto& [m, c] : dp.terms()) {
      bool found = false;
      for (const auto& [m0, c0] : p.terms())
        if (m.weight() == m0.weight() + 1) found = true;
      CHECK(found);
    }
  }

  // homogeneous input: d(p) homogeneous of weight w+1
  DiffPoly h = u(2) + Rational(3) * u(0, 2);  // weight 4
  REQUIRE(h.is_homogeneous(4));
  CHECK(h.total_derivative().is_homogeneous(5));
}

TEST_CASE("eval is a ring homomorphism on jets") {
  Rng rng(0x2222);
  for (int it = 0; it < 60; ++it) {
    DiffPoly a = testing::random_poly(rng, 4, 7);
    DiffPoly b = testing::random_poly(rng, 4, 7);
    Jet j = testing::random_jet(rng, 8);
    double lhs = (a * b).eval(j);
    double rhs = a.eval(j) * b.eval(j);
    CHECK(std::fabs(lhs - rhs) <= 1e-12 * (1.0 + std::fabs(rhs)));
    CHECK((a + b).eval(j) == Catch::Approx(a.eval(j) + b.eval(j)).margin(1e-12));
  }
}

TEST_CASE("stable text form round-trips and is canonical") {
  DiffPoly p = u(4) + Rational(10) * (u(0) * u(2)) + Rational(5) * u(1, 2) + Rational(10) * u(0, 3);
  std::string s = p.to_string();
  CHECK(s == "1 * u^(4) + 10 * u^(0) u^(2) + 5 * u^(1)^2 + 10 * u^(0)^3");
  CHECK(DiffPoly::parse(s) == p);

  CHECK(DiffPoly::zero().to_string() == "0");
  CHECK(DiffPoly::parse("0").is_zero());
  CHECK(DiffPoly::constant(Rational(1, 2)).to_string() == "1/2");
  CHECK(DiffPoly::parse("1/2") == DiffPoly::constant(Rational(1, 2)));

  Rng rng(0x3333);
  for (int it = 0; it < 40; ++it) {
    DiffPoly q = testing::random_poly(rng, 5, 9);
    CHECK(DiffPoly::parse(q.to_string()) == q);
  }
}

TEST_CASE("shift substitution expands binomially") {
  // (u+1)^2 -> u^2 + 2u + 1
  DiffPoly p = u(0, 2).shift_u(1);
  CHECK(p == u(0, 2) + Rational(2) * u(0) + DiffPoly::constant(1));

  // derivatives are unaffected by the shift
  CHECK(u(3).shift_u(Rational(5, 7)) == u(3));
}
