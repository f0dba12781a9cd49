#pragma once

// Shared helpers for the test suites: a deterministic random generator for
// differential polynomials and an independent antiderivative oracle that
// solves for undetermined coefficients over the homogeneous weight basis.

#include "mcgap/diffpoly.hpp"
#include "mcgap/rational.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

namespace mcgap::testing {

// splitmix64; deterministic across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  int uniform_int(int lo, int hi) {  // inclusive
    return lo + int(next() % std::uint64_t(hi - lo + 1));
  }
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (double(next() >> 11) * 0x1.0p-53);
  }

 private:
  std::uint64_t state_;
};

inline DiffMonomial random_monomial(Rng& rng, int max_weight) {
  std::vector<DiffMonomial::Factor> fs;
  int budget = rng.uniform_int(2, max_weight);
  while (budget >= 2) {
    int order = rng.uniform_int(0, std::min(4, budget - 2));
    fs.emplace_back(order, 1);
    budget -= order + 2;
  }
  return DiffMonomial::from_factors(std::move(fs));
}

inline DiffPoly random_poly(Rng& rng, int max_terms, int max_weight) {
  DiffPoly p;
  int n = rng.uniform_int(1, max_terms);
  for (int i = 0; i < n; ++i) {
    Rational c(rng.uniform_int(-6, 6), rng.uniform_int(1, 4));
    p.add_term(random_monomial(rng, max_weight), c);
  }
  return p;
}

inline Jet random_jet(Rng& rng, std::size_t len) {
  Jet j(len);
  for (auto& v : j) v = rng.uniform(-1.5, 1.5);
  return j;
}

// All monomials of exact weight w (weight(u^{(j)}) = j + 2).
inline void enumerate_monomials_of_weight(int w, int min_order,
                                          std::vector<DiffMonomial::Factor>& stack,
                                          std::vector<DiffMonomial>& out) {
  if (w == 0) {
    out.push_back(DiffMonomial::from_factors(stack));
    return;
  }
  for (int j = min_order; j + 2 <= w; ++j) {
    stack.emplace_back(j, 1);
    enumerate_monomials_of_weight(w - (j + 2), j, stack, out);
    stack.pop_back();
  }
}

inline std::vector<DiffMonomial> monomials_of_weight(int w) {
  std::vector<DiffMonomial> out;
  std::vector<DiffMonomial::Factor> stack;
  enumerate_monomials_of_weight(w, 0, stack, out);
  return out;
}

// Independent antiderivative: ansatz over the weight-(w-1) monomial basis,
// coefficients solved exactly by Gaussian elimination. Returns false when
// the input is not a total derivative. Cross-checks DiffPoly::integrate_exact.
inline bool integrate_by_ansatz(const DiffPoly& p, DiffPoly& result) {
  result = DiffPoly::zero();
  if (p.is_zero()) return true;

  // Split by weight; each homogeneous component integrates independently.
  std::map<int, DiffPoly> by_weight;
  for (const auto& [m, c] : p.terms()) {
    if (m.is_one()) return false;  // nonzero constants are not exact
    by_weight[m.weight()].add_term(m, c);
  }

  for (const auto& [w, comp] : by_weight) {
    auto basis = monomials_of_weight(w - 1);
    std::vector<DiffPoly> dbasis;
    dbasis.reserve(basis.size());
    for (const auto& m : basis) dbasis.push_back(DiffPoly::term(m, 1).total_derivative());

    // Row space: all weight-w monomials appearing anywhere.
    std::map<DiffMonomial, std::size_t, MonomialDescending> row_index;
    auto touch = [&](const DiffPoly& q) {
      for (const auto& [m, c] : q.terms())
        row_index.emplace(m, row_index.size());
    };
    for (const auto& q : dbasis) touch(q);
    touch(comp);

    std::size_t rows = row_index.size(), cols = basis.size();
    std::vector<std::vector<Rational>> a(rows, std::vector<Rational>(cols + 1, Rational(0)));
    for (std::size_t j = 0; j < cols; ++j)
      for (const auto& [m, c] : dbasis[j].terms()) a[row_index[m]][j] = c;
    for (const auto& [m, c] : comp.terms()) a[row_index[m]][cols] = c;

    // Exact Gaussian elimination.
    std::vector<std::size_t> pivot_col(rows, SIZE_MAX);
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
      std::size_t piv = r;
      while (piv < rows && a[piv][c] == 0) ++piv;
      if (piv == rows) continue;
      std::swap(a[piv], a[r]);
      Rational inv = a[r][c];
      for (auto& x : a[r]) x /= inv;
      for (std::size_t i = 0; i < rows; ++i) {
        if (i == r || a[i][c] == 0) continue;
        Rational f = a[i][c];
        for (std::size_t j2 = c; j2 <= cols; ++j2) a[i][j2] -= f * a[r][j2];
      }
      pivot_col[r] = c;
      ++r;
    }
    for (std::size_t i = r; i < rows; ++i)
      if (a[i][cols] != 0) return false;  // inconsistent: not exact

    std::vector<Rational> x(cols, Rational(0));
    for (std::size_t i = 0; i < r; ++i) x[pivot_col[i]] = a[i][cols];
    for (std::size_t j = 0; j < cols; ++j)
      if (x[j] != 0) result.add_term(basis[j], x[j]);
  }
  return true;
}

}  // namespace mcgap::testing
