#pragma once

// Lenard differential operators L_0 ... L_kmax built by the recursion
//   d L_{l+1} = (d^3 + 4 u d + 2 u') L_l,   L_0 = 1/2,   L_l[0] = 0,
// together with the exact half-integer Gamma coefficient families used by
// the hierarchy (alpha/beta/tau) and the constant-shift identity.

#include "mcgap/diffpoly.hpp"
#include "mcgap/errors.hpp"
#include "mcgap/rational.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace mcgap {

struct LenardTable {
  int k_max = 0;
  std::vector<DiffPoly> entries;  // L_0 .. L_kmax
  std::vector<DiffPoly> primes;   // d L_0 .. d L_kmax

  const DiffPoly& L(int l) const {
    if (l < 0 || l > k_max) throw IndexOutOfRange("LenardTable::L(" + std::to_string(l) + ")");
    return entries[std::size_t(l)];
  }
  const DiffPoly& Lp(int l) const {
    if (l < 0 || l > k_max) throw IndexOutOfRange("LenardTable::Lp(" + std::to_string(l) + ")");
    return primes[std::size_t(l)];
  }
};

// Applies (d^3 + 4 u d + 2 u') to p.
inline DiffPoly lenard_step_operator(const DiffPoly& p) {
  DiffPoly dp = p.total_derivative();
  DiffPoly d3p = dp.total_derivative().total_derivative();
  return d3p + Rational(4) * (DiffPoly::u(0) * dp) + Rational(2) * (DiffPoly::u(1) * p);
}

inline LenardTable build_table(int k_max) {
  if (k_max < 0) throw IndexOutOfRange("build_table: k_max must be >= 0");
  LenardTable t;
  t.k_max = k_max;
  t.entries.push_back(DiffPoly::constant(Rational(1, 2)));
  t.primes.push_back(DiffPoly::zero());
  for (int l = 0; l < k_max; ++l) {
    DiffPoly lp = lenard_step_operator(t.entries.back());
    DiffPoly next = lp.integrate_exact();
    // The pure u^{(2l)} monomial always enters with unit coefficient; the
    // jet-extension machinery in the solvers depends on it.
    if (next.coefficient(DiffMonomial::var(2 * (l + 1) - 2)) != 1)
      throw Error("build_table: unexpected leading coefficient at level " + std::to_string(l + 1));
    t.entries.push_back(std::move(next));
    t.primes.push_back(std::move(lp));
  }
  return t;
}

// alpha^{(k)}_j = Gamma(k+1/2) / (Gamma(k-j+1) Gamma(j+1/2)), built by the
// Pascal-type recursion alpha^{(k+1)}_j = alpha^{(k)}_j + alpha^{(k)}_{j-1}.
inline std::vector<Rational> alpha_row(int k) {
  if (k < 0) throw IndexOutOfRange("alpha_row: k must be >= 0");
  std::vector<Rational> row{Rational(1)};
  for (int kk = 0; kk < k; ++kk) {
    std::vector<Rational> next(std::size_t(kk) + 2);
    next[0] = row[0] * Rational(2 * kk + 1, 2 * kk + 2);
    for (int j = 1; j <= kk; ++j) next[std::size_t(j)] = row[std::size_t(j)] + row[std::size_t(j) - 1];
    next[std::size_t(kk) + 1] = 1;
    row = std::move(next);
  }
  return row;
}

inline Rational alpha_coefficient(int k, int j) {
  if (j < 0 || j > k) throw IndexOutOfRange("alpha_coefficient: need 0 <= j <= k");
  return alpha_row(k)[std::size_t(j)];
}

// beta_k = 4^{k-1} Gamma(k+1/2) / (Gamma(k+1) Gamma(3/2)); equals the
// coefficient of u^k in L_k.
inline Rational beta_coefficient(int k) {
  if (k < 1) throw IndexOutOfRange("beta_coefficient: k must be >= 1");
  Rational r = gamma_half_ratio(unsigned(k), 1) / Rational(factorial(unsigned(k)));
  return pow_rational(Rational(4), unsigned(k - 1)) * r;
}

// tau_j(s) = (2j+1) 2^{(2k-4j-1)/(2k+1)} Gamma(k+1/2)/(Gamma(k-j+1)Gamma(j+3/2)) s^{k-j}.
// The power of two is irrational in general, so it is kept as an exact
// exponent next to the rational prefactor.
struct TauCoefficient {
  int k = 0;
  int j = 0;
  Rational rational_part;  // (2j+1) * Gamma ratio
  int pow2_num = 0;        // exponent numerator: 2k - 4j - 1
  int pow2_den = 1;        // exponent denominator: 2k + 1

  double prefactor() const {
    return to_double(rational_part) * std::exp2(double(pow2_num) / double(pow2_den));
  }
  double operator()(double s) const { return prefactor() * std::pow(s, double(k - j)); }
};

inline TauCoefficient tau_coefficient(int k, int j) {
  if (k < 1 || j < 0 || j >= k) throw IndexOutOfRange("tau_coefficient: need 0 <= j < k");
  TauCoefficient t;
  t.k = k;
  t.j = j;
  t.rational_part = Rational(2 * j + 1) * gamma_half_ratio(unsigned(k), unsigned(j + 1)) /
                    Rational(factorial(unsigned(k - j)));
  t.pow2_num = 2 * k - 4 * j - 1;
  t.pow2_den = 2 * k + 1;
  return t;
}

// beta = 2^{(4k-2)/(2k+1)}, the argument scale that accompanies tau_0.
inline double tau_argument_scale(int k) {
  return std::exp2(double(4 * k - 2) / double(2 * k + 1));
}

inline std::vector<TauCoefficient> tau_profile(int k) {
  std::vector<TauCoefficient> out;
  for (int j = 0; j < k; ++j) out.push_back(tau_coefficient(k, j));
  return out;
}

struct HierarchyCoefficients {
  Rational alpha;
  Rational beta;
  TauCoefficient tau;
};

inline HierarchyCoefficients hierarchy_coefficients(int k, int j) {
  if (j < 0 || j > k || k < 1) throw IndexOutOfRange("hierarchy_coefficients: need 0 <= j <= k, k >= 1");
  HierarchyCoefficients h;
  h.alpha = alpha_coefficient(k, j);
  h.beta = beta_coefficient(k);
  h.tau = j < k ? tau_coefficient(k, j) : TauCoefficient{};
  return h;
}

struct ShiftIdentityResult {
  bool holds = false;
  DiffPoly residual;
};

// Checks L_k[u+z] = sum_j (4z)^{k-j} alpha^{(k)}_j L_j[u] exactly.
inline ShiftIdentityResult verify_shift_identity(const LenardTable& table, int k, const Rational& z) {
  if (k < 0 || k > table.k_max)
    throw IndexOutOfRange("verify_shift_identity: k exceeds table depth");
  DiffPoly lhs = table.L(k).shift_u(z);
  auto alphas = alpha_row(k);
  DiffPoly rhs;
  for (int j = 0; j <= k; ++j) {
    Rational c = pow_rational(Rational(4) * z, unsigned(k - j)) * alphas[std::size_t(j)];
    rhs += c * table.L(j);
  }
  ShiftIdentityResult r;
  r.residual = lhs - rhs;
  r.holds = r.residual.is_zero();
  return r;
}

// --- stable text serialisation and the on-disk cache --------------------

inline std::string table_to_text(const LenardTable& t) {
  std::string out = "lenard-table v1 kmax " + std::to_string(t.k_max) + "\n";
  for (int l = 0; l <= t.k_max; ++l) {
    out += "L " + std::to_string(l) + " : " + t.L(l).to_string() + "\n";
    out += "Lp " + std::to_string(l) + " : " + t.Lp(l).to_string() + "\n";
  }
  return out;
}

inline LenardTable table_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string tag, ver, kw;
  int kmax = -1;
  in >> tag >> ver >> kw >> kmax;
  if (tag != "lenard-table" || ver != "v1" || kw != "kmax" || kmax < 0)
    throw ParseError("table_from_text: bad header");
  in.ignore();
  LenardTable t;
  t.k_max = kmax;
  t.entries.resize(std::size_t(kmax) + 1);
  t.primes.resize(std::size_t(kmax) + 1);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string what;
    int l = 0;
    std::string colon;
    ls >> what >> l >> colon;
    if (colon != ":") throw ParseError("table_from_text: bad line '" + line + "'");
    std::string rest;
    std::getline(ls, rest);
    if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
    if (l < 0 || l > kmax) throw ParseError("table_from_text: level out of range");
    if (what == "L")
      t.entries[std::size_t(l)] = DiffPoly::parse(rest);
    else if (what == "Lp")
      t.primes[std::size_t(l)] = DiffPoly::parse(rest);
    else
      throw ParseError("table_from_text: bad record '" + what + "'");
  }
  return t;
}

// Loads a cached table when it is deep enough, otherwise rebuilds (reusing
// nothing; builds are cheap for k <= 8) and rewrites the cache.
inline LenardTable build_table_cached(int k_max, const std::string& cache_path) {
  if (!cache_path.empty()) {
    std::ifstream in(cache_path);
    if (in) {
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      try {
        LenardTable t = table_from_text(text);
        if (t.k_max >= k_max) {
          t.k_max = k_max;
          t.entries.resize(std::size_t(k_max) + 1);
          t.primes.resize(std::size_t(k_max) + 1);
          return t;
        }
      } catch (const ParseError&) {
        // stale or foreign file; fall through to a rebuild
      }
    }
  }
  LenardTable t = build_table(k_max);
  if (!cache_path.empty()) {
    std::ofstream out(cache_path);
    if (out) out << table_to_text(t);
  }
  return t;
}

}  // namespace mcgap
