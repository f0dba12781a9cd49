#pragma once

// Commutative differential-polynomial ring in one dependent variable u(x)
// and its x-derivatives u', u'', ..., with exact rational coefficients.
// Monomials are graded by weight(u^{(j)}) = j + 2; the total derivative
// raises the weight of every term by exactly one.

#include "mcgap/errors.hpp"
#include "mcgap/rational.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace mcgap {

// Product ∏_j (u^{(j)})^{e_j}. Factors are kept sorted by derivative order
// with strictly positive exponents; the empty product is the unit monomial.
class DiffMonomial {
 public:
  using Factor = std::pair<int, int>;  // (derivative order j, exponent e_j)

  DiffMonomial() = default;

  static DiffMonomial one() { return DiffMonomial(); }

  static DiffMonomial var(int order, int exponent = 1) {
    DiffMonomial m;
    if (exponent > 0) m.factors_.emplace_back(order, exponent);
    return m;
  }

  static DiffMonomial from_factors(std::vector<Factor> fs) {
    DiffMonomial m;
    std::sort(fs.begin(), fs.end());
    for (const auto& [j, e] : fs) {
      if (e <= 0) continue;
      if (!m.factors_.empty() && m.factors_.back().first == j)
        m.factors_.back().second += e;
      else
        m.factors_.emplace_back(j, e);
    }
    return m;
  }

  bool is_one() const { return factors_.empty(); }

  int weight() const {
    int w = 0;
    for (const auto& [j, e] : factors_) w += e * (j + 2);
    return w;
  }

  int degree() const {
    int d = 0;
    for (const auto& [j, e] : factors_) d += e;
    return d;
  }

  int max_order() const { return factors_.empty() ? -1 : factors_.back().first; }

  int exponent(int order) const {
    for (const auto& [j, e] : factors_)
      if (j == order) return e;
    return 0;
  }

  const std::vector<Factor>& factors() const { return factors_; }

  DiffMonomial times(const DiffMonomial& o) const {
    std::vector<Factor> fs = factors_;
    fs.insert(fs.end(), o.factors_.begin(), o.factors_.end());
    return from_factors(std::move(fs));
  }

  // Replace one u^{(from)} factor by u^{(to)}; caller guarantees presence.
  DiffMonomial with_factor_moved(int from, int to) const {
    std::vector<Factor> fs;
    for (const auto& [j, e] : factors_) {
      int ee = e - (j == from ? 1 : 0);
      if (ee > 0) fs.emplace_back(j, ee);
    }
    fs.emplace_back(to, 1);
    return from_factors(std::move(fs));
  }

  // Graded order: weight first, ties broken lexicographically scanning
  // exponents from the highest derivative order downwards.
  static int compare(const DiffMonomial& a, const DiffMonomial& b) {
    int wa = a.weight(), wb = b.weight();
    if (wa != wb) return wa < wb ? -1 : 1;
    int top = std::max(a.max_order(), b.max_order());
    for (int j = top; j >= 0; --j) {
      int ea = a.exponent(j), eb = b.exponent(j);
      if (ea != eb) return ea < eb ? -1 : 1;
    }
    return 0;
  }

  bool operator==(const DiffMonomial& o) const { return factors_ == o.factors_; }

 private:
  std::vector<Factor> factors_;
};

struct MonomialDescending {
  bool operator()(const DiffMonomial& a, const DiffMonomial& b) const {
    return DiffMonomial::compare(a, b) > 0;
  }
};

// Jet of a function at one point: values (u, u', ..., u^{(m)}).
using Jet = std::vector<double>;

class DiffPoly {
 public:
  using TermMap = std::map<DiffMonomial, Rational, MonomialDescending>;

  DiffPoly() = default;

  static DiffPoly zero() { return DiffPoly(); }

  static DiffPoly constant(const Rational& c) {
    DiffPoly p;
    p.add_term(DiffMonomial::one(), c);
    return p;
  }

  static DiffPoly u(int order = 0, int exponent = 1) {
    DiffPoly p;
    p.add_term(DiffMonomial::var(order, exponent), 1);
    return p;
  }

  static DiffPoly term(const DiffMonomial& m, const Rational& c) {
    DiffPoly p;
    p.add_term(m, c);
    return p;
  }

  bool is_zero() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }
  const TermMap& terms() const { return terms_; }

  Rational coefficient(const DiffMonomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Rational(0) : it->second;
  }

  Rational constant_term() const { return coefficient(DiffMonomial::one()); }

  int max_order() const {
    int mo = -1;
    for (const auto& [m, c] : terms_) mo = std::max(mo, m.max_order());
    return mo;
  }

  // Largest weight over terms; -1 for the zero polynomial.
  int max_weight() const {
    return terms_.empty() ? -1 : terms_.begin()->first.weight();
  }

  bool is_homogeneous(int w) const {
    for (const auto& [m, c] : terms_)
      if (m.weight() != w) return false;
    return true;
  }

  void add_term(const DiffMonomial& m, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  DiffPoly& operator+=(const DiffPoly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }

  DiffPoly& operator-=(const DiffPoly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
  }

  friend DiffPoly operator+(DiffPoly a, const DiffPoly& b) { return a += b; }
  friend DiffPoly operator-(DiffPoly a, const DiffPoly& b) { return a -= b; }

  friend DiffPoly operator*(const DiffPoly& a, const DiffPoly& b) {
    DiffPoly r;
    for (const auto& [ma, ca] : a.terms_)
      for (const auto& [mb, cb] : b.terms_) r.add_term(ma.times(mb), ca * cb);
    return r;
  }

  DiffPoly scaled(const Rational& c) const {
    DiffPoly r;
    if (c == 0) return r;
    for (const auto& [m, k] : terms_) r.terms_.emplace(m, k * c);
    return r;
  }

  friend DiffPoly operator*(const Rational& c, const DiffPoly& p) { return p.scaled(c); }

  bool operator==(const DiffPoly& o) const { return terms_ == o.terms_; }
  bool operator!=(const DiffPoly& o) const { return !(*this == o); }

  // Total x-derivative: d(u^{(j)}) = u^{(j+1)} extended by the Leibniz rule.
  DiffPoly total_derivative() const {
    DiffPoly r;
    for (const auto& [m, c] : terms_) {
      for (const auto& [j, e] : m.factors()) {
        r.add_term(m.with_factor_moved(j, j + 1), c * e);
      }
    }
    return r;
  }

  // Formal partial derivative with respect to the symbol u^{(order)}.
  DiffPoly partial(int order) const {
    DiffPoly r;
    for (const auto& [m, c] : terms_) {
      int e = m.exponent(order);
      if (e == 0) continue;
      std::vector<DiffMonomial::Factor> fs;
      for (const auto& [j, ee] : m.factors()) {
        int n = ee - (j == order ? 1 : 0);
        if (n > 0) fs.emplace_back(j, n);
      }
      r.add_term(DiffMonomial::from_factors(std::move(fs)), c * e);
    }
    return r;
  }

  // Exact antiderivative q with total_derivative(q) == *this and q[0] = 0.
  // Peels the leading term (graded-lex order) and inverts the derivative on
  // it; the leading monomial strictly decreases, so the loop terminates.
  DiffPoly integrate_exact() const {
    DiffPoly q;
    DiffPoly r = *this;
    std::size_t guard = 0;
    while (!r.is_zero()) {
      if (++guard > 2000000) throw Error("integrate_exact: iteration guard tripped");
      const auto& [mon, c] = *r.terms_.begin();
      int top = mon.max_order();
      if (top <= 0) {
        throw NotExact("integrate_exact: leading term " + term_to_string(mon, c) +
                       " has no derivative factor");
      }
      if (mon.exponent(top) != 1) {
        throw NotExact("integrate_exact: leading term " + term_to_string(mon, c) +
                       " is nonlinear in its highest derivative");
      }
      int f = mon.exponent(top - 1);
      DiffMonomial anti = mon.with_factor_moved(top, top - 1);
      Rational coeff = c / (f + 1);
      q.add_term(anti, coeff);
      r -= DiffPoly::term(anti, coeff).total_derivative();
    }
    return q;
  }

  // Substitute u -> u + z (z constant); derivatives are shift-invariant.
  DiffPoly shift_u(const Rational& z) const {
    DiffPoly r;
    for (const auto& [m, c] : terms_) {
      int e0 = m.exponent(0);
      if (e0 == 0) {
        r.add_term(m, c);
        continue;
      }
      std::vector<DiffMonomial::Factor> rest;
      for (const auto& [j, e] : m.factors())
        if (j != 0) rest.emplace_back(j, e);
      for (int i = 0; i <= e0; ++i) {
        Rational cc = c * Rational(binomial(e0, i)) * pow_rational(z, e0 - i);
        auto fs = rest;
        if (i > 0) fs.emplace_back(0, i);
        r.add_term(DiffMonomial::from_factors(std::move(fs)), cc);
      }
    }
    return r;
  }

  // Numeric evaluation on a jet. Terms are accumulated in canonical
  // (descending) order, so the result is deterministic.
  double eval(const Jet& jet) const {
    int need = max_order();
    if (need >= 0 && jet.size() < std::size_t(need) + 1) {
      throw JetTooShort("eval: polynomial needs derivatives up to order " +
                        std::to_string(need) + ", jet has " +
                        std::to_string(jet.size()) + " entries");
    }
    double acc = 0.0;
    for (const auto& [m, c] : terms_) {
      double t = to_double(c);
      for (const auto& [j, e] : m.factors()) {
        double v = jet[std::size_t(j)];
        for (int i = 0; i < e; ++i) t *= v;
      }
      acc += t;
    }
    return acc;
  }

  // Stable text form: terms as `coeff * u^(j)^e ...` joined by " + ",
  // canonical descending order; a bare coefficient for the constant term.
  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : terms_) {
      if (!first) out += " + ";
      first = false;
      out += term_to_string(m, c);
    }
    return out;
  }

  static DiffPoly parse(const std::string& text);

 private:
  static std::string term_to_string(const DiffMonomial& m, const Rational& c) {
    std::string s = mcgap::to_string(c);
    bool first = true;
    for (const auto& [j, e] : m.factors()) {
      s += first ? " * u^(" : " u^(";
      first = false;
      s += std::to_string(j) + ")";
      if (e != 1) s += "^" + std::to_string(e);
    }
    return s;
  }

  TermMap terms_;
};

inline DiffPoly DiffPoly::parse(const std::string& text) {
  DiffPoly p;
  std::string t = text;
  if (t == "0" || t.empty()) return p;
  std::size_t pos = 0;
  while (pos != std::string::npos) {
    std::size_t next = t.find(" + ", pos);
    std::string term = t.substr(pos, next == std::string::npos ? next : next - pos);
    pos = next == std::string::npos ? next : next + 3;

    std::istringstream in(term);
    std::string coeff_tok;
    in >> coeff_tok;
    if (coeff_tok.empty()) throw ParseError("parse: empty term in '" + text + "'");
    Rational c = rational_from_string(coeff_tok);
    std::vector<DiffMonomial::Factor> fs;
    std::string tok;
    while (in >> tok) {
      if (tok == "*") continue;
      // u^(j) or u^(j)^e
      if (tok.rfind("u^(", 0) != 0) throw ParseError("parse: bad factor '" + tok + "'");
      std::size_t close = tok.find(')');
      if (close == std::string::npos) throw ParseError("parse: bad factor '" + tok + "'");
      int order = std::stoi(tok.substr(3, close - 3));
      int expo = 1;
      if (close + 1 < tok.size()) {
        if (tok[close + 1] != '^') throw ParseError("parse: bad factor '" + tok + "'");
        expo = std::stoi(tok.substr(close + 2));
      }
      fs.emplace_back(order, expo);
    }
    p.add_term(DiffMonomial::from_factors(std::move(fs)), c);
  }
  return p;
}

}  // namespace mcgap
