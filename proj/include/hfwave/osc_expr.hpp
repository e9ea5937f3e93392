#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "hfwave/field_symbol.hpp"
#include "hfwave/rational.hpp"
#include "hfwave/trig.hpp"

namespace hfwave {

/// rational coefficient × λ-power × field factors × optional oscillator.
/// An absent trig slot is the non-oscillating constant 1.
struct OscMonomial {
  Rational coeff = Rational(1);
  int lambda_pow = 0;
  std::vector<Factor> factors;
  std::optional<TrigSymbol> trig;

  int harmonic() const { return trig ? trig->harmonic : 0; }

  std::string str() const {
    std::string s = coeff.str();
    if (lambda_pow != 0) s += " lam^" + std::to_string(lambda_pow);
    for (const auto& f : factors) s += " " + factor_str(f);
    if (trig) s += " " + trig->str();
    return s;
  }
};

namespace detail {

/// Canonical form of a single monomial. Folds trig and antisymmetric QFactor
/// signs into the coefficient, orders the factor multiset, and reports
/// identically-zero monomials as nullopt.
inline std::optional<OscMonomial> monomial_normalize(OscMonomial m) {
  if (m.coeff.is_zero()) return std::nullopt;
  if (m.trig) {
    auto [scale, sym] = trig_normalize(*m.trig);
    if (scale == 0 || !sym) return std::nullopt;
    m.coeff = m.coeff * Rational(scale);
    if (sym->harmonic == 0 && !sym->is_sin())
      m.trig.reset();  // cos(0) = 1
    else
      m.trig = sym;
  }
  for (auto& f : m.factors) {
    if (std::holds_alternative<QFactor>(f)) {
      auto& q = std::get<QFactor>(f);
      if (q.b < q.a) {
        std::swap(q.a, q.b);
        if (qkind_antisymmetric(q.kind)) m.coeff = -m.coeff;
      } else if (qkind_antisymmetric(q.kind) && q.a == q.b) {
        return std::nullopt;  // antisymmetric form on equal arguments
      }
    }
  }
  std::sort(m.factors.begin(), m.factors.end(), factor_less);
  return m;
}

inline auto monomial_key(const OscMonomial& m) {
  int th = m.trig ? m.trig->harmonic : 0;
  int tp = m.trig ? (m.trig->is_sin() ? 1 : 2) : 0;
  std::vector<std::string> fk;
  fk.reserve(m.factors.size());
  for (const auto& f : m.factors) fk.push_back(factor_str(f));
  return std::make_tuple(m.lambda_pow, th, tp, fk);
}

}  // namespace detail

/// Normalized sum of monomials. After normalize() no two terms share
/// (lambda_pow, factors, trig) and the order is canonical, so equality of
/// expressions is equality of term lists.
struct OscExpr {
  std::vector<OscMonomial> terms;

  OscExpr() = default;
  explicit OscExpr(OscMonomial m) { terms.push_back(std::move(m)); }

  bool empty() const { return terms.empty(); }

  OscExpr& add(OscMonomial m) {
    terms.push_back(std::move(m));
    return *this;
  }
  OscExpr& add(const OscExpr& e) {
    terms.insert(terms.end(), e.terms.begin(), e.terms.end());
    return *this;
  }

  OscExpr normalized() const {
    std::vector<OscMonomial> canon;
    canon.reserve(terms.size());
    for (const auto& t : terms) {
      auto m = detail::monomial_normalize(t);
      if (m) canon.push_back(std::move(*m));
    }
    std::sort(canon.begin(), canon.end(), [](const OscMonomial& a, const OscMonomial& b) {
      return detail::monomial_key(a) < detail::monomial_key(b);
    });
    std::vector<OscMonomial> merged;
    for (auto& m : canon) {
      if (!merged.empty() && detail::monomial_key(merged.back()) == detail::monomial_key(m)) {
        merged.back().coeff += m.coeff;
        if (merged.back().coeff.is_zero()) merged.pop_back();
      } else {
        merged.push_back(std::move(m));
      }
    }
    OscExpr out;
    out.terms = std::move(merged);
    return out;
  }

  OscExpr scaled(const Rational& c) const {
    OscExpr out = *this;
    for (auto& t : out.terms) t.coeff = t.coeff * c;
    return out;
  }

  OscExpr shifted(int dlam) const {
    OscExpr out = *this;
    for (auto& t : out.terms) t.lambda_pow += dlam;
    return out;
  }

  friend OscExpr operator+(OscExpr a, const OscExpr& b) {
    a.add(b);
    return a;
  }
  friend OscExpr operator-(OscExpr a, const OscExpr& b) {
    a.add(b.scaled(Rational(-1)));
    return a;
  }

  /// Structural equality of normalized forms.
  bool same_as(const OscExpr& other) const {
    auto a = normalized(), b = other.normalized();
    if (a.terms.size() != b.terms.size()) return false;
    for (size_t j = 0; j < a.terms.size(); ++j) {
      if (detail::monomial_key(a.terms[j]) != detail::monomial_key(b.terms[j])) return false;
      if (a.terms[j].coeff != b.terms[j].coeff) return false;
    }
    return true;
  }

  std::string str() const {
    if (terms.empty()) return "0";
    std::string s;
    for (size_t j = 0; j < terms.size(); ++j) {
      if (j) s += "  +  ";
      s += terms[j].str();
    }
    return s;
  }
};

}  // namespace hfwave
