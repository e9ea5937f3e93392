#pragma once

#include <array>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "hfwave/field_symbol.hpp"
#include "hfwave/rational.hpp"

namespace hfwave {

struct NonNullFormError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A quadratic form on spacetime gradients, spanned by
///   Q0(X,Y)    = -X_0 Y_0 + δ^{mn} X_m Y_n
///   Qab(X,Y)   =  X_a Y_b - X_b Y_a           (a<b)
///   Qtt(X,Y)   =  X_0 Y_0                      (non-null probe)
/// The null forms are exactly the combinations with zero Qtt weight.
class QuadForm {
public:
  QuadForm() = default;

  static QuadForm q0(Rational w = Rational(1)) {
    QuadForm q;
    q.w_[idx(QKind::Q0)] = w;
    return q;
  }
  static QuadForm antisym(QKind kind, Rational w = Rational(1)) {
    if (!qkind_antisymmetric(kind)) throw std::invalid_argument("QuadForm::antisym: bad kind");
    QuadForm q;
    q.w_[idx(kind)] = w;
    return q;
  }
  /// X_0 Y_0, the classic quadratic form violating the null condition.
  static QuadForm time_product(Rational w = Rational(1)) {
    QuadForm q;
    q.w_[idx(QKind::TT)] = w;
    return q;
  }

  QuadForm& add(QKind kind, Rational w) {
    w_[idx(kind)] += w;
    return *this;
  }
  Rational weight(QKind kind) const { return w_[idx(kind)]; }

  bool is_zero() const {
    for (const auto& w : w_)
      if (!w.is_zero()) return false;
    return true;
  }
  bool is_null() const { return w_[idx(QKind::TT)].is_zero(); }

  /// Q(∂(t-r), ∂(t-r)). Zero exactly on the null span: the phase t-r
  /// satisfies the eikonal equation.
  Rational phase_phase() const { return w_[idx(QKind::TT)]; }

  std::vector<std::pair<QKind, Rational>> kinds() const {
    std::vector<std::pair<QKind, Rational>> out;
    for (int j = 0; j < 8; ++j)
      if (!w_[j].is_zero()) out.push_back({static_cast<QKind>(j), w_[j]});
    return out;
  }

  std::string str() const {
    std::string s;
    for (const auto& [kind, w] : kinds()) {
      if (!s.empty()) s += " + ";
      s += w.str() + "*" + qkind_str(kind);
    }
    return s.empty() ? "0" : s;
  }

  friend QuadForm operator+(QuadForm a, const QuadForm& b) {
    for (int j = 0; j < 8; ++j) a.w_[j] += b.w_[j];
    return a;
  }
  friend QuadForm operator*(Rational c, QuadForm a) {
    for (auto& w : a.w_) w = c * w;
    return a;
  }
  friend bool operator==(const QuadForm&, const QuadForm&) = default;

private:
  static int idx(QKind k) { return static_cast<int>(k); }
  std::array<Rational, 8> w_{};
};

/// One summand of a phase contraction Q(∂(t-r), ∂g) or Q(∂g, ∂(t-r)),
/// written in good derivatives:
///   Q0 (∂u,∂h)  = -2 ∂̄_0 h
///   Q0m(∂u,∂h)  =  ∂̄_m h + 2 ω_m ∂̄_0 h
///   Qmn(∂u,∂h)  =  ω_n ∂̄_m h - ω_m ∂̄_n h
///   Qtt(∂u,∂h)  =  ∂_t h  (no good derivative: the non-null signature)
/// with Q(∂h,∂u) = ±Q(∂u,∂h) by the (anti)symmetry of each kind.
struct ContractionTerm {
  Rational coeff;
  std::optional<int> omega_m;  // multiply by ω_m
  Deriv deriv;                 // derivative applied to the field in the slot
};

namespace detail {
inline void qkind_indices(QKind k, int& a, int& b) {
  switch (k) {
    case QKind::Q01: a = 0; b = 1; return;
    case QKind::Q02: a = 0; b = 2; return;
    case QKind::Q03: a = 0; b = 3; return;
    case QKind::Q12: a = 1; b = 2; return;
    case QKind::Q13: a = 1; b = 3; return;
    case QKind::Q23: a = 2; b = 3; return;
    default: a = -1; b = -1; return;
  }
}
}  // namespace detail

/// Expansion of Q(∂u, ∂·) with the phase u = t-r in the first slot
/// (phase_first = true) or the second.
inline std::vector<ContractionTerm> phase_contraction(const QuadForm& q, bool phase_first) {
  std::vector<ContractionTerm> out;
  for (const auto& [kind, w] : q.kinds()) {
    Rational s = w;
    if (!phase_first && qkind_antisymmetric(kind)) s = -s;
    switch (kind) {
      case QKind::Q0:
        out.push_back({Rational(-2) * s, std::nullopt, {DerivTag::DBar0, 0}});
        break;
      case QKind::TT:
        out.push_back({s, std::nullopt, {DerivTag::Dt, 0}});
        break;
      default: {
        int a, b;
        detail::qkind_indices(kind, a, b);
        if (a == 0) {
          // Q_{0m}
          out.push_back({s, std::nullopt, {DerivTag::DBarM, b}});
          out.push_back({Rational(2) * s, b, {DerivTag::DBar0, 0}});
        } else {
          // Q_{mn}
          out.push_back({s, b, {DerivTag::DBarM, a}});
          out.push_back({-s, a, {DerivTag::DBarM, b}});
        }
        break;
      }
    }
  }
  return out;
}

/// Quadratic structure of a system of d wave equations:
/// equation e carries Q_e(∂u,∂u) = Σ_{a,b} form(e,a,b)(∂u_a, ∂u_b).
class SystemForm {
public:
  explicit SystemForm(int d = 1) : d_(d) {
    if (d < 1) throw std::invalid_argument("SystemForm: d >= 1 required");
  }

  static SystemForm scalar(const QuadForm& q) {
    SystemForm f(1);
    f.set(1, 1, 1, q);
    return f;
  }

  int d() const { return d_; }

  void set(int eq, int ca, int cb, const QuadForm& q) {
    check(eq, ca, cb);
    if (q.is_zero())
      entries_.erase({eq, ca, cb});
    else
      entries_[{eq, ca, cb}] = q;
  }
  QuadForm get(int eq, int ca, int cb) const {
    auto it = entries_.find({eq, ca, cb});
    return it == entries_.end() ? QuadForm() : it->second;
  }

  bool is_null() const {
    for (const auto& [k, q] : entries_)
      if (!q.is_null()) return false;
    return true;
  }

  const std::map<std::tuple<int, int, int>, QuadForm>& entries() const { return entries_; }

  std::string str() const {
    if (d_ == 1) {
      auto q = get(1, 1, 1);
      return q.str();
    }
    std::string s;
    for (const auto& [k, q] : entries_) {
      auto [e, a, b] = k;
      s += "eq" + std::to_string(e) + ": (" + std::to_string(a) + "," + std::to_string(b) +
           ") -> " + q.str() + "\n";
    }
    return s;
  }

private:
  int d_;
  std::map<std::tuple<int, int, int>, QuadForm> entries_;

  void check(int eq, int ca, int cb) const {
    if (eq < 1 || eq > d_ || ca < 1 || ca > d_ || cb < 1 || cb > d_)
      throw std::invalid_argument("SystemForm: component index out of range");
  }
};

}  // namespace hfwave
