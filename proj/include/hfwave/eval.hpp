#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "hfwave/expand.hpp"
#include "hfwave/jet.hpp"
#include "hfwave/osc_expr.hpp"

namespace hfwave {

/// Numeric view of the base fields (φ, ψ^(k), F^(k,i)), radial symmetry.
/// Angular good derivatives vanish on radial functions; ω factors take the
/// backend's fixed direction.
class FieldBackend {
public:
  virtual ~FieldBackend() = default;
  virtual Jet2 jet(const FieldSymbol& base, double t, double r) const = 0;
  virtual double box(const FieldSymbol& base, double t, double r) const {
    Jet2 J = jet(base, t, r);
    return J.box_radial(r);
  }
  virtual std::array<double, 3> omega() const { return {1.0, 0.0, 0.0}; }
};

namespace detail {

inline Jet2 base_jet(const FieldBackend& b, const FieldSymbol& f, double t, double r) {
  if (f.name == FieldName::PhaseU) return Jet2::var_t(t) - Jet2::var_r(r);
  FieldSymbol plain = f;
  plain.derivs.clear();
  return b.jet(plain, t, r);
}

}  // namespace detail

/// Q-kind applied to the spacetime gradients of two radial jets:
/// ∂_0 = ∂_t and ∂_m = ω_m ∂_r on radial fields.
inline double qkind_apply(QKind kind, const Jet2& a, const Jet2& b,
                          const std::array<double, 3>& w) {
  switch (kind) {
    case QKind::Q0: return -a.dt * b.dt + a.dr * b.dr;
    case QKind::TT: return a.dt * b.dt;
    default: {
      int p, q;
      detail::qkind_indices(kind, p, q);
      if (p == 0) return w[q - 1] * (a.dt * b.dr - a.dr * b.dt);
      return 0.0;  // Q_{mn} vanishes on radial pairs
    }
  }
}

inline double quadform_apply(const QuadForm& q, const Jet2& a, const Jet2& b,
                             const std::array<double, 3>& w) {
  double s = 0;
  for (const auto& [kind, wt] : q.kinds()) s += wt.value() * qkind_apply(kind, a, b, w);
  return s;
}

inline double eval_factor(const FieldBackend& backend, const Factor& f, double t, double r) {
  if (std::holds_alternative<OmegaFactor>(f))
    return backend.omega()[std::get<OmegaFactor>(f).m - 1];
  if (std::holds_alternative<QFactor>(f)) {
    const auto& q = std::get<QFactor>(f);
    Jet2 a = detail::base_jet(backend, q.a, t, r);
    Jet2 b = detail::base_jet(backend, q.b, t, r);
    return qkind_apply(q.kind, a, b, backend.omega());
  }
  const auto& sym = std::get<FieldSymbol>(f);
  if (sym.derivs.empty()) return detail::base_jet(backend, sym, t, r).v;
  if (sym.derivs.size() != 1)
    throw std::logic_error("eval_factor: chained derivative tags are not evaluable");
  const Deriv d = sym.derivs[0];
  if (d.tag == DerivTag::Box) {
    FieldSymbol plain = sym;
    plain.derivs.clear();
    return backend.box(plain, t, r);
  }
  Jet2 J = detail::base_jet(backend, sym, t, r);
  switch (d.tag) {
    case DerivTag::Dt: return J.dt;
    case DerivTag::Dr: return J.dr;
    case DerivTag::DBar0: return J.dbar0();
    case DerivTag::DBarM: return 0.0;  // radial field
    case DerivTag::Lop: return J.transport(r);
    default: throw std::logic_error("eval_factor: unhandled tag");
  }
}

/// Numeric value of a monomial at (t, r); the oscillator is evaluated at
/// θ = (t-r)/λ and λ powers are applied.
inline double eval_monomial(const FieldBackend& backend, const OscMonomial& m, double t,
                            double r, double lambda) {
  double v = m.coeff.value() * std::pow(lambda, m.lambda_pow);
  for (const auto& f : m.factors) v *= eval_factor(backend, f, t, r);
  if (m.trig) v *= m.trig->eval((t - r) / lambda);
  return v;
}

inline double eval_expr(const FieldBackend& backend, const OscExpr& e, double t, double r,
                        double lambda = 1.0) {
  double v = 0;
  for (const auto& m : e.terms) v += eval_monomial(backend, m, t, r, lambda);
  return v;
}

/// Full jet of the assembled ansatz Φ = φ + Σ λ^k ψ^(k) + Σ λ^k F^(k,i) T^(k,i)
/// (without the remainder), exact through second derivatives.
inline Jet2 ansatz_jet(const FieldBackend& backend, int K, int component, double t, double r,
                       double lambda) {
  Jet2 theta = (1.0 / lambda) * (Jet2::var_t(t) - Jet2::var_r(r));
  Jet2 sum = Jet2::constant(0);
  for (const auto& term : component_ansatz_terms(K, component)) {
    Jet2 f = detail::base_jet(backend, term.base, t, r);
    Jet2 piece = std::pow(lambda, term.lambda_pow) * f;
    if (term.trig) {
      Jet2 arg = static_cast<double>(term.trig->harmonic) * theta;
      Jet2 osc = term.trig->is_sin() ? Jet2::sin(arg) : Jet2::cos(arg);
      piece = piece * (static_cast<double>(term.trig->sign) * osc);
    }
    sum = sum + piece;
  }
  return sum;
}

/// Q_e(∂Φ,∂Φ) evaluated directly from the assembled jets of a d-component
/// ansatz; the independent side of the expansion oracles.
inline double ansatz_nullform_direct(const FieldBackend& backend, int K, const SystemForm& form,
                                     int eq, double t, double r, double lambda) {
  double total = 0;
  for (const auto& [key, q] : form.entries()) {
    auto [e, ca, cb] = key;
    if (e != eq) continue;
    Jet2 A = ansatz_jet(backend, K, ca, t, r, lambda);
    Jet2 B = ansatz_jet(backend, K, cb, t, r, lambda);
    total += quadform_apply(q, A, B, backend.omega());
  }
  return total;
}

/// Deterministic analytic backend: every base field is a seeded sum of
/// travelling Gaussian bumps, smooth and radial, with exact jets.
class AnalyticBackend : public FieldBackend {
public:
  explicit AnalyticBackend(std::uint64_t seed = 1234) : seed_(seed) {
    // fixed generic direction for ω factors
    double n = std::sqrt(0.3 * 0.3 + 0.5 * 0.5 + 0.8 * 0.8);
    omega_ = {0.3 / n, 0.5 / n, 0.8 / n};
  }

  Jet2 jet(const FieldSymbol& base, double t, double r) const override {
    std::uint64_t h = mix(seed_, static_cast<std::uint64_t>(base.name) * 1000003u +
                                     base.k * 10007u + base.i * 101u + base.component);
    Jet2 sum = Jet2::constant(0);
    for (int n = 0; n < 3; ++n) {
      double amp = u(h, -1.0, 1.0);
      double width = u(h, 0.5, 2.0);
      double center = u(h, 1.0, 3.0);
      double speed = u(h, -0.8, 0.8);
      Jet2 arg = Jet2::var_r(r) - Jet2::constant(center) - speed * Jet2::var_t(t);
      sum = sum + amp * Jet2::exp(Jet2::constant(-width) * arg * arg);
    }
    return sum;
  }

  std::array<double, 3> omega() const override { return omega_; }

private:
  std::uint64_t seed_;
  std::array<double, 3> omega_;

  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
  }
  static double u(std::uint64_t& state, double lo, double hi) {
    state = mix(state, 0x2545F4914F6CDD1DULL);
    double x = static_cast<double>(state >> 11) / 9007199254740992.0;
    return lo + (hi - lo) * x;
  }
};

}  // namespace hfwave
