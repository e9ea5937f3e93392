#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hfwave/osc_expr.hpp"
#include "hfwave/quadform.hpp"

namespace hfwave {

// Phase derivative bookkeeping: ∂_β T^(k,i) = (i/λ) σ T^(k-1,i) ∂_β(t-r)
// with σ = +1 when T is a sine and σ = -1 when it is a cosine.
inline int trig_deriv_sigma(const TrigSymbol& t) { return t.is_sin() ? 1 : -1; }
inline TrigSymbol trig_lower(const TrigSymbol& t) { return {t.order - 1, t.harmonic, 1}; }

/// □(g T^(k,i)) = □g T^(k,i) - (2i σ /λ) 𝓛g T^(k-1,i).
/// The λ^{-2} slot cancels because t-r solves the eikonal equation, and the
/// constant in the λ^{-1} slot comes out of the differentiation itself.
inline OscExpr box_expand_term(const FieldSymbol& g, const TrigSymbol& t) {
  OscExpr out;
  auto [scale, sym] = trig_normalize(t);
  if (scale == 0 || !sym) return out;

  OscMonomial box_term;
  box_term.coeff = Rational(scale);
  box_term.factors = {Factor(g.with(DerivTag::Box))};
  box_term.trig = *sym;
  out.add(std::move(box_term));

  const int i = sym->harmonic;
  if (i != 0) {
    OscMonomial lop_term;
    lop_term.coeff = Rational(-2LL * i * trig_deriv_sigma(*sym) * scale);
    lop_term.lambda_pow = -1;
    lop_term.factors = {Factor(g.with(DerivTag::Lop))};
    lop_term.trig = trig_lower(*sym);
    out.add(std::move(lop_term));
  }
  return out.normalized();
}

namespace detail {

/// The (1/λ) slot of the null-form identities: c · f · Q(∂u, ∂g) expanded
/// into good derivatives, as monomials carrying the lowered trig symbol.
inline void emit_phase_slot(OscExpr& out, const QuadForm& q, bool phase_first,
                            const FieldSymbol& plain, const FieldSymbol& grad_target,
                            const Rational& scale, int lambda_pow,
                            const std::optional<TrigSymbol>& trig) {
  for (const auto& ct : phase_contraction(q, phase_first)) {
    OscMonomial m;
    m.coeff = scale * ct.coeff;
    m.lambda_pow = lambda_pow;
    m.factors.push_back(Factor(plain));
    if (ct.omega_m) m.factors.push_back(Factor(OmegaFactor{*ct.omega_m}));
    m.factors.push_back(Factor(grad_target.with(ct.deriv.tag, ct.deriv.index)));
    m.trig = trig;
    out.add(std::move(m));
  }
}

inline void emit_q_factors(OscExpr& out, const QuadForm& q, const FieldSymbol& a,
                           const FieldSymbol& b, const Rational& scale, int lambda_pow,
                           const std::optional<TrigSymbol>& trig) {
  for (const auto& [kind, w] : q.kinds()) {
    OscMonomial m;
    m.coeff = scale * w;
    m.lambda_pow = lambda_pow;
    m.factors.push_back(Factor(QFactor{kind, a, b}));
    m.trig = trig;
    out.add(std::move(m));
  }
}

}  // namespace detail

/// Q(∂(f T^(k,i)), ∂g) = Q(∂f,∂g) T^(k,i) + (iσ/λ) f Q(∂(t-r),∂g) T^(k-1,i).
/// Only good derivatives of g appear in the 1/λ slot when Q is a null form;
/// a form outside the null span is rejected unless allow_non_null is set.
inline OscExpr nullform_phase_expand(const QuadForm& q, const FieldSymbol& f,
                                     const TrigSymbol& t, const FieldSymbol& g,
                                     bool allow_non_null = false) {
  if (!q.is_null() && !allow_non_null)
    throw NonNullFormError("nullform_phase_expand: quadratic form outside the null span");
  OscExpr out;
  auto [scale, sym] = trig_normalize(t);
  if (scale == 0 || !sym) return out;

  detail::emit_q_factors(out, q, f, g, Rational(scale), 0, *sym);
  const int i = sym->harmonic;
  if (i != 0) {
    Rational slot_scale(static_cast<long long>(i) * trig_deriv_sigma(*sym) * scale);
    detail::emit_phase_slot(out, q, /*phase_first=*/true, f, g, slot_scale, -1,
                            trig_lower(*sym));
  }
  return out.normalized();
}

/// Q(∂(f T1), ∂(g T2)): the full pair expansion with products resolved by
/// trig_product. Null structure removes the λ^{-2} slot; otherwise it
/// survives as f g Q(∂(t-r),∂(t-r)) times the lowered oscillators.
inline OscExpr nullform_pair_expand(const QuadForm& q, const FieldSymbol& f,
                                    const TrigSymbol& tf, const FieldSymbol& g,
                                    const TrigSymbol& tg, bool allow_non_null = false) {
  if (!q.is_null() && !allow_non_null)
    throw NonNullFormError("nullform_pair_expand: quadratic form outside the null span");
  OscExpr out;
  auto [sf, symf] = trig_normalize(tf);
  auto [sg, symg] = trig_normalize(tg);
  if (sf == 0 || sg == 0 || !symf || !symg) return out;
  const int scale = sf * sg;
  const int i = symf->harmonic, j = symg->harmonic;
  const int sigf = trig_deriv_sigma(*symf), sigg = trig_deriv_sigma(*symg);

  // Q(∂f,∂g) T1 T2
  for (const auto& [c, sym] : trig_product(*symf, *symg))
    detail::emit_q_factors(out, q, f, g, Rational(scale) * c, 0, sym);

  // (jσg/λ) g Q(∂f,∂u) T1 T2^(l-1,j)
  if (j != 0) {
    for (const auto& [c, sym] : trig_product(*symf, trig_lower(*symg)))
      detail::emit_phase_slot(out, q, /*phase_first=*/false, g, f,
                              Rational(static_cast<long long>(j) * sigg * scale) * c, -1, sym);
  }
  // (iσf/λ) f Q(∂u,∂g) T1^(k-1,i) T2
  if (i != 0) {
    for (const auto& [c, sym] : trig_product(trig_lower(*symf), *symg))
      detail::emit_phase_slot(out, q, /*phase_first=*/true, f, g,
                              Rational(static_cast<long long>(i) * sigf * scale) * c, -1, sym);
  }
  // (ij σf σg /λ²) f g Q(∂u,∂u) T1' T2'
  Rational pp = q.phase_phase();
  if (i != 0 && j != 0 && !pp.is_zero()) {
    Rational base = pp * Rational(static_cast<long long>(i) * j * sigf * sigg * scale);
    for (const auto& [c, sym] : trig_product(trig_lower(*symf), trig_lower(*symg))) {
      OscMonomial m;
      m.coeff = base * c;
      m.lambda_pow = -2;
      m.factors = {Factor(f), Factor(g),
                   Factor(QFactor{QKind::TT, make_phase_u(), make_phase_u()})};
      m.trig = sym;
      out.add(std::move(m));
    }
  }
  return out.normalized();
}

/// One term of the ansatz Φ = φ + Σ λ^k ψ^(k) + Σ λ^k F^(k,i) T^(k,i).
struct AnsatzTerm {
  int lambda_pow = 0;
  FieldSymbol base;
  std::optional<TrigSymbol> trig;
};

inline std::vector<AnsatzTerm> component_ansatz_terms(int K, int component) {
  if (K < 2) throw std::invalid_argument("ansatz: K >= 2 required");
  std::vector<AnsatzTerm> out;
  out.push_back({0, make_phi(component), std::nullopt});
  for (int k = 2; k <= K - 1; ++k)
    if (auto p = make_psi(k, component)) out.push_back({k, *p, std::nullopt});
  for (int k = 1; k <= K; ++k)
    for (int i = 1; i <= k; ++i)
      if (auto f = make_F(k, i, component)) out.push_back({k, *f, TrigSymbol{k, i, 1}});
  return out;
}

inline std::vector<AnsatzTerm> ansatz_terms(int K, int d = 1) {
  std::vector<AnsatzTerm> out;
  for (int e = 1; e <= d; ++e) {
    auto t = component_ansatz_terms(K, e);
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

/// Bands of a λ-expansion: bands[p] holds the exact λ^p coefficient
/// (monomials with lambda_pow 0); the tail collects everything at order
/// >= K with lambda_pow relative to λ^K.
struct BandDecomposition {
  std::map<int, OscExpr> bands;
  OscExpr tail;

  void normalize() {
    for (auto& [p, e] : bands) e = e.normalized();
    tail = tail.normalized();
    std::erase_if(bands, [](const auto& kv) { return kv.second.empty(); });
  }
};

/// □Φ per λ-band for one component: order 0 is □φ + c 𝓛F^(1,1) T^(0,1),
/// middle bands mix 𝓛F^(p+1,i), □F^(p,i) and □ψ^(p), band K holds the
/// □F^(K,i). The formal λ^{-K}□h slot of band K is left to the remainder
/// equation and not materialized here.
inline BandDecomposition expand_box_ansatz(int K, int component = 1) {
  BandDecomposition out;
  for (const auto& term : component_ansatz_terms(K, component)) {
    if (!term.trig) {
      OscMonomial m;
      m.factors = {Factor(term.base.with(DerivTag::Box))};
      out.bands[term.lambda_pow].add(std::move(m));
      continue;
    }
    for (const auto& mono : box_expand_term(term.base, *term.trig).terms) {
      OscMonomial m = mono;
      int band = term.lambda_pow + m.lambda_pow;
      m.lambda_pow = 0;
      out.bands[band].add(std::move(m));
    }
  }
  out.normalize();
  return out;
}

/// Q_e(∂Φ,∂Φ) per λ-band for equation component eq of a d-component system,
/// bands 0..K-1 exact and the λ^{>=K} tail separate.
inline BandDecomposition expand_nullform_ansatz(int K, const SystemForm& form, int eq = 1,
                                                bool allow_non_null = false) {
  if (K < 2) throw std::invalid_argument("expand_nullform_ansatz: K >= 2 required");
  if (!form.is_null() && !allow_non_null)
    throw NonNullFormError("expand_nullform_ansatz: quadratic form outside the null span");
  auto terms = ansatz_terms(K, form.d());
  BandDecomposition out;

  auto deposit = [&](const OscExpr& e, int base_pow) {
    for (const auto& mono : e.terms) {
      OscMonomial m = mono;
      int abs_pow = base_pow + m.lambda_pow;
      if (abs_pow < K) {
        m.lambda_pow = 0;
        out.bands[abs_pow].add(std::move(m));
      } else {
        m.lambda_pow = abs_pow - K;
        out.tail.add(std::move(m));
      }
    }
  };

  for (const auto& A : terms) {
    for (const auto& B : terms) {
      QuadForm q = form.get(eq, A.base.component, B.base.component);
      if (q.is_zero()) continue;
      const int base_pow = A.lambda_pow + B.lambda_pow;
      if (!A.trig && !B.trig) {
        OscExpr e;
        detail::emit_q_factors(e, q, A.base, B.base, Rational(1), 0, std::nullopt);
        deposit(e.normalized(), base_pow);
      } else if (A.trig && !B.trig) {
        deposit(nullform_phase_expand(q, A.base, *A.trig, B.base, true), base_pow);
      } else if (!A.trig && B.trig) {
        // Q(∂a, ∂(bT)): mirror of the phase expansion with the phase slot in
        // the second argument.
        OscExpr e;
        auto [scale, sym] = trig_normalize(*B.trig);
        if (scale != 0 && sym) {
          detail::emit_q_factors(e, q, A.base, B.base, Rational(scale), 0, *sym);
          const int j = sym->harmonic;
          if (j != 0) {
            Rational slot(static_cast<long long>(j) * trig_deriv_sigma(*sym) * scale);
            detail::emit_phase_slot(e, q, /*phase_first=*/false, B.base, A.base, slot, -1,
                                    trig_lower(*sym));
          }
        }
        deposit(e.normalized(), base_pow);
      } else {
        deposit(nullform_pair_expand(q, A.base, *A.trig, B.base, *B.trig, true), base_pow);
      }
    }
  }
  out.normalize();
  return out;
}

}  // namespace hfwave
