#pragma once

#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "hfwave/expand.hpp"

namespace hfwave {

/// An oscillating band term that no equation of the half-chessboard ansatz
/// can absorb. With a null form this never happens; the Qtt probe produces
/// one at band 0, harmonic 2, of shape F^(1,1)·F^(1,1)·Q(∂(t-r),∂(t-r)).
struct UnmatchedResonance {
  int band = 0;
  int harmonic = 0;
  int component = 1;
  OscExpr terms;
};

struct ResonanceError : std::runtime_error {
  UnmatchedResonance resonance;
  explicit ResonanceError(UnmatchedResonance r)
      : std::runtime_error("unmatched oscillating term at band " + std::to_string(r.band) +
                           ", harmonic " + std::to_string(r.harmonic) + ": " + r.terms.str()),
        resonance(std::move(r)) {}
};

struct TransportEq {
  int k = 1, i = 1, component = 1;
  Rational match_coeff;  // c in c·𝓛F + □F^(k-1,i) = (band RHS)
  OscExpr rhs;           // final right side of 𝓛F^(k,i) = rhs
};

struct WaveEq {
  int k = 2, component = 1;
  OscExpr rhs;  // □ψ^(k) = rhs
};

struct BackgroundEq {
  int component = 1;
  OscExpr rhs;  // □φ = rhs
};

/// The generated system (BG) / (T(k,i)) / (W(k)) plus the λ^K-order forcing
/// of the remainder equation, all with exact coefficients.
struct ReducedSystem {
  int K = 2;
  SystemForm form{1};
  std::vector<BackgroundEq> background;                     // index component-1
  std::map<std::tuple<int, int, int>, TransportEq> transport;  // (k,i,component)
  std::map<std::pair<int, int>, WaveEq> wave;                  // (k,component)
  std::vector<OscExpr> remainder_source;                    // per component

  const TransportEq& T(int k, int i, int component = 1) const {
    return transport.at({k, i, component});
  }
  const WaveEq& W(int k, int component = 1) const { return wave.at({k, component}); }
};

namespace detail {

inline bool is_single_field(const OscMonomial& m, FieldName name, int k, int i, int comp,
                            DerivTag tag) {
  if (m.factors.size() != 1) return false;
  if (!std::holds_alternative<FieldSymbol>(m.factors[0])) return false;
  const auto& f = std::get<FieldSymbol>(m.factors[0]);
  return f.name == name && f.k == k && f.i == i && f.component == comp &&
         f.derivs.size() == 1 && f.derivs[0].tag == tag;
}

inline OscExpr strip_trig(const OscExpr& e) {
  OscExpr out;
  for (auto m : e.terms) {
    m.trig.reset();
    out.add(std::move(m));
  }
  return out.normalized();
}

/// Split a normalized band into the non-oscillating part and one expression
/// per harmonic.
inline void split_band(const OscExpr& band, OscExpr& non_osc, std::map<int, OscExpr>& osc) {
  for (const auto& m : band.terms) {
    if (!m.trig)
      non_osc.add(m);
    else
      osc[m.trig->harmonic].add(m);
  }
}

}  // namespace detail

/// Result of a non-strict generation: the matched part of the system plus
/// every term no equation of the half-chessboard ansatz could absorb.
struct LenientGeneration {
  ReducedSystem sys;
  std::vector<UnmatchedResonance> unmatched;
};

namespace detail {
inline ReducedSystem generate_core(int K, const SystemForm& form,
                                   std::vector<UnmatchedResonance>* sink);
}

/// Band-by-band matching of the □ expansion against the null-form expansion.
/// Throws ResonanceError when an oscillating term has no slot, which is the
/// symptom of a quadratic form outside the null span (allow_non_null is
/// accepted only to let callers observe that failure).
inline ReducedSystem generate_reduced_system(int K, const SystemForm& form,
                                             bool allow_non_null = true) {
  (void)allow_non_null;
  return detail::generate_core(K, form, nullptr);
}

/// Collects unmatched resonances instead of throwing; the matched equations
/// are still produced, which the breakdown experiment solves numerically.
inline LenientGeneration generate_reduced_system_lenient(int K, const SystemForm& form) {
  LenientGeneration out;
  out.sys = detail::generate_core(K, form, &out.unmatched);
  return out;
}

namespace detail {

inline ReducedSystem generate_core(int K, const SystemForm& form,
                                   std::vector<UnmatchedResonance>* sink) {
  if (K < 2) throw std::invalid_argument("generate_reduced_system: K >= 2 required");
  ReducedSystem sys;
  sys.K = K;
  sys.form = form;
  sys.background.resize(form.d());
  sys.remainder_source.resize(form.d());

  for (int e = 1; e <= form.d(); ++e) {
    auto box = expand_box_ansatz(K, e);
    auto qq = expand_nullform_ansatz(K, form, e, /*allow_non_null=*/true);

    for (int p = 0; p <= K - 1; ++p) {
      OscExpr box_band = box.bands.count(p) ? box.bands[p] : OscExpr{};
      OscExpr q_band = qq.bands.count(p) ? qq.bands[p] : OscExpr{};

      OscExpr box_nonosc, q_nonosc;
      std::map<int, OscExpr> box_osc, q_osc;
      detail::split_band(box_band, box_nonosc, box_osc);
      detail::split_band(q_band, q_nonosc, q_osc);

      // Oscillating slots: c 𝓛F^(p+1,i) + □F^(p,i) = Q^(p,i).
      std::set<int> harmonics;
      for (const auto& [h, ex] : box_osc) harmonics.insert(h);
      for (const auto& [h, ex] : q_osc) harmonics.insert(h);
      for (int h : harmonics) {
        if (h > p + 1) {
          UnmatchedResonance r;
          r.band = p;
          r.harmonic = h;
          r.component = e;
          if (q_osc.count(h)) r.terms.add(q_osc[h]);
          if (box_osc.count(h)) r.terms.add(box_osc[h]);
          r.terms = r.terms.normalized();
          if (!sink) throw ResonanceError(std::move(r));
          sink->push_back(std::move(r));
          continue;
        }
        OscExpr box_h = box_osc.count(h) ? box_osc[h] : OscExpr{};
        // Locate the 𝓛F^(p+1,h) monomial and read off its constant.
        Rational c;
        OscExpr box_rest;
        for (const auto& m : box_h.terms) {
          if (detail::is_single_field(m, FieldName::F, p + 1, h, e, DerivTag::Lop))
            c = m.coeff;
          else
            box_rest.add(m);
        }
        if (c.is_zero())
          throw std::runtime_error("generate_reduced_system: missing transport slot at band " +
                                   std::to_string(p) + ", harmonic " + std::to_string(h));
        OscExpr q_h = q_osc.count(h) ? q_osc[h] : OscExpr{};
        OscExpr rhs = detail::strip_trig(q_h - box_rest).scaled(Rational(1) / c);
        TransportEq eq;
        eq.k = p + 1;
        eq.i = h;
        eq.component = e;
        eq.match_coeff = c;
        eq.rhs = rhs.normalized();
        sys.transport[{p + 1, h, e}] = std::move(eq);
      }

      // Non-oscillating slots.
      if (p == 0) {
        OscExpr bg, alien;
        for (const auto& m : q_nonosc.normalized().terms) {
          bool pure_phi = true;
          for (const auto& f : m.factors) {
            if (std::holds_alternative<FieldSymbol>(f))
              pure_phi = pure_phi && std::get<FieldSymbol>(f).name == FieldName::Phi;
            else if (std::holds_alternative<QFactor>(f)) {
              const auto& qf = std::get<QFactor>(f);
              pure_phi = pure_phi && qf.a.name == FieldName::Phi && qf.b.name == FieldName::Phi;
            }
          }
          (pure_phi ? bg : alien).add(m);
        }
        sys.background[e - 1] = BackgroundEq{e, bg.normalized()};
        if (!alien.normalized().empty()) {
          UnmatchedResonance r;
          r.band = 0;
          r.harmonic = 0;
          r.component = e;
          r.terms = alien.normalized();
          if (!sink) throw ResonanceError(std::move(r));
          sink->push_back(std::move(r));
        }
      } else if (p % 2 == 0) {
        sys.wave[{p, e}] = WaveEq{p, e, q_nonosc.normalized()};
      } else if (!q_nonosc.normalized().empty()) {
        // A non-oscillating source at odd order contradicts ψ^(odd) = 0.
        UnmatchedResonance r;
        r.band = p;
        r.harmonic = 0;
        r.component = e;
        r.terms = q_nonosc.normalized();
        if (!sink) throw ResonanceError(std::move(r));
        sink->push_back(std::move(r));
      }
    }

    // Remainder forcing: □h = 𝒩(h) + λ^K (Q-tail - Σ □F^(K,i) T^(K,i)).
    OscExpr boxK = box.bands.count(K) ? box.bands[K] : OscExpr{};
    sys.remainder_source[e - 1] = (qq.tail - boxK).normalized();
  }
  return sys;
}

}  // namespace detail

/// Re-expands both sides and substitutes every generated equation back in;
/// the result must normalize to the empty expression.
inline OscExpr reduced_system_residual(const ReducedSystem& sys, int component = 1) {
  auto box = expand_box_ansatz(sys.K, component);
  auto qq = expand_nullform_ansatz(sys.K, sys.form, component, true);
  OscExpr residual;
  for (int p = 0; p <= sys.K - 1; ++p) {
    OscExpr band = (box.bands.count(p) ? box.bands[p] : OscExpr{}) -
                   (qq.bands.count(p) ? qq.bands[p] : OscExpr{});
    // Substitute 𝓛F, □ψ and □φ by their equations, multiplying the
    // replacement through the monomial's oscillator and coefficient.
    for (const auto& m : band.normalized().terms) {
      const OscExpr* repl = nullptr;
      if (m.factors.size() == 1 && std::holds_alternative<FieldSymbol>(m.factors[0])) {
        const auto& f = std::get<FieldSymbol>(m.factors[0]);
        if (f.derivs.size() == 1 && f.component == component) {
          if (f.name == FieldName::F && f.derivs[0].tag == DerivTag::Lop &&
              sys.transport.count({f.k, f.i, component}))
            repl = &sys.T(f.k, f.i, component).rhs;
          else if (f.name == FieldName::Psi && f.derivs[0].tag == DerivTag::Box &&
                   sys.wave.count({f.k, component}))
            repl = &sys.W(f.k, component).rhs;
          else if (f.name == FieldName::Phi && f.derivs[0].tag == DerivTag::Box)
            repl = &sys.background[component - 1].rhs;
        }
      }
      if (!repl) {
        residual.add(m);
        continue;
      }
      for (auto rm : repl->terms) {
        rm.coeff = rm.coeff * m.coeff;
        rm.lambda_pow += m.lambda_pow;
        if (m.trig) {
          if (rm.trig) throw std::runtime_error("residual: nested oscillators");
          rm.trig = m.trig;
        }
        residual.add(std::move(rm));
      }
    }
  }
  return residual.normalized();
}

struct HalfChessReport {
  bool pass = true;
  std::vector<std::pair<int, int>> violations;  // (p, i)
  std::string detail;
};

/// Checks the half-chessboard shape: order-p oscillations carry harmonics
/// 1..p+1 only, non-oscillating sources appear at even order only, odd ψ
/// are absent, and generation leaves no unmatched band.
inline HalfChessReport verify_halfchessboard(int K, const SystemForm& form) {
  HalfChessReport rep;
  try {
    auto sys = generate_reduced_system(K, form, true);
    for (int e = 1; e <= form.d(); ++e) {
      auto qq = expand_nullform_ansatz(K, form, e, true);
      for (const auto& [p, band] : qq.bands) {
        for (const auto& m : band.terms) {
          int h = m.harmonic();
          if (m.trig && (h < 1 || h > p + 1)) {
            rep.pass = false;
            rep.violations.push_back({p, h});
          }
          if (!m.trig && p % 2 != 0) {
            rep.pass = false;
            rep.violations.push_back({p, 0});
          }
        }
      }
    }
    for (const auto& [key, eq] : sys.wave) {
      if (eq.k % 2 != 0) {
        rep.pass = false;
        rep.violations.push_back({eq.k, 0});
      }
    }
    if (!rep.pass) rep.detail = "half-chessboard pattern violated";
  } catch (const ResonanceError& err) {
    rep.pass = false;
    rep.violations.push_back({err.resonance.band, err.resonance.harmonic});
    rep.detail = err.what();
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const OscMonomial& m) {
  nlohmann::json j;
  j["coeff"] = m.coeff.str();
  j["lambda_pow"] = m.lambda_pow;
  nlohmann::json fs = nlohmann::json::array();
  for (const auto& f : m.factors) fs.push_back(factor_str(f));
  j["factors"] = fs;
  if (m.trig)
    j["trig"] = {{"harmonic", m.trig->harmonic}, {"function", m.trig->is_sin() ? "sin" : "cos"}};
  else
    j["trig"] = nullptr;
  return j;
}

inline nlohmann::json to_json(const OscExpr& e) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& m : e.terms) j.push_back(to_json(m));
  return j;
}

inline nlohmann::json to_json(const ReducedSystem& sys) {
  nlohmann::json j;
  j["K"] = sys.K;
  j["d"] = sys.form.d();
  j["form"] = sys.form.str();
  nlohmann::json bg = nlohmann::json::array();
  for (const auto& b : sys.background)
    bg.push_back({{"component", b.component}, {"rhs", to_json(b.rhs)}});
  j["background"] = bg;
  nlohmann::json tr = nlohmann::json::array();
  for (const auto& [key, eq] : sys.transport)
    tr.push_back({{"k", eq.k},
                  {"i", eq.i},
                  {"component", eq.component},
                  {"match_coeff", eq.match_coeff.str()},
                  {"rhs", to_json(eq.rhs)}});
  j["transport"] = tr;
  nlohmann::json wv = nlohmann::json::array();
  for (const auto& [key, eq] : sys.wave)
    wv.push_back({{"k", eq.k}, {"component", eq.component}, {"rhs", to_json(eq.rhs)}});
  j["wave"] = wv;
  nlohmann::json rs = nlohmann::json::array();
  for (const auto& e : sys.remainder_source) rs.push_back(to_json(e));
  j["remainder_source"] = rs;
  return j;
}

inline std::string to_listing(const ReducedSystem& sys) {
  std::ostringstream os;
  os << "reduced system, K = " << sys.K << ", d = " << sys.form.d() << ", Q = " << sys.form.str()
     << "\n\n";
  for (const auto& b : sys.background) {
    os << "(BG)";
    if (sys.form.d() > 1) os << "_" << b.component;
    os << "      Box[phi] = " << b.rhs.str() << "\n";
  }
  for (const auto& [key, eq] : sys.transport) {
    os << "(T(" << eq.k << "," << eq.i << "))";
    if (sys.form.d() > 1) os << "_" << eq.component;
    os << "  L[F(" << eq.k << "," << eq.i << ")] = " << eq.rhs.str() << "\n";
  }
  for (const auto& [key, eq] : sys.wave) {
    os << "(W(" << eq.k << "))";
    if (sys.form.d() > 1) os << "_" << eq.component;
    os << "    Box[psi(" << eq.k << ")] = " << eq.rhs.str() << "\n";
  }
  os << "(W)       Box[h] = N(h) + lam^" << sys.K << " * ( ";
  for (size_t c = 0; c < sys.remainder_source.size(); ++c) {
    if (c) os << " | ";
    os << sys.remainder_source[c].str();
  }
  os << " )\n";
  return os.str();
}

}  // namespace hfwave
