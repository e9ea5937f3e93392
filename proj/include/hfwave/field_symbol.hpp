#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

namespace hfwave {

enum class FieldName : std::uint8_t { Phi, Psi, F, H, PhaseU };

enum class DerivTag : std::uint8_t {
  Dt,     // ∂_t
  Dr,     // ∂_r
  DBar0,  // (∂_t+∂_r)/2
  DBarM,  // ∂_m - ω_m ∂_r, angular good derivative (index m)
  Box,    // d'Alembertian, resolved on grids
  Lop     // transport operator ∂_t+∂_r+1/r
};

struct Deriv {
  DerivTag tag;
  int index = 0;  // m for DBarM, unused otherwise
  friend bool operator==(const Deriv&, const Deriv&) = default;
  friend auto operator<=>(const Deriv& a, const Deriv& b) {
    return std::tie(a.tag, a.index) <=> std::tie(b.tag, b.index);
  }
};

/// One unknown of the reduced system, possibly under a derivative tag.
/// Derivative tags are opaque bookkeeping; grids resolve them numerically.
struct FieldSymbol {
  FieldName name = FieldName::Phi;
  int k = 0;          // order index for Psi and F
  int i = 0;          // harmonic index for F
  int component = 1;  // 1..d
  std::vector<Deriv> derivs;

  friend bool operator==(const FieldSymbol&, const FieldSymbol&) = default;

  auto key() const {
    return std::make_tuple(static_cast<int>(name), k, i, component, derivs);
  }
  friend bool operator<(const FieldSymbol& a, const FieldSymbol& b) { return a.key() < b.key(); }

  FieldSymbol with(DerivTag tag, int index = 0) const {
    FieldSymbol s = *this;
    s.derivs.push_back({tag, index});
    return s;
  }

  std::string str() const {
    std::string base;
    switch (name) {
      case FieldName::Phi: base = "phi"; break;
      case FieldName::Psi: base = "psi(" + std::to_string(k) + ")"; break;
      case FieldName::F: base = "F(" + std::to_string(k) + "," + std::to_string(i) + ")"; break;
      case FieldName::H: base = "h"; break;
      case FieldName::PhaseU: base = "(t-r)"; break;
    }
    if (component != 1) base += "_" + std::to_string(component);
    std::string out = base;
    for (auto it = derivs.rbegin(); it != derivs.rend(); ++it) {
      std::string op;
      switch (it->tag) {
        case DerivTag::Dt: op = "dt"; break;
        case DerivTag::Dr: op = "dr"; break;
        case DerivTag::DBar0: op = "db0"; break;
        case DerivTag::DBarM: op = "db" + std::to_string(it->index); break;
        case DerivTag::Box: op = "Box"; break;
        case DerivTag::Lop: op = "L"; break;
      }
      out = op + "[" + out + "]";
    }
    return out;
  }
};

/// Convention of the ansatz: psi^(l) exists for even l with 2 <= l,
/// F^(k,i) for 1 <= i <= k. Everything else is the zero symbol and
/// construction reports it via nullopt.
inline FieldSymbol make_phi(int component = 1) {
  return FieldSymbol{FieldName::Phi, 0, 0, component, {}};
}
inline std::optional<FieldSymbol> make_psi(int k, int component = 1) {
  if (k < 2 || k % 2 != 0) return std::nullopt;
  return FieldSymbol{FieldName::Psi, k, 0, component, {}};
}
inline std::optional<FieldSymbol> make_F(int k, int i, int component = 1) {
  if (k <= 0 || i < 1 || i > k) return std::nullopt;
  return FieldSymbol{FieldName::F, k, i, component, {}};
}
inline FieldSymbol make_phase_u() { return FieldSymbol{FieldName::PhaseU, 0, 0, 1, {}}; }

/// Angular direction cosine ω_m as a bounded symbolic coefficient.
struct OmegaFactor {
  int m = 1;
  friend bool operator==(const OmegaFactor&, const OmegaFactor&) = default;
  friend bool operator<(const OmegaFactor& a, const OmegaFactor& b) { return a.m < b.m; }
  std::string str() const { return "w" + std::to_string(m); }
};

enum class QKind : std::uint8_t { Q0, Q01, Q02, Q03, Q12, Q13, Q23, TT };

inline bool qkind_antisymmetric(QKind k) { return k != QKind::Q0 && k != QKind::TT; }

inline std::string qkind_str(QKind k) {
  switch (k) {
    case QKind::Q0: return "Q0";
    case QKind::Q01: return "Q01";
    case QKind::Q02: return "Q02";
    case QKind::Q03: return "Q03";
    case QKind::Q12: return "Q12";
    case QKind::Q13: return "Q13";
    case QKind::Q23: return "Q23";
    case QKind::TT: return "Qtt";
  }
  return "?";
}

/// Opaque bilinear factor kind(∂a, ∂b). Kept unexpanded so that grids can
/// evaluate it with their own stencils.
struct QFactor {
  QKind kind = QKind::Q0;
  FieldSymbol a, b;

  friend bool operator==(const QFactor&, const QFactor&) = default;
  auto key() const { return std::make_tuple(static_cast<int>(kind), a.key(), b.key()); }
  friend bool operator<(const QFactor& x, const QFactor& y) { return x.key() < y.key(); }
  std::string str() const {
    return qkind_str(kind) + "(d " + a.str() + ", d " + b.str() + ")";
  }
};

using Factor = std::variant<FieldSymbol, OmegaFactor, QFactor>;

inline int factor_rank(const Factor& f) { return static_cast<int>(f.index()); }

inline bool factor_less(const Factor& x, const Factor& y) {
  if (x.index() != y.index()) return x.index() < y.index();
  if (std::holds_alternative<FieldSymbol>(x))
    return std::get<FieldSymbol>(x) < std::get<FieldSymbol>(y);
  if (std::holds_alternative<OmegaFactor>(x))
    return std::get<OmegaFactor>(x) < std::get<OmegaFactor>(y);
  return std::get<QFactor>(x) < std::get<QFactor>(y);
}

inline bool factor_eq(const Factor& x, const Factor& y) {
  if (x.index() != y.index()) return false;
  if (std::holds_alternative<FieldSymbol>(x))
    return std::get<FieldSymbol>(x) == std::get<FieldSymbol>(y);
  if (std::holds_alternative<OmegaFactor>(x))
    return std::get<OmegaFactor>(x) == std::get<OmegaFactor>(y);
  return std::get<QFactor>(x) == std::get<QFactor>(y);
}

inline std::string factor_str(const Factor& f) {
  if (std::holds_alternative<FieldSymbol>(f)) return std::get<FieldSymbol>(f).str();
  if (std::holds_alternative<OmegaFactor>(f)) return std::get<OmegaFactor>(f).str();
  return std::get<QFactor>(f).str();
}

}  // namespace hfwave
