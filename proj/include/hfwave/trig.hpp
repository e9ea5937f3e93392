#pragma once

#include <cmath>
#include <cstdlib>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hfwave/rational.hpp"

namespace hfwave {

/// Oscillator symbol of the half-chessboard family.
///
/// Semantics at phase θ = (t-r)/λ:
///   sign * sin(i θ)  when k+i is odd,
///   sign * cos(i θ)  when k+i is even.
///
/// The order index k matters only through the parity of k+i; two symbols
/// with the same harmonic, parity and sign are semantically equal.
struct TrigSymbol {
  int order = 0;     // k
  int harmonic = 0;  // i
  int sign = 1;      // +1 or -1

  bool is_sin() const { return ((order + harmonic) % 2 + 2) % 2 == 1; }

  double eval(double theta) const {
    double a = harmonic * theta;
    return sign * (is_sin() ? std::sin(a) : std::cos(a));
  }

  /// Vanishes identically: sin(0).
  bool is_zero() const { return harmonic == 0 && is_sin(); }

  std::string str() const {
    std::string s = sign < 0 ? "-" : "";
    s += is_sin() ? "sin(" : "cos(";
    if (harmonic != 1) s += std::to_string(harmonic) + "*";
    s += "th)";
    return s;
  }
};

/// Canonical form: harmonic >= 0, sign folded out into the returned scale,
/// order reduced to the smallest representative of its parity class.
/// Returns scale 0 and no symbol for the zero element sin(0).
inline std::pair<int, std::optional<TrigSymbol>> trig_normalize(const TrigSymbol& t) {
  int scale = t.sign;
  int i = t.harmonic;
  bool sinq = t.is_sin();
  if (i < 0) {
    i = -i;
    if (sinq) scale = -scale;
  }
  if (i == 0 && sinq) return {0, std::nullopt};
  TrigSymbol out;
  out.harmonic = i;
  out.order = sinq ? i + 1 : i;  // keeps the k+i parity
  out.sign = 1;
  return {scale, out};
}

/// Semantic key for merging: (harmonic, parity). Sign must be +1 already.
inline std::pair<int, int> trig_key(const TrigSymbol& t) {
  return {t.harmonic, t.is_sin() ? 1 : 0};
}

/// Exact product expansion of two oscillator symbols.
///
/// Implements the linearization formulas
///   2cos(a)cos(b) = cos(a-b)+cos(a+b)
///   2sin(a)cos(b) = sin(a-b)+sin(a+b)
///   2sin(a)sin(b) = cos(a-b)-cos(a+b)
/// in the (k,i) bookkeeping: outputs live at order k+l with harmonics i+j
/// and |i-j|, coefficients +-1/2. Identical outputs are merged and zero
/// elements dropped, so the result has at most two entries.
inline std::vector<std::pair<Rational, TrigSymbol>> trig_product(const TrigSymbol& a,
                                                                 const TrigSymbol& b) {
  const bool sa = a.is_sin();
  const bool sb = b.is_sin();
  const int k = a.order + b.order;
  const int sum = a.harmonic + b.harmonic;
  const int dif = a.harmonic - b.harmonic;
  const Rational s(a.sign * b.sign, 2);

  // (coeff, harmonic) pairs before normalization; the parity of k + (i +- j)
  // matches the product function automatically.
  Rational c_sum = s, c_dif = s;
  if (sa && sb) c_sum = -s;        // sin*sin
  if (!sa && sb) c_dif = -s;       // cos*sin
  // sin*cos and cos*cos keep +1/2 on both.

  std::vector<std::pair<Rational, TrigSymbol>> out;
  auto push = [&](Rational c, int harmonic) {
    TrigSymbol raw{k, harmonic, 1};
    auto [scale, sym] = trig_normalize(raw);
    if (scale == 0 || !sym) return;
    c = c * Rational(scale);
    for (auto& e : out) {
      if (trig_key(e.second) == trig_key(*sym)) {
        e.first += c;
        return;
      }
    }
    out.push_back({c, *sym});
  };
  push(c_sum, sum);
  push(c_dif, dif);
  std::erase_if(out, [](const auto& e) { return e.first.is_zero(); });
  return out;
}

}  // namespace hfwave
