#pragma once

#include <cmath>

namespace hfwave {

/// Second-order jet in the two variables (t, r): value plus all partial
/// derivatives up to order two, propagated exactly through arithmetic.
/// Used by the oracle tests and manufactured solutions to evaluate wave
/// and transport operators without finite differences.
struct Jet2 {
  double v = 0, dt = 0, dr = 0, dtt = 0, dtr = 0, drr = 0;

  static Jet2 constant(double c) { return {c, 0, 0, 0, 0, 0}; }
  static Jet2 var_t(double t) { return {t, 1, 0, 0, 0, 0}; }
  static Jet2 var_r(double r) { return {r, 0, 1, 0, 0, 0}; }

  friend Jet2 operator+(const Jet2& a, const Jet2& b) {
    return {a.v + b.v, a.dt + b.dt, a.dr + b.dr, a.dtt + b.dtt, a.dtr + b.dtr, a.drr + b.drr};
  }
  friend Jet2 operator-(const Jet2& a, const Jet2& b) {
    return {a.v - b.v, a.dt - b.dt, a.dr - b.dr, a.dtt - b.dtt, a.dtr - b.dtr, a.drr - b.drr};
  }
  friend Jet2 operator-(const Jet2& a) { return {-a.v, -a.dt, -a.dr, -a.dtt, -a.dtr, -a.drr}; }
  friend Jet2 operator*(const Jet2& a, const Jet2& b) {
    return {a.v * b.v,
            a.dt * b.v + a.v * b.dt,
            a.dr * b.v + a.v * b.dr,
            a.dtt * b.v + 2 * a.dt * b.dt + a.v * b.dtt,
            a.dtr * b.v + a.dt * b.dr + a.dr * b.dt + a.v * b.dtr,
            a.drr * b.v + 2 * a.dr * b.dr + a.v * b.drr};
  }
  friend Jet2 operator*(double c, const Jet2& a) {
    return {c * a.v, c * a.dt, c * a.dr, c * a.dtt, c * a.dtr, c * a.drr};
  }
  friend Jet2 operator/(const Jet2& a, const Jet2& b) { return a * inv(b); }

  /// Chain rule for a scalar map u with derivatives u', u'' at a.v.
  static Jet2 compose(const Jet2& a, double u, double du, double ddu) {
    return {u,
            du * a.dt,
            du * a.dr,
            ddu * a.dt * a.dt + du * a.dtt,
            ddu * a.dt * a.dr + du * a.dtr,
            ddu * a.dr * a.dr + du * a.drr};
  }

  static Jet2 inv(const Jet2& a) {
    double w = 1.0 / a.v;
    return compose(a, w, -w * w, 2 * w * w * w);
  }
  static Jet2 exp(const Jet2& a) {
    double e = std::exp(a.v);
    return compose(a, e, e, e);
  }
  static Jet2 sin(const Jet2& a) {
    return compose(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v));
  }
  static Jet2 cos(const Jet2& a) {
    return compose(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v));
  }

  /// Radial d'Alembertian -∂_t² + ∂_r² + (2/r)∂_r of the jetted function.
  double box_radial(double r) const { return -dtt + drr + 2.0 * dr / r; }
  /// Transport operator ∂_t + ∂_r + 1/r.
  double transport(double r) const { return dt + dr + v / r; }
  /// Good derivative (∂_t + ∂_r)/2.
  double dbar0() const { return 0.5 * (dt + dr); }
};

}  // namespace hfwave
