#pragma once

#include <cmath>

#include "hfwave/jet.hpp"

namespace hfwave {

/// C-infinity bump with exact compact support [-1, 1], normalized to 1 at 0.
/// The Gaussian-tapered shape exp(-2x²/(1-x²)) keeps the high derivatives an
/// order of magnitude milder than the classical exp(-1/(1-x²)) bump, which
/// matters because the transport hierarchy differentiates the data twice per
/// level.
inline double bump(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  double s = 1.0 - x * x;
  return std::exp(-2.0 * x * x / s);
}

inline double bump_d(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  double s = 1.0 - x * x;
  return bump(x) * (-4.0 * x / (s * s));
}

inline double bump_dd(double x) {
  if (std::abs(x) >= 1.0) return 0.0;
  double s = 1.0 - x * x;
  double a = -4.0 * x / (s * s);
  double da = -4.0 / (s * s) - 16.0 * x * x / (s * s * s);
  return bump(x) * (a * a + da);
}

/// Smooth profiles for the default experiments. All supports are strictly
/// inside the annulus A0 = { 1/R <= r <= R } for the oscillating part and
/// inside { r <= R } for the background data.
struct DataProfiles {
  double eps = 0.01;
  double R = 2.0;

  double q_center() const { return 0.5 * (1.0 / R + R); }
  double q_width() const { return 0.45 * (R - 1.0 / R); }

  double F0(double q) const { return eps * bump((q - q_center()) / q_width()); }
  double F0_r(double q) const { return eps * bump_d((q - q_center()) / q_width()) / q_width(); }

  double phi0(double r) const { return eps * bump((r - 0.60 * R) / (0.30 * R)); }
  double phi0_r(double r) const { return eps * bump_d((r - 0.60 * R) / (0.30 * R)) / (0.30 * R); }
  double phi1(double r) const { return 0.5 * eps * bump((r - 0.55 * R) / (0.35 * R)); }
};

/// Smooth annulus cutoff: 1 on [1/R, R], 0 outside [1/(2R), 2R].
inline double annulus_cutoff(double q, double R) {
  auto rise = [](double x) {
    // smooth transition 0 -> 1 on [0,1]
    if (x <= 0) return 0.0;
    if (x >= 1) return 1.0;
    double a = std::exp(-1.0 / x);
    double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
  };
  double lo = rise((q - 0.5 / R) / (1.0 / R - 0.5 / R));
  double hi = rise((2.0 * R - q) / (2.0 * R - R));
  return lo * hi;
}

}  // namespace hfwave
