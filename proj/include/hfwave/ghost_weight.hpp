#pragma once

#include <cmath>
#include <stdexcept>

namespace hfwave {

/// Ghost weight w(q), q = r - t:
///   q < 0 :  1 + (1+|q|)^(-alpha)
///   q > 0 :  1 + (1+q)^(2(delta+1))
/// Continuous (both branches reach 2 at q = 0) and non-decreasing; the
/// derived margin nu = (1-alpha)/2 gives w/(1+|q|)^(2-nu) <~ w'.
struct GhostWeight {
  double alpha = 0.5;
  double delta = 0.0;

  GhostWeight() = default;
  GhostWeight(double a, double d) : alpha(a), delta(d) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("GhostWeight: alpha in (0,1)");
    if (!(delta > -0.5 && delta < 0.5)) throw std::invalid_argument("GhostWeight: delta in (-1/2,1/2)");
  }

  double nu() const { return (1.0 - alpha) / 2.0; }

  double eval(double q) const {
    if (q < 0) return 1.0 + std::pow(1.0 - q, -alpha);
    return 1.0 + std::pow(1.0 + q, 2.0 * (delta + 1.0));
  }

  double deriv(double q) const {
    if (q < 0) return alpha * std::pow(1.0 - q, -alpha - 1.0);
    return 2.0 * (delta + 1.0) * std::pow(1.0 + q, 2.0 * delta + 1.0);
  }
};

}  // namespace hfwave
