#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hfwave {

struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  double rms_residual = 0;
  int n = 0;
};

/// Least squares line through the given (x, y) samples.
inline SlopeFit fit_line(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 2) throw std::invalid_argument("fit_line: need at least 2 samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double n = static_cast<double>(pts.size());
  double det = n * sxx - sx * sx;
  if (det == 0) throw std::invalid_argument("fit_line: degenerate abscissae");
  SlopeFit f;
  f.slope = (n * sxy - sx * sy) / det;
  f.intercept = (sy - f.slope * sx) / n;
  f.n = static_cast<int>(pts.size());
  double ss = 0;
  for (const auto& [x, y] : pts) {
    double e = y - (f.intercept + f.slope * x);
    ss += e * e;
  }
  f.rms_residual = std::sqrt(ss / n);
  return f;
}

/// Slope of log|value| against log(1+r) over the window [r_lo, r_hi].
/// Values are floored at 1e-300 after taking the absolute value; fewer than
/// eight in-window samples is an error.
inline SlopeFit fit_spatial_decay(const std::vector<std::pair<double, double>>& samples,
                                  double r_lo, double r_hi) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [r, v] : samples) {
    if (r < r_lo || r > r_hi) continue;
    double a = std::abs(v);
    if (a < 1e-300) a = 1e-300;
    pts.push_back({std::log(1.0 + r), std::log(a)});
  }
  if (pts.size() < 8) throw std::invalid_argument("fit_spatial_decay: fewer than 8 samples in window");
  return fit_line(pts);
}

/// Slope of log(value) against log(lambda) for a λ-sweep (values > 0).
inline SlopeFit fit_lambda_scaling(const std::vector<std::pair<double, double>>& lam_val) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [lam, v] : lam_val) {
    if (v <= 0) continue;
    pts.push_back({std::log(lam), std::log(v)});
  }
  if (pts.size() < 2) throw std::invalid_argument("fit_lambda_scaling: need 2 positive samples");
  return fit_line(pts);
}

}  // namespace hfwave
