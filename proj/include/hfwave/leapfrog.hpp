#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hfwave/grid.hpp"

namespace hfwave {

struct BlowUpError : std::runtime_error {
  int step;
  BlowUpError(int n, double t)
      : std::runtime_error("solver blow-up (NaN/Inf) at step " + std::to_string(n) +
                           ", t = " + std::to_string(t)),
        step(n) {}
};

/// Semilinear right side of Box u = rhs(u, ∂u), evaluated on a slice.
/// Arrays are indexed by the radial node j and already hold u, ∂_t u, ∂_r u.
using SemilinearRhs =
    std::function<void(double t, const double* u, const double* ut, const double* ur, double* out)>;

/// One radial wave unknown marched level by level, for co-evolving several
/// coupled fields. Usage per time level n:
///     field.step();    // compute v at n+1 (two-pass rhs at level n)
///     ... read slice n: u(), ut(), ur() — ut is centered once step() ran ...
///     field.commit();  // rotate to level n+1
/// The final level is read without step(); ut falls back to the one-sided
/// second-order stencil.
class LeapfrogField {
public:
  LeapfrogField(const SpacetimeGrid& g, std::vector<double> u0, std::vector<double> u1,
                SemilinearRhs rhs = nullptr)
      : g_(g), rhs_(std::move(rhs)) {
    const int J = g_.J;
    if (static_cast<int>(u0.size()) != J + 1 || static_cast<int>(u1.size()) != J + 1)
      throw std::invalid_argument("LeapfrogField: data size mismatch");
    if (g_.dt > g_.dr) throw std::invalid_argument("LeapfrogField: CFL violation (dt > dr)");
    v_prev2_.assign(J + 1, 0.0);
    v_prev_.assign(J + 1, 0.0);
    v_cur_.assign(J + 1, 0.0);
    v_next_.assign(J + 1, 0.0);
    u_.assign(J + 1, 0.0);
    ut_.assign(J + 1, 0.0);
    ur_.assign(J + 1, 0.0);
    rhs_val_.assign(J + 1, 0.0);
    d2v_.assign(J + 1, 0.0);
    for (int j = 0; j <= J; ++j) v_cur_[j] = g_.r(j) * u0[j];
    u1_ = std::move(u1);
    refresh_slice();
    ut_ = u1_;  // exact data derivative at level 0
  }

  int level() const { return n_; }
  const SpacetimeGrid& grid() const { return g_; }
  const std::vector<double>& u() const { return u_; }
  const std::vector<double>& ut() const { return ut_; }
  const std::vector<double>& ur() const { return ur_; }

  /// Compute v at level n+1; afterwards ut() is the centered derivative at n.
  void step() {
    if (stepped_) throw std::logic_error("LeapfrogField: step() called twice");
    const int J = g_.J;
    const double dt = g_.dt, dr = g_.dr;
    const double t = g_.t(n_);
    second_diff();
    if (n_ == 0) {
      if (rhs_) rhs_(t, u_.data(), ut_.data(), ur_.data(), rhs_val_.data());
      for (int j = 1; j < J; ++j)
        v_next_[j] = v_cur_[j] + dt * g_.r(j) * u1_[j] +
                     0.5 * dt * dt * (d2v_[j] - g_.r(j) * rhs_val_[j]);
      v_next_[0] = v_next_[J] = 0.0;
    } else {
      if (rhs_) {
        // pass 1: backward time derivative
        ut_[0] = (v_cur_[1] - v_prev_[1]) / (dt * dr);
        for (int j = 1; j <= J; ++j) ut_[j] = (v_cur_[j] - v_prev_[j]) / (dt * g_.r(j));
        rhs_(t, u_.data(), ut_.data(), ur_.data(), rhs_val_.data());
        for (int j = 1; j < J; ++j)
          v_next_[j] = 2 * v_cur_[j] - v_prev_[j] + dt * dt * (d2v_[j] - g_.r(j) * rhs_val_[j]);
        v_next_[0] = v_next_[J] = 0.0;
        // pass 2: centered derivative from the predicted level
        ut_[0] = (v_next_[1] - v_prev_[1]) / (2 * dt * dr);
        for (int j = 1; j <= J; ++j) ut_[j] = (v_next_[j] - v_prev_[j]) / (2 * dt * g_.r(j));
        rhs_(t, u_.data(), ut_.data(), ur_.data(), rhs_val_.data());
      }
      for (int j = 1; j < J; ++j)
        v_next_[j] = 2 * v_cur_[j] - v_prev_[j] + dt * dt * (d2v_[j] - g_.r(j) * rhs_val_[j]);
      v_next_[0] = v_next_[J] = 0.0;
    }
    // centered time derivative at level n
    if (n_ == 0) {
      ut_ = u1_;
    } else {
      ut_[0] = (v_next_[1] - v_prev_[1]) / (2 * dt * dr);
      for (int j = 1; j <= J; ++j) ut_[j] = (v_next_[j] - v_prev_[j]) / (2 * dt * g_.r(j));
    }
    stepped_ = true;
  }

  /// Rotate buffers; the exposed slice becomes level n+1.
  void commit() {
    if (!stepped_) throw std::logic_error("LeapfrogField: commit() before step()");
    std::swap(v_prev2_, v_prev_);
    std::swap(v_prev_, v_cur_);
    std::swap(v_cur_, v_next_);
    ++n_;
    stepped_ = false;
    refresh_slice();
    // one-sided second-order ut, overwritten by the next step()
    const double dt = g_.dt, dr = g_.dr;
    if (n_ >= 2) {
      ut_[0] = (3 * v_cur_[1] - 4 * v_prev_[1] + v_prev2_[1]) / (2 * dt * dr);
      for (int j = 1; j <= g_.J; ++j)
        ut_[j] = (3 * v_cur_[j] - 4 * v_prev_[j] + v_prev2_[j]) / (2 * dt * g_.r(j));
    } else {
      ut_[0] = (v_cur_[1] - v_prev_[1]) / (dt * dr);
      for (int j = 1; j <= g_.J; ++j) ut_[j] = (v_cur_[j] - v_prev_[j]) / (dt * g_.r(j));
    }
  }

  /// sup |u| of the current slice; throws on NaN.
  double check_finite() const {
    double worst = 0;
    for (double x : u_) {
      if (!std::isfinite(x)) throw BlowUpError(n_, g_.t(n_));
      worst = std::max(worst, std::abs(x));
    }
    return worst;
  }

private:
  SpacetimeGrid g_;
  SemilinearRhs rhs_;
  int n_ = 0;
  bool stepped_ = false;
  std::vector<double> v_prev2_, v_prev_, v_cur_, v_next_;
  std::vector<double> u_, ut_, ur_, rhs_val_, d2v_, u1_;

  void refresh_slice() {
    const int J = g_.J;
    u_[0] = v_cur_[1] / g_.dr;
    for (int j = 1; j <= J; ++j) u_[j] = v_cur_[j] / g_.r(j);
    ur_[0] = 0.0;
    for (int j = 1; j < J; ++j) ur_[j] = (u_[j + 1] - u_[j - 1]) / (2 * g_.dr);
    ur_[J] = (u_[J] - u_[J - 1]) / g_.dr;
  }

  void second_diff() {
    const int J = g_.J;
    for (int j = 1; j < J; ++j)
      d2v_[j] = (v_cur_[j + 1] - 2 * v_cur_[j] + v_cur_[j - 1]) / (g_.dr * g_.dr);
    d2v_[0] = d2v_[J] = 0.0;
  }
};

}  // namespace hfwave
