#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "hfwave/analytic_fields.hpp"
#include "hfwave/ray_grid.hpp"

namespace hfwave {

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using RayFn = std::function<double(double t, double q)>;

namespace detail {

/// Cumulative integral along each ray with composite Simpson pairs; the odd
/// trailing interval uses the three-point closed rule, so the result is at
/// least second order everywhere and fourth order on even indices.
class RayIntegrator {
public:
  RayIntegrator(int npoints, double dt)
      : dt_(dt),
        I_(npoints, 0.0),
        Ieven_(npoints, 0.0),
        hist_(3, std::vector<double>(npoints, 0.0)) {}

  /// Push the integrand row at step n (must be called for n = 0,1,2,... in order).
  void push(int n, const std::vector<double>& y) {
    hist_[n % 3] = y;
    if (n == 0) return;
    const auto& y0 = hist_[(n - 2 + 3) % 3];
    const auto& y1 = hist_[(n - 1 + 3) % 3];
    const auto& y2 = hist_[n % 3];
    for (size_t m = 0; m < I_.size(); ++m) {
      if (n == 1) {
        I_[m] += 0.5 * dt_ * (y1[m] + y2[m]);
      } else if (n % 2 == 0) {
        // Simpson pair replaces the provisional odd segment
        I_[m] = Ieven_[m] + dt_ / 3.0 * (y0[m] + 4.0 * y1[m] + y2[m]);
      } else {
        // closed three-point rule for the trailing interval
        I_[m] += dt_ / 12.0 * (-y0[m] + 8.0 * y1[m] + 5.0 * y2[m]);
      }
    }
    if (n % 2 == 0) Ieven_ = I_;
  }

  const std::vector<double>& value() const { return I_; }

private:
  double dt_;
  std::vector<double> I_;
  std::vector<double> Ieven_;
  std::vector<std::vector<double>> hist_;
};

}  // namespace detail

/// β(t,q) = exp( χ(q) ∫_0^t η(t', q+t') dt' ) - 1 for the reduced transport
/// equation (L+η)f = g. Throws when 1+β drops below 1/2, which means the
/// smallness assumption on η failed.
class IntegratingFactor {
public:
  IntegratingFactor(const RayGrid& g, int n_rows) : g_(g), beta_(g, n_rows), integ_(g.M + 1, g.dt) {}

  /// Advance to row n with the η values of that row (per q index).
  void push(int n, const std::vector<double>& eta, const std::function<double(double)>& cutoff) {
    integ_.push(n, eta);
    const auto& I = integ_.value();
    for (int m = 0; m <= g_.M; ++m) {
      double b = std::exp(cutoff(g_.q(m)) * I[m]) - 1.0;
      if (1.0 + b < 0.5)
        throw TransportError("integrating factor: 1+beta < 1/2 (eta too large)");
      beta_.at(n, m) = b;
    }
  }

  const RayField& beta() const { return beta_; }

private:
  RayGrid g_;
  RayField beta_;
  detail::RayIntegrator integ_;
};

inline RayField integrating_factor(const RayGrid& g, const RayFn& eta,
                                   const std::function<double(double)>& cutoff) {
  IntegratingFactor fac(g, g.n_steps + 1);
  std::vector<double> row(g.M + 1);
  for (int n = 0; n <= g.n_steps; ++n) {
    for (int m = 0; m <= g.M; ++m) row[m] = eta(g.t(n), g.q(m));
    fac.push(n, row, cutoff);
  }
  return fac.beta();
}

/// Closed-form characteristic solution of (L+η)f = g with data f0:
///   f(t,q) = (1+β)^{-1} [ (1+β(0,q)) f0(q) + ∫_0^t (1+β) g ds ].
inline RayField solve_reduced_transport(const RayGrid& g, const std::function<double(double)>& f0,
                                        const RayFn& eta, const RayFn& src,
                                        const std::function<double(double)>& cutoff) {
  RayField beta = integrating_factor(g, eta, cutoff);
  RayField f(g, g.n_steps + 1);
  detail::RayIntegrator integ(g.M + 1, g.dt);
  std::vector<double> row(g.M + 1);
  for (int n = 0; n <= g.n_steps; ++n) {
    for (int m = 0; m <= g.M; ++m)
      row[m] = (1.0 + beta.at(n, m)) * src(g.t(n), g.q(m));
    integ.push(n, row);
    const auto& J = integ.value();
    for (int m = 0; m <= g.M; ++m)
      f.at(n, m) = (f0(g.q(m)) + J[m]) / (1.0 + beta.at(n, m));
  }
  return f;
}

/// 𝓛f = fμ + g rewritten as (L-μ)(rf) = rg and solved characteristically.
/// Returns f itself (the stored unknown is rf/r).
inline RayField solve_transport_L(const RayGrid& g, const std::function<double(double)>& f0,
                                  const RayFn& mu, const RayFn& src, double R) {
  auto cutoff = [R](double q) { return annulus_cutoff(q, R); };
  auto eta = [&mu](double t, double q) { return -mu(t, q); };
  auto rf0 = [&f0](double q) { return q * f0(q); };
  auto rsrc = [&src](double t, double q) { return (q + t) * src(t, q); };
  RayField rf = solve_reduced_transport(g, rf0, eta, rsrc, cutoff);
  RayField f(g, rf.rows());
  for (int n = 0; n < rf.rows(); ++n)
    for (int m = 0; m <= g.M; ++m) f.at(n, m) = rf.at(n, m) / g.r(n, m);
  return f;
}

/// □f from the transport relation 𝓛f = g: in radial symmetry the tangential
/// block vanishes and □f = -(∂_t - ∂_r)g + g/r. (Applying -∂_t+∂_r to the
/// relation and eliminating f_t - f_r + f/r = g - 2f_r gives the +g/r term;
/// the manufactured-solution oracle pins the sign.) With G(t,q) = g(t, q+t)
/// this is -(∂_t G - 2 ∂_q G) + g/r on the ray grid.
inline RayField box_from_transport(const RayField& gfield) {
  const auto& g = gfield.grid();
  RayField out(g, gfield.rows());
  for (int n = 0; n < gfield.rows(); ++n)
    for (int m = 0; m <= g.M; ++m) {
      double Lg = gfield.dt_ray(n, m);
      double gr = gfield.dq(n, m);
      out.at(n, m) = -(Lg - 2.0 * gr) + gfield.at(n, m) / g.r(n, m);
    }
  return out;
}

/// Residual of 𝓛f - fμ - g measured along rays: 𝓛f = ∂_t|_q (f) + f/r.
inline double transport_residual(const RayField& f, const RayFn& mu, const RayFn& src) {
  const auto& g = f.grid();
  double worst = 0;
  for (int n = 1; n < f.rows() - 1; ++n)
    for (int m = 0; m <= g.M; ++m) {
      double Lf = f.dt_ray(n, m) + f.at(n, m) / g.r(n, m);
      double res = Lf - mu(g.t(n), g.q(m)) * f.at(n, m) - src(g.t(n), g.q(m));
      res = std::abs(res);
      if (res > worst) worst = res;
    }
  return worst;
}

}  // namespace hfwave
