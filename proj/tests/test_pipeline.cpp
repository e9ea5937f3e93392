#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hfwave/jet.hpp"
#include "hfwave/pipeline.hpp"

using namespace hfwave;

namespace {

PipelineConfig quick_cfg(int K, double t_march, double dr = 0.02) {
  PipelineConfig cfg;
  cfg.K = K;
  cfg.dr = dr;
  cfg.dq = dr;
  cfg.t_store = t_march;
  cfg.t_march = t_march;
  return cfg;
}

/// Jet of a recorded wave-grid field through finite differences of the
/// bicubic interpolant (h coarser than the grid keeps the stencil stable).
Jet2 grid_jet(const GridField& f, double t, double r, double h) {
  auto v = [&](double tt, double rr) { return f.interp(tt, rr); };
  Jet2 J;
  J.v = v(t, r);
  J.dt = (v(t + h, r) - v(t - h, r)) / (2 * h);
  J.dr = (v(t, r + h) - v(t, r - h)) / (2 * h);
  J.dtt = (v(t + h, r) - 2 * J.v + v(t - h, r)) / (h * h);
  J.drr = (v(t, r + h) - 2 * J.v + v(t, r - h)) / (h * h);
  J.dtr = (v(t + h, r + h) - v(t + h, r - h) - v(t - h, r + h) + v(t - h, r - h)) / (4 * h * h);
  return J;
}

/// Same for a ray field, transformed from (t, q) to (t, r) coordinates.
Jet2 ray_jet(const RayField& f, double t, double r, double h) {
  auto v = [&](double tt, double qq) { return f.interp(tt, qq); };
  double q = r - t;
  double f0 = v(t, q);
  double ft = (v(t + h, q) - v(t - h, q)) / (2 * h);     // ∂_t at fixed q
  double fq = (v(t, q + h) - v(t, q - h)) / (2 * h);
  double ftt = (v(t + h, q) - 2 * f0 + v(t - h, q)) / (h * h);
  double fqq = (v(t, q + h) - 2 * f0 + v(t, q - h)) / (h * h);
  double ftq = (v(t + h, q + h) - v(t + h, q - h) - v(t - h, q + h) + v(t - h, q - h)) / (4 * h * h);
  Jet2 J;
  J.v = f0;
  J.dt = ft - fq;
  J.dr = fq;
  J.dtt = ftt - 2 * ftq + fqq;
  J.dtr = ftq - fqq;
  J.drr = fqq;
  return J;
}

Jet2 rich(const Jet2& coarse, const Jet2& fine) {
  // Richardson extrapolation of the h and h/2 stencils
  return (1.0 / 3.0) * (4.0 * fine + (-1.0) * coarse);
}

/// Residual of the full equation on the assembled ansatz: the defining
/// property of the reduced system is that this is O(λ^K). The λ-independent
/// stencil floor of the background sector is removed by evaluating the φ-only
/// residual with the same jets and subtracting.
double ansatz_equation_residual(const AnsatzBundle& b, double lambda, double t_lo, double t_hi) {
  const double h = 2 * b.cfg.dr;
  double worst = 0;
  for (double t = t_lo; t <= t_hi; t += 0.21) {
    for (double r = t + 0.3; r <= t + 2.4; r += 0.07) {
      Jet2 theta = (1.0 / lambda) * (Jet2::var_t(t) - Jet2::var_r(r));
      Jet2 phi = rich(grid_jet(b.phi, t, r, h), grid_jet(b.phi, t, r, h / 2));
      Jet2 total = phi;
      for (const auto& [k, field] : b.psi)
        total = total + std::pow(lambda, k) *
                            rich(grid_jet(field, t, r, h), grid_jet(field, t, r, h / 2));
      for (const auto& [key, field] : b.F) {
        auto [k, i] = key;
        Jet2 env = rich(ray_jet(field, t, r, h), ray_jet(field, t, r, h / 2));
        Jet2 arg = double(i) * theta;
        Jet2 osc = TrigSymbol{k, i, 1}.is_sin() ? Jet2::sin(arg) : Jet2::cos(arg);
        total = total + std::pow(lambda, k) * (env * osc);
      }
      double res = total.box_radial(r) -
                   quadform_radial(b.cfg.q, total.dt, total.dr, total.dt, total.dr);
      double base = phi.box_radial(r) - quadform_radial(b.cfg.q, phi.dt, phi.dr, phi.dt, phi.dr);
      worst = std::max(worst, std::abs(res - base));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("homogeneous hierarchy: phi = 0 leaves the exact advected profile") {
  auto cfg = quick_cfg(2, 3.0);
  cfg.dq = 0.005;
  cfg.phi_amp = 0.0;
  auto b = solve_reduced_system_pipeline(cfg);
  DataProfiles data;
  data.eps = cfg.eps;
  data.R = cfg.R;
  const auto& gr = b.ray_grid;
  const auto& F11 = b.F.at({1, 1});

  SUBCASE("F(1,1) = F0(q) q / r, the homogeneous characteristic solution") {
    for (int n = 0; n <= b.n_store; n += 9)
      for (int m = 0; m <= gr.M; m += 5) {
        double expect = data.F0(gr.q(m)) * gr.q(m) / gr.r(n, m);
        CHECK(F11.at(n, m) == doctest::Approx(expect).epsilon(1e-10));
      }
  }
  SUBCASE("second-order levels vanish: the advected profile is an exact wave") {
    // 𝓛F(1,1) = 0 makes F(1,1) = F0(q) q/r an exact solution of Box f = 0,
    // so every T(2,i) source vanishes identically
    double sup21 = 0;
    for (int n = 0; n <= b.n_store; ++n)
      for (int m = 0; m <= gr.M; ++m) sup21 = std::max(sup21, std::abs(b.F.at({2, 1}).at(n, m)));
    CHECK(sup21 < 1e-13);
  }
  SUBCASE("t = 0 derivative of the leading profile is -(d/dr + 1/r)F0") {
    const auto& dt0 = b.dtF0.at({1, 1});
    for (int m = 2; m < gr.M - 1; ++m) {
      double q = gr.q(m);
      double expect = -(data.F0_r(q) + data.F0(q) / q);
      CHECK(dt0[m] == doctest::Approx(expect).epsilon(1e-2).scale(cfg.eps));
    }
  }
  SUBCASE("zero oscillating data gives identically zero levels") {
    auto cfg0 = quick_cfg(2, 1.0);
    cfg0.F_amp = 0.0;
    auto b0 = solve_reduced_system_pipeline(cfg0);
    for (const auto& [key, f] : b0.F)
      for (int n = 0; n < f.rows(); ++n)
        for (int m = 0; m <= b0.ray_grid.M; ++m) CHECK(f.at(n, m) == 0.0);
    SpacetimeGrid tgt = SpacetimeGrid::make(5.0, 0.02, 1.0);
    auto osc = compute_oscillatory_initial_data(b0, 0.1, tgt);
    CHECK(osc.sup_Ftilde == 0.0);
    for (int j = 0; j <= tgt.J; ++j) {
      DataProfiles d2;
      CHECK(osc.u0[j] == doctest::Approx(d2.phi0(tgt.r(j))).epsilon(1e-14));
      CHECK(osc.u1[j] == doctest::Approx(d2.phi1(tgt.r(j))).epsilon(1e-14));
    }
  }
}

TEST_CASE("pipeline with background coupling") {
  auto cfg = quick_cfg(2, 3.0, 0.01);
  auto b = solve_reduced_system_pipeline(cfg);

  SUBCASE("transport residual of the solved leading level is small") {
    // 𝓛F = 2 F db0[phi] measured with finite differences on the records
    const auto& F11 = b.F.at({1, 1});
    const auto& gr = b.ray_grid;
    const auto& gw = b.wave_grid;
    std::vector<double> phit(gw.J + 1), phir(gw.J + 1);
    double worst = 0;
    for (int n = 2; n < b.n_store - 1; n += 3) {
      for (int j = 0; j <= gw.J; ++j) {
        phit[j] = b.phi.dt(n, j);
        phir[j] = b.phi.dr(n, j);
      }
      for (int m = 2; m < gr.M - 1; ++m) {
        double LF = F11.dt_ray(n, m) + F11.at(n, m) / gr.r(n, m);
        double r = gr.r(n, m);
        double db0 = 0.5 * (GridField::interp1(phit.data(), gw.J + 1, r / gw.dr) +
                            GridField::interp1(phir.data(), gw.J + 1, r / gw.dr));
        worst = std::max(worst, std::abs(LF - 2.0 * db0 * F11.at(n, m)));
      }
    }
    CHECK(worst < 2e-3 * cfg.eps);
  }
  SUBCASE("support of every level stays inside the cutoff band") {
    for (const auto& [key, f] : b.F)
      for (int n = 0; n < f.rows(); n += 7)
        for (int m = 0; m <= b.ray_grid.M; ++m) {
          double q = b.ray_grid.q(m);
          if (q > 1.0 / (2 * cfg.R) && q < 2 * cfg.R) continue;
          CHECK(std::abs(f.at(n, m)) < 1e-14);
        }
    for (const auto& d : b.diag) CHECK(d.support_leak < 1e-12);
  }
  SUBCASE("assembled ansatz at t = 0 is the exact data formula") {
    DataProfiles data;
    double lambda = 0.3;
    for (double r : {0.8, 1.3, 2.2, 3.0}) {
      double expect = data.phi0(r) + lambda * data.F0(r) * std::cos(r / lambda);
      CHECK(assemble_ansatz(b, lambda, 0.0, r) == doctest::Approx(expect).epsilon(1e-9));
    }
  }
  SUBCASE("independent evaluator agrees at random interior points") {
    double lambda = 0.25;
    for (int s = 0; s < 10; ++s) {
      double t = 0.3 + 0.23 * s;
      double r = 0.7 + 0.31 * s;
      // hand-rolled sum over the bundle pieces
      double expect = b.phi.interp(t, r);
      for (const auto& [k, f] : b.psi) expect += std::pow(lambda, k) * f.interp(t, r);
      for (const auto& [key, f] : b.F) {
        auto [k, i] = key;
        double theta = (t - r) / lambda;
        double osc = (k + i) % 2 ? std::sin(i * theta) : std::cos(i * theta);
        expect += std::pow(lambda, k) * f.interp(t, r - t) * osc;
      }
      CHECK(assemble_ansatz(b, lambda, t, r) == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  SUBCASE("oscillatory data: F-tilde bounded and lambda-stable") {
    SpacetimeGrid tgt = SpacetimeGrid::make(6.0, 0.005, 1.0);
    double prev = -1;
    for (double lam : {0.2, 0.1, 0.05}) {
      auto osc = compute_oscillatory_initial_data(b, lam, tgt);
      CHECK(osc.sup_Ftilde < 10 * cfg.eps);
      CHECK(osc.sup_Ftilde > 0);
      if (prev > 0) CHECK(osc.sup_Ftilde == doctest::Approx(prev).epsilon(0.25));
      prev = osc.sup_Ftilde;
    }
  }
  SUBCASE("t = 0 derivatives match direct time differencing of the record") {
    // the record is indexed by (t, q), so ∂_t at fixed r is the along-ray
    // derivative minus the q derivative
    const auto& gr = b.ray_grid;
    for (const auto& [key, f] : b.F) {
      const auto& dt0 = b.dtF0.at(key);
      for (int m = 3; m < gr.M - 2; m += 4) {
        double ray_fd = (-3 * f.at(0, m) + 4 * f.at(1, m) - f.at(2, m)) / (2 * gr.dt);
        double fd = ray_fd - f.dq(0, m);
        CHECK(dt0[m] == doctest::Approx(fd).epsilon(2e-2).scale(b.cfg.eps));
      }
    }
  }
}

TEST_CASE("K=4 pipeline: psi^(2) appears, psi^(3) does not") {
  auto cfg = quick_cfg(4, 2.5);
  auto b = solve_reduced_system_pipeline(cfg);
  REQUIRE(b.psi.count(2) == 1);
  CHECK(b.psi.count(3) == 0);
  double sup_psi = 0;
  const auto& psi2 = b.psi.at(2);
  for (int n = 0; n < psi2.rows(); ++n)
    for (int j = 0; j <= b.wave_grid.J; ++j) sup_psi = std::max(sup_psi, std::abs(psi2.at(n, j)));
  CHECK(sup_psi > 0.0);
  CHECK(sup_psi < 100 * cfg.eps * cfg.eps);  // quadratic forcing scale

  // psi^(2) is supported inside q <= R (plus smearing): check far outside
  for (int n = 0; n < psi2.rows(); n += 11) {
    double t = b.wave_grid.t(n);
    int j0 = static_cast<int>(std::ceil((t + cfg.R + 4 * cfg.dr) / cfg.dr));
    for (int j = j0; j <= b.wave_grid.J; ++j) CHECK(std::abs(psi2.at(n, j)) < 1e-12);
  }
}

TEST_CASE("assembled ansatz solves the equation to O(lambda^K)") {
  auto slope_for = [](int K) {
    auto cfg = quick_cfg(K, 3.0, 0.01);
    auto b = solve_reduced_system_pipeline(cfg);
    std::vector<std::pair<double, double>> pts;
    for (double lam : {0.8, 0.4, 0.2})
      pts.push_back({lam, ansatz_equation_residual(b, lam, 0.8, 2.2)});
    return fit_lambda_scaling(pts).slope;
  };
  SUBCASE("K=2") {
    double s = slope_for(2);
    CHECK(s > 1.6);
    CHECK(s < 2.5);
  }
  SUBCASE("K=4") {
    double s = slope_for(4);
    CHECK(s > 3.5);
    CHECK(s < 4.5);
  }
}

TEST_CASE("transport decay exponents over a long march") {
  PipelineConfig cfg = quick_cfg(2, 60.0, 0.02);
  cfg.t_store = 0.1;  // diagnostics only
  auto b = solve_reduced_system_pipeline(cfg);
  // the (2,1) level sits at the discretization floor of this grid (its
  // sources nearly cancel); the acceptance suite applies a two-resolution
  // convergence gate, here we fit the two measurable levels
  for (const auto& d : b.diag) {
    if (!((d.k == 1 && d.i == 1) || (d.k == 2 && d.i == 2))) continue;
    std::vector<std::pair<double, double>> fpts, bpts;
    for (const auto& s : d.decay) {
      fpts.push_back({s.r, s.sup_f});
      bpts.push_back({s.r, s.sup_box});
    }
    auto ff = fit_spatial_decay(fpts, 5.0, 60.0);
    auto fb = fit_spatial_decay(bpts, 5.0, 60.0);
    CHECK(ff.slope == doctest::Approx(-1.0).epsilon(0.1));
    CHECK(fb.slope == doctest::Approx(-3.0).epsilon(0.12));
  }
}
