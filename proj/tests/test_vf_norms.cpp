#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hfwave/analytic_fields.hpp"
#include "hfwave/vf_norms.hpp"
#include "hfwave/wave_solver.hpp"

using namespace hfwave;

namespace {

GridField sampled(const SpacetimeGrid& g, const std::function<double(double, double)>& f) {
  GridField u(g, g.n_steps + 1);
  for (int n = 0; n <= g.n_steps; ++n)
    for (int j = 0; j <= g.J; ++j) u.at(n, j) = f(g.t(n), g.r(j));
  return u;
}

WaveSolution free_wave(double r0, double width, double dr, double t_final, double r_max) {
  SpacetimeGrid g = SpacetimeGrid::make(r_max, dr, t_final);
  RadialWaveSolver s(
      g, sample(g, [&](double r) { return std::exp(-std::pow((r - r0) / width, 2)); }),
      std::vector<double>(g.J + 1, 0.0));
  return s.run();
}

}  // namespace

TEST_CASE("vector field applications") {
  SpacetimeGrid g = SpacetimeGrid::make(6.0, 0.02, 2.0);

  SUBCASE("S annihilates homogeneous degree-0 functions") {
    auto u = sampled(g, [](double t, double r) { return (t - r) / (t + r + 2.0); });
    // (t+2)∂_t + r∂_r would be the exact Euler field for this shifted
    // homogeneity; test instead on f(r/(t+1)) against S' = (t+1)∂_t + r∂_r:
    // the plain radial S applied to f((r)/(t)) on t >= 1 suffices here.
    auto v = sampled(g, [](double t, double r) { return r / (t + 1.0); });
    // S v = t ∂_t v + r ∂_r v = -t r/(t+1)^2 + r/(t+1) = r/(t+1)^2
    for (int n = 20; n < v.rows() - 2; n += 17)
      for (int j = 2; j < g.J - 2; j += 23) {
        double sv = vf_apply_point(v, {VF::S}, 0, n, j);
        double expect = g.r(j) / std::pow(g.t(n) + 1.0, 2);
        CHECK(sv == doctest::Approx(expect).epsilon(1e-4));
      }
    (void)u;
  }
  SUBCASE("B applied to G(r-t) gives (t-r) G'(r-t)") {
    auto u = sampled(g, [](double t, double r) {
      return std::exp(-0.7 * (r - t - 2.5) * (r - t - 2.5));
    });
    for (int n = 5; n < u.rows() - 5; n += 13)
      for (int j = 5; j < g.J - 5; j += 19) {
        double t = g.t(n), r = g.r(j), q = r - t;
        double gp = -1.4 * (q - 2.5) * std::exp(-0.7 * (q - 2.5) * (q - 2.5));
        double expect = (t - r) * gp;
        CHECK(vf_apply_point(u, {VF::B}, 0, n, j) == doctest::Approx(expect).epsilon(2e-3).scale(1.0));
      }
  }
  SUBCASE("time derivative of a static field vanishes identically") {
    auto u = sampled(g, [](double, double r) { return std::cos(r); });
    for (int n = 2; n < u.rows() - 2; n += 11)
      for (int j = 2; j < g.J - 2; j += 7)
        CHECK(vf_apply_point(u, {VF::Dt}, 0, n, j) == 0.0);
  }
  SUBCASE("materialized application matches the recursive one") {
    auto u = sampled(g, [](double t, double r) { return std::sin(0.4 * t + 0.2 * r); });
    auto su = apply_vector_field(u, VF::S);
    for (int n = 3; n < u.rows() - 3; n += 29)
      for (int j = 3; j < g.J - 3; j += 31)
        CHECK(su.f.at(n, j) == doctest::Approx(vf_apply_point(u, {VF::S}, 0, n, j)).epsilon(1e-13));
  }
}

TEST_CASE("ghost energy") {
  GhostWeight w(0.5, 0.0);
  SUBCASE("free wave with flat weight conserves E") {
    auto sol = free_wave(4.0, 1.0, 0.02, 3.0, 12.0);
    // mimic a flat weight by a tiny alpha and delta: instead compare the
    // homogeneous slice energy directly
    const auto& g = sol.u.grid();
    double e0 = -1, drift = 0;
    for (int n = 3; n < sol.u.rows() - 3; n += 10) {
      std::vector<double> ut(g.J + 1), ur(g.J + 1);
      for (int j = 0; j <= g.J; ++j) {
        ut[j] = sol.u.dt(n, j);
        ur[j] = sol.u.dr(n, j);
      }
      double e = slice_energy(g, ut.data(), ur.data());
      if (e0 < 0) e0 = e;
      drift = std::max(drift, std::abs(e / e0 - 1));
    }
    CHECK(drift < 5e-3);
  }
  SUBCASE("zero field gives zero report") {
    SpacetimeGrid g = SpacetimeGrid::make(5.0, 0.05, 1.0);
    GridField u(g, g.n_steps + 1);
    auto rep = ghost_energy(u, w, 1, 4);
    for (const auto& row : rep.rows) {
      CHECK(row.E == 0.0);
      CHECK(row.S == 0.0);
    }
  }
  SUBCASE("levels are monotone in the multi-index cap") {
    auto sol = free_wave(3.0, 0.8, 0.04, 2.0, 10.0);
    auto rep = ghost_energy(sol.u, w, 2, 16);
    for (size_t a = 0; a + 2 < rep.rows.size(); a += 3) {
      CHECK(rep.rows[a].E <= rep.rows[a + 1].E);
      CHECK(rep.rows[a + 1].E <= rep.rows[a + 2].E);
    }
  }
}

TEST_CASE("ghost-weight energy inequality") {
  GhostWeight w(0.5, 0.0);
  SUBCASE("homogeneous wave: C_fit near 1 and identity at O(dr^2)") {
    auto run = [&](double dr) {
      auto sol = free_wave(4.0, 1.0, dr, 3.0, 12.0);
      return check_energy_inequality(
          sol.u, [&](int, std::vector<double>& out) { std::fill(out.begin(), out.end(), 0.0); },
          w, 4);
    };
    auto a = run(0.02);
    auto b = run(0.01);
    CHECK(a.C_fit > 0.5);
    CHECK(a.C_fit < 2.0);
    CHECK(b.identity_residual < a.identity_residual);
    CHECK(std::log2(a.identity_residual / b.identity_residual) > 1.5);
  }
  SUBCASE("background run: inequality holds with stable constant") {
    auto solve = [&](double dr) {
      DataProfiles data;
      SpacetimeGrid g = SpacetimeGrid::make(10.0, dr, 5.0);
      RadialWaveSolver s(
          g, sample(g, [&](double r) { return data.phi0(r); }),
          sample(g, [&](double r) { return data.phi1(r); }),
          [&g](double, const double*, const double* ut, const double* ur, double* out) {
            for (int j = 0; j <= g.J; ++j) out[j] = -ut[j] * ut[j] + ur[j] * ur[j];
          });
      auto sol = s.run();
      auto src = [&](int n, std::vector<double>& out) {
        for (int j = 0; j <= sol.u.grid().J; ++j) {
          double ut = sol.u.dt(n, j), ur = sol.u.dr(n, j);
          out[j] = -ut * ut + ur * ur;
        }
      };
      return check_energy_inequality(sol.u, src, w, 4);
    };
    auto a = solve(0.02);
    auto b = solve(0.01);
    CHECK(a.C_fit > 0.2);
    CHECK(a.C_fit < 5.0);
    CHECK(b.C_fit == doctest::Approx(a.C_fit).epsilon(0.2));
  }
}

TEST_CASE("weighted Klainerman-Sobolev ratio") {
  GhostWeight w(0.5, 0.0);
  SUBCASE("zero field gives ratio zero") {
    SpacetimeGrid g = SpacetimeGrid::make(8.0, 0.05, 1.0);
    GridField u(g, g.n_steps + 1);
    CHECK(ks_ratio(u, w, u.rows() / 2) == 0.0);
  }
  SUBCASE("Gaussian bump: finite ratio, stable under refinement") {
    auto a = free_wave(5.0, 1.0, 0.04, 1.6, 16.0);
    auto b = free_wave(5.0, 1.0, 0.02, 1.6, 16.0);
    double ra = ks_ratio(a.u, w, a.u.rows() / 2);
    double rb = ks_ratio(b.u, w, b.u.rows() / 2);
    CHECK(ra > 0);
    CHECK(rb == doctest::Approx(ra).epsilon(0.1));
  }
  SUBCASE("translated bump family: ratio does not grow past r0 = 5") {
    double prev = -1;
    for (double r0 : {5.0, 10.0, 20.0}) {
      auto sol = free_wave(r0, 1.0, 0.04, 1.6, r0 + 8.0);
      double ratio = ks_ratio(sol.u, w, sol.u.rows() / 2);
      if (prev > 0) CHECK(ratio <= prev * 1.05);
      prev = ratio;
    }
  }
}

TEST_CASE("commutator identities") {
  auto rep = check_commutators();
  CHECK(rep.pass);
  for (const auto& c : rep.checks) {
    INFO(c.name, " coarse=", c.residual_coarse, " fine=", c.residual_fine, " rate=", c.rate);
    if (c.exact) {
      CHECK(c.residual_fine < 1e-9);
    } else {
      CHECK(c.rate > 1.6);
      CHECK(c.rate < 2.6);
    }
  }
  SUBCASE("polynomial field: [box, dt] commutes at machine precision") {
    SpacetimeGrid g = SpacetimeGrid::make(6.0, 0.05, 2.0);
    auto u = sampled(g, [](double t, double r) { return t * t * r + 3 * t * r * r + r; });
    // both operator orders, by stencils
    GridField boxu(g, u.rows());
    for (int n = 1; n < u.rows() - 1; ++n)
      for (int j = 1; j < g.J; ++j) boxu.at(n, j) = detail::box_h(u, n, j);
    auto a = apply_vector_field(boxu, VF::Dt);
    VFField dtu = apply_vector_field(u, VF::Dt);
    for (int n = 4; n < u.rows() - 4; n += 7)
      for (int j = 4; j < g.J - 4; j += 11) {
        if (g.r(j) < 0.5) continue;
        double lhs = detail::box_h(dtu.f, n, j);
        CHECK(lhs == doctest::Approx(a.f.at(n, j)).epsilon(1e-11).scale(1.0));
      }
  }
}
