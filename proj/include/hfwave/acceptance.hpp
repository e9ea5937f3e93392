#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "hfwave/eval.hpp"
#include "hfwave/study.hpp"
#include "hfwave/vf_norms.hpp"

namespace hfwave {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::vector<std::string> details;
  double seconds = 0;

  std::string line() const {
    std::ostringstream os;
    os << (pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << ", "
       << static_cast<int>(seconds) << "s)";
    for (const auto& d : details) os << "\n      " << d;
    return os.str();
  }
};

namespace detail {

template <typename Fn>
CriterionResult timed(int id, const std::string& name, Fn&& fn) {
  CriterionResult res;
  res.id = id;
  res.name = name;
  auto t0 = std::chrono::steady_clock::now();
  try {
    fn(res);
  } catch (const std::exception& e) {
    res.pass = false;
    res.details.push_back(std::string("exception: ") + e.what());
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::vector<SystemForm> closure_forms() {
  std::vector<SystemForm> forms = {
      SystemForm::scalar(QuadForm::q0()),
      SystemForm::scalar(QuadForm::q0() + QuadForm::antisym(QKind::Q12)),
      SystemForm::scalar(QuadForm::q0(Rational(1, 2)) +
                         QuadForm::antisym(QKind::Q03, Rational(-1, 3))),
      SystemForm::scalar(QuadForm::q0(Rational(2)) + QuadForm::antisym(QKind::Q01) +
                         QuadForm::antisym(QKind::Q23, Rational(1, 3)))};
  SystemForm cross(2);
  cross.set(1, 1, 2, QuadForm::q0());
  cross.set(2, 1, 1, QuadForm::q0(Rational(1, 2)));
  cross.set(2, 1, 2, QuadForm::antisym(QKind::Q12));
  forms.push_back(cross);
  return forms;
}

}  // namespace detail

/// 1. Symbolic closure: zero residual and half-chessboard shape for
///    K in 2..6 over a fixed set of null-form combinations.
inline CriterionResult criterion_symbolic_closure() {
  return detail::timed(1, "symbolic closure", [](CriterionResult& res) {
    res.pass = true;
    int checked = 0;
    for (const auto& form : detail::closure_forms()) {
      for (int K = 2; K <= 6; ++K) {
        auto sys = generate_reduced_system(K, form);
        for (int e = 1; e <= form.d(); ++e)
          if (!reduced_system_residual(sys, e).empty()) {
            res.pass = false;
            res.details.push_back("nonzero residual at K=" + std::to_string(K));
          }
        if (!verify_halfchessboard(K, form).pass) {
          res.pass = false;
          res.details.push_back("half-chessboard violated at K=" + std::to_string(K));
        }
        ++checked;
      }
    }
    res.details.push_back(std::to_string(checked) + " (K, form) pairs, residual empty, pattern ok");
  });
}

/// 2. Null-structure necessity: the X0 Y0 probe resonates at band 0,
///    harmonic 2, with the F^2 Q(∂(t-r),∂(t-r)) shape.
inline CriterionResult criterion_nonnull_resonance() {
  return detail::timed(2, "null-structure necessity", [](CriterionResult& res) {
    auto check_form = [&](const QuadForm& q, const std::string& label) {
      auto lenient = generate_reduced_system_lenient(2, SystemForm::scalar(q));
      bool fails = !lenient.unmatched.empty();
      bool shape = false;
      for (const auto& u : lenient.unmatched) {
        if (u.band != 0 || u.harmonic != 2) continue;
        for (const auto& m : u.terms.terms) {
          int nf = 0;
          bool marker = false;
          for (const auto& f : m.factors) {
            if (std::holds_alternative<FieldSymbol>(f) &&
                std::get<FieldSymbol>(f).name == FieldName::F)
              ++nf;
            if (std::holds_alternative<QFactor>(f) &&
                std::get<QFactor>(f).a.name == FieldName::PhaseU)
              marker = true;
          }
          if (nf == 2 && marker) shape = true;
        }
      }
      if (!(fails && shape)) {
        res.pass = false;
        res.details.push_back(label + ": expected band-0 harmonic-2 resonance missing");
      } else {
        res.details.push_back(label + ": unmatched F^2 Q(d(t-r),d(t-r)) at band 0, harmonic 2");
      }
    };
    res.pass = true;
    check_form(QuadForm::time_product(), "tt probe");
    check_form(QuadForm::q0() + QuadForm::time_product(Rational(1, 10)), "mixed q0 + tt/10");
    // and the baseline succeeds
    try {
      generate_reduced_system(2, SystemForm::scalar(QuadForm::q0()));
      res.details.push_back("null baseline generates cleanly");
    } catch (...) {
      res.pass = false;
      res.details.push_back("null baseline unexpectedly failed");
    }
  });
}

/// 3. Oracle equivalence: symbolic expansions against direct jet evaluation
///    of the unexpanded expressions at random samples, relative 1e-10.
inline CriterionResult criterion_oracle_equivalence() {
  return detail::timed(3, "oracle equivalence", [](CriterionResult& res) {
    res.pass = true;
    double worst = 0;
    int samples = 0;
    auto record = [&](double rel) {
      worst = std::max(worst, rel);
      if (rel > 1e-10) res.pass = false;
    };
    for (int s = 0; s < 100; ++s) {
      AnalyticBackend bk(1000 + s);
      double t = 0.4 + 0.031 * s, r = 1.5 + 0.017 * s, lam = 0.15 + 0.006 * s;
      double theta = 0.05 + 0.09 * s;
      int K = 2 + s % 3;
      QuadForm q = s % 2 ? QuadForm::q0(Rational(2)) + QuadForm::antisym(QKind::Q01)
                         : QuadForm::q0();
      SystemForm form = SystemForm::scalar(q);
      TrigSymbol ta{1 + s % 3, 1 + s % 2, 1}, tb{2 + s % 2, 1 + s % 3, 1};
      // trig products on the θ sample
      {
        double lhs = ta.eval(theta) * tb.eval(theta);
        double rhs = 0;
        for (const auto& [c, sym] : trig_product(ta, tb)) rhs += c.value() * sym.eval(theta);
        record(std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
      }
      auto F11 = *make_F(1, 1);
      auto phi = make_phi();
      Jet2 theta_jet = (1.0 / lam) * (Jet2::var_t(t) - Jet2::var_r(r));
      auto osc_jet = [&](const TrigSymbol& tsym) {
        Jet2 arg = static_cast<double>(tsym.harmonic) * theta_jet;
        return tsym.is_sin() ? Jet2::sin(arg) : Jet2::cos(arg);
      };
      // box expansion
      {
        Jet2 g = bk.jet(F11, t, r);
        double direct = (g * osc_jet(ta)).box_radial(r);
        double expanded = eval_expr(bk, box_expand_term(F11, ta), t, r, lam);
        record(std::abs(direct - expanded) / std::max(1e-6, std::abs(direct)));
      }
      // null-form phase and pair expansions
      {
        Jet2 f = bk.jet(F11, t, r), g = bk.jet(phi, t, r);
        double direct = quadform_apply(q, f * osc_jet(ta), g, bk.omega());
        double expanded = eval_expr(bk, nullform_phase_expand(q, F11, ta, phi), t, r, lam);
        record(std::abs(direct - expanded) / std::max(1e-6, std::abs(direct)));
        auto F21 = *make_F(2, 1);
        Jet2 h = bk.jet(F21, t, r);
        double direct2 = quadform_apply(q, f * osc_jet(ta), h * osc_jet(tb), bk.omega());
        double expanded2 =
            eval_expr(bk, nullform_pair_expand(q, F11, ta, F21, tb), t, r, lam);
        record(std::abs(direct2 - expanded2) / std::max(1e-6, std::abs(direct2)));
      }
      // assembled band decompositions
      {
        double direct = ansatz_jet(bk, K, 1, t, r, lam).box_radial(r);
        auto bands = expand_box_ansatz(K);
        double expanded = 0;
        for (const auto& [p, ex] : bands.bands)
          expanded += std::pow(lam, p) * eval_expr(bk, ex, t, r, lam);
        record(std::abs(direct - expanded) / std::max(1e-6, std::abs(direct)));
        double directq = ansatz_nullform_direct(bk, K, form, 1, t, r, lam);
        auto qq = expand_nullform_ansatz(K, form);
        double expandedq = std::pow(lam, K) * eval_expr(bk, qq.tail, t, r, lam);
        for (const auto& [p, ex] : qq.bands)
          expandedq += std::pow(lam, p) * eval_expr(bk, ex, t, r, lam);
        record(std::abs(directq - expandedq) / std::max(1e-6, std::abs(directq)));
      }
      samples += 6;
    }
    res.details.push_back(std::to_string(samples) + " samples, worst relative deviation " +
                          detail::fmt(worst));
  });
}

/// 4. Transport decay: K=4 hierarchy to r = 100 at two resolutions; levels
///    that are grid-converged and above the measurement floor must fit
///    slope(F) = -1.0 ± 0.1 and slope(□F) = -3.0 ± 0.3 over r in [5, 100].
inline CriterionResult criterion_transport_decay() {
  return detail::timed(4, "transport decay", [](CriterionResult& res) {
    struct LevelFit {
      int k, i;
      double slope_f, slope_b, ref;
    };
    auto march = [](double dr) {
      PipelineConfig cfg;
      cfg.K = 4;
      cfg.dr = dr;
      cfg.dq = dr;
      cfg.t_store = 0.1;
      cfg.t_march = 105.0;
      auto b = solve_reduced_system_pipeline(cfg);
      std::vector<LevelFit> out;
      for (const auto& d : b.diag) {
        std::vector<std::pair<double, double>> fp, bp;
        double ref = 0;
        for (const auto& s : d.decay) {
          fp.push_back({s.r, s.sup_f});
          bp.push_back({s.r, s.sup_box});
          if (std::abs(s.r - 20.0) < 0.1 && ref == 0) ref = s.sup_f;
        }
        out.push_back({d.k, d.i, fit_spatial_decay(fp, 5.0, 100.0).slope,
                       fit_spatial_decay(bp, 5.0, 100.0).slope, ref});
      }
      return out;
    };
    auto coarse = march(0.025), fine = march(0.0125);
    res.pass = true;
    int gated = 0;
    for (size_t a = 0; a < coarse.size(); ++a) {
      double scale = std::max({std::abs(coarse[a].ref), std::abs(fine[a].ref), 1e-300});
      double agree = std::abs(fine[a].ref - coarse[a].ref) / scale;
      bool converged = agree < 0.3;
      bool above_floor = fine[a].ref > 1e-8;
      std::ostringstream line;
      line << "F(" << fine[a].k << "," << fine[a].i << "): slope " << detail::fmt(fine[a].slope_f)
           << ", box " << detail::fmt(fine[a].slope_b);
      if (converged && above_floor) {
        ++gated;
        bool ok = std::abs(fine[a].slope_f + 1.0) <= 0.1 && std::abs(fine[a].slope_b + 3.0) <= 0.3;
        if (!ok) res.pass = false;
        line << (ok ? "  [ok]" : "  [OUT OF WINDOW]");
      } else {
        line << (converged ? "  [below measurement floor]" : "  [not grid-converged]");
      }
      res.details.push_back(line.str());
    }
    if (gated == 0) {
      res.pass = false;
      res.details.push_back("no level passed the measurability gate");
    }
  });
}

/// Shared pieces of criteria 5 and 8: the decomposition sweep.
inline ConvergenceStudy decomposition_sweep(AnsatzBundle& bundle_out) {
  PipelineConfig cfg;
  cfg.K = 2;
  cfg.dr = 0.005;
  cfg.dq = 0.005;
  cfg.t_store = 10.0;
  cfg.t_march = 10.0;
  bundle_out = solve_reduced_system_pipeline(cfg);
  StudyConfig scfg;
  scfg.t_final = 10.0;
  scfg.lambdas = {0.2, 0.1, 0.05};
  return run_convergence_study(bundle_out, scfg);
}

/// 5. Decomposition: λ-sweep {0.2, 0.1, 0.05} at T = 10 with slope of
///    sup|Φ - φ - λF cosθ| in [1.7, 2.3] and ‖F̃₀,λ‖/ε bounded.
inline CriterionResult criterion_decomposition(const ConvergenceStudy& st) {
  return detail::timed(5, "decomposition scaling", [&](CriterionResult& res) {
    res.pass = st.slope_a.slope >= 1.7 && st.slope_a.slope <= 2.3;
    res.details.push_back("slope(a) = " + detail::fmt(st.slope_a.slope) + " (window [1.7, 2.3])");
    double worst_ft = 0;
    for (const auto& r : st.runs) worst_ft = std::max(worst_ft, r.sup_Ftilde / st.eps);
    if (worst_ft > 10.0) res.pass = false;
    res.details.push_back("max ‖F~0,λ‖/ε over the sweep = " + detail::fmt(worst_ft) +
                          " (bound 10)");
    for (const auto& r : st.runs)
      res.details.push_back("λ=" + detail::fmt(r.lambda) + ": sup|Φ-φ-λFcosθ| = " +
                            detail::fmt(r.sup_h2) + ", dr = " + detail::fmt(r.dr));
  });
}

/// 6. Remainder hierarchy scaling: K=4 sweep, L² slope of ∂h in [3.5, 4.5].
inline CriterionResult criterion_remainder_scaling() {
  return detail::timed(6, "remainder hierarchy scaling", [](CriterionResult& res) {
    PipelineConfig cfg;
    cfg.K = 4;
    cfg.dr = 0.005;
    cfg.dq = 0.005;
    cfg.t_store = 10.0;
    cfg.t_march = 10.0;
    auto bundle = solve_reduced_system_pipeline(cfg);
    StudyConfig scfg;
    scfg.t_final = 10.0;
    scfg.lambdas = {0.4, 0.33, 0.28, 0.24};  // the resolvable range at desk scale
    scfg.measure_dh = true;
    auto st = run_convergence_study(bundle, scfg);
    res.pass = st.slope_b.slope >= 3.5 && st.slope_b.slope <= 4.5;
    res.details.push_back("slope(b) of ‖∂h‖_L2 = " + detail::fmt(st.slope_b.slope) +
                          " (window [3.5, 4.5], target K = 4)");
    for (const auto& r : st.runs)
      res.details.push_back("λ=" + detail::fmt(r.lambda) + ": ‖∂h‖ = " + detail::fmt(r.dh_l2) +
                            ", dr = " + detail::fmt(r.dr));
  });
}

/// 7. Energy boundedness to T = 50 for φ and ψ^(2), plus a refinement-stable
///    ghost-weight inequality constant.
inline CriterionResult criterion_energy_boundedness() {
  return detail::timed(7, "energy boundedness", [](CriterionResult& res) {
    PipelineConfig cfg;
    cfg.K = 4;
    cfg.dr = 0.02;
    cfg.dq = 0.02;
    cfg.t_store = 50.0;
    cfg.t_march = 50.0;
    auto b = solve_reduced_system_pipeline(cfg);
    GhostWeight w(cfg.alpha, cfg.delta);
    res.pass = true;

    auto plateau_check = [&](const GridField& u, const std::string& name) {
      auto rep = ghost_energy(u, w, 2, 32);
      double early = 0, lo = 1e300, hi = 0;
      for (const auto& row : rep.rows) {
        if (row.level != 2) continue;
        if (row.t <= 5.0 + 1e-9) early = std::max(early, row.E);
        if (row.t > 5.0) {
          lo = std::min(lo, row.E);
          hi = std::max(hi, row.E);
        }
      }
      bool ok = early > 0 && hi <= 2.0 * early && lo >= 0.5 * early;
      if (!ok) res.pass = false;
      res.details.push_back(name + ": E2 plateau " + detail::fmt(early) + ", range [" +
                            detail::fmt(lo) + ", " + detail::fmt(hi) + "] over t in (5, 50]" +
                            (ok ? "  [within factor 2]" : "  [OUT OF RANGE]"));
    };
    plateau_check(b.phi, "background phi");
    plateau_check(b.psi.at(2), "psi(2)");

    // ghost-weight inequality constant, stable under one refinement
    auto cfit = [&](double dr) {
      DataProfiles data;
      data.eps = cfg.eps;
      data.R = cfg.R;
      SpacetimeGrid g = SpacetimeGrid::make(20.0, dr, 10.0, cfg.c_cfl);
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
      return check_energy_inequality(sol.u, src, w, 4).C_fit;
    };
    double c1 = cfit(0.02), c2 = cfit(0.01);
    bool stable = std::abs(c2 - c1) <= 0.2 * std::max(c1, c2);
    if (!stable) res.pass = false;
    res.details.push_back("ghost inequality C_fit: " + detail::fmt(c1) + " -> " + detail::fmt(c2) +
                          (stable ? "  [stable ±20%]" : "  [UNSTABLE]"));
  });
}

/// 8. Burnett-limit behavior on the criterion-5 sweep.
inline CriterionResult criterion_burnett(const ConvergenceStudy& st, const AnsatzBundle& bundle) {
  return detail::timed(8, "weak-limit behavior", [&](CriterionResult& res) {
    auto rep = burnett_limit_check(st, bundle);
    res.pass = rep.pass;
    res.details.push_back("sup|Φ-φ| slope = " + detail::fmt(rep.uniform_gap.slope) +
                          " (>= 0.9 required)");
    res.details.push_back("min weak-pairing slope = " + detail::fmt(rep.min_pairing_slope) +
                          " (>= 0.9 required)");
    res.details.push_back("sup|∂Φ-∂φ| at smallest λ = " + detail::fmt(rep.grad_gap_at_smallest) +
                          " vs floor " + detail::fmt(rep.grad_floor));
  });
}

/// 9. Numerical hygiene: order-2 self-convergence on every solver path,
///    finite-speed leakage below 1e-12, commutator identities at order 2.
inline CriterionResult criterion_hygiene() {
  return detail::timed(9, "numerical hygiene", [](CriterionResult& res) {
    res.pass = true;
    auto check_order = [&](const std::string& name, double o, double lo = 1.8, double hi = 2.3) {
      bool ok = o >= lo && o <= hi;
      if (!ok) res.pass = false;
      res.details.push_back(name + ": order " + detail::fmt(o) + (ok ? "  [ok]" : "  [BAD]"));
    };

    // free and nonlinear background paths, compared on the marched variable
    auto wave_order = [&](bool nonlinear) {
      auto run = [&](double dr) {
        SpacetimeGrid g = SpacetimeGrid::make(8.0, dr, 3.0);
        SemilinearRhs rhs = nullptr;
        if (nonlinear)
          rhs = [&g](double, const double*, const double* ut, const double* ur, double* out) {
            for (int j = 0; j <= g.J; ++j) out[j] = -ut[j] * ut[j] + ur[j] * ur[j];
          };
        RadialWaveSolver s(
            g,
            sample(g, [](double r) { return 0.02 * std::exp(-std::pow((r - 1.2) / 0.5, 2)); }),
            sample(g, [](double r) { return 0.01 * std::exp(-std::pow((r - 1.0) / 0.6, 2)); }),
            rhs);
        return s.run();
      };
      auto a = run(0.04), b = run(0.02), c = run(0.01);
      const auto& ga = a.u.grid();
      double eab = 0, ebc = 0;
      for (int j = 0; j <= ga.J; ++j) {
        double r = ga.r(j);
        eab = std::max(eab,
                       r * std::abs(a.u.at(a.u.rows() - 1, j) - b.u.interp_r(b.u.rows() - 1, r)));
        ebc = std::max(ebc, r * std::abs(b.u.interp_r(b.u.rows() - 1, r) -
                                         c.u.interp_r(c.u.rows() - 1, r)));
      }
      return std::log2(eab / ebc);
    };
    check_order("free wave", wave_order(false));
    check_order("background nonlinear", wave_order(true));

    // full nonlinear with oscillatory data at a coarse λ
    {
      PipelineConfig pcfg;
      pcfg.K = 2;
      pcfg.dr = 0.01;
      pcfg.dq = 0.01;
      pcfg.t_store = 2.0;
      pcfg.t_march = 2.0;
      auto bundle = solve_reduced_system_pipeline(pcfg);
      const double lam = 0.5;
      auto run = [&](double dr) {
        SpacetimeGrid g = SpacetimeGrid::make(9.0, dr, 2.0, pcfg.c_cfl);
        auto osc = compute_oscillatory_initial_data(bundle, lam, g);
        RadialWaveSolver s(
            g, osc.u0, osc.u1,
            [&g](double, const double*, const double* ut, const double* ur, double* out) {
              for (int j = 0; j <= g.J; ++j) out[j] = -ut[j] * ut[j] + ur[j] * ur[j];
            });
        return s.run();
      };
      auto a = run(0.01), b = run(0.005), c = run(0.0025);
      const auto& ga = a.u.grid();
      double eab = 0, ebc = 0;
      for (int j = 0; j <= ga.J; ++j) {
        double r = ga.r(j);
        eab = std::max(eab,
                       r * std::abs(a.u.at(a.u.rows() - 1, j) - b.u.interp_r(b.u.rows() - 1, r)));
        ebc = std::max(ebc, r * std::abs(b.u.interp_r(b.u.rows() - 1, r) -
                                         c.u.interp_r(c.u.rows() - 1, r)));
      }
      check_order("full nonlinear oscillatory", std::log2(eab / ebc));
    }

    // characteristic transport within the coupled hierarchy (the standalone
    // op is quadrature-limited and super-converges; the coupled path carries
    // the second-order stencils of its sources)
    {
      auto run = [&](double dr) {
        PipelineConfig pcfg;
        pcfg.K = 2;
        pcfg.dr = dr;
        pcfg.dq = dr;
        pcfg.t_store = 3.0;
        pcfg.t_march = 3.0;
        return solve_reduced_system_pipeline(pcfg);
      };
      auto a = run(0.04), b = run(0.02), c = run(0.01);
      double eab = 0, ebc = 0;
      const auto& ga = a.ray_grid;
      const auto& fa = a.F.at({2, 2});
      const auto& fb = b.F.at({2, 2});
      const auto& fc = c.F.at({2, 2});
      double tload = 2.5;
      for (int m = 0; m <= ga.M; ++m) {
        double q = ga.q(m);
        eab = std::max(eab, std::abs(fa.interp(tload, q) - fb.interp(tload, q)));
        ebc = std::max(ebc, std::abs(fb.interp(tload, q) - fc.interp(tload, q)));
      }
      check_order("hierarchy transport", std::log2(eab / ebc), 1.8, 2.6);
    }

    // finite speed of propagation
    {
      DataProfiles data;
      SpacetimeGrid g = SpacetimeGrid::make(12.0, 0.02, 6.0);
      WaveRunOptions opt;
      opt.record = false;
      opt.support_R = data.R;
      RadialWaveSolver s(
          g, sample(g, [&](double r) { return data.phi0(r); }),
          sample(g, [&](double r) { return data.phi1(r); }),
          [&g](double, const double*, const double* ut, const double* ur, double* out) {
            for (int j = 0; j <= g.J; ++j) out[j] = -ut[j] * ut[j] + ur[j] * ur[j];
          });
      auto sol = s.run(opt);
      bool ok = sol.fsop_leak < 1e-12;
      if (!ok) res.pass = false;
      res.details.push_back("finite-speed leakage = " + detail::fmt(sol.fsop_leak) +
                            (ok ? "  [< 1e-12]" : "  [LEAK]"));
    }

    // commutator identities
    {
      auto rep = check_commutators();
      if (!rep.pass) res.pass = false;
      for (const auto& c : rep.checks)
        res.details.push_back(c.name + ": " +
                              (c.exact ? "residual " + detail::fmt(c.residual_fine) + " (exact)"
                                       : "rate " + detail::fmt(c.rate)));
    }
  });
}

}  // namespace hfwave
