#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hfwave/pipeline.hpp"

namespace hfwave {

struct StudyConfig {
  std::vector<double> lambdas = {0.2, 0.1, 0.05};
  double t_final = 10.0;
  double r_margin = 5.0;
  double c_cfl = 0.9;
  double res_quadratic = 0.25;  // dr <= this * λ², phase-error budget
  double res_cubic = 0.3;       // dr <= this * λ³ when ∂h is measured
  bool measure_dh = false;      // λ^K remainder derivative norm (slow)
  int weak_count = 5;
};

struct LambdaRun {
  double lambda = 0;
  double dr = 0;
  double sup_h2 = 0;        // sup |Φ - φ - λ F^(1,1) cosθ|
  double sup_h_full = 0;    // sup |Φ - full ansatz|
  double dh_l2 = 0;         // max over slices of ‖∂h‖_{L²}
  double sup_phi_gap = 0;   // sup |Φ - φ|
  double sup_dphi_gap = 0;  // sup |∂_t Φ - ∂_t φ|
  std::vector<double> weak_pairings;
  double sup_Ftilde = 0;
  double max_abs = 0;
};

struct ConvergenceStudy {
  StudyConfig cfg;
  int K = 2;
  double eps = 0;
  std::vector<LambdaRun> runs;
  SlopeFit slope_a;  // log sup_h2 vs log λ, target 2
  SlopeFit slope_b;  // log dh_l2 vs log λ, target K (when measured)
  bool degenerate = false;
  bool monotone_sup_h = true;
};

namespace detail {

inline double study_resolution(const StudyConfig& cfg, double lambda) {
  double dr = lambda / 20.0;
  dr = std::min(dr, cfg.res_quadratic * lambda * lambda);
  if (cfg.measure_dh) dr = std::min(dr, cfg.res_cubic * lambda * lambda * lambda);
  return dr;
}

}  // namespace detail

/// One full nonlinear solve with oscillatory data, measured against the
/// assembled ansatz during the run. The comparison stays on the solve grid
/// and the background is co-evolved there, so the smooth-sector truncation
/// error cancels in the difference.
inline LambdaRun run_full_solve(const AnsatzBundle& bundle, double lambda, const StudyConfig& cfg,
                                double dr_override = 0) {
  const auto& pc = bundle.cfg;
  LambdaRun run;
  run.lambda = lambda;
  run.dr = dr_override > 0 ? dr_override : detail::study_resolution(cfg, lambda);
  if (cfg.t_final > pc.t_store + 1e-9)
    throw std::invalid_argument("study: t_final exceeds the bundle record horizon");

  SpacetimeGrid g =
      SpacetimeGrid::make(pc.R + cfg.t_final + cfg.r_margin, run.dr, cfg.t_final, cfg.c_cfl);
  auto osc = compute_oscillatory_initial_data(bundle, lambda, g);
  run.sup_Ftilde = osc.sup_Ftilde;

  DataProfiles data;
  data.eps = pc.eps;
  data.R = pc.R;
  auto rhs = [&g, &pc](double, const double*, const double* ut, const double* ur, double* out) {
    for (int j = 0; j <= g.J; ++j) out[j] = quadform_radial(pc.q, ut[j], ur[j], ut[j], ur[j]);
  };
  LeapfrogField Phi(g, osc.u0, osc.u1, rhs);
  LeapfrogField phi(g, sample(g, [&](double r) { return pc.phi_amp * data.phi0(r); }),
                    sample(g, [&](double r) { return pc.phi_amp * data.phi1(r); }), rhs);

  // fixed observables for the weak-limit pairings, placed across the annulus
  // band the oscillation occupies at the measurement slice t_final/2
  std::vector<std::vector<double>> chi(cfg.weak_count, std::vector<double>(g.J + 1, 0.0));
  for (int m = 0; m < cfg.weak_count; ++m) {
    double c = 0.5 * cfg.t_final + 0.7 + 1.1 * m / std::max(1, cfg.weak_count - 1);
    for (int j = 0; j <= g.J; ++j) chi[m][j] = bump((g.r(j) - c) / 1.2);
  }
  run.weak_pairings.assign(cfg.weak_count, 0.0);
  const int n_mid = g.n_steps / 2;

  std::vector<double> h_ring[3];
  for (auto& h : h_ring) h.assign(g.J + 1, 0.0);
  std::vector<double> ansatz(g.J + 1), f_on_grid(g.J + 1);
  std::vector<double> tmp_q(bundle.ray_grid.M + 1);

  const auto& gr = bundle.ray_grid;
  for (int n = 0; n <= g.n_steps; ++n) {
    const double t = g.t(n);
    if (n < g.n_steps) {
      Phi.step();
      phi.step();
    }
    // assembled ansatz on this slice
    for (int j = 0; j <= g.J; ++j) ansatz[j] = phi.u()[j];
    for (const auto& [k, field] : bundle.psi) {
      double lk = std::pow(lambda, k);
      for (int j = 0; j <= g.J; ++j) ansatz[j] += lk * field.interp(t, g.r(j));
    }
    double sup_h2_slice = 0;
    bool lead_done = false;
    for (const auto& [key, field] : bundle.F) {
      auto [k, i] = key;
      // hoist the time interpolation: one q-row at t, then cubic in q per j
      double xn = t / gr.dt;
      int n0 = std::max(1, std::min(field.rows() - 3, static_cast<int>(std::floor(xn))));
      double s = xn - n0;
      for (int m = 0; m <= gr.M; ++m) {
        double v[4] = {field.at(n0 - 1, m), field.at(n0, m), field.at(n0 + 1, m),
                       field.at(n0 + 2, m)};
        tmp_q[m] = GridField::cubic(v, s);
      }
      TrigSymbol trig{k, i, 1};
      double lk = std::pow(lambda, k);
      for (int j = 0; j <= g.J; ++j) {
        double q = g.r(j) - t;
        double x = (q - gr.q_lo) / gr.dq;
        double env = (x < 1 || x > gr.M - 2) ? 0.0
                                             : GridField::interp1(tmp_q.data(), gr.M + 1, x);
        f_on_grid[j] = env;
        ansatz[j] += lk * env * trig.eval((t - g.r(j)) / lambda);
      }
      if (k == 1 && i == 1) {
        lead_done = true;
        for (int j = 0; j <= g.J; ++j) {
          double lead = phi.u()[j] +
                        lambda * f_on_grid[j] * std::cos((t - g.r(j)) / lambda);
          sup_h2_slice = std::max(sup_h2_slice, std::abs(Phi.u()[j] - lead));
        }
      }
    }
    if (!lead_done)
      for (int j = 0; j <= g.J; ++j)
        sup_h2_slice = std::max(sup_h2_slice, std::abs(Phi.u()[j] - phi.u()[j]));
    run.sup_h2 = std::max(run.sup_h2, sup_h2_slice);

    auto& h = h_ring[n % 3];
    for (int j = 0; j <= g.J; ++j) {
      h[j] = Phi.u()[j] - ansatz[j];
      run.sup_h_full = std::max(run.sup_h_full, std::abs(h[j]));
      run.sup_phi_gap = std::max(run.sup_phi_gap, std::abs(Phi.u()[j] - phi.u()[j]));
      run.sup_dphi_gap = std::max(run.sup_dphi_gap, std::abs(Phi.ut()[j] - phi.ut()[j]));
    }
    if (cfg.measure_dh && n >= 2) {
      // centered derivatives of the remainder at slice n-1
      const auto& h0 = h_ring[(n - 2) % 3];
      const auto& h1 = h_ring[(n - 1) % 3];
      const auto& h2 = h_ring[n % 3];
      double l2 = 0;
      for (int j = 1; j < g.J; ++j) {
        double ht = (h2[j] - h0[j]) / (2 * g.dt);
        double hr = (h1[j + 1] - h1[j - 1]) / (2 * g.dr);
        double r = g.r(j);
        l2 += (ht * ht + hr * hr) * r * r;
      }
      run.dh_l2 = std::max(run.dh_l2, std::sqrt(4 * M_PI * l2 * g.dr));
    }
    if (n == n_mid) {
      for (int m = 0; m < cfg.weak_count; ++m) {
        double p = 0;
        for (int j = 0; j <= g.J; ++j) {
          double r = g.r(j);
          p += (Phi.ut()[j] - phi.ut()[j]) * chi[m][j] * r * r;
        }
        run.weak_pairings[m] = std::abs(4 * M_PI * p * g.dr);
      }
    }
    run.max_abs = std::max(run.max_abs, Phi.check_finite());
    if (n < g.n_steps) {
      Phi.commit();
      phi.commit();
    }
  }
  return run;
}

/// λ-sweep of full solves against the assembled ansatz.
inline ConvergenceStudy run_convergence_study(const AnsatzBundle& bundle, StudyConfig cfg) {
  if (cfg.lambdas.size() < 3)
    throw std::invalid_argument("study: at least 3 lambda values required");
  ConvergenceStudy st;
  st.cfg = cfg;
  st.K = bundle.cfg.K;
  st.eps = bundle.cfg.eps;
  for (double lam : cfg.lambdas) st.runs.push_back(run_full_solve(bundle, lam, cfg));

  double scale = 0;
  for (const auto& r : st.runs) scale = std::max(scale, r.max_abs);
  if (scale < 1e-14) {
    st.degenerate = true;
    return st;
  }
  std::vector<std::pair<double, double>> pa, pb;
  for (const auto& r : st.runs) {
    pa.push_back({r.lambda, r.sup_h2});
    if (cfg.measure_dh) pb.push_back({r.lambda, r.dh_l2});
  }
  st.slope_a = fit_lambda_scaling(pa);
  if (cfg.measure_dh) st.slope_b = fit_lambda_scaling(pb);
  for (size_t a = 0; a + 1 < st.runs.size(); ++a)
    if (st.runs[a + 1].sup_h_full > 1.10 * st.runs[a].sup_h_full) st.monotone_sup_h = false;
  return st;
}

struct BurnettReport {
  SlopeFit uniform_gap;           // sup |Φ-φ| vs λ, expect slope ~1
  std::vector<SlopeFit> pairings;  // weak pairings vs λ, expect slope >= 0.9
  double min_pairing_slope = 0;
  double grad_gap_at_smallest = 0;  // sup |∂_t Φ - ∂_t φ| at the smallest λ
  double grad_floor = 0;            // 0.4 sup |F0|
  bool pass = false;
};

/// Remark-style weak-limit behavior: Φ_λ → φ uniformly while ∂Φ_λ only
/// converges weakly; pairings against fixed test functions gain one power
/// of λ, the pointwise gradient gap does not shrink.
inline BurnettReport burnett_limit_check(const ConvergenceStudy& st, const AnsatzBundle& bundle) {
  BurnettReport rep;
  if (st.degenerate || st.runs.empty()) return rep;
  std::vector<std::pair<double, double>> gap;
  for (const auto& r : st.runs) gap.push_back({r.lambda, r.sup_phi_gap});
  rep.uniform_gap = fit_lambda_scaling(gap);

  size_t n_pair = st.runs.front().weak_pairings.size();
  rep.min_pairing_slope = 1e9;
  for (size_t m = 0; m < n_pair; ++m) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : st.runs) pts.push_back({r.lambda, r.weak_pairings[m]});
    rep.pairings.push_back(fit_lambda_scaling(pts));
    rep.min_pairing_slope = std::min(rep.min_pairing_slope, rep.pairings.back().slope);
  }
  const LambdaRun* smallest = &st.runs.front();
  for (const auto& r : st.runs)
    if (r.lambda < smallest->lambda) smallest = &r;
  rep.grad_gap_at_smallest = smallest->sup_dphi_gap;
  rep.grad_floor = 0.4 * bundle.cfg.eps * bundle.cfg.F_amp;  // bump peak is eps
  rep.pass = rep.uniform_gap.slope >= 0.9 && rep.min_pairing_slope >= 0.9 &&
             rep.grad_gap_at_smallest >= rep.grad_floor;
  return rep;
}

struct BreakdownReport {
  bool symbolic_fails = false;
  UnmatchedResonance resonance;
  SlopeFit null_slope;     // slope (a) with the null form
  SlopeFit nonnull_slope;  // slope (a) with the tt probe
  bool numeric_degrades = false;
};

/// Re-runs the generation with the quadratic form X_0 Y_0 outside the null
/// span and confirms the unmatched band-0 resonance of shape
/// F^2 Q(∂(t-r),∂(t-r)); numerically, a short-horizon sweep shows the
/// remainder slope degrading well below the null-form baseline.
inline BreakdownReport nonnull_breakdown_experiment(int K, double eps = 0.08,
                                                    double dr_march = 0.01) {
  BreakdownReport rep;
  auto lenient = generate_reduced_system_lenient(K, SystemForm::scalar(QuadForm::time_product()));
  rep.symbolic_fails = !lenient.unmatched.empty();
  if (rep.symbolic_fails) {
    for (const auto& u : lenient.unmatched)
      if (u.harmonic > 0) {
        rep.resonance = u;
        break;
      }
    if (rep.resonance.terms.empty() && !lenient.unmatched.empty())
      rep.resonance = lenient.unmatched.front();
  }

  StudyConfig scfg;
  scfg.lambdas = {0.7, 0.5, 0.35};
  scfg.t_final = 3.0;

  auto run_for = [&](const QuadForm& q) {
    PipelineConfig pc;
    pc.K = K;
    pc.eps = eps;
    pc.q = q;
    pc.dr = dr_march;
    pc.dq = dr_march;
    pc.t_store = scfg.t_final;
    pc.t_march = scfg.t_final;
    pc.lenient = true;
    auto bundle = solve_reduced_system_pipeline(pc);
    return run_convergence_study(bundle, scfg);
  };
  rep.null_slope = run_for(QuadForm::q0()).slope_a;
  rep.nonnull_slope = run_for(QuadForm::time_product()).slope_a;
  rep.numeric_degrades = rep.nonnull_slope.slope < 1.5 && rep.null_slope.slope > 1.5;
  return rep;
}

}  // namespace hfwave
