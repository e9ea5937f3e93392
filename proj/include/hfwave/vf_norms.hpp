#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hfwave/ghost_weight.hpp"
#include "hfwave/grid.hpp"

namespace hfwave {

/// Radial reduction of the Minkowski vector fields: on radial functions the
/// rotations annihilate and Ω_{0i} reduces to ω_i B, so the effective family
/// is {∂_t, ∂_r, S = t∂_t + r∂_r, B = t∂_r + r∂_t}.
enum class VF { Dt, Dr, S, B };

struct VFField {
  GridField f;
  int margin = 0;  // cells at every record edge where values are invalid
};

/// One centered finite-difference application of Z; the margin grows by one.
inline VFField apply_vector_field(const VFField& in, VF z) {
  const auto& g = in.f.grid();
  VFField out;
  out.f = GridField(g, in.f.rows());
  out.margin = in.margin + 1;
  const int rows = in.f.rows();
  for (int n = out.margin; n < rows - out.margin; ++n) {
    double t = g.t(n);
    for (int j = out.margin; j <= g.J - out.margin; ++j) {
      double r = g.r(j);
      double dt = (in.f.at(n + 1, j) - in.f.at(n - 1, j)) / (2 * g.dt);
      double dr = (in.f.at(n, j + 1) - in.f.at(n, j - 1)) / (2 * g.dr);
      double v = 0;
      switch (z) {
        case VF::Dt: v = dt; break;
        case VF::Dr: v = dr; break;
        case VF::S: v = t * dt + r * dr; break;
        case VF::B: v = t * dr + r * dt; break;
      }
      out.f.at(n, j) = v;
    }
  }
  return out;
}

inline VFField apply_vector_field(const GridField& f, VF z) {
  return apply_vector_field(VFField{f, 0}, z);
}

/// All compositions of the radial family up to the given length, the empty
/// word included.
inline std::vector<std::vector<VF>> vf_multiindices(int max_len) {
  std::vector<std::vector<VF>> out = {{}};
  size_t first = 0;
  for (int len = 1; len <= max_len; ++len) {
    size_t last = out.size();
    for (size_t a = first; a < last; ++a)
      for (VF z : {VF::Dt, VF::Dr, VF::S, VF::B}) {
        auto w = out[a];
        w.push_back(z);
        out.push_back(std::move(w));
      }
    first = last;
  }
  return out;
}

/// Recursive pointwise Z^I application with centered stencils; the caller
/// keeps (n, j) at distance > |I| from the record edges.
inline double vf_apply_point(const GridField& u, const std::vector<VF>& seq, size_t pos, int n,
                             int j) {
  if (pos == seq.size()) return u.at(n, j);
  const auto& g = u.grid();
  double dt =
      (vf_apply_point(u, seq, pos + 1, n + 1, j) - vf_apply_point(u, seq, pos + 1, n - 1, j)) /
      (2 * g.dt);
  double dr =
      (vf_apply_point(u, seq, pos + 1, n, j + 1) - vf_apply_point(u, seq, pos + 1, n, j - 1)) /
      (2 * g.dr);
  switch (seq[pos]) {
    case VF::Dt: return dt;
    case VF::Dr: return dr;
    case VF::S: return g.t(n) * dt + g.r(j) * dr;
    case VF::B: return g.t(n) * dr + g.r(j) * dt;
  }
  return 0;
}

struct EnergyRow {
  double t;
  int level;
  double E;  // Σ_{|I|<=level} ∫ |∂Z^I u|² w(q) r² dr
  double S;  // Σ_{|I|<=level} ∫₀ᵗ ∫ |∂̄ Z^I u|² w'(q) r² dr dτ
};

struct EnergyReport {
  std::vector<EnergyRow> rows;

  double max_E(int level) const {
    double m = 0;
    for (const auto& r : rows)
      if (r.level == level) m = std::max(m, r.E);
    return m;
  }

  void export_csv(const std::string& path, double bound = 0) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "t,level,E,S,bound,margin\n";
    os.precision(17);
    for (const auto& r : rows)
      os << r.t << "," << r.level << "," << r.E << "," << r.S << "," << bound << ","
         << (bound > 0 ? bound - r.E : 0.0) << "\n";
  }
};

/// Weighted vector-field energies of a recorded field, sampled every `stride`
/// slices. Quadrature is the trapezoid rule in r; the ghost integral S
/// accumulates with the same sampling.
inline EnergyReport ghost_energy(const GridField& u, const GhostWeight& w, int max_level,
                                 int stride = 8) {
  const auto& g = u.grid();
  auto words = vf_multiindices(max_level);
  EnergyReport rep;
  std::vector<double> s_accum(max_level + 1, 0.0);
  const int guard = max_level + 2;
  double prev_t = 0;
  for (int n = guard; n < u.rows() - guard; n += stride) {
    double t = g.t(n);
    std::vector<double> e_level(max_level + 1, 0.0), s_level(max_level + 1, 0.0);
    for (const auto& word : words) {
      int lvl = static_cast<int>(word.size());
      double ee = 0, ss = 0;
      for (int j = guard; j <= g.J - guard; ++j) {
        double r = g.r(j);
        double q = r - t;
        double dt = (vf_apply_point(u, word, 0, n + 1, j) - vf_apply_point(u, word, 0, n - 1, j)) /
                    (2 * g.dt);
        double dr = (vf_apply_point(u, word, 0, n, j + 1) - vf_apply_point(u, word, 0, n, j - 1)) /
                    (2 * g.dr);
        double db0 = 0.5 * (dt + dr);
        ee += (dt * dt + dr * dr) * w.eval(q) * r * r;
        ss += db0 * db0 * w.deriv(q) * r * r;
      }
      for (int lv = lvl; lv <= max_level; ++lv) {
        e_level[lv] += 4 * M_PI * ee * g.dr;
        s_level[lv] += 4 * M_PI * ss * g.dr;
      }
    }
    double dtau = (rep.rows.empty() ? t : t - prev_t);
    for (int lv = 0; lv <= max_level; ++lv) {
      s_accum[lv] += s_level[lv] * dtau;
      rep.rows.push_back({t, lv, e_level[lv], s_accum[lv]});
    }
    prev_t = t;
  }
  return rep;
}

struct EnergyInequalityReport {
  double C_fit = 0;          // max_t (E+S) / (E(0) + ∫∫|□u ∂_t u| w)
  double worst_t = 0;
  double identity_residual = 0;  // worst defect of the exact multiplier identity
};

/// Ghost-weight energy inequality on a recorded solution of Box u = source.
/// Also evaluates the exact w(q)∂_t u multiplier identity
///   d/dt ∫ ½|∂u|² w r² dr + 2 ∫ (∂̄₀u)² w' r² dr + ∫ □u ∂_t u w r² dr = 0,
/// whose discrete defect must vanish at O(Δ²).
inline EnergyInequalityReport check_energy_inequality(
    const GridField& u, const std::function<void(int, std::vector<double>&)>& source,
    const GhostWeight& w, int stride = 4) {
  const auto& g = u.grid();
  EnergyInequalityReport rep;
  std::vector<double> src(g.J + 1);

  auto half_energy = [&](int n) {
    double e = 0;
    for (int j = 1; j < g.J; ++j) {
      double r = g.r(j);
      double dt = u.dt(n, j), dr = u.dr(n, j);
      e += 0.5 * (dt * dt + dr * dr) * w.eval(r - g.t(n)) * r * r;
    }
    return 4 * M_PI * e * g.dr;
  };
  // w' jumps between its interior and exterior branches at q = 0; the cell
  // that straddles r = t is split there so the quadrature stays second order.
  auto ghost_term = [&](int n) {
    double t = g.t(n);
    std::vector<double> f(g.J + 1, 0.0);
    for (int j = 1; j < g.J; ++j) {
      double r = g.r(j);
      double db0 = 0.5 * (u.dt(n, j) + u.dr(n, j));
      f[j] = db0 * db0 * r * r;
    }
    double s = 0;
    int jstar = static_cast<int>(std::floor(t / g.dr));
    for (int j = 1; j < g.J - 1; ++j) {
      if (j == jstar && jstar >= 1 && jstar < g.J - 1) {
        double a = (t - g.r(j)) / g.dr;  // kink position inside the cell
        double f_at = f[j] + a * (f[j + 1] - f[j]);
        double fl = 0.5 * (f[j] + f_at), fr = 0.5 * (f_at + f[j + 1]);
        s += g.dr * (a * fl * w.deriv(-1e-12) + (1.0 - a) * fr * w.deriv(1e-12));
      } else {
        double qm = 0.5 * (g.r(j) + g.r(j + 1)) - t;
        s += g.dr * 0.5 * (f[j] + f[j + 1]) * w.deriv(qm);
      }
    }
    return 4 * M_PI * s;
  };
  auto flux_term = [&](int n, bool absolute) {
    source(n, src);
    double f = 0;
    for (int j = 1; j < g.J; ++j) {
      double r = g.r(j);
      double v = src[j] * u.dt(n, j) * w.eval(r - g.t(n)) * r * r;
      f += absolute ? std::abs(v) : v;
    }
    return 4 * M_PI * f * g.dr;
  };

  double S_accum = 0, rhs_accum = 0;
  const double E0 = 2 * half_energy(1);
  double prev_t = g.t(1);
  for (int n = 1 + stride; n < u.rows() - 1; n += stride) {
    double t = g.t(n);
    double dtau = t - prev_t;
    S_accum += 2 * ghost_term(n) * dtau;
    rhs_accum += flux_term(n, true) * dtau;
    double lhs = 2 * half_energy(n) + S_accum;
    double rhs = E0 + 2 * rhs_accum + 1e-300;
    if (lhs / rhs > rep.C_fit) {
      rep.C_fit = lhs / rhs;
      rep.worst_t = t;
    }
    // multiplier identity at slice n (centered energy derivative)
    if (n - stride >= 1 && n + stride < u.rows() - 1) {
      double dE = (half_energy(n + stride) - half_energy(n - stride)) / (2 * stride * g.dt);
      double defect = dE + 2 * ghost_term(n) + flux_term(n, false);
      rep.identity_residual = std::max(rep.identity_residual, std::abs(defect));
    }
    prev_t = t;
  }
  return rep;
}

/// Pointwise Klainerman-Sobolev ratio on one slice:
///   max_j w^{1/2}|f| (1+s) sqrt(1+|q|)  /  Σ_{|I|<=3} ‖w^{1/2} Z^I f‖_L²
inline double ks_ratio(const GridField& f, const GhostWeight& w, int n) {
  const auto& g = f.grid();
  auto words = vf_multiindices(3);
  const int guard = 5;
  if (n < guard || n >= f.rows() - guard) throw std::invalid_argument("ks_ratio: slice too close to the record edge");
  double num = 0;
  for (int j = guard; j <= g.J - guard; ++j) {
    double r = g.r(j), t = g.t(n);
    double q = r - t, s = r + t;
    double v = std::sqrt(w.eval(q)) * std::abs(f.at(n, j)) * (1 + s) * std::sqrt(1 + std::abs(q));
    num = std::max(num, v);
  }
  double den = 0;
  for (const auto& word : words) {
    double l2 = 0;
    for (int j = guard; j <= g.J - guard; ++j) {
      double r = g.r(j);
      double q = r - g.t(n);
      double v = vf_apply_point(f, word, 0, n, j);
      l2 += w.eval(q) * v * v * r * r;
    }
    den += std::sqrt(4 * M_PI * l2 * g.dr);
  }
  if (den == 0) return 0;
  return num / den;
}

// ---------------------------------------------------------------------------
// Commutator spot checks
// ---------------------------------------------------------------------------

namespace detail {

/// Discrete radial d'Alembertian -∂_t² + ∂_r² + (2/r)∂_r on a record.
inline double box_h(const GridField& u, int n, int j) {
  const auto& g = u.grid();
  double dtt = (u.at(n + 1, j) - 2 * u.at(n, j) + u.at(n - 1, j)) / (g.dt * g.dt);
  double drr = (u.at(n, j + 1) - 2 * u.at(n, j) + u.at(n, j - 1)) / (g.dr * g.dr);
  double dr = (u.at(n, j + 1) - u.at(n, j - 1)) / (2 * g.dr);
  return -dtt + drr + 2 * dr / g.r(j);
}

inline double lop_h(const GridField& u, int n, int j) {
  const auto& g = u.grid();
  double dt = (u.at(n + 1, j) - u.at(n - 1, j)) / (2 * g.dt);
  double dr = (u.at(n, j + 1) - u.at(n, j - 1)) / (2 * g.dr);
  return dt + dr + u.at(n, j) / g.r(j);
}

}  // namespace detail

struct CommutatorCheck {
  std::string name;
  double residual_coarse = 0;
  double residual_fine = 0;
  double rate = 0;  // log2(coarse/fine); 0 when both are at roundoff
  bool exact = false;
};

struct CommutatorReport {
  std::vector<CommutatorCheck> checks;
  bool pass = true;
};

/// Verifies, on smooth synthetic fields, [□,∂_t] = 0 (exact discretely),
/// the l=1 reduction of [□,∂_r] = 0, [□,S] = 2□, [𝓛,∂_t] = 0 and
/// [𝓛,S] = 𝓛 at second order under refinement.
inline CommutatorReport check_commutators() {
  auto smooth = [](double t, double r) {
    double rr = r < 1e-9 ? 1e-9 : r;
    return std::sin(t) * std::cos(rr) / rr + 0.3 * std::exp(-0.2 * (rr - 3 - 0.5 * t) * (rr - 3 - 0.5 * t));
  };
  auto outgoing = [](double t, double r) {
    double rr = r < 1e-9 ? 1e-9 : r;
    double q = rr - t;
    return std::exp(-0.5 * (q - 2.0) * (q - 2.0)) / rr;
  };

  auto sample_field = [&](double dr, const std::function<double(double, double)>& f) {
    SpacetimeGrid g = SpacetimeGrid::make(8.0, dr, 2.0);
    GridField u(g, g.n_steps + 1);
    for (int n = 0; n <= g.n_steps; ++n)
      for (int j = 0; j <= g.J; ++j) u.at(n, j) = f(g.t(n), g.r(j));
    return u;
  };

  struct Probe {
    std::string name;
    std::function<double(const GridField&, int, int)> residual;
    const std::function<double(double, double)>* field;
    bool exact;
  };

  // materialized first application, then the outer operator by stencils
  auto commutator_box = [&](const GridField& u, VF z, double factor, bool l1) {
    // returns max |box(Z u) - Z(box u) - factor * box u| over the interior
    const auto& g = u.grid();
    VFField zu = apply_vector_field(u, z);
    GridField boxu(g, u.rows());
    for (int n = 1; n < u.rows() - 1; ++n)
      for (int j = 1; j < g.J; ++j) boxu.at(n, j) = detail::box_h(u, n, j);
    VFField zboxu = apply_vector_field(boxu, z);
    double worst = 0;
    const int guard = 4;
    for (int n = guard; n < u.rows() - guard; ++n)
      for (int j = guard; j <= g.J - guard; ++j) {
        if (g.r(j) < 0.5) continue;  // keep clear of the synthetic 1/r pole
        double lhs = l1 ? detail::box_h(zu.f, n, j) - 2 * zu.f.at(n, j) / (g.r(j) * g.r(j))
                        : detail::box_h(zu.f, n, j);
        double rhs = zboxu.f.at(n, j) + factor * detail::box_h(u, n, j);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    return worst;
  };
  auto commutator_lop = [&](const GridField& u, VF z, double factor) {
    const auto& g = u.grid();
    VFField zu = apply_vector_field(u, z);
    GridField lu(g, u.rows());
    for (int n = 1; n < u.rows() - 1; ++n)
      for (int j = 1; j < g.J; ++j) lu.at(n, j) = detail::lop_h(u, n, j);
    VFField zlu = apply_vector_field(lu, z);
    double worst = 0;
    const int guard = 4;
    for (int n = guard; n < u.rows() - guard; ++n)
      for (int j = guard; j <= g.J - guard; ++j) {
        if (g.r(j) < 0.5) continue;
        double lhs = detail::lop_h(zu.f, n, j);
        double rhs = zlu.f.at(n, j) + factor * detail::lop_h(u, n, j);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    return worst;
  };

  CommutatorReport rep;
  auto add = [&](const std::string& name, double coarse, double fine, bool exact) {
    CommutatorCheck c;
    c.name = name;
    c.residual_coarse = coarse;
    c.residual_fine = fine;
    c.exact = exact;
    if (exact) {
      c.rate = 0;
      if (fine > 1e-9) rep.pass = false;
    } else {
      c.rate = std::log2(coarse / fine);
      if (c.rate < 1.6 || c.rate > 2.6) rep.pass = false;
    }
    rep.checks.push_back(std::move(c));
  };

  for (double pass = 0; pass < 1; ++pass) {
    GridField u1 = sample_field(0.02, smooth), u2 = sample_field(0.01, smooth);
    GridField w1 = sample_field(0.02, outgoing), w2 = sample_field(0.01, outgoing);
    add("[box,dt] = 0", commutator_box(u1, VF::Dt, 0.0, false),
        commutator_box(u2, VF::Dt, 0.0, false), true);
    add("[box,dr] = 0 (l=1 reduction)", commutator_box(u1, VF::Dr, 0.0, true),
        commutator_box(u2, VF::Dr, 0.0, true), false);
    add("[box,S] = 2 box", commutator_box(u1, VF::S, 2.0, false),
        commutator_box(u2, VF::S, 2.0, false), false);
    add("[L,dt] = 0", commutator_lop(u1, VF::Dt, 0.0), commutator_lop(u2, VF::Dt, 0.0), true);
    add("[L,S] = L", commutator_lop(w1, VF::S, 1.0), commutator_lop(w2, VF::S, 1.0), false);
    add("[box,B] = 0 (l=1 reduction)", commutator_box(w1, VF::B, 0.0, true),
        commutator_box(w2, VF::B, 0.0, true), false);
  }
  return rep;
}

}  // namespace hfwave
