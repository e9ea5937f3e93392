#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hfwave/eval.hpp"
#include "hfwave/expand.hpp"
#include "hfwave/reduced_system.hpp"

using namespace hfwave;

namespace {

// Semantic equality of oscillator expressions: agreement on a θ sample grid.
bool trig_list_matches(const std::vector<std::pair<Rational, TrigSymbol>>& got,
                       const TrigSymbol& a, const TrigSymbol& b) {
  for (int n = 1; n <= 10; ++n) {
    double th = 0.1 * n;
    double lhs = a.eval(th) * b.eval(th);
    double rhs = 0;
    for (const auto& [c, s] : got) rhs += c.value() * s.eval(th);
    if (std::abs(lhs - rhs) > 1e-12) return false;
  }
  return true;
}

TrigSymbol T(int k, int i) { return TrigSymbol{k, i, 1}; }

}  // namespace

TEST_CASE("rational arithmetic") {
  Rational a(1, 2), b(1, 3);
  CHECK(a + b == Rational(5, 6));
  CHECK(a * b == Rational(1, 6));
  CHECK((a - a).is_zero());
  CHECK(Rational(-4, -8) == Rational(1, 2));
  CHECK(Rational(3, -6).str() == "-1/2");
  CHECK_THROWS(Rational(1, 0));
}

TEST_CASE("trig product: cos*cos splits into harmonics 2 and 0") {
  auto out = trig_product(T(1, 1), T(1, 1));  // cos(th)*cos(th)
  REQUIRE(out.size() == 2);
  CHECK(trig_list_matches(out, T(1, 1), T(1, 1)));
  for (const auto& [c, s] : out) {
    CHECK(c == Rational(1, 2));
    CHECK_FALSE(s.is_sin());
    CHECK((s.harmonic == 2 || s.harmonic == 0));
  }
}

TEST_CASE("trig product: T(2,0) is the identity element") {
  auto out = trig_product(T(2, 0), T(5, 3));
  REQUIRE(out.size() == 1);
  CHECK(out[0].first == Rational(1));
  CHECK(out[0].second.harmonic == 3);
  CHECK(trig_list_matches(out, T(2, 0), T(5, 3)));
}

TEST_CASE("trig product: cos*sin drops the sin(0) partner") {
  auto out = trig_product(T(1, 1), T(2, 1));  // cos(th)*sin(th) = sin(2th)/2
  REQUIRE(out.size() == 1);
  CHECK(out[0].first == Rational(1, 2));
  CHECK(out[0].second.harmonic == 2);
  CHECK(out[0].second.is_sin());
  CHECK(trig_list_matches(out, T(1, 1), T(2, 1)));
}

TEST_CASE("trig product: commutative and associative up to normalization") {
  for (int k1 = 0; k1 <= 6; ++k1)
    for (int i1 = 0; i1 <= 6; ++i1)
      for (int k2 = 0; k2 <= 6; ++k2)
        for (int i2 = 0; i2 <= 6; ++i2) {
          auto ab = trig_product(T(k1, i1), T(k2, i2));
          auto ba = trig_product(T(k2, i2), T(k1, i1));
          for (int n = 1; n <= 5; ++n) {
            double th = 0.17 * n + 0.05;
            double va = 0, vb = 0;
            for (const auto& [c, s] : ab) va += c.value() * s.eval(th);
            for (const auto& [c, s] : ba) vb += c.value() * s.eval(th);
            CHECK(va == doctest::Approx(vb).epsilon(1e-13));
          }
        }
  // associativity on a θ sample, for a fixed triple sweep
  for (int i1 = 0; i1 <= 4; ++i1)
    for (int i2 = 0; i2 <= 4; ++i2)
      for (int i3 = 0; i3 <= 4; ++i3) {
        TrigSymbol a = T(i1, i1), b = T(i2 + 1, i2), c = T(i3, i3);
        double th = 0.37;
        auto eval_list = [&](const std::vector<std::pair<Rational, TrigSymbol>>& l) {
          double v = 0;
          for (const auto& [cc, s] : l) v += cc.value() * s.eval(th);
          return v;
        };
        // (a*b)*c
        double left = 0;
        for (const auto& [c1, s1] : trig_product(a, b))
          left += c1.value() * eval_list(trig_product(s1, c));
        // a*(b*c)
        double right = 0;
        for (const auto& [c2, s2] : trig_product(b, c))
          right += c2.value() * eval_list(trig_product(a, s2));
        CHECK(left == doctest::Approx(right).epsilon(1e-12));
      }
}

TEST_CASE("box expansion constants come out of the differentiation") {
  auto F11 = *make_F(1, 1);

  SUBCASE("Box(g T(1,1)) = Box g T(1,1) + (2/lam) L g T(0,1)") {
    auto e = box_expand_term(F11, T(1, 1));
    REQUIRE(e.terms.size() == 2);
    // normalized order puts the λ^{-1} term first
    CHECK(e.terms[0].lambda_pow == -1);
    CHECK(e.terms[0].coeff == Rational(2));
    CHECK(e.terms[0].trig->is_sin());
    CHECK(e.terms[1].lambda_pow == 0);
    CHECK(e.terms[1].coeff == Rational(1));
  }
  SUBCASE("harmonic 0 kills the transport slot") {
    auto psi2 = *make_psi(2);
    auto e = box_expand_term(psi2, T(2, 0));
    REQUIRE(e.terms.size() == 1);
    CHECK(e.terms[0].lambda_pow == 0);
  }
  SUBCASE("constant scales linearly in the harmonic: Box(g T(2,2))") {
    auto F22 = *make_F(2, 2);
    auto e = box_expand_term(F22, T(2, 2));
    REQUIRE(e.terms.size() == 2);
    CHECK(e.terms[0].lambda_pow == -1);
    CHECK(e.terms[0].coeff == Rational(4));
  }
  SUBCASE("jet oracle: symbolic box expansion equals direct Box(g T)") {
    AnalyticBackend bk(77);
    for (int k = 1; k <= 4; ++k)
      for (int i = 1; i <= k; ++i) {
        auto g = *make_F(k, i);
        auto e = box_expand_term(g, T(k, i));
        for (int s = 0; s < 5; ++s) {
          double t = 0.3 + 0.61 * s, r = 1.7 + 0.43 * s, lam = 0.37;
          Jet2 gj = bk.jet(g, t, r);
          Jet2 theta = (1.0 / lam) * (Jet2::var_t(t) - Jet2::var_r(r));
          Jet2 arg = double(i) * theta;
          Jet2 osc = T(k, i).is_sin() ? Jet2::sin(arg) : Jet2::cos(arg);
          double direct = (gj * osc).box_radial(r);
          double expanded = eval_expr(bk, e, t, r, lam);
          CHECK(direct == doctest::Approx(expanded).epsilon(1e-10));
        }
      }
  }
}

TEST_CASE("null form phase expansion") {
  auto F11 = *make_F(1, 1);
  auto phi = make_phi();

  SUBCASE("Q0: (2/lam) f db0[g] T(0,1) slot") {
    auto e = nullform_phase_expand(QuadForm::q0(), F11, T(1, 1), phi);
    REQUIRE(e.terms.size() == 2);
    CHECK(e.terms[0].lambda_pow == -1);
    CHECK(e.terms[0].coeff == Rational(2));  // (-sin)·(-2 db0)
    REQUIRE(e.terms[0].factors.size() == 2);
    CHECK(e.terms[1].lambda_pow == 0);
  }
  SUBCASE("eikonal self-contraction vanishes for every null form") {
    for (auto q : {QuadForm::q0(), QuadForm::antisym(QKind::Q02), QuadForm::antisym(QKind::Q13)})
      CHECK(q.phase_phase().is_zero());
    CHECK_FALSE(QuadForm::time_product().phase_phase().is_zero());
  }
  SUBCASE("non-null input is rejected") {
    CHECK_THROWS_AS(nullform_phase_expand(QuadForm::time_product(), F11, T(1, 1), phi),
                    NonNullFormError);
  }
  SUBCASE("jet oracle incl. Q_{0m} and Q_{mn} on radial fields") {
    AnalyticBackend bk(99);
    std::vector<QuadForm> forms = {QuadForm::q0(), QuadForm::antisym(QKind::Q01),
                                   QuadForm::antisym(QKind::Q12),
                                   QuadForm::q0(Rational(2)) + QuadForm::antisym(QKind::Q23, Rational(1, 3))};
    for (const auto& q : forms) {
      auto e = nullform_phase_expand(q, F11, T(2, 1), phi);
      for (int s = 0; s < 5; ++s) {
        double t = 0.2 + 0.71 * s, r = 1.3 + 0.39 * s, lam = 0.23;
        Jet2 fj = bk.jet(F11, t, r), gj = bk.jet(phi, t, r);
        Jet2 theta = (1.0 / lam) * (Jet2::var_t(t) - Jet2::var_r(r));
        Jet2 osc = Jet2::sin(theta);  // T(2,1): 2+1 odd
        double direct = quadform_apply(q, fj * osc, gj, bk.omega());
        double expanded = eval_expr(bk, e, t, r, lam);
        CHECK(direct == doctest::Approx(expanded).epsilon(1e-10));
      }
    }
  }
  SUBCASE("Q_{12} phase slot vanishes identically on radial fields") {
    auto e = nullform_phase_expand(QuadForm::antisym(QKind::Q12), F11, T(1, 1), phi);
    AnalyticBackend bk(5);
    for (const auto& m : e.terms) {
      if (m.lambda_pow != -1) continue;
      CHECK(eval_monomial(bk, m, 0.9, 2.1, 0.31) == doctest::Approx(0.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("null form pair expansion") {
  auto F11 = *make_F(1, 1);
  auto F21 = *make_F(2, 1);

  SUBCASE("Q0 pair: lam^0 and lam^-1 bands only, harmonics {0,1,2}") {
    auto e = nullform_pair_expand(QuadForm::q0(), F11, T(1, 1), F11, T(1, 1));
    for (const auto& m : e.terms) {
      CHECK((m.lambda_pow == 0 || m.lambda_pow == -1));
      CHECK(m.harmonic() <= 2);
    }
  }
  SUBCASE("both harmonics zero: no 1/lam terms") {
    auto psi2 = *make_psi(2);
    auto e = nullform_pair_expand(QuadForm::q0(), psi2, T(2, 0), psi2, T(2, 0));
    for (const auto& m : e.terms) CHECK(m.lambda_pow == 0);
  }
  SUBCASE("non-null probe keeps the lam^-2 slot f g Q(du,du)") {
    auto e = nullform_pair_expand(QuadForm::time_product(), F11, T(1, 1), F21, T(2, 1), true);
    bool found = false;
    for (const auto& m : e.terms)
      if (m.lambda_pow == -2) found = true;
    CHECK(found);
    // while every null form cancels it
    auto en = nullform_pair_expand(QuadForm::q0() + QuadForm::antisym(QKind::Q03), F11, T(1, 1),
                                   F21, T(2, 1));
    for (const auto& m : en.terms) CHECK(m.lambda_pow >= -1);
  }
  SUBCASE("jet oracle across forms and symbols") {
    AnalyticBackend bk(2024);
    std::vector<QuadForm> forms = {QuadForm::q0(), QuadForm::antisym(QKind::Q01),
                                   QuadForm::time_product(),
                                   QuadForm::q0() + QuadForm::time_product(Rational(1, 7))};
    for (const auto& q : forms) {
      auto e = nullform_pair_expand(q, F11, T(1, 1), F21, T(2, 2), true);
      for (int s = 0; s < 5; ++s) {
        double t = 0.4 + 0.57 * s, r = 1.9 + 0.33 * s, lam = 0.41;
        Jet2 fj = bk.jet(F11, t, r), gj = bk.jet(F21, t, r);
        Jet2 theta = (1.0 / lam) * (Jet2::var_t(t) - Jet2::var_r(r));
        Jet2 oscf = Jet2::cos(theta);
        Jet2 oscg = Jet2::cos(2.0 * theta);
        double direct = quadform_apply(q, fj * oscf, gj * oscg, bk.omega());
        double expanded = eval_expr(bk, e, t, r, lam);
        CHECK(direct == doctest::Approx(expanded).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("band expansion of the wave operator") {
  SUBCASE("K=2 band 0: Box phi + 2 L F(1,1) T(0,1)") {
    auto bands = expand_box_ansatz(2);
    REQUIRE(bands.bands.count(0));
    auto b0 = bands.bands[0];
    REQUIRE(b0.terms.size() == 2);
    bool saw_box_phi = false, saw_lf = false;
    for (const auto& m : b0.terms) {
      if (!m.trig) {
        saw_box_phi = m.coeff == Rational(1);
      } else {
        saw_lf = m.coeff == Rational(2) && m.trig->harmonic == 1 && m.trig->is_sin();
      }
    }
    CHECK(saw_box_phi);
    CHECK(saw_lf);
  }
  SUBCASE("K=2 band 2 holds the Box F(2,i)") {
    auto bands = expand_box_ansatz(2);
    REQUIRE(bands.bands.count(2));
    CHECK(bands.bands[2].terms.size() == 2);
    for (const auto& m : bands.bands[2].terms) {
      REQUIRE(m.factors.size() == 1);
      const auto& f = std::get<FieldSymbol>(m.factors[0]);
      CHECK(f.name == FieldName::F);
      CHECK(f.derivs[0].tag == DerivTag::Box);
    }
  }
  SUBCASE("jet oracle: sum of bands equals Box of the assembled ansatz") {
    AnalyticBackend bk(31337);
    for (int K : {2, 3, 4}) {
      auto bands = expand_box_ansatz(K);
      for (int s = 0; s < 4; ++s) {
        double t = 0.5 + 0.47 * s, r = 2.1 + 0.29 * s, lam = 0.33;
        double direct = ansatz_jet(bk, K, 1, t, r, lam).box_radial(r);
        double expanded = 0;
        for (const auto& [p, ex] : bands.bands)
          expanded += std::pow(lam, p) * eval_expr(bk, ex, t, r, lam);
        CHECK(direct == doctest::Approx(expanded).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("band expansion of the null form") {
  auto form = SystemForm::scalar(QuadForm::q0());

  SUBCASE("K=2 band 0: Q(dphi,dphi) + 4 F db0[phi] T(0,1)") {
    auto qq = expand_nullform_ansatz(2, form);
    REQUIRE(qq.bands.count(0));
    bool saw_q = false, saw_slot = false;
    for (const auto& m : qq.bands[0].terms) {
      if (!m.trig && m.factors.size() == 1 && std::holds_alternative<QFactor>(m.factors[0]))
        saw_q = m.coeff == Rational(1);
      if (m.trig && m.trig->harmonic == 1) {
        // two cross pairs (phi,F) and (F,phi), each contributing 2 F db0[phi]
        saw_slot = m.coeff == Rational(4);
      }
    }
    CHECK(saw_q);
    CHECK(saw_slot);
  }
  SUBCASE("K=4 band 2 contains a non-oscillating F(1,1) self-interaction") {
    auto qq = expand_nullform_ansatz(4, form);
    REQUIRE(qq.bands.count(2));
    bool found = false;
    for (const auto& m : qq.bands[2].terms) {
      if (m.trig) continue;
      for (const auto& f : m.factors)
        if (std::holds_alternative<QFactor>(f)) {
          const auto& q = std::get<QFactor>(f);
          if (q.a.name == FieldName::F && q.a.k == 1 && q.b.name == FieldName::F && q.b.k == 1)
            found = true;
        }
    }
    CHECK(found);
  }
  SUBCASE("jet oracle: bands plus tail equal Q(dPhi,dPhi) directly") {
    AnalyticBackend bk(60601);
    std::vector<SystemForm> forms = {
        SystemForm::scalar(QuadForm::q0()),
        SystemForm::scalar(QuadForm::q0(Rational(2)) + QuadForm::antisym(QKind::Q01, Rational(1, 2))),
        SystemForm::scalar(QuadForm::time_product())};
    for (const auto& f : forms) {
      for (int K : {2, 3, 4}) {
        auto qq = expand_nullform_ansatz(K, f, 1, true);
        for (int s = 0; s < 4; ++s) {
          double t = 0.8 + 0.51 * s, r = 2.4 + 0.37 * s, lam = 0.29;
          double direct = ansatz_nullform_direct(bk, K, f, 1, t, r, lam);
          double expanded = std::pow(lam, K) * eval_expr(bk, qq.tail, t, r, lam);
          for (const auto& [p, ex] : qq.bands)
            expanded += std::pow(lam, p) * eval_expr(bk, ex, t, r, lam);
          CHECK(direct == doctest::Approx(expanded).epsilon(1e-9));
        }
      }
    }
  }
}

TEST_CASE("reduced system generation") {
  auto form = SystemForm::scalar(QuadForm::q0());

  SUBCASE("(BG) is exactly Box phi = Q(dphi,dphi)") {
    auto sys = generate_reduced_system(2, form);
    REQUIRE(sys.background[0].rhs.terms.size() == 1);
    const auto& m = sys.background[0].rhs.terms[0];
    CHECK(m.coeff == Rational(1));
    CHECK(std::holds_alternative<QFactor>(m.factors[0]));
  }
  SUBCASE("(T(1,1)) carries the derived constant: L F = 2 F db0[phi]") {
    auto sys = generate_reduced_system(2, form);
    const auto& eq = sys.T(1, 1);
    CHECK(eq.match_coeff == Rational(2));
    REQUIRE(eq.rhs.terms.size() == 1);
    CHECK(eq.rhs.terms[0].coeff == Rational(2));
    REQUIRE(eq.rhs.terms[0].factors.size() == 2);
    bool saw_plain_f = false, saw_db0_phi = false;
    for (const auto& fac : eq.rhs.terms[0].factors) {
      const auto& f = std::get<FieldSymbol>(fac);
      if (f.name == FieldName::F && f.derivs.empty()) saw_plain_f = true;
      if (f.name == FieldName::Phi && f.derivs.size() == 1 &&
          f.derivs[0].tag == DerivTag::DBar0)
        saw_db0_phi = true;
    }
    CHECK(saw_plain_f);
    CHECK(saw_db0_phi);
  }
  SUBCASE("K=4: W(2) exists, W(3) does not, psi^(3) absent") {
    auto sys = generate_reduced_system(4, form);
    CHECK(sys.wave.count({2, 1}) == 1);
    CHECK(sys.wave.count({3, 1}) == 0);
    // W(2) references psi^(2) only through the self term Q(dpsi2, dphi)
    bool saw_self = false;
    for (const auto& m : sys.W(2).rhs.terms)
      for (const auto& f : m.factors)
        if (std::holds_alternative<QFactor>(f)) {
          const auto& q = std::get<QFactor>(f);
          if ((q.a.name == FieldName::Psi && q.b.name == FieldName::Phi) ||
              (q.b.name == FieldName::Psi && q.a.name == FieldName::Phi))
            saw_self = true;
        }
    CHECK(saw_self);
  }
  SUBCASE("triangular structure of the transport right sides") {
    auto sys = generate_reduced_system(5, form);
    for (const auto& [key, eq] : sys.transport) {
      for (const auto& m : eq.rhs.terms) {
        auto check_field = [&](const FieldSymbol& f) {
          if (f.name == FieldName::F) {
            if (f.derivs.size() == 1 && f.derivs[0].tag == DerivTag::Box) {
              CHECK(f.k == eq.k - 1);
            } else if (f.derivs.empty() && f.k == eq.k) {
              CHECK(f.i == eq.i);  // the self term F^(k,i) dbar(phi)
            } else {
              CHECK(f.k <= eq.k - 1);
            }
          }
          if (f.name == FieldName::Psi) CHECK(f.k <= eq.k - 1);
        };
        for (const auto& f : m.factors) {
          if (std::holds_alternative<FieldSymbol>(f)) check_field(std::get<FieldSymbol>(f));
          if (std::holds_alternative<QFactor>(f)) {
            check_field(std::get<QFactor>(f).a);
            check_field(std::get<QFactor>(f).b);
          }
        }
      }
    }
  }
  SUBCASE("zero residual for K up to 6 and several null forms") {
    std::vector<SystemForm> forms = {
        SystemForm::scalar(QuadForm::q0()),
        SystemForm::scalar(QuadForm::q0(Rational(1, 2)) + QuadForm::antisym(QKind::Q12)),
        SystemForm::scalar(QuadForm::q0(Rational(2)) + QuadForm::antisym(QKind::Q01, Rational(1, 3)) +
                           QuadForm::antisym(QKind::Q23, Rational(-1)))};
    for (const auto& f : forms)
      for (int K = 2; K <= 6; ++K) {
        auto sys = generate_reduced_system(K, f);
        auto res = reduced_system_residual(sys);
        CHECK(res.empty());
      }
  }
  SUBCASE("two-component system with cross coupling") {
    SystemForm f(2);
    f.set(1, 1, 2, QuadForm::q0());
    f.set(2, 1, 1, QuadForm::q0(Rational(1, 2)));
    f.set(2, 1, 2, QuadForm::antisym(QKind::Q12));
    for (int K : {2, 3, 4}) {
      auto sys = generate_reduced_system(K, f);
      CHECK(reduced_system_residual(sys, 1).empty());
      CHECK(reduced_system_residual(sys, 2).empty());
    }
  }
}

TEST_CASE("half-chessboard verification") {
  SUBCASE("null forms pass for K up to 6") {
    for (int K = 2; K <= 6; ++K) {
      auto rep = verify_halfchessboard(K, SystemForm::scalar(QuadForm::q0()));
      CHECK(rep.pass);
    }
  }
  SUBCASE("K=2 passes with no psi functions present") {
    auto sys = generate_reduced_system(2, SystemForm::scalar(QuadForm::q0()));
    CHECK(sys.wave.empty());
    CHECK(verify_halfchessboard(2, SystemForm::scalar(QuadForm::q0())).pass);
  }
  SUBCASE("non-null probe fails at band 0 with harmonic 2") {
    auto rep = verify_halfchessboard(2, SystemForm::scalar(QuadForm::time_product()));
    CHECK_FALSE(rep.pass);
    REQUIRE_FALSE(rep.violations.empty());
    CHECK(rep.violations[0].first == 0);
    CHECK(rep.violations[0].second == 2);
  }
  SUBCASE("mixed Q0 + 0.1 tt also resonates") {
    auto probe = QuadForm::q0() + QuadForm::time_product(Rational(1, 10));
    CHECK_FALSE(verify_halfchessboard(2, SystemForm::scalar(probe)).pass);
  }
}

TEST_CASE("non-null resonance carries the F^2 Q(du,du) shape") {
  try {
    generate_reduced_system(2, SystemForm::scalar(QuadForm::time_product()));
    CHECK(false);
  } catch (const ResonanceError& err) {
    CHECK(err.resonance.band == 0);
    CHECK(err.resonance.harmonic == 2);
    REQUIRE_FALSE(err.resonance.terms.terms.empty());
    const auto& m = err.resonance.terms.terms[0];
    int f_count = 0;
    bool phase_marker = false;
    for (const auto& f : m.factors) {
      if (std::holds_alternative<FieldSymbol>(f) &&
          std::get<FieldSymbol>(f).name == FieldName::F)
        ++f_count;
      if (std::holds_alternative<QFactor>(f) &&
          std::get<QFactor>(f).a.name == FieldName::PhaseU)
        phase_marker = true;
    }
    CHECK(f_count == 2);
    CHECK(phase_marker);
  }
}

TEST_CASE("serialization") {
  auto sys = generate_reduced_system(3, SystemForm::scalar(QuadForm::q0()));
  auto j = to_json(sys);
  CHECK(j["K"] == 3);
  CHECK(j["transport"].size() == 6);  // (1,1),(2,1),(2,2),(3,1),(3,2),(3,3)
  auto listing = to_listing(sys);
  CHECK(listing.find("(BG)") != std::string::npos);
  CHECK(listing.find("(T(1,1))") != std::string::npos);
  CHECK(listing.find("(W(2))") != std::string::npos);
}
