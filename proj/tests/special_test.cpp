#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <stieltjes/g_calculus.hpp>
#include <stieltjes/ls_integral.hpp>
#include <stieltjes/special.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace stieltjes;

TEST(ExpG, WorkedValue) {
  auto g = fixtures::jump_g();
  auto v = exp_g(complex(0.15), 0.0, 1.0, g);
  EXPECT_NEAR(v.real(), 1.15 * std::exp(0.15), 1e-14);
  EXPECT_NEAR(v.real(), 1.336109, 1e-6);
  EXPECT_EQ(v.imag(), 0.0);
}

TEST(ExpG, TrivialCases) {
  auto g = fixtures::jump_g();
  EXPECT_EQ(exp_g(complex(2.0, 1.0), 0.3, 0.3, g), complex(1.0));
  auto id = Derivator::identity(-1, 3);
  for (complex lam : {complex(0.3), complex(-2.0), complex(0, 1), complex(0.5, -0.7)})
    for (double t : {-0.5, 0.0, 1.0, 2.5}) {
      auto v = exp_g(lam, -1.0, t, id);
      EXPECT_NEAR(std::abs(v - std::exp(lam * (t + 1.0))), 0.0, 1e-13);
    }
  EXPECT_THROW(exp_g(complex(1.0), 0.5, 0.2, g), domain_error);
}

TEST(ExpG, FunctionCoefficientMatchesConstant) {
  auto d = fixtures::mixed();
  for (double t : {0.0, 0.2, 0.7, 1.1, 2.0}) {
    auto a = exp_g(complex(0.4, 0.2), 0.0, t, d);
    auto b = exp_g([](double) { return complex(0.4, 0.2); }, 0.0, t, d, 1e-13);
    EXPECT_NEAR(std::abs(a - b), 0.0, 1e-12);
  }
  // p(s) = s on the identity: exp(t^2/2)
  auto id = Derivator::identity(0, 2);
  EXPECT_NEAR(exp_g([](double s) { return s; }, 0.0, 1.5, id, 1e-13).real(), std::exp(1.125), 1e-12);
}

TEST(ExpG, Regressivity) {
  auto g = fixtures::jump_g();
  EXPECT_EQ(is_regressive(complex(0.15), g, 0, 1).kind, RegressivityKind::StronglyRegressive);
  for (const auto& [name, d] : fixtures::all())
    for (double lam : {0.0, 0.5, 7.0})
      EXPECT_EQ(is_regressive(complex(lam), d, d.lo(), d.hi()).kind,
                RegressivityKind::StronglyRegressive)
          << name;
  auto r = is_regressive(complex(-1.0), g, 0, 1);
  EXPECT_EQ(r.kind, RegressivityKind::Degenerate);
  ASSERT_TRUE(r.degenerate_at.has_value());
  EXPECT_EQ(*r.degenerate_at, 0.5);
  EXPECT_EQ(is_regressive(complex(-3.0), g, 0, 1).kind, RegressivityKind::Regressive);
  EXPECT_EQ(is_regressive(complex(0, 1), g, 0, 1).kind, RegressivityKind::Regressive);
  EXPECT_EQ(exp_g(complex(-1.0), 0, 0.7, g), complex(0.0));
}

TEST(ExpG, PositiveWhenStronglyRegressive) {
  for (const auto& [name, d] : fixtures::all())
    for (double lam : {-0.9, -0.3, 0.3, 2.0}) {
      if (is_regressive(complex(lam), d, d.lo(), d.hi()).kind != RegressivityKind::StronglyRegressive)
        continue;
      for (int i = 0; i <= 50; ++i) {
        double t = d.lo() + (d.hi() - d.lo()) * i / 50;
        EXPECT_GT(exp_g(complex(lam), d.lo(), t, d).real(), 0.0) << name;
      }
    }
}

TEST(ExpG, SolvesLinearEquation) {
  for (const auto& [name, d] : fixtures::all()) {
    for (complex lam : {complex(0.3), complex(-0.3), complex(2.0), complex(0, 1)}) {
      ExpG e(d, lam, d.lo());
      for (double t : fixtures::regular_points(d, d.lo(), d.hi(), 20)) {
        auto num = g_derivative(e, t, d);
        EXPECT_NEAR(std::abs(num - lam * e(t)), 0.0, 1e-7 * std::max(1.0, std::abs(e(t))))
            << name << " t=" << t;
      }
      for (const auto& a : d.atoms()) {
        auto q = (e.right_limit(a.t) - e(a.t)) / a.gap;
        EXPECT_NEAR(std::abs(q - lam * e(a.t)), 0.0, 1e-14 * std::max(1.0, std::abs(e(a.t))));
      }
    }
  }
}

TEST(ExpG, IntegralForm) {
  for (const auto& [name, d] : fixtures::all()) {
    for (complex lam : {complex(0.3), complex(-0.3), complex(2.0), complex(0, 1)}) {
      ExpG e(d, lam, d.lo());
      for (int i = 1; i <= 5; ++i) {
        double t = d.lo() + (d.hi() - d.lo()) * i / 5;
        auto rhs = 1.0 + lam * integrate(e, d.lo(), t, d, 1e-12);
        EXPECT_NEAR(std::abs(e(t) - rhs), 0.0, 1e-8) << name;
      }
    }
  }
}

TEST(SinCos, InitialValuesAndClassical) {
  auto g = fixtures::jump_g();
  auto [s0, c0] = sin_cos_g(1.3, 0.0, g);
  EXPECT_EQ(s0, 0.0);
  EXPECT_EQ(c0, 1.0);
  auto [sh0, ch0] = sinh_cosh_g(1.3, 0.0, g);
  EXPECT_EQ(sh0, 0.0);
  EXPECT_EQ(ch0, 1.0);
  auto id = Derivator::identity(0, 4);
  for (double t : {0.3, 1.7, 3.9}) {
    auto [s, c] = sin_cos_g(1.3, t, id);
    EXPECT_NEAR(s, std::sin(1.3 * t), 1e-14);
    EXPECT_NEAR(c, std::cos(1.3 * t), 1e-14);
    auto [sh, ch] = sinh_cosh_g(0.7, t, id);
    EXPECT_NEAR(sh, std::sinh(0.7 * t), 1e-14);
    EXPECT_NEAR(ch, std::cosh(0.7 * t), 1e-14);
  }
}

TEST(SinCos, AtomUsesComplexJumpFactor) {
  auto g = fixtures::jump_g();
  auto before = exp_g(complex(0, 1), 0, 0.5, g);
  auto [s, c] = sin_cos_g(1.0, 0.5 + 1e-12, g);
  auto after = before * complex(1.0, 1.0);
  EXPECT_NEAR(c, after.real(), 1e-10);
  EXPECT_NEAR(s, after.imag(), 1e-10);
}

TEST(SinCos, SystemResiduals) {
  const double b = 1.4, a = 0.8;
  for (const auto& [name, d] : fixtures::all()) {
    auto sn = [&](double t) { return sin_cos_g(b, t, d, d.lo()).first; };
    auto cs = [&](double t) { return sin_cos_g(b, t, d, d.lo()).second; };
    auto sh = [&](double t) { return sinh_cosh_g(a, t, d, d.lo()).first; };
    auto ch = [&](double t) { return sinh_cosh_g(a, t, d, d.lo()).second; };
    std::vector<double> pts = fixtures::regular_points(d, d.lo(), d.hi(), 10);
    for (const auto& at : d.atoms()) pts.push_back(at.t);
    for (double t : pts) {
      EXPECT_NEAR(g_derivative(sn, t, d), b * cs(t), 1e-6) << name << " " << t;
      EXPECT_NEAR(g_derivative(cs, t, d), -b * sn(t), 1e-6) << name << " " << t;
      EXPECT_NEAR(g_derivative(sh, t, d), a * ch(t), 1e-6) << name << " " << t;
      EXPECT_NEAR(g_derivative(ch, t, d), a * sh(t), 1e-6) << name << " " << t;
    }
  }
}

TEST(SinCos, TranslatedPairSolvesSystem) {
  const double L = 1.0, b = 1.1;
  auto st = fixtures::staircase(L, 0.4, 5);
  for (int k = 1; k <= 2; ++k) {
    auto sn = [&](double t) { return sin_cos_g(b, t + k * L, st).first; };
    auto cs = [&](double t) { return sin_cos_g(b, t + k * L, st).second; };
    std::vector<double> pts = fixtures::regular_points(st, 0.0, 2.0, 10);
    pts.push_back(1.0);
    pts.push_back(1.8);  // inside a flat run
    for (double t : pts) {
      EXPECT_NEAR(g_derivative(sn, t, st), b * cs(t), 1e-6) << t;
      EXPECT_NEAR(g_derivative(cs, t, st), -b * sn(t), 1e-6) << t;
    }
  }
}

TEST(Monomials, SimpleCases) {
  auto g = fixtures::jump_g();
  EXPECT_NEAR(g_monomial(2, 0.0, 1.0, g), 3.0, 1e-14);
  for (double x : {0.2, 0.5, 0.9})
    EXPECT_NEAR(g_monomial(1, 0.3, x, g), g(x) - g(0.3), 1e-15);
  auto id = Derivator::identity(0, 2);
  MonomialTable tab(id, 0.0, 7);
  for (int n = 0; n <= 7; ++n) EXPECT_NEAR(tab(n, 1.3), std::pow(1.3, n), 1e-13);
  EXPECT_EQ(tab(0, 0.4), 1.0);
}

TEST(Monomials, AgreeWithPiecewisePolynomialOracle) {
  for (const auto& [name, d] : fixtures::all()) {
    const int N = 8;
    oracles::PolyMonomials ref(d, N);
    MonomialTable tab(d, d.lo(), N);
    for (int i = 0; i <= 37; ++i) {
      double x = d.lo() + (d.hi() - d.lo()) * i / 37;
      auto v = tab.all(x);
      for (int n = 0; n <= N; ++n)
        EXPECT_NEAR(v[n], ref(n, x), 1e-11 * std::max(1.0, std::abs(ref(n, x)))) << name;
    }
  }
}

TEST(Monomials, RecursionThroughIntegralOffCenter) {
  // g_2(x) = 2 * signed integral from x0 to x of g_1, with x0 inside the domain
  for (const auto& [name, d] : fixtures::all()) {
    double x0 = d.lo() + 0.55 * (d.hi() - d.lo());
    MonomialTable tab(d, x0, 3);
    auto g1 = [&](double s) { return tab(1, s); };
    auto g2 = [&](double s) { return tab(2, s); };
    for (int i = 0; i <= 10; ++i) {
      double x = d.lo() + (d.hi() - d.lo()) * i / 10;
      EXPECT_NEAR(tab(2, x), 2.0 * integrate_signed(g1, x0, x, d), 1e-11) << name << " " << x;
      EXPECT_NEAR(tab(3, x), 3.0 * integrate_signed(g2, x0, x, d), 1e-11) << name << " " << x;
    }
  }
}

TEST(Monomials, BoundedByPowers) {
  for (const auto& [name, d] : fixtures::all()) {
    const int N = 30;
    MonomialTable tab(d, d.lo(), N);
    for (int i = 0; i <= 50; ++i) {
      double x = d.lo() + (d.hi() - d.lo()) * i / 50;
      double G = d(x) - d(d.lo());
      auto v = tab.all(x);
      for (int n = 0; n <= N; ++n) {
        EXPECT_GE(v[n], 0.0) << name;
        EXPECT_LE(v[n], std::pow(G, n) * (1 + 1e-13)) << name << " n=" << n;
      }
    }
  }
}

TEST(Series, AgreeWithClosedFormsWithinTail) {
  for (const auto& [name, d] : fixtures::all()) {
    auto dn = d.shifted(-d(0.0));
    for (double x : {0.0, 0.4, 1.0, 1.9}) {
      double G = dn(x);
      for (double lam : {0.15, -0.8, 1.5}) {
        if (std::abs(lam) * G > 3.0) continue;
        auto e = exp_series(lam, x, 60, dn);
        auto ref = exp_g(complex(lam), 0.0, x, dn);
        EXPECT_LE(std::abs(e.value - ref), e.tail_bound + 1e-12) << name;
        EXPECT_LT(e.tail_bound, 1e-10);
        auto s = sin_series(lam, x, 60, dn);
        auto c = cos_series(lam, x, 60, dn);
        auto [sr, cr] = sin_cos_g(lam, x, dn);
        EXPECT_LE(std::abs(s.value - sr), s.tail_bound + 1e-12) << name;
        EXPECT_LE(std::abs(c.value - cr), c.tail_bound + 1e-12) << name;
        auto sh = sinh_series(lam, x, 60, dn);
        auto ch = cosh_series(lam, x, 60, dn);
        auto [shr, chr] = sinh_cosh_g(lam, x, dn);
        EXPECT_LE(std::abs(sh.value - shr), sh.tail_bound + 1e-12) << name;
        EXPECT_LE(std::abs(ch.value - chr), ch.tail_bound + 1e-12) << name;
      }
    }
  }
  auto g = fixtures::jump_g();
  auto e = exp_series(0.15, 1.0, 60, g);
  EXPECT_LT(e.tail_bound, 1e-10);
  EXPECT_NEAR(e.value.real(), 1.15 * std::exp(0.15), 1e-13);
}

TEST(Series, ValuesAtZero) {
  auto g = fixtures::jump_g();
  EXPECT_EQ(exp_series(0.7, 0.0, 20, g).value, complex(1.0));
  EXPECT_EQ(sin_series(0.7, 0.0, 20, g).value, 0.0);
  EXPECT_EQ(exp_series(0.7, 0.0, 20, g).tail_bound, 0.0);
}

TEST(Series, ClassicalTaylor) {
  auto id = Derivator::identity(0, 3);
  double x = 1.2;
  auto e = exp_series(0.5, x, 5, id);
  double taylor = 0.0, term = 1.0;
  for (int n = 0; n <= 5; ++n) {
    taylor += term;
    term *= 0.5 * x / (n + 1);
  }
  EXPECT_NEAR(e.value.real(), taylor, 1e-15);
  EXPECT_NEAR(e.tail_bound, std::exp(0.6) - taylor, 1e-14);
}

TEST(Series, TermByTermDerivative) {
  const double lam = 0.9;
  for (const auto& [name, d] : fixtures::all()) {
    auto dn = d.shifted(-d(0.0));
    const int N = 12;
    auto part = [&](int n) { return [&, n](double x) { return exp_series(lam, x, n, dn).value.real(); }; };
    std::vector<double> pts = fixtures::regular_points(dn, 0.0, dn.hi(), 6);
    for (const auto& a : dn.atoms()) pts.push_back(a.t);
    for (double x : pts)
      EXPECT_NEAR(g_derivative(part(N), x, dn), lam * part(N - 1)(x), 1e-7) << name << " " << x;
  }
}
