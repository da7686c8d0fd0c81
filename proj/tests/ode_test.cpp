#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <stieltjes/g_calculus.hpp>
#include <stieltjes/ode.hpp>
#include <stieltjes/special.hpp>

#include "fixtures.hpp"

using namespace stieltjes;

namespace {

State<double, 1> linear(double lam, const State<double, 1>& x) { return {lam * x[0]}; }

}  // namespace

TEST(Grid, ContainsAtomsAndBreakpoints) {
  auto d = fixtures::mixed();
  auto g = StieltjesGrid::build(d, 0.0, 2.0, 1e-2);
  for (double p : {0.0, 0.3, 0.7, 1.2, 2.0})
    EXPECT_TRUE(std::binary_search(g.nodes.begin(), g.nodes.end(), p)) << p;
  for (std::size_t i = 0; i + 1 < g.nodes.size(); ++i) {
    EXPECT_LT(g.nodes[i], g.nodes[i + 1]);
    double inc = d(g.nodes[i + 1]) - d.right_limit(g.nodes[i]);
    EXPECT_LE(inc, 1e-2 * (1 + 1e-12));
    EXPECT_EQ(static_cast<bool>(g.is_atom[i]), d.is_atom(g.nodes[i]));
  }
  // no interior nodes inside the flat run
  for (double t : g.nodes) EXPECT_FALSE(t > 0.3 && t < 0.7);
  auto [fine, map] = g.refine(d, 4);
  for (std::size_t k = 0; k < g.nodes.size(); ++k) EXPECT_EQ(fine.nodes[map[k]], g.nodes[k]);
}

TEST(Euler, ZeroFieldIsConstant) {
  auto d = fixtures::jump_g();
  auto grid = StieltjesGrid::build(d, 0, 1, 1e-2);
  auto tr = euler_stieltjes<double, 1>([](double, const State<double, 1>&) { return State<double, 1>{0.0}; },
                                       {3.5}, grid, d);
  for (auto& s : tr.pre) EXPECT_EQ(s[0], 3.5);
}

TEST(Euler, FirstOrderConvergenceOnIdentity) {
  auto id = Derivator::identity(0, 1);
  double prev_err = 0.0;
  for (double mesh : {1e-2, 5e-3, 2.5e-3}) {
    auto grid = StieltjesGrid::build(id, 0, 1, mesh);
    auto tr = euler_stieltjes<double, 1>([](double, const State<double, 1>& x) { return linear(0.7, x); },
                                         {1.0}, grid, id);
    double err = std::abs(tr.pre.back()[0] - std::exp(0.7));
    if (prev_err > 0) {
      EXPECT_NEAR(prev_err / err, 2.0, 0.05);
    }
    prev_err = err;
  }
}

TEST(Euler, ExactAcrossAtoms) {
  auto g = fixtures::jump_g();
  auto grid = StieltjesGrid::build(g, 0, 1, 1e-3);
  auto tr = euler_stieltjes<double, 1>([](double, const State<double, 1>& x) { return linear(0.4, x); },
                                       {1.0}, grid, g);
  auto k = static_cast<std::size_t>(
      std::lower_bound(tr.t.begin(), tr.t.end(), 0.5) - tr.t.begin());
  EXPECT_DOUBLE_EQ(tr.post[k][0], tr.pre[k][0] * 1.4);
}

TEST(Euler, DivergenceIsReported) {
  auto id = Derivator::identity(0, 2);
  auto grid = StieltjesGrid::build(id, 0, 2, 1e-3);
  auto blow = [](double, const State<double, 1>& x) { return State<double, 1>{x[0] * x[0]}; };
  EXPECT_THROW((euler_stieltjes<double, 1>(blow, {1.0}, grid, id)), divergence_error);
}

TEST(Solve, ConvergesToGExponential) {
  for (const auto& [name, d] : fixtures::all()) {
    for (double lam : {0.3, -0.3, 2.0}) {
      auto sol = solve_stieltjes<double, 1>(
          [lam](double, const State<double, 1>& x) { return linear(lam, x); }, {1.0}, d.lo(),
          d.hi(), d);
      ExpG e(d, lam, d.lo());
      for (int i = 0; i <= 40; ++i) {
        double t = d.lo() + (d.hi() - d.lo()) * i / 40;
        EXPECT_NEAR(sol(t)[0], e(t).real(), 1e-6 * std::max(1.0, std::abs(e(t)))) << name << " " << t;
      }
    }
  }
}

TEST(SecondOrder, ClassicalHyperbolic) {
  auto id = Derivator::identity(0, 2);
  const double lam = 1.7;
  complex x0 = 0.4, v0 = -1.1;
  auto sol = solve_second_order([](double) { return complex(0); }, [&](double) { return complex(-lam); },
                                [](double) { return complex(0); }, x0, v0, 0, 2, id);
  double r = std::sqrt(lam);
  for (double x : {0.0, 0.33, 1.0, 1.77, 2.0}) {
    double exact = x0.real() * std::cosh(r * x) + v0.real() / r * std::sinh(r * x);
    EXPECT_NEAR(sol.value(x).real(), exact, 1e-6);
    double dexact = x0.real() * r * std::sinh(r * x) + v0.real() * std::cosh(r * x);
    EXPECT_NEAR(sol.derivative(x).real(), dexact, 1e-6);
  }
}

TEST(SecondOrder, ZeroDataGivesZero) {
  auto h = fixtures::plateau_h();
  auto sol = solve_second_order([](double) { return complex(0.3); }, [](double x) { return complex(x); },
                                [](double) { return complex(0); }, 0.0, 0.0, 0, 2, h);
  for (double x : {0.0, 0.5, 1.25, 1.5, 2.0}) EXPECT_EQ(sol.value(x), complex(0.0));
}

TEST(SecondOrder, VariableCoefficientResidual) {
  auto h = fixtures::plateau_h();
  const double lam = 1.0;
  auto q = [&](double x) { return complex(-lam / h(x)); };
  auto sol = solve_second_order([](double) { return complex(0); }, q, [](double) { return complex(0); },
                                1.0, 0.5, 0, 2, h);
  auto dv = [&](double x) { return sol.derivative(x); };
  std::vector<double> pts = fixtures::regular_points(h, 0, 2, 12);
  pts.push_back(1.5);
  pts.push_back(1.2);
  for (double x : pts) {
    auto res = g_derivative(dv, x, h) - lam / h(h.t_star(x)) * sol.value(h.t_star(x));
    EXPECT_LT(std::abs(res), 1e-5) << x;
    auto res2 = sol.second_derivative(x) - lam / h(h.t_star(x)) * sol.value(h.t_star(x));
    EXPECT_LT(std::abs(res2), 1e-12) << x;
  }
}

TEST(SecondOrder, AgreesWithClosedFormOnConstantCoefficients) {
  auto h = fixtures::plateau_h();
  const complex lam = 0.6;
  complex r = std::sqrt(lam);
  complex x0 = 1.0, v0 = -0.3;
  // a + b = x0, r (a - b) = v0
  complex a = 0.5 * (x0 + v0 / r), b = 0.5 * (x0 - v0 / r);
  ExpG ep(h, r), em(h, -r);
  auto sol = solve_second_order([](double) { return complex(0); }, [&](double) { return -lam; },
                                [](double) { return complex(0); }, x0, v0, 0, 2, h);
  for (int i = 0; i <= 20; ++i) {
    double x = 0.1 * i;
    complex exact = a * ep(x) + b * em(x);
    EXPECT_NEAR(std::abs(sol.value(x) - exact), 0.0, 1e-6) << x;
  }
}

TEST(SecondOrder, CanonicalPairDeterminant) {
  auto h = fixtures::plateau_h();
  auto q = [&](double x) { return complex(-1.0 / h(x)); };
  auto zero = [](double) { return complex(0); };
  auto v1 = solve_second_order(zero, q, zero, 1.0, 0.0, 0, 2, h);
  auto v2 = solve_second_order(zero, q, zero, 0.0, 1.0, 0, 2, h);
  complex det = v1.value(0) * v2.derivative(0) - v2.value(0) * v1.derivative(0);
  EXPECT_EQ(det, complex(1.0));
}

TEST(SecondOrder, SinCosSystemCrossCheck) {
  auto g = fixtures::jump_g();
  const double b = 1.0;
  auto field = [&](double, const State<double, 2>& s) { return State<double, 2>{b * s[1], -b * s[0]}; };
  auto sol = solve_stieltjes<double, 2>(field, {0.0, 1.0}, 0, 1, g);
  for (double t : {0.25, 0.5, 0.5 + 1e-9, 0.75, 1.0}) {
    auto [s, c] = sin_cos_g(b, t, g);
    EXPECT_NEAR(sol(t)[0], s, 1e-6) << t;
    EXPECT_NEAR(sol(t)[1], c, 1e-6) << t;
  }
  auto post = sol.right_limit(0.5);
  auto pre = sol(0.5);
  // across the atom (s, c) -> (s + c, c - s)
  EXPECT_NEAR(post[0], pre[0] + pre[1], 1e-12);
  EXPECT_NEAR(post[1], pre[1] - pre[0], 1e-12);
}

TEST(Periodic, ZeroForcingUniqueSolutionIsZero) {
  auto id = Derivator::identity(0, 1);
  auto p = solve_periodic_first_order([](double) { return complex(0.5); }, [](double) { return complex(0); },
                                      1.0, id);
  EXPECT_TRUE(p.unique);
  for (double x : {0.0, 0.4, 1.0}) EXPECT_NEAR(std::abs(p(x)), 0.0, 1e-12);
}

TEST(Periodic, ForcedUniqueSolutionIsPeriodic) {
  auto h = fixtures::plateau_h();
  auto p = solve_periodic_first_order([](double) { return complex(-0.8); },
                                      [](double x) { return complex(std::cos(3 * x)); }, 2.0, h);
  EXPECT_TRUE(p.unique);
  EXPECT_NEAR(std::abs(p(0.0) - p(2.0)), 0.0, 1e-6);
}

TEST(Periodic, ClassicalRotationIsNonUnique) {
  const double L = 1.5;
  auto id = Derivator::identity(0, L);
  complex s = complex(0, 2 * std::numbers::pi / L);
  auto p = solve_periodic_first_order([&](double) { return -s; }, [](double) { return complex(0); }, L, id);
  EXPECT_FALSE(p.unique);
  for (double x : {0.0, 0.3, 0.9, L}) EXPECT_NEAR(std::abs(p(x) - std::exp(-s * x)), 0.0, 1e-6);
  EXPECT_NEAR(std::abs(p(0) - p(L)), 0.0, 1e-6);
}

TEST(Periodic, InconsistentForcingHasNoSolution) {
  const double L = 1.0;
  auto id = Derivator::identity(0, L);
  EXPECT_THROW(solve_periodic_first_order([](double) { return complex(0); },
                                          [](double) { return complex(1); }, L, id),
               no_solution_error);
}
