#pragma once

// Subcommands of the stieltjes tool. Each returns the process exit code:
// 0 ok, 1 check failures, 2 gate, 3 parse/validation, 4 numeric failure.

#include <algorithm>
#include <charconv>
#include <functional>
#include <iomanip>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <stieltjes/g_calculus.hpp>
#include <stieltjes/heat1d.hpp>
#include <stieltjes/heat2d.hpp>
#include <stieltjes/io.hpp>
#include <stieltjes/ls_integral.hpp>
#include <stieltjes/special.hpp>

namespace stieltjes::cli {

enum Exit { ok = 0, checks_failed = 1, gate = 2, parse = 3, numeric = 4 };

struct RunConfig {
  std::string input;
  int nt = 11, nx = 11;
  std::string out;  // empty: stdout
  std::optional<double> tol;
  bool include_atoms = false;
  bool emit_diagnostics = false;

  void validate() const {
    if (nt < 2 || nx < 2) throw argument_error("grid: need at least 2 nodes per axis");
    if (tol && !(*tol > 0.0)) throw argument_error("--tol must be positive");
  }
};

// "21x41" -> (21, 41)
inline std::pair<int, int> parse_grid(const std::string& s) {
  auto pos = s.find('x');
  if (pos == std::string::npos) throw parse_error("grid: expected NTxNX, got \"" + s + "\"");
  int a = 0, b = 0;
  auto r1 = std::from_chars(s.data(), s.data() + pos, a);
  auto r2 = std::from_chars(s.data() + pos + 1, s.data() + s.size(), b);
  if (r1.ec != std::errc{} || r1.ptr != s.data() + pos || r2.ec != std::errc{} || r2.ptr != s.data() + s.size())
    throw parse_error("grid: expected NTxNX, got \"" + s + "\"");
  return {a, b};
}

// shortest decimal that reads back to the same double
inline std::string shortest(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

// A solved problem as two callables on (t, x).
struct Field {
  std::function<complex(double, double)> u;
  std::function<complex(double, double)> residual;
};

inline Field build_field(const io::Problem& p, const DiffConfig& cfg = {}) {
  using io::Mode;
  switch (p.mode) {
    case Mode::ivp:
    case Mode::general:
    case Mode::dirichlet:
    case Mode::neumann: {
      std::shared_ptr<SeparatedSolution> s;
      if (p.mode == Mode::ivp)
        s = std::make_shared<SeparatedSolution>(solve_ivp(*p.heat, p.u0));
      else if (p.mode == Mode::general)
        s = std::make_shared<SeparatedSolution>(general_solution(*p.heat, p.terms));
      else if (p.mode == Mode::dirichlet)
        s = std::make_shared<SeparatedSolution>(dirichlet_solution(*p.heat, p.lambda.real(), p.amplitude).solution);
      else
        s = std::make_shared<SeparatedSolution>(neumann_solution(*p.heat, p.lambda.real(), p.amplitude).solution);
      return {[s](double t, double x) { return (*s)(t, x); },
              [s, cfg](double t, double x) { return s->numeric_residual(t, x, cfg); }};
    }
    case Mode::periodic: {
      auto s = std::make_shared<PeriodicSolution>(periodic_solution(*p.heat, p.lambda));
      return {[s](double t, double x) { return (*s)(t, x); },
              [s, cfg](double t, double x) { return s->numeric_residual(t, x, cfg); }};
    }
    case Mode::gpoly_series: {
      auto s = std::make_shared<GPolySeries>(gpoly_series_solution(*p.G, *p.alpha, p.c, p.T, p.L, p.N, p.probe));
      return {[s](double t, double x) { return (*s)(t, x); },
              [s, cfg](double t, double x) { return s->numeric_residual(t, x, cfg); }};
    }
    case Mode::product_eigen: {
      auto s = std::make_shared<ProductSolution>(
          solve_product_case(*p.G, p.lambda.real(), p.c, p.x0, p.v0, p.T, p.L));
      return {[s](double t, double x) { return (*s)(t, x); },
              [s, cfg](double t, double x) { return s->residual(t, x, cfg); }};
    }
  }
  throw parse_error("unhandled mode");
}

// uniform nodes on [0, end], plus atoms of d in [0, end] when asked
inline std::vector<double> axis(int n, double end, const Derivator& d, bool atoms) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(i == n - 1 ? end : end * i / (n - 1));
  if (atoms)
    for (const auto& a : d.atoms())
      if (a.t >= 0.0 && a.t <= end) v.push_back(a.t);
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

// Maps library exceptions to exit codes with one line on err.
template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const gate_error& e) {
    err << "gate: " << e.what() << "\n";
    return gate;
  } catch (const parse_error& e) {
    err << "parse: " << e.what() << "\n";
    return parse;
  } catch (const validation_error& e) {
    err << "invalid: " << e.what() << "\n";
    return parse;
  } catch (const argument_error& e) {
    err << "invalid: " << e.what() << "\n";
    return parse;
  } catch (const domain_error& e) {
    err << "invalid: " << e.what() << "\n";
    return parse;
  } catch (const tag_error& e) {
    err << "invalid: " << e.what() << "\n";
    return parse;
  } catch (const std::exception& e) {
    err << "numeric: " << e.what() << "\n";
    return numeric;
  }
}

inline int cmd_eval(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    auto p = io::load_problem(cfg.input);
    DiffConfig dc;
    if (cfg.tol) dc.tol = *cfg.tol;
    auto f = build_field(p, dc);
    auto ts = axis(cfg.nt, p.T, p.g(), cfg.include_atoms);
    auto xs = axis(cfg.nx, p.L, p.h(), cfg.include_atoms);
    std::string body = "t,x,u_re,u_im,residual\n";
    for (double t : ts)
      for (double x : xs) {
        complex u = f.u(t, x);
        if (!std::isfinite(u.real()) || !std::isfinite(u.imag()))
          throw evaluation_error("non-finite u at t=" + shortest(t) + ", x=" + shortest(x));
        body += shortest(t) + "," + shortest(x) + "," + shortest(u.real()) + "," + shortest(u.imag()) + ",";
        if (cfg.emit_diagnostics) body += shortest(std::abs(f.residual(t, x)));
        body += "\n";
      }
    out << body;
    return static_cast<int>(ok);
  });
}

struct CheckRow {
  std::string name;
  std::optional<bool> pass;  // unset: value < limit decides
  double value = 0.0;
  double limit = 0.0;
};

namespace detail {

inline std::vector<double> regular_samples(const Derivator& d, double end, int n) {
  std::vector<double> v;
  for (int i = 1; i <= n; ++i) {
    double t = end * (i - 0.37) / n;
    if (d.is_regular(t)) v.push_back(t);
  }
  return v;
}

// exp_g(lambda;0,end) = 1 + lambda int_0^end exp_g dmu, and its g-derivative at regular points
inline void exp_checks(std::vector<CheckRow>& rows, const std::string& tag, const Derivator& d, double end) {
  const complex lam(0.3, 0.0);
  ExpG e(d, lam);
  complex rhs = 1.0 + lam * integrate([&](double s) { return e(s); }, 0.0, end, d, 1e-12);
  rows.push_back({"exp integral identity (" + tag + ")", {}, std::abs(e(end) - rhs), 1e-8});
  double worst = 0.0;
  for (double t : regular_samples(d, end, 8))
    worst = std::max(worst, std::abs(g_derivative([&](double s) { return e(s); }, t, d) - lam * e(t)));
  rows.push_back({"exp derivative (" + tag + ")", {}, worst, 1e-6});
}

// d/dg of int_0^t cos dmu_g returns cos, at regular points and atoms
inline void ftc_check(std::vector<CheckRow>& rows, const std::string& tag, const Derivator& d, double end) {
  auto f = [](double s) { return std::cos(s); };
  IndefiniteIntegral<decltype(f)> F(f, 0.0, d, 1e-12);
  auto pts = regular_samples(d, end, 8);
  for (const auto& a : d.atoms())
    if (a.t >= 0.0 && a.t < end) pts.push_back(a.t);
  double worst = 0.0;
  for (double t : pts) worst = std::max(worst, std::abs(g_derivative(F, t, d) - f(d.t_star(t))));
  rows.push_back({"fundamental theorem (" + tag + ")", {}, worst, 1e-6});
}

template <class R>
double worst_on(const Derivator& g, const Derivator& h, double T, double L, int n, R&& r) {
  double worst = 0.0;
  for (double t : regular_samples(g, T, n))
    for (double x : regular_samples(h, L, n)) worst = std::max(worst, std::abs(r(t, x)));
  return worst;
}

}  // namespace detail

inline std::vector<CheckRow> run_checks(const io::Problem& p, std::optional<double> tol) {
  using io::Mode;
  std::vector<CheckRow> rows;
  const Derivator& g = p.g();
  const Derivator& h = p.h();
  detail::exp_checks(rows, "g", g, p.T);
  detail::exp_checks(rows, "h", h, p.L);
  detail::ftc_check(rows, "g", g, p.T);
  detail::ftc_check(rows, "h", h, p.L);
  const double rtol = tol.value_or(1e-5);

  switch (p.mode) {
    case Mode::ivp:
    case Mode::general: {
      auto u = p.mode == Mode::ivp ? solve_ivp(*p.heat, p.u0) : general_solution(*p.heat, p.terms);
      if (p.mode == Mode::ivp) {
        double worst = 0.0;
        for (int i = 0; i <= 200; ++i) {
          double x = p.L * i / 200;
          worst = std::max(worst, std::abs(u(0.0, x) - p.u0(x, h)));
        }
        rows.push_back({"initial data", {}, worst, 1e-12});
      }
      double exact = 0.0;
      auto ts = axis(21, p.T, g, true), xs = axis(21, p.L, h, true);
      for (double t : ts)
        for (double x : xs) exact = std::max(exact, std::abs(u.exact_residual(t, x)));
      rows.push_back({"heat residual (closed form)", {}, exact, 1e-10});
      rows.push_back({"heat residual (numeric)", {},
                      detail::worst_on(g, h, p.T, p.L, 10, [&](double t, double x) { return u.numeric_residual(t, x); }),
                      rtol});
      break;
    }
    case Mode::periodic: {
      auto u = periodic_solution(*p.heat, p.lambda);
      auto [e0, e1] = u.boundary_defects(11, p.T);
      rows.push_back({"periodic boundary u", {}, e0, 1e-6});
      rows.push_back({"periodic boundary du", {}, e1, 1e-6});
      rows.push_back({"heat residual (numeric)", {},
                      detail::worst_on(g, h, p.T, p.L, 6, [&](double t, double x) { return u.numeric_residual(t, x); }),
                      rtol});
      break;
    }
    case Mode::dirichlet:
    case Mode::neumann: {
      double lam = p.lambda.real();
      auto s = check_sin_condition(h, lam, p.L);
      rows.push_back({"sine series condition", s.holds, std::abs(s.value), s.tail_bound + 1e-9});
      auto b = p.mode == Mode::dirichlet ? dirichlet_solution(*p.heat, lam, p.amplitude)
                                         : neumann_solution(*p.heat, lam, p.amplitude);
      double bd = b.report.boundary_defect;
      if (p.mode == Mode::neumann) {
        bd = 0.0;
        for (int k = 0; k <= 10; ++k) {
          double t = p.T * k / 10;
          bd = std::max({bd, std::abs(b.solution.du_dh(t, 0.0)), std::abs(b.solution.du_dh(t, p.L))});
        }
      }
      rows.push_back({"boundary condition", {}, bd, 1e-9});
      rows.push_back({"heat residual (numeric)", {}, b.report.residual_defect, rtol});
      break;
    }
    case Mode::gpoly_series: {
      auto u = gpoly_series_solution(*p.G, *p.alpha, p.c, p.T, p.L, p.N, p.probe);
      rows.push_back({"radius gate g(T) < sigma/c^2", true, g.eval(p.T), u.radius().gate_sigma / (p.c * p.c)});
      rows.push_back({"series tail bound", std::isfinite(u.tail_bound()), u.tail_bound(), INFINITY});
      CoefficientGrid grid(p.N / 2, p.N);
      if (p.broken) grid.perturb(p.broken->m, p.broken->n, p.broken->delta);
      auto bad = grid.check_recurrence();
      rows.push_back({"coefficient recurrence", bad.empty(), static_cast<double>(bad.size()), 0.0});
      double gap = 0.0;
      for (double t : detail::regular_samples(g, p.T, 3))
        for (double x : detail::regular_samples(h, p.L, 3)) {
          complex a = grid_series_value(grid, *p.G, p.c, *p.alpha, p.N, t, x);
          gap = std::max(gap, std::abs(a - u(t, x)) / std::max(1.0, std::abs(u(t, x))));
        }
      rows.push_back({"coefficient form equals series", {}, gap, 1e-12});
      rows.push_back({"heat residual (numeric)", {},
                      detail::worst_on(g, h, p.T, p.L, 6, [&](double t, double x) { return u.numeric_residual(t, x); }),
                      rtol});
      break;
    }
    case Mode::product_eigen: {
      auto u = solve_product_case(*p.G, p.lambda.real(), p.c, p.x0, p.v0, p.T, p.L);
      const auto& ind = u.independence();
      rows.push_back({"canonical pair determinant", ind.determinant == complex(1.0),
                      std::abs(ind.determinant - 1.0), 0.0});
      rows.push_back({"independence at atoms", ind.independent, 0.0, 0.0});
      double worst = 0.0;
      for (int i = 0; i <= 10; ++i)
        for (int j = 0; j <= 10; ++j) {
          double t = p.T * i / 10, x = p.L * j / 10;
          if (g.is_regular(t) && h.is_regular(x)) worst = std::max(worst, std::abs(u.residual(t, x)));
        }
      rows.push_back({"product residual", {}, worst, rtol});
      break;
    }
  }
  for (auto& r : rows)
    if (!r.pass) r.pass = r.value < r.limit;
  return rows;
}

inline int cmd_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    auto p = io::load_problem(cfg.input);
    for (const auto& w : p.heat ? p.heat->warnings() : std::vector<std::string>{}) err << "warning: " << w << "\n";
    auto rows = run_checks(p, cfg.tol);
    bool all = true;
    for (const auto& r : rows) {
      out << (*r.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(36) << r.name << " " << shortest(r.value)
          << " (limit " << shortest(r.limit) << ")\n";
      all = all && *r.pass;
    }
    return static_cast<int>(all ? ok : checks_failed);
  });
}

inline std::string sigma_text(double s) { return std::isinf(s) ? "infinity" : std::isnan(s) ? "undetermined" : shortest(s); }

inline int cmd_radius(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    auto p = io::load_problem(cfg.input);
    if (!p.alpha) throw parse_error("radius: the problem has no \"alpha\" coefficient stream");
    auto r = radius_sigma(*p.alpha, std::max(p.probe, 8));
    double gT = p.g().eval(p.T);
    double bound = r.gate_sigma / (p.c * p.c);
    out << "sigma = " << sigma_text(r.sigma) << "\n"
        << "gate_sigma = " << sigma_text(r.gate_sigma) << "\n"
        << "trend = " << to_string(r.trend) << "\n"
        << "probe = " << r.probe << "\n"
        << "g(T) = " << shortest(gT) << ", sigma/c^2 = " << sigma_text(bound) << ": "
        << (gT < bound ? "inside" : "outside") << " the gate\n";
    return static_cast<int>(ok);
  });
}

inline int cmd_eigs(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    auto p = io::load_problem(cfg.input);
    if (!p.heat) throw parse_error("eigs: needs a one-variable problem (g, h)");
    auto ev = find_periodic_eigenvalues(*p.heat, p.eigs.lambda_min, p.eigs.lambda_max, p.eigs.count);
    for (double l : ev) out << shortest(l) << "\n";
    if (ev.empty()) err << "no periodic eigenvalues in [" << shortest(p.eigs.lambda_min) << ", "
                        << shortest(p.eigs.lambda_max) << "]\n";
    return static_cast<int>(ok);
  });
}

}  // namespace stieltjes::cli
