#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "derivator.hpp"
#include "errors.hpp"
#include "g_calculus.hpp"
#include "ode.hpp"
#include "special.hpp"

namespace stieltjes {

// d_g u - c^2 d_h^2 u = 0 on [0,T] x [0,L].
class HeatProblem {
 public:
  HeatProblem(Derivator g, Derivator h, double c, double T, double L)
      : g_(std::move(g)), h_(std::move(h)), c_(c), T_(T), L_(L) {
    if (!(c > 0.0) || !std::isfinite(c)) throw validation_error("HeatProblem: c must be positive");
    if (!(T > 0.0) || !(L > 0.0)) throw validation_error("HeatProblem: T and L must be positive");
    if (g_.lo() > 0.0 || T > g_.hi())
      throw validation_error("HeatProblem: [0,T] must lie in the domain of g");
    if (h_.lo() > 0.0 || L > h_.hi())
      throw validation_error("HeatProblem: [0,L] must lie in the domain of h");
    if (T < g_.hi() && g_.is_atom(T)) warnings_.push_back("T=" + detail::fmt(T) + " is an atom of g");
    if (g_.in_constancy(T)) warnings_.push_back("T=" + detail::fmt(T) + " lies in a constancy interval of g");
    if (L < h_.hi() && h_.is_atom(L)) warnings_.push_back("L=" + detail::fmt(L) + " is an atom of h");
    if (h_.in_constancy(L)) warnings_.push_back("L=" + detail::fmt(L) + " lies in a constancy interval of h");
  }

  const Derivator& g() const { return g_; }
  const Derivator& h() const { return h_; }
  double c() const { return c_; }
  double T() const { return T_; }
  double L() const { return L_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  Derivator g_, h_;
  double c_, T_, L_;
  std::vector<std::string> warnings_;
};

// w(t) v(x) with w = exp_g(lambda c^2; 0, t) and
// v = a exp_h(sqrt(lambda)) + b exp_h(-sqrt(lambda)), or a + b h(x) when lambda = 0.
struct SeparatedTerm {
  complex lambda;
  complex a, b;
};

namespace detail {

// Principal root; +0 imaginary part keeps negative reals on the upper branch.
inline complex principal_sqrt(complex z) {
  if (z.imag() == 0.0) z = complex(z.real(), +0.0);
  return std::sqrt(z);
}

class TermEval {
 public:
  TermEval(const SeparatedTerm& s, const Derivator& g, const Derivator& h, double c)
      : s_(s),
        zero_(s.lambda == complex(0.0)),
        r_(principal_sqrt(s.lambda)),
        w_(g, s.lambda * c * c),
        ep_(h, r_),
        em_(h, -r_) {}

  const SeparatedTerm& term() const { return s_; }
  complex w(double t) const { return w_(t); }
  complex w_right(double t) const { return w_.right_limit(t); }
  complex w_dg(double t) const { return w_.derivative(t); }

  complex v(double x) const { return zero_ ? s_.a + s_.b * ep_.derivator().eval(x) : s_.a * ep_(x) + s_.b * em_(x); }
  complex v_right(double x) const {
    return zero_ ? s_.a + s_.b * ep_.derivator().right_limit(x) : s_.a * ep_.right_limit(x) + s_.b * em_.right_limit(x);
  }
  complex dv(double x) const { return zero_ ? s_.b : r_ * (s_.a * ep_(x) - s_.b * em_(x)); }
  complex dv_right(double x) const {
    return zero_ ? s_.b : r_ * (s_.a * ep_.right_limit(x) - s_.b * em_.right_limit(x));
  }
  complex d2v(double x) const { return zero_ ? complex(0.0) : s_.lambda * v(x); }

 private:
  SeparatedTerm s_;
  bool zero_;
  complex r_;
  ExpG w_, ep_, em_;
};

}  // namespace detail

// Finite superposition of separated terms.
class SeparatedSolution {
 public:
  SeparatedSolution(Derivator g, Derivator h, double c, std::vector<SeparatedTerm> terms)
      : g_(std::move(g)), h_(std::move(h)), c_(c), terms_(std::move(terms)) {
    for (const auto& s : terms_) eval_.emplace_back(s, g_, h_, c_);
  }

  const std::vector<SeparatedTerm>& terms() const { return terms_; }
  const Derivator& g() const { return g_; }
  const Derivator& h() const { return h_; }
  double c() const { return c_; }

  complex operator()(double t, double x) const {
    return sum([&](const detail::TermEval& e) { return e.w(t) * e.v(x); });
  }
  complex right_limit_t(double t, double x) const {
    return sum([&](const detail::TermEval& e) { return e.w_right(t) * e.v(x); });
  }
  complex right_limit_x(double t, double x) const {
    return sum([&](const detail::TermEval& e) { return e.w(t) * e.v_right(x); });
  }
  complex du_dg(double t, double x) const {
    return sum([&](const detail::TermEval& e) { return e.w_dg(t) * e.v(x); });
  }
  complex du_dh(double t, double x) const {
    return sum([&](const detail::TermEval& e) { return e.w(t) * e.dv(x); });
  }
  complex d2u_dh2(double t, double x) const {
    double xs = h_.t_star(x);
    return sum([&](const detail::TermEval& e) { return e.w(t) * e.d2v(xs); });
  }

  // Residual assembled from closed-form values only. At atoms the derivatives are
  // the jump quotients of the exact right limits.
  complex exact_residual(double t, double x) const {
    complex dt;
    if (t < g_.hi() && g_.is_atom(t))
      dt = (right_limit_t(t, x) - (*this)(t, x)) / g_.jump(t);
    else
      dt = du_dg(t, x);
    complex dxx;
    if (x < h_.hi() && h_.is_atom(x)) {
      double gap = h_.jump(x);
      complex d1 = (right_limit_x(t, x) - (*this)(t, x)) / gap;
      complex d1p = sum([&](const detail::TermEval& e) { return e.w(t) * e.dv_right(x); });
      dxx = (d1p - d1) / gap;
    } else {
      dxx = d2u_dh2(t, x);
    }
    return dt - c_ * c_ * dxx;
  }

  // Residual through the numeric g-derivatives of g_calculus.
  complex numeric_residual(double t, double x, const DiffConfig& cfg = {}) const {
    return heat_residual([this](double s, double y) { return (*this)(s, y); }, t, x, g_, h_, c_, cfg);
  }

 private:
  template <class F>
  complex sum(F&& f) const {
    complex s = 0.0;
    for (const auto& e : eval_) s += f(e);
    return s;
  }

  Derivator g_, h_;
  double c_;
  std::vector<SeparatedTerm> terms_;
  std::vector<detail::TermEval> eval_;
};

inline SeparatedSolution general_solution(const HeatProblem& p, std::vector<SeparatedTerm> terms) {
  return SeparatedSolution(p.g(), p.h(), p.c(), std::move(terms));
}

// u0(x) = a0 + b0 h(x) + sum a_n exp_h(sqrt(l_n)) + b_n exp_h(-sqrt(l_n))
struct InitialData {
  complex a0 = 0.0, b0 = 0.0;
  std::vector<SeparatedTerm> modes;

  complex operator()(double x, const Derivator& h) const {
    complex u = a0 + b0 * h.eval(x);
    for (const auto& m : modes) {
      complex r = detail::principal_sqrt(m.lambda);
      u += m.a * exp_g(r, 0.0, x, h) + m.b * exp_g(-r, 0.0, x, h);
    }
    return u;
  }
};

inline SeparatedSolution solve_ivp(const HeatProblem& p, const InitialData& u0) {
  std::vector<SeparatedTerm> terms{{0.0, u0.a0, u0.b0}};
  for (const auto& m : u0.modes) {
    if (m.lambda == complex(0.0))
      throw argument_error("solve_ivp: eigenvalue 0 in the mode list, fold it into a0 and b0");
    terms.push_back(m);
  }
  return SeparatedSolution(p.g(), p.h(), p.c(), std::move(terms));
}

// Cauchy-window estimates on a probe grid. Each tail is the sup over the grid of
// sum |term_n| for the last five n <= N; ratio compares it to the five before.
struct SeriesDiagnostics {
  int N = 0;
  double value_tail = 0.0, dt_tail = 0.0, dx_tail = 0.0, dxx_tail = 0.0;
  double value_ratio = 0.0, dt_ratio = 0.0, dx_ratio = 0.0, dxx_ratio = 0.0;
  bool contracting = true;
  bool all_finite() const {
    for (double v : {value_tail, dt_tail, dx_tail, dxx_tail})
      if (!std::isfinite(v)) return false;
    return true;
  }
};

struct CoefficientStreams {
  complex a0 = 0.0, b0 = 0.0;
  std::function<complex(int)> a, b, lambda;  // n >= 1
};

struct SeriesSolution {
  SeparatedSolution solution;
  SeriesDiagnostics diagnostics;
};

namespace detail {

inline double window(const std::vector<double>& mags, int hi, int len) {
  double s = 0.0;
  for (int n = std::max(1, hi - len + 1); n <= hi; ++n) s += mags[static_cast<std::size_t>(n)];
  return s;
}

inline double window_ratio(double last, double before) {
  if (last == 0.0) return 0.0;
  if (before == 0.0) return std::numeric_limits<double>::infinity();
  return last / before;
}

}  // namespace detail

inline SeriesSolution series_solution(const HeatProblem& p, const CoefficientStreams& s, int N,
                                      int probe = 5) {
  if (N < 1) throw argument_error("series_solution: N must be at least 1");
  if (!s.a || !s.b || !s.lambda) throw argument_error("series_solution: missing coefficient stream");
  std::vector<SeparatedTerm> terms{{0.0, s.a0, s.b0}};
  for (int n = 1; n <= N; ++n) {
    SeparatedTerm t{s.lambda(n), s.a(n), s.b(n)};
    if (!detail::finite_value(t.lambda) || !detail::finite_value(t.a) || !detail::finite_value(t.b))
      throw divergence_error("series_solution: non-finite coefficient at n=" + std::to_string(n), n - 1);
    terms.push_back(t);
  }
  SeparatedSolution sol(p.g(), p.h(), p.c(), terms);

  // per-n sup of |term| over the probe grid, for value, t-, x- and xx-derivative
  std::vector<double> mv(N + 1, 0.0), mt(N + 1, 0.0), mx(N + 1, 0.0), mxx(N + 1, 0.0);
  for (int i = 0; i < probe; ++i) {
    double t = p.T() * i / (probe - 1);
    for (int j = 0; j < probe; ++j) {
      double x = p.L() * j / (probe - 1);
      complex partial = 0.0;
      for (int n = 0; n <= N; ++n) {
        detail::TermEval e(terms[static_cast<std::size_t>(n)], p.g(), p.h(), p.c());
        complex w = e.w(t), v = e.v(x);
        partial += w * v;
        if (!detail::finite_value(partial))
          throw divergence_error("series_solution: non-finite partial sum at n=" + std::to_string(n), n);
        auto k = static_cast<std::size_t>(n);
        mv[k] = std::max(mv[k], std::abs(w * v));
        mt[k] = std::max(mt[k], std::abs(e.w_dg(t) * v));
        mx[k] = std::max(mx[k], std::abs(w * e.dv(x)));
        mxx[k] = std::max(mxx[k], std::abs(w * e.d2v(p.h().t_star(x))));
      }
    }
  }
  SeriesDiagnostics d;
  d.N = N;
  auto fill = [&](const std::vector<double>& m, double& tail, double& ratio) {
    tail = detail::window(m, N, 5);
    ratio = N >= 10 ? detail::window_ratio(tail, detail::window(m, N - 5, 5)) : (tail == 0.0 ? 0.0 : 1.0);
  };
  fill(mv, d.value_tail, d.value_ratio);
  fill(mt, d.dt_tail, d.dt_ratio);
  fill(mx, d.dx_tail, d.dx_ratio);
  fill(mxx, d.dxx_tail, d.dxx_ratio);
  d.contracting = d.all_finite() && d.value_ratio < 0.9 && d.dt_ratio < 0.9 && d.dx_ratio < 0.9 &&
                  d.dxx_ratio < 0.9;
  return {std::move(sol), d};
}

// Real lambda < 0 in [lambda_min, lambda_max] with exp_h(-sqrt(lambda); 0, L) = 1, closest
// to 0 first. lambda = 0 is included when lambda_max >= 0.
inline std::vector<double> find_periodic_eigenvalues(const HeatProblem& p, double lambda_min,
                                                     double lambda_max, int count) {
  if (!(lambda_min < lambda_max) || !(lambda_min < 0.0))
    throw argument_error("find_periodic_eigenvalues: need lambda_min < min(lambda_max, 0)");
  std::vector<double> out;
  if (count <= 0) return out;
  if (lambda_max >= 0.0) out.push_back(0.0);
  const auto& h = p.h();
  const double L = p.L();
  double w_hi = std::sqrt(-lambda_min);
  double w_lo = lambda_max < 0.0 ? std::sqrt(-lambda_max) : 1e-3 * w_hi;
  auto sin_at = [&](double w) { return sin_cos_g(w, L, h).first; };
  auto defect = [&](double w) { return std::abs(exp_g(complex(0.0, -w), 0.0, L, h) - 1.0); };

  const double per_decade = 2048.0;
  auto steps = static_cast<long>(std::ceil(per_decade * std::log10(w_hi / w_lo)));
  steps = std::max(steps, 1L);
  double ratio = std::pow(w_hi / w_lo, 1.0 / static_cast<double>(steps));
  double w0 = w_lo, s0 = sin_at(w0);
  auto accept = [&](double w) {
    if (defect(w) < 1e-9 && (out.empty() || std::abs(-w * w - out.back()) > 1e-9))
      out.push_back(-w * w);
  };
  if (s0 == 0.0) accept(w0);
  for (long i = 1; i <= steps && static_cast<int>(out.size()) < count; ++i) {
    double w1 = i == steps ? w_hi : w_lo * std::pow(ratio, static_cast<double>(i));
    double s1 = sin_at(w1);
    if (s1 == 0.0) {
      accept(w1);
    } else if ((s0 < 0.0) != (s1 < 0.0) && s0 != 0.0) {
      double a = w0, b = w1, sa = s0;
      while (b - a > 1e-12 * std::max(1.0, b)) {
        double m = 0.5 * (a + b), sm = sin_at(m);
        if (sm == 0.0) { a = b = m; break; }
        if ((sm < 0.0) == (sa < 0.0)) { a = m; sa = sm; } else { b = m; }
      }
      double w = 0.5 * (a + b);
      if (defect(a) < defect(w)) w = a;
      if (defect(b) < defect(w)) w = b;
      accept(w);
    }
    w0 = w1;
    s0 = s1;
  }
  if (static_cast<int>(out.size()) > count) out.resize(static_cast<std::size_t>(count));
  return out;
}

// u = w(t) v(x) with v'' = lambda v and v(0) = v(L), v'(0) = v'(L).
class PeriodicSolution {
 public:
  PeriodicSolution(const HeatProblem& p, complex lambda, std::optional<PeriodicFirstOrder> v,
                   complex root)
      : g_(p.g()), h_(p.h()), h_on_period_(p.h().restricted(0.0, p.L())), c_(p.c()), L_(p.L()),
        lambda_(lambda), r_(root),
        w_(p.g(), lambda * p.c() * p.c()), u1_(p.h(), -root), v_(std::move(v)) {}

  complex lambda() const { return lambda_; }
  bool unique() const { return !v_ || v_->unique; }
  complex v(double x) const { return v_ ? (*v_)(x) : complex(1.0); }
  complex dv(double x) const { return v_ ? r_ * v(x) + u1_(x) : complex(0.0); }
  complex operator()(double t, double x) const { return w_(t) * v(x); }
  complex du_dg(double t, double x) const { return w_.derivative(t) * v(x); }
  complex du_dh(double t, double x) const { return w_(t) * dv(x); }
  complex d2u_dh2(double t, double x) const { return lambda_ * (*this)(t, h_.t_star(x)); }

  // t-derivative numerically on u, x-second derivative as the numeric h-derivative of du_dh
  // x-stencils stay inside [0, L], where v is defined
  complex numeric_residual(double t, double x, const DiffConfig& cfg = {}) const {
    auto in_t = [&](double s) { return (*this)(s, x); };
    auto in_x = [&](double y) { return du_dh(t, y); };
    return g_derivative(in_t, t, g_, cfg) - c_ * c_ * g_derivative(in_x, x, h_on_period_, cfg);
  }

  // max over samples of |u(t,0)-u(t,L)| and |du(t,0)-du(t,L)|
  std::pair<double, double> boundary_defects(int samples, double T) const {
    double e0 = 0.0, e1 = 0.0;
    for (int i = 0; i < samples; ++i) {
      double t = samples > 1 ? T * i / (samples - 1) : 0.0;
      e0 = std::max(e0, std::abs((*this)(t, 0.0) - (*this)(t, L_)));
      e1 = std::max(e1, std::abs(du_dh(t, 0.0) - du_dh(t, L_)));
    }
    return {e0, e1};
  }

 private:
  Derivator g_, h_, h_on_period_;
  double c_, L_;
  complex lambda_, r_;
  ExpG w_, u1_;
  std::optional<PeriodicFirstOrder> v_;
};

inline PeriodicSolution periodic_solution(const HeatProblem& p, complex lambda,
                                          const OdeOptions& opt = {}) {
  complex r = detail::principal_sqrt(lambda);
  double gate = std::abs(exp_g(-r, 0.0, p.L(), p.h()) - 1.0);
  if (!(gate < 1e-9))
    throw gate_error("periodic_solution: |exp_h(-sqrt(lambda);0,L) - 1| = " + detail::fmt(gate) +
                     " is not below 1e-9");
  if (lambda == complex(0.0)) return PeriodicSolution(p, lambda, std::nullopt, r);
  ExpG u1(p.h(), -r);
  auto v = solve_periodic_first_order([r](double) { return r; }, [u1](double x) { return u1(x); }, p.L(),
                                      p.h(), opt);
  return PeriodicSolution(p, lambda, std::move(v), r);
}

struct SeriesCondition {
  double value = 0.0;
  double tail_bound = 0.0;
  bool holds = false;
};

// sum (-1)^n w^(2n+1) h_(2n+1)(L)/(2n+1)! = 0 with w = sqrt(-lambda)
inline SeriesCondition check_sin_condition(const Derivator& h, double lambda, double L, int N = 60) {
  if (!(lambda < 0.0)) throw argument_error("check_sin_condition: lambda must be negative");
  auto s = sin_series(std::sqrt(-lambda), L, N, h);
  return {s.value, s.tail_bound, std::abs(s.value) <= s.tail_bound + 1e-9};
}

inline SeriesCondition check_cos_condition(const Derivator& h, double lambda, double L, int N = 60) {
  if (!(lambda < 0.0)) throw argument_error("check_cos_condition: lambda must be negative");
  auto s = cos_series(std::sqrt(-lambda), L, N, h);
  return {s.value, s.tail_bound, std::abs(s.value - 1.0) <= s.tail_bound + 1e-9};
}

struct BoundaryReport {
  double boundary_defect = 0.0;  // max over sampled t at x = 0 and x = L
  double residual_defect = 0.0;  // max numeric heat residual on the probe grid
};

struct BoundarySolution {
  SeparatedSolution solution;
  BoundaryReport report;
};

namespace detail {

inline double probe_residual(const SeparatedSolution& u, double T, double L, int n) {
  double worst = 0.0;
  const auto& g = u.g();
  const auto& h = u.h();
  for (int i = 1; i < n; ++i) {
    for (int j = 1; j < n; ++j) {
      double t = T * i / n, x = L * j / n;
      if (!g.is_regular(t) || !h.is_regular(x)) continue;
      worst = std::max(worst, std::abs(u.numeric_residual(t, x)));
    }
  }
  return worst;
}

inline void require_sin_condition(const HeatProblem& p, double lambda, const char* who) {
  auto s = check_sin_condition(p.h(), lambda, p.L());
  if (!s.holds)
    throw gate_error(std::string(who) + ": sine series condition fails (value " + fmt(s.value) +
                     ", tail bound " + fmt(s.tail_bound) + ")");
}

}  // namespace detail

// a exp_g(lambda c^2; 0, t) sin_h(sqrt(-lambda); 0, x)
inline BoundarySolution dirichlet_solution(const HeatProblem& p, double lambda, double a, int samples = 11) {
  detail::require_sin_condition(p, lambda, "dirichlet_solution");
  const complex i2(0.0, 2.0);
  SeparatedSolution u(p.g(), p.h(), p.c(), {{complex(lambda, 0.0), a / i2, -a / i2}});
  BoundaryReport r;
  for (int k = 0; k < samples; ++k) {
    double t = p.T() * k / (samples - 1);
    r.boundary_defect = std::max({r.boundary_defect, std::abs(u(t, 0.0)), std::abs(u(t, p.L()))});
  }
  r.residual_defect = detail::probe_residual(u, p.T(), p.L(), 6);
  return {std::move(u), r};
}

// b exp_g(lambda c^2; 0, t) cos_h(sqrt(-lambda); 0, x). Its h-derivative is
// -b w sqrt(-lambda) sin_h, so the boundary gate is again the sine condition.
inline BoundarySolution neumann_solution(const HeatProblem& p, double lambda, double b, int samples = 11) {
  detail::require_sin_condition(p, lambda, "neumann_solution");
  SeparatedSolution u(p.g(), p.h(), p.c(), {{complex(lambda, 0.0), b / 2.0, b / 2.0}});
  BoundaryReport r;
  for (int k = 0; k < samples; ++k) {
    double t = p.T() * k / (samples - 1);
    r.boundary_defect = std::max({r.boundary_defect, std::abs(u.du_dh(t, 0.0)), std::abs(u.du_dh(t, p.L()))});
  }
  r.residual_defect = detail::probe_residual(u, p.T(), p.L(), 6);
  return {std::move(u), r};
}

}  // namespace stieltjes
