#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "derivator.hpp"
#include "ls_integral.hpp"

namespace stieltjes {

enum class RegressivityKind { StronglyRegressive, Regressive, Degenerate };

struct Regressivity {
  RegressivityKind kind = RegressivityKind::StronglyRegressive;
  std::optional<double> degenerate_at;  // first atom with 1 + p*gap == 0
};

// Classifies 1 + p(t)*gap(t) over the atoms in [a, b).
template <class P>
Regressivity is_regressive(P&& p, const Derivator& d, double a, double b) {
  Regressivity r;
  for (const auto& at : d.atoms()) {
    if (at.t < a || at.t >= b) continue;
    complex f = complex(1.0) + complex(p(at.t)) * at.gap;
    if (f == complex(0.0)) return {RegressivityKind::Degenerate, at.t};
    if (!(f.imag() == 0.0 && f.real() > 0.0)) r.kind = RegressivityKind::Regressive;
  }
  return r;
}

inline Regressivity is_regressive(complex p, const Derivator& d, double a, double b) {
  return is_regressive([p](double) { return p; }, d, a, b);
}

// exp_g(p; a, t) for constant p: product over atoms in [a, t) times exp(p * mu_g([a,t) \ D_g)).
inline complex exp_g(complex p, double a, double t, const Derivator& d) {
  if (t < a) throw domain_error("exp_g: t < a");
  complex prod = 1.0;
  for (const auto& at : d.atoms())
    if (at.t >= a && at.t < t) prod *= complex(1.0) + p * at.gap;
  return prod * std::exp(p * d.continuous_measure(a, t));
}

// exp_g for a function-valued coefficient; the continuous part is an atom-excluded integral.
template <class P>
complex exp_g(P&& p, double a, double t, const Derivator& d, double tol) {
  if (t < a) throw domain_error("exp_g: t < a");
  complex prod = 1.0;
  for (const auto& at : d.atoms())
    if (at.t >= a && at.t < t) prod *= complex(1.0) + complex(p(at.t)) * at.gap;
  auto pc = [&p](double s) { return complex(p(s)); };
  return prod * std::exp(integrate(pc, a, t, d, tol, AtomPolicy::exclude));
}

// Constant-coefficient g-exponential as a function of t.
class ExpG {
 public:
  ExpG(Derivator d, complex p, double base = 0.0) : d_(std::move(d)), p_(p), a_(base) {}

  complex operator()(double t) const { return exp_g(p_, a_, t, d_); }
  complex right_limit(double t) const {
    return (*this)(t) * (complex(1.0) + p_ * d_.jump(t));
  }
  // Symbolic g-derivative: p * exp_g(t), valid at every t in the domain.
  complex derivative(double t) const { return p_ * (*this)(t); }

  complex coefficient() const { return p_; }
  double base() const { return a_; }
  const Derivator& derivator() const { return d_; }
  Regressivity regressivity(double until) const { return is_regressive(p_, d_, a_, until); }

 private:
  Derivator d_;
  complex p_;
  double a_;
};

// g-exponential with a coefficient function p(t).
class ExpGFunction {
 public:
  ExpGFunction(Derivator d, std::function<complex(double)> p, double base = 0.0,
               double tol = 1e-12)
      : d_(std::move(d)), p_(std::move(p)), a_(base), tol_(tol) {}

  complex operator()(double t) const { return exp_g(p_, a_, t, d_, tol_); }
  complex right_limit(double t) const {
    return (*this)(t) * (complex(1.0) + p_(t) * d_.jump(t));
  }
  complex derivative(double t) const { return p_(d_.t_star(t)) * (*this)(d_.t_star(t)); }
  complex coefficient(double t) const { return p_(t); }
  const Derivator& derivator() const { return d_; }
  Regressivity regressivity(double until) const { return is_regressive(p_, d_, a_, until); }

 private:
  Derivator d_;
  std::function<complex(double)> p_;
  double a_;
  double tol_;
};

// (sin_g(b; base, t), cos_g(b; base, t))
inline std::pair<double, double> sin_cos_g(double b, double t, const Derivator& d,
                                           double base = 0.0) {
  complex e = exp_g(complex(0.0, b), base, t, d);
  return {e.imag(), e.real()};
}

// (sinh_g(a; base, t), cosh_g(a; base, t))
inline std::pair<double, double> sinh_cosh_g(double a, double t, const Derivator& d,
                                             double base = 0.0) {
  double ep = exp_g(complex(a), base, t, d).real();
  double em = exp_g(complex(-a), base, t, d).real();
  return {0.5 * (ep - em), 0.5 * (ep + em)};
}

// g-monomials g_{x0,n}, n <= order. On each interval where g is continuous,
// g_n(x) = sum_j C(n,j) g_{n-j}(anchor) (g(x) - g(anchor))^j; across an atom,
// g_n(a+) = g_n(a) + n g_{n-1}(a) gap(a).
class MonomialTable {
 public:
  MonomialTable(Derivator d, double center, int order)
      : d_(std::move(d)), x0_(center), order_(order) {
    if (order < 0) throw argument_error("MonomialTable: order must be >= 0");
    if (center < d_.lo() || center > d_.hi()) throw domain_error("MonomialTable: center outside domain");
    base_.gref = d_.eval(x0_);
    base_.vals.assign(order_ + 1, 0.0);
    base_.vals[0] = 1.0;

    Anchor prev = base_;
    for (const auto& at : d_.atoms()) {
      if (at.t < x0_) continue;
      auto left = expand(prev, d_.eval(at.t));
      Anchor a{d_.right_limit(at.t), left};
      for (int n = order_; n >= 1; --n) a.vals[n] = left[n] + n * left[n - 1] * at.gap;
      right_.push_back({at.t, a});
      prev = std::move(a);
    }
    prev = base_;
    auto atoms = d_.atoms();
    for (std::size_t i = atoms.size(); i-- > 0;) {
      const auto& at = atoms[i];
      if (at.t >= x0_) continue;
      auto right = expand(prev, d_.right_limit(at.t));
      Anchor a{d_.eval(at.t), std::vector<double>(order_ + 1)};
      a.vals[0] = 1.0;
      for (int n = 1; n <= order_; ++n) a.vals[n] = right[n] - n * a.vals[n - 1] * at.gap;
      left_.push_back({at.t, a});
      prev = std::move(a);
    }
  }

  int order() const { return order_; }
  double center() const { return x0_; }
  const Derivator& derivator() const { return d_; }

  double operator()(int n, double x) const {
    if (n < 0 || n > order_) throw argument_error("MonomialTable: order out of range");
    return all(x)[n];
  }

  // g_{x0,0}(x), ..., g_{x0,order}(x)
  std::vector<double> all(double x) const {
    if (x < d_.lo() || x > d_.hi()) throw domain_error("MonomialTable: x outside domain");
    if (x == x0_) return base_.vals;
    return expand(anchor_for(x), d_.eval(x));
  }

  // values just to the right of x
  std::vector<double> right_limit_all(double x) const {
    auto v = all(x);
    double gap = d_.jump(x);
    if (gap > 0.0)
      for (int n = order_; n >= 1; --n) v[n] += n * v[n - 1] * gap;
    return v;
  }

 private:
  struct Anchor {
    double gref = 0.0;
    std::vector<double> vals;
  };

  std::vector<double> expand(const Anchor& a, double gx) const {
    double u = gx - a.gref;
    std::vector<double> out(order_ + 1, 0.0);
    std::vector<double> binom(order_ + 1, 0.0);  // row n of Pascal's triangle
    std::vector<double> upow(order_ + 1, 1.0);
    for (int j = 1; j <= order_; ++j) upow[j] = upow[j - 1] * u;
    binom[0] = 1.0;
    for (int n = 0; n <= order_; ++n) {
      if (n > 0)
        for (int j = n; j >= 1; --j) binom[j] += binom[j - 1];
      double s = 0.0;
      for (int j = 0; j <= n; ++j) s += binom[j] * a.vals[n - j] * upow[j];
      out[n] = s;
    }
    return out;
  }

  const Anchor& anchor_for(double x) const {
    if (x > x0_) {
      std::size_t k = 0;
      while (k < right_.size() && right_[k].first < x) ++k;
      return k == 0 ? base_ : right_[k - 1].second;
    }
    std::size_t k = 0;
    while (k < left_.size() && left_[k].first >= x) ++k;
    return k == 0 ? base_ : left_[k - 1].second;
  }

  Derivator d_;
  double x0_;
  int order_;
  Anchor base_;
  std::vector<std::pair<double, Anchor>> right_;  // atoms >= x0, ascending
  std::vector<std::pair<double, Anchor>> left_;   // atoms < x0, descending
};

inline double g_monomial(int n, double x0, double x, const Derivator& d) {
  return MonomialTable(d, x0, n)(n, x);
}

template <class T>
struct SeriesValue {
  T value{};
  double tail_bound = 0.0;
};

namespace detail {

// sum_{n > N} z^n / n!, z >= 0
inline double exp_remainder(double z, int N) {
  if (z <= 0.0) return 0.0;
  double term = std::exp((N + 1) * std::log(z) - std::lgamma(N + 2.0));
  double sum = 0.0;
  for (int n = N + 1; term > 0.0; ++n) {
    sum += term;
    if (term < 1e-18 * sum && z / (n + 1) < 0.5) break;
    term *= z / (n + 1);
  }
  return sum;
}

inline double series_scale(const Derivator& d, double x0, double x) {
  if (x < x0) throw domain_error("series: requires x >= x0");
  return d.eval(x) - d.eval(x0);
}

// Sum over n <= N with n in the given parity (0 even, 1 odd, -1 all) of
// coef(n) * g_n(x) / n!
template <class T, class C>
T monomial_sum(const MonomialTable& tab, double x, int N, int parity, C&& coef) {
  auto g = tab.all(x);
  T sum{};
  double fact = 1.0;
  for (int n = 0; n <= N; ++n) {
    if (n > 0) fact *= n;
    if (parity >= 0 && n % 2 != parity) continue;
    sum += coef(n) * (g[n] / fact);
  }
  return sum;
}

}  // namespace detail

inline SeriesValue<complex> exp_series(complex lambda, double x, int N, const Derivator& d,
                                       double x0 = 0.0) {
  double G = detail::series_scale(d, x0, x);
  MonomialTable tab(d, x0, N);
  auto v = detail::monomial_sum<complex>(tab, x, N, -1, [&](int n) { return std::pow(lambda, n); });
  return {v, detail::exp_remainder(std::abs(lambda) * G, N)};
}

inline SeriesValue<double> sin_series(double b, double x, int N, const Derivator& d,
                                      double x0 = 0.0) {
  double G = detail::series_scale(d, x0, x);
  MonomialTable tab(d, x0, N);
  auto v = detail::monomial_sum<double>(tab, x, N, 1, [&](int n) {
    return ((n / 2) % 2 ? -1.0 : 1.0) * std::pow(b, n);
  });
  return {v, detail::exp_remainder(std::abs(b) * G, N)};
}

inline SeriesValue<double> cos_series(double b, double x, int N, const Derivator& d,
                                      double x0 = 0.0) {
  double G = detail::series_scale(d, x0, x);
  MonomialTable tab(d, x0, N);
  auto v = detail::monomial_sum<double>(tab, x, N, 0, [&](int n) {
    return ((n / 2) % 2 ? -1.0 : 1.0) * std::pow(b, n);
  });
  return {v, detail::exp_remainder(std::abs(b) * G, N)};
}

inline SeriesValue<double> sinh_series(double a, double x, int N, const Derivator& d,
                                       double x0 = 0.0) {
  double G = detail::series_scale(d, x0, x);
  MonomialTable tab(d, x0, N);
  auto v = detail::monomial_sum<double>(tab, x, N, 1, [&](int n) { return std::pow(a, n); });
  return {v, detail::exp_remainder(std::abs(a) * G, N)};
}

inline SeriesValue<double> cosh_series(double a, double x, int N, const Derivator& d,
                                       double x0 = 0.0) {
  double G = detail::series_scale(d, x0, x);
  MonomialTable tab(d, x0, N);
  auto v = detail::monomial_sum<double>(tab, x, N, 0, [&](int n) { return std::pow(a, n); });
  return {v, detail::exp_remainder(std::abs(a) * G, N)};
}

}  // namespace stieltjes
