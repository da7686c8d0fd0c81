#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <queue>
#include <type_traits>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "derivator.hpp"

namespace stieltjes {

enum class AtomPolicy { include, exclude };

namespace detail {

template <class R>
bool finite_value(const R& v) {
  if constexpr (std::is_same_v<R, complex>) return std::isfinite(v.real()) && std::isfinite(v.imag());
  else return std::isfinite(v);
}

template <class F>
auto checked_call(F& f, double t) {
  auto v = f(t);
  if (!finite_value(v)) throw evaluation_error("integrand is not finite at t=" + fmt(t));
  return v;
}

template <class R>
struct Panel {
  double a, b;
  R value;
  double err;
  bool operator<(const Panel& o) const { return err < o.err; }
};

// 15-point Kronrod rule with the embedded 7-point Gauss rule as error estimate.
template <class F, class R = std::invoke_result_t<F&, double>>
Panel<R> gk15(F& f, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  using G = boost::math::quadrature::gauss<double, 7>;
  const auto& xk = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = G::weights();
  double c = 0.5 * (a + b), r = 0.5 * (b - a);
  R fc = checked_call(f, c);
  R kron = fc * wk[0];
  R gauss = fc * wg[0];
  for (std::size_t i = 1; i < xk.size(); ++i) {
    R s = checked_call(f, c - r * xk[i]) + checked_call(f, c + r * xk[i]);
    kron += s * wk[i];
    if (i % 2 == 0) gauss += s * wg[i / 2];
  }
  return {a, b, static_cast<R>(kron * r), static_cast<double>(std::abs(kron - gauss)) * r};
}

// Globally adaptive GK15 on [a, b] with absolute tolerance.
template <class F, class R = std::invoke_result_t<F&, double>>
R adaptive_gk(F& f, double a, double b, double tol, int max_panels = 4000) {
  if (!(b > a)) return R{};
  std::priority_queue<Panel<R>> q;
  auto first = gk15(f, a, b);
  R total = first.value;
  double err = first.err;
  q.push(first);
  int panels = 1;
  while (err > tol && panels < max_panels) {
    double floor = 64 * std::numeric_limits<double>::epsilon() * std::abs(total);
    if (err <= floor) break;
    auto p = q.top();
    q.pop();
    double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b)) break;
    auto l = gk15(f, p.a, m);
    auto r = gk15(f, m, p.b);
    total += l.value + r.value - p.value;
    err += l.err + r.err - p.err;
    q.push(l);
    q.push(r);
    ++panels;
  }
  return total;
}

}  // namespace detail

// Integral of f over [a, b) against mu_g. Atoms contribute f(t) * gap exactly;
// affine pieces are integrated by adaptive quadrature.
template <class F>
auto integrate(F&& f, double a, double b, const Derivator& d, double tol = 1e-12,
               AtomPolicy atoms = AtomPolicy::include) {
  using R = std::invoke_result_t<F&, double>;
  if (a > b) throw argument_error("integrate: a > b");
  if (a < d.lo() || b > d.hi())
    throw domain_error("integrate: [" + detail::fmt(a) + ", " + detail::fmt(b) +
                       ") outside derivator domain");
  if (!(tol > 0.0)) throw argument_error("integrate: tol must be positive");
  R total{};
  if (a == b) return total;
  if (atoms == AtomPolicy::include)
    for (const auto& at : d.atoms())
      if (at.t >= a && at.t < b) total += detail::checked_call(f, at.t) * at.gap;
  int active = 0;
  for (const auto& s : d.segments())
    if (s.slope() > 0.0 && std::min(b, s.t_hi) > std::max(a, s.t_lo)) ++active;
  for (const auto& s : d.segments()) {
    double lo = std::max(a, s.t_lo), hi = std::min(b, s.t_hi);
    if (!(hi > lo) || s.slope() == 0.0) continue;
    double share = tol / (active * s.slope());
    total += s.slope() * detail::adaptive_gk(f, lo, hi, share);
  }
  return total;
}

// Signed convention: -integral over [y, x) when y < x.
template <class F>
auto integrate_signed(F&& f, double x, double y, const Derivator& d, double tol = 1e-12,
                      AtomPolicy atoms = AtomPolicy::include) {
  if (y >= x) return integrate(f, x, y, d, tol, atoms);
  return -integrate(f, y, x, d, tol, atoms);
}

// F(t) = integral of f over [a, t) (signed for t < a).
template <class F>
class IndefiniteIntegral {
 public:
  using value_type = std::invoke_result_t<F&, double>;

  IndefiniteIntegral(F f, double a, Derivator d, double tol)
      : f_(std::move(f)), a_(a), d_(std::move(d)), tol_(tol) {}

  value_type operator()(double t) const { return integrate_signed(f_, a_, t, d_, tol_); }

  // F(t+) = F(t) + f(t) * gap(t)
  value_type right_limit(double t) const {
    value_type v = (*this)(t);
    double j = d_.jump(t);
    if (j > 0.0) v += f_(t) * j;
    return v;
  }

  double base() const { return a_; }
  const Derivator& derivator() const { return d_; }

 private:
  mutable F f_;
  double a_;
  Derivator d_;
  double tol_;
};

template <class F>
auto indefinite(F f, double a, const Derivator& d, double tol = 1e-12) {
  return IndefiniteIntegral<std::decay_t<F>>(std::move(f), a, d, tol);
}

}  // namespace stieltjes
