#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <type_traits>
#include <vector>

#include "derivator.hpp"
#include "errors.hpp"

namespace stieltjes {

struct DiffConfig {
  double step = 1e-2;  // initial step, in g-units
  double shrink = 0.5;
  int max_refinements = 8;
  int min_levels = 3;
  double tol = 1e-8;

  void validate() const {
    if (!(step > 0.0)) throw argument_error("DiffConfig: step must be positive");
    if (!(shrink > 0.0 && shrink < 1.0)) throw argument_error("DiffConfig: shrink must be in (0,1)");
    if (!(tol > 0.0)) throw argument_error("DiffConfig: tol must be positive");
    if (max_refinements < 1 || min_levels < 2)
      throw argument_error("DiffConfig: need at least two levels");
  }
};

namespace detail {

// Neville-style tableau for h_k = h_0 * ratio^k and error exponents p0, p0+dp, ...
template <class R>
class Richardson {
 public:
  Richardson(double ratio, int p0, int dp) : ratio_(ratio), p0_(p0), dp_(dp) {}

  R push(R v) {
    std::vector<R> row{v};
    for (std::size_t j = 1; j <= prev_.size(); ++j) {
      double factor = std::pow(ratio_, -(p0_ + static_cast<int>(j - 1) * dp_));
      row.push_back(row[j - 1] + (row[j - 1] - prev_[j - 1]) / (factor - 1.0));
    }
    prev_ = std::move(row);
    return prev_.back();
  }

 private:
  double ratio_;
  int p0_, dp_;
  std::vector<R> prev_;
};

template <class R>
complex as_complex(const R& v) {
  return complex(v);
}

// Runs quotient(delta_k) for delta_k = delta0 * shrink^k until the diagonal settles.
// `scale` is |f| near t and `order` the power of delta in the divisor; together they
// give the roundoff level below which successive estimates cannot agree better.
template <class Q>
auto extrapolate(Q&& quotient, double delta0, int p0, int dp, const DiffConfig& cfg,
                 const char* what, const double& scale = 0.0, int order = 1) {
  using R = std::invoke_result_t<Q&, double>;
  Richardson<R> tab(cfg.shrink, p0, dp);
  R prev{}, est{};
  double delta = delta0;
  for (int k = 0; k <= cfg.max_refinements; ++k, delta *= cfg.shrink) {
    if (k > 0) prev = est;
    est = tab.push(quotient(delta));
    double noise = 256.0 * std::numeric_limits<double>::epsilon() * scale / std::pow(delta, order);
    if (k >= 1 && k + 1 >= cfg.min_levels &&
        std::abs(est - prev) <= std::max(cfg.tol * std::max(1.0, std::abs(est)), noise))
      return est;
  }
  throw convergence_error(std::string(what) + ": quotient did not converge", as_complex(est),
                          as_complex(prev));
}

// Smallest usable room; below this a side is treated as unavailable.
inline double usable(double room, double step) { return room > 1e-3 * step ? room : 0.0; }

// Drops the cramped side when a central stencil would start far below the step a
// one-sided stencil can take; tiny central steps lose the quotient to roundoff.
inline void pick_side(double& rr, double& lr, double step, double one_sided_frac) {
  if (rr <= 0.0 || lr <= 0.0) return;
  double central = std::min(step, 0.5 * std::min(rr, lr));
  double one_sided = std::min(step, one_sided_frac * std::max(rr, lr));
  if (central >= 0.25 * one_sided) return;
  (rr < lr ? rr : lr) = 0.0;
}

template <class F>
auto right_value(F& f, double t, const Derivator& d, const DiffConfig& cfg) {
  double rr = d.right_room(t);
  if (rr == 0.0) return f(0.5 * (t + d.next_stop(t)));
  auto q = [&](double delta) { return f(d.step_right(t, delta)); };
  return extrapolate(q, std::min(cfg.step, 0.5 * rr), 1, 1, cfg, "right limit");
}

// Limit of the g-derivative from the right at an atom.
template <class F>
auto right_derivative_limit(F& f, double t, const Derivator& d, const DiffConfig& cfg);

}  // namespace detail

template <class F>
auto g_derivative(F&& f, double t, const Derivator& d, const DiffConfig& cfg = {}) {
  using R = std::invoke_result_t<F&, double>;
  cfg.validate();
  if (t < d.lo() || t > d.hi()) throw domain_error("g_derivative: t outside domain");
  if (t < d.hi() && d.is_atom(t)) {
    R fp = detail::right_value(f, t, d, cfg);
    return R((fp - f(t)) / d.jump(t));
  }
  if (auto c = d.constancy_at(t)) {
    if (c->hi >= d.hi()) throw domain_error("g_derivative: constancy interval reaches domain end");
    return g_derivative(f, c->hi, d, cfg);
  }
  double rr = detail::usable(d.right_room(t), cfg.step);
  double lr = detail::usable(d.left_room(t), cfg.step);
  detail::pick_side(rr, lr, cfg.step, 0.5);
  R ft = f(t);
  // roundoff floor follows the largest sampled value, not just f(t)
  double seen = std::abs(ft);
  auto fs = [&](double s) {
    R v = f(s);
    seen = std::max(seen, double(std::abs(v)));
    return v;
  };
  if (rr > 0.0 && lr > 0.0) {
    auto q = [&](double delta) {
      return R((fs(d.step_right(t, delta)) - fs(d.step_left(t, delta))) / (2.0 * delta));
    };
    return detail::extrapolate(q, std::min(cfg.step, 0.5 * std::min(rr, lr)), 2, 2, cfg,
                               "g_derivative", seen, 1);
  }
  if (rr > 0.0) {
    auto q = [&](double delta) { return R((fs(d.step_right(t, delta)) - ft) / delta); };
    return detail::extrapolate(q, std::min(cfg.step, 0.5 * rr), 1, 1, cfg, "g_derivative",
                               seen, 1);
  }
  if (lr > 0.0) {
    auto q = [&](double delta) { return R((ft - fs(d.step_left(t, delta))) / delta); };
    return detail::extrapolate(q, std::min(cfg.step, 0.5 * lr), 1, 1, cfg, "g_derivative",
                               seen, 1);
  }
  throw domain_error("g_derivative: no g-variation on either side of t=" + detail::fmt(t));
}

namespace detail {

template <class F>
auto right_derivative_limit(F& f, double t, const Derivator& d, const DiffConfig& cfg) {
  using R = std::invoke_result_t<F&, double>;
  double rr = d.right_room(t);
  double mid = 0.5 * (t + d.next_stop(t));
  if (rr == 0.0) return g_derivative(f, mid, d, cfg);
  auto q = [&](double delta) {
    return R((f(d.step_right(t, 2.0 * delta)) - f(d.step_right(t, delta))) / delta);
  };
  return extrapolate(q, std::min(cfg.step, 0.25 * rr), 1, 1, cfg, "right derivative limit");
}

}  // namespace detail

// Second g-derivative. Atoms use the jump formula on the first derivative.
template <class F>
auto g_derivative2(F&& f, double t, const Derivator& d, const DiffConfig& cfg = {}) {
  using R = std::invoke_result_t<F&, double>;
  cfg.validate();
  if (t < d.lo() || t > d.hi()) throw domain_error("g_derivative2: t outside domain");
  if (t < d.hi() && d.is_atom(t)) {
    double gap = d.jump(t);
    R f0 = f(t);
    R fp = detail::right_value(f, t, d, cfg);
    R d1 = (fp - f0) / gap;
    R d1p = detail::right_derivative_limit(f, t, d, cfg);
    return R((d1p - d1) / gap);
  }
  if (auto c = d.constancy_at(t)) {
    if (c->hi >= d.hi()) throw domain_error("g_derivative2: constancy interval reaches domain end");
    return g_derivative2(f, c->hi, d, cfg);
  }
  double rr = detail::usable(d.right_room(t), cfg.step);
  double lr = detail::usable(d.left_room(t), cfg.step);
  detail::pick_side(rr, lr, cfg.step, 0.25);
  R ft = f(t);
  // roundoff floor follows the largest sampled value, not just f(t)
  double seen = std::abs(ft);
  auto fs = [&](double s) {
    R v = f(s);
    seen = std::max(seen, double(std::abs(v)));
    return v;
  };
  if (rr > 0.0 && lr > 0.0) {
    auto q = [&](double delta) {
      return R((fs(d.step_right(t, delta)) - 2.0 * ft + fs(d.step_left(t, delta))) /
               (delta * delta));
    };
    return detail::extrapolate(q, std::min(cfg.step, 0.5 * std::min(rr, lr)), 2, 2, cfg,
                               "g_derivative2", seen, 2);
  }
  if (rr > 0.0) {
    auto q = [&](double delta) {
      return R((ft - 2.0 * fs(d.step_right(t, delta)) + fs(d.step_right(t, 2.0 * delta))) /
               (delta * delta));
    };
    return detail::extrapolate(q, std::min(cfg.step, 0.25 * rr), 1, 1, cfg, "g_derivative2",
                               seen, 2);
  }
  if (lr > 0.0) {
    auto q = [&](double delta) {
      return R((ft - 2.0 * fs(d.step_left(t, delta)) + fs(d.step_left(t, 2.0 * delta))) /
               (delta * delta));
    };
    return detail::extrapolate(q, std::min(cfg.step, 0.25 * lr), 1, 1, cfg, "g_derivative2",
                               seen, 2);
  }
  throw domain_error("g_derivative2: no g-variation on either side of t=" + detail::fmt(t));
}

// d_g u(., x)(t) - c^2 d_h^2 u(t, .)(x)
template <class U>
auto heat_residual(U&& u, double t, double x, const Derivator& g, const Derivator& h, double c,
                   const DiffConfig& cfg = {}) {
  auto in_t = [&](double s) { return u(s, x); };
  auto in_x = [&](double y) { return u(t, y); };
  return g_derivative(in_t, t, g, cfg) - c * c * g_derivative2(in_x, x, h, cfg);
}

}  // namespace stieltjes
