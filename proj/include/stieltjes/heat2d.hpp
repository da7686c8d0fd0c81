#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "derivator.hpp"
#include "errors.hpp"
#include "g_calculus.hpp"
#include "ls_integral.hpp"
#include "ode.hpp"
#include "special.hpp"

namespace stieltjes {

// G(t,x) = g(t) + h(x) or g(t) h(x).
class TwoVarDerivator {
 public:
  enum class Kind { sum, product };

  // Keeps g - g(0) and h - h(0); the shifts are recorded and added back in operator().
  static TwoVarDerivator sum(Derivator g, Derivator h) {
    for (const Derivator* d : {&g, &h})
      if (d->lo() > 0.0 || d->hi() <= 0.0)
        throw validation_error("sum derivator: 0 must lie in [lo, hi) of both components");
    double gs = g.eval(0.0), hs = h.eval(0.0);
    return TwoVarDerivator(Kind::sum, g.shifted(-gs), h.shifted(-hs), gs, hs);
  }

  static TwoVarDerivator product(Derivator g, Derivator h) {
    if (!(g.eval(g.lo()) > 0.0))
      throw tag_error("product derivator: g must be positive, g(" + detail::fmt(g.lo()) +
                      ") = " + detail::fmt(g.eval(g.lo())));
    if (!(h.eval(h.lo()) > 0.0))
      throw tag_error("product derivator: h must be positive, h(" + detail::fmt(h.lo()) +
                      ") = " + detail::fmt(h.eval(h.lo())));
    return TwoVarDerivator(Kind::product, std::move(g), std::move(h), 0.0, 0.0);
  }

  Kind kind() const { return kind_; }
  bool is_sum() const { return kind_ == Kind::sum; }
  // normalized for sums
  const Derivator& g() const { return g_; }
  const Derivator& h() const { return h_; }
  double g_shift() const { return g_shift_; }
  double h_shift() const { return h_shift_; }

  double operator()(double t, double x) const {
    if (is_sum()) return g_.eval(t) + g_shift_ + h_.eval(x) + h_shift_;
    return g_.eval(t) * h_.eval(x);
  }

  // t -> G(t, x) and x -> G(t, x)
  Derivator slice_t(double x) const {
    return is_sum() ? g_.shifted(g_shift_ + h_shift_ + h_.eval(x)) : g_.scaled(h_.eval(x));
  }
  Derivator slice_x(double t) const {
    return is_sum() ? h_.shifted(h_shift_ + g_shift_ + g_.eval(t)) : h_.scaled(g_.eval(t));
  }

  void require(Kind k, const char* who) const {
    if (kind_ != k)
      throw tag_error(std::string(who) + ": requires a " + (k == Kind::sum ? "sum" : "product") +
                      " derivator");
  }

 private:
  TwoVarDerivator(Kind k, Derivator g, Derivator h, double gs, double hs)
      : kind_(k), g_(std::move(g)), h_(std::move(h)), g_shift_(gs), h_shift_(hs) {}

  Kind kind_;
  Derivator g_, h_;
  double g_shift_, h_shift_;
};

// G_{m,n}(t,x) = g_m(t) h_n(x)
inline double G_mn(int m, int n, double t, double x, const TwoVarDerivator& G) {
  G.require(TwoVarDerivator::Kind::sum, "G_mn");
  if (m < 0 || n < 0) throw argument_error("G_mn: negative degree");
  return g_monomial(m, 0.0, t, G.g()) * g_monomial(n, 0.0, x, G.h());
}

namespace detail {

// F on [lo, hi] as a polynomial in the continuous g-increment between consecutive
// atoms, tabulated at Chebyshev-Lobatto nodes.
class PiecewiseCheb {
 public:
  static constexpr int K = 16;

  static PiecewiseCheb constant(const Derivator& d, double lo, double hi, double c) {
    PiecewiseCheb f;
    f.left_ = c;
    f.d_ = &d;
    for (double p = lo; p < hi;) {
      double q = std::min(d.next_stop(p), hi);
      Piece pc{p, q, d.eval(q) - d.right_limit(p), std::vector<double>(K + 1, c)};
      f.pieces_.push_back(std::move(pc));
      p = q;
    }
    return f;
  }

  // factor * int_[lo, y) F dmu
  PiecewiseCheb integrated(const Derivator& d, double factor, double tol) const {
    PiecewiseCheb f;
    f.left_ = 0.0;
    f.d_ = &d;
    double acc = 0.0;  // value at the left end of the current piece
    for (const auto& pc : pieces_) {
      Piece np{pc.p, pc.q, pc.width, std::vector<double>(K + 1)};
      double start = acc + factor * (*this)(pc.p) * d.jump(pc.p);
      double prev_y = pc.p, prev_v = start;
      for (int j = 0; j <= K; ++j) {
        double s = node(j) * pc.width;
        double y = j == 0 ? pc.p : (j == K ? pc.q : d.step_right(pc.p, s));
        if (j > 0 && y > prev_y)
          prev_v += factor * integrate([this](double r) { return (*this)(r); }, prev_y, y, d, tol,
                                       AtomPolicy::exclude);
        np.vals[static_cast<std::size_t>(j)] = j == 0 ? start : prev_v;
        prev_y = y;
      }
      acc = np.vals.back();
      f.pieces_.push_back(std::move(np));
    }
    return f;
  }

  double operator()(double y) const {
    if (pieces_.empty() || y <= pieces_.front().p) return left_;
    auto it = std::lower_bound(pieces_.begin(), pieces_.end(), y,
                               [](const Piece& pc, double v) { return pc.q < v; });
    if (it == pieces_.end()) --it;
    const Piece& pc = *it;
    if (pc.width <= 0.0) return pc.vals.front();
    double s = (d_->eval(y) - d_->right_limit(pc.p)) / pc.width;
    return barycentric(pc.vals, s);
  }

 private:
  struct Piece {
    double p, q, width;
    std::vector<double> vals;
  };

  static double node(int j) { return 0.5 * (1.0 - std::cos(std::numbers::pi * j / K)); }

  static double barycentric(const std::vector<double>& v, double s) {
    double num = 0.0, den = 0.0;
    for (int j = 0; j <= K; ++j) {
      double dx = s - node(j);
      if (dx == 0.0) return v[static_cast<std::size_t>(j)];
      double w = (j % 2 ? -1.0 : 1.0) * (j == 0 || j == K ? 0.5 : 1.0) / dx;
      num += w * v[static_cast<std::size_t>(j)];
      den += w;
    }
    return num / den;
  }

  double left_ = 0.0;
  std::vector<Piece> pieces_;
  const Derivator* d_ = nullptr;
};

}  // namespace detail

// G_{m,0} = m I G_{m-1,0}, then G_{m,n} = n K G_{m,n-1} at fixed t, by quadrature.
inline double G_mn_recursive(int m, int n, double t, double x, const TwoVarDerivator& G,
                             double tol = 1e-13) {
  G.require(TwoVarDerivator::Kind::sum, "G_mn_recursive");
  if (m < 0 || n < 0) throw argument_error("G_mn_recursive: negative degree");
  if (t < 0.0 || x < 0.0) throw domain_error("G_mn_recursive: requires t, x >= 0");
  double a = 1.0;
  if (m > 0) {
    if (t == 0.0) return 0.0;
    auto F = detail::PiecewiseCheb::constant(G.g(), 0.0, t, 1.0);
    for (int k = 1; k <= m; ++k) F = F.integrated(G.g(), k, tol);
    a = F(t);
  }
  if (n == 0) return a;
  if (x == 0.0) return 0.0;
  auto H = detail::PiecewiseCheb::constant(G.h(), 0.0, x, a);
  for (int k = 1; k <= n; ++k) H = H.integrated(G.h(), k, tol);
  return H(x);
}

// I K H and K I H for a sum derivator, as nested Stieltjes integrals.
template <class H>
double apply_IK(H&& fn, double t, double x, const TwoVarDerivator& G, double tol = 1e-10) {
  G.require(TwoVarDerivator::Kind::sum, "apply_IK");
  auto inner = [&](double s) {
    return integrate([&](double y) { return fn(s, y); }, 0.0, x, G.h(), 0.5 * tol);
  };
  return integrate(inner, 0.0, t, G.g(), 0.5 * tol);
}

template <class H>
double apply_KI(H&& fn, double t, double x, const TwoVarDerivator& G, double tol = 1e-10) {
  G.require(TwoVarDerivator::Kind::sum, "apply_KI");
  auto inner = [&](double y) {
    return integrate([&](double s) { return fn(s, y); }, 0.0, t, G.g(), 0.5 * tol);
  };
  return integrate(inner, 0.0, x, G.h(), 0.5 * tol);
}

// Classical heat polynomial v_n(t, x) with c = 1.
inline double classical_heat_polynomial(int n, double t, double x) {
  double s = 0.0;
  for (int k = 0; 2 * k <= n; ++k)
    s += std::exp(std::lgamma(n + 1.0) - std::lgamma(n - 2.0 * k + 1.0) - std::lgamma(k + 1.0)) *
         std::pow(t, k) * std::pow(x, n - 2 * k);
  return s;
}

// v_n^G(t,x) = sum_k n! c^{2k} / ((n-2k)! k!) g_k(t) h_{n-2k}(x)
//            = n! sum_k c^{2k} (g_k(t)/k!) (h_{n-2k}(x)/(n-2k)!)
class HeatGPolynomials {
 public:
  HeatGPolynomials(const TwoVarDerivator& G, double c, int order)
      : gt_(G.g(), 0.0, order / 2 + 1), hx_(G.h(), 0.0, order + 1), c_(c), order_(order) {
    G.require(TwoVarDerivator::Kind::sum, "HeatGPolynomials");
    if (!(c > 0.0)) throw argument_error("HeatGPolynomials: c must be positive");
  }

  int order() const { return order_; }
  double c() const { return c_; }

  // v_n^G / n! for n = 0..order
  std::vector<double> scaled_all(double t, double x) const {
    auto g = gt_.all(t);
    auto h = hx_.all(x);
    normalize(g);
    normalize(h);
    std::vector<double> out(static_cast<std::size_t>(order_) + 1, 0.0);
    const double c2 = c_ * c_;
    for (int n = 0; n <= order_; ++n) {
      double s = 0.0, ck = 1.0;
      for (int k = 0; 2 * k <= n; ++k, ck *= c2)
        s += ck * g[static_cast<std::size_t>(k)] * h[static_cast<std::size_t>(n - 2 * k)];
      out[static_cast<std::size_t>(n)] = s;
    }
    return out;
  }

  std::vector<double> all(double t, double x) const {
    auto v = scaled_all(t, x);
    double f = 1.0;
    for (std::size_t n = 0; n < v.size(); ++n) {
      if (n > 0) f *= static_cast<double>(n);
      v[n] *= f;
    }
    return v;
  }

  double operator()(int n, double t, double x) const {
    if (n < 0 || n > order_) throw argument_error("HeatGPolynomials: degree out of range");
    return all(t, x)[static_cast<std::size_t>(n)];
  }

 private:
  static void normalize(std::vector<double>& v) {
    double f = 1.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k > 0) f *= static_cast<double>(k);
      v[k] /= f;
    }
  }

  MonomialTable gt_, hx_;
  double c_;
  int order_;
};

inline double heat_gpoly(int n, double t, double x, const TwoVarDerivator& G, double c) {
  return HeatGPolynomials(G, c, n)(n, t, x);
}

// alpha_n with an optional log|alpha_n| for indices where alpha_n itself under/overflows.
struct AlphaStream {
  std::function<complex(int)> value;
  std::function<double(int)> log_abs;

  double log_magnitude(int n) const {
    if (log_abs) return log_abs(n);
    double a = std::abs(value(n));
    return a > 0.0 ? std::log(a) : -std::numeric_limits<double>::infinity();
  }
  // alpha_n * n!, finite even where both factors are not
  complex times_factorial(int n) const {
    double la = log_magnitude(n);
    if (la == -std::numeric_limits<double>::infinity()) return 0.0;
    complex v = value(n);
    complex phase = std::abs(v) > 0.0 && std::isfinite(std::abs(v)) ? v / std::abs(v) : complex(1.0);
    return phase * std::exp(la + std::lgamma(n + 1.0));
  }
};

enum class RadiusTrend { converged, increasing, decreasing, oscillating, vanishing };

inline const char* to_string(RadiusTrend t) {
  switch (t) {
    case RadiusTrend::converged: return "converged";
    case RadiusTrend::increasing: return "increasing";
    case RadiusTrend::decreasing: return "decreasing";
    case RadiusTrend::oscillating: return "oscillating";
    case RadiusTrend::vanishing: return "vanishing";
  }
  return "?";
}

struct RadiusEstimate {
  double sigma = 0.0;       // from the mean of the window
  double gate_sigma = 0.0;  // from the largest term in the window
  RadiusTrend trend = RadiusTrend::converged;
  int probe = 0;
  std::vector<double> window;  // 2n|alpha_n|^{2/n}/e over the last quarter
};

// 1/sigma as the limit of 2n|alpha_n|^{2/n}/e, estimated on n in (3N/4, N].
inline RadiusEstimate radius_sigma(const AlphaStream& alpha, int probe) {
  if (probe < 8) throw argument_error("radius_sigma: probe depth must be at least 8");
  constexpr double inf = std::numeric_limits<double>::infinity();
  RadiusEstimate r;
  r.probe = probe;
  int w = std::max(4, probe / 4 / 4 * 4);  // halves of even length balance period-2 patterns
  for (int n = probe - w + 1; n <= probe; ++n) {
    double la = alpha.log_magnitude(n);
    double term = la == -inf ? 0.0 : 2.0 * n * std::exp(2.0 * la / n) / std::numbers::e;
    if (!std::isfinite(term) && !std::isinf(term)) throw evaluation_error("radius_sigma: NaN coefficient");
    r.window.push_back(term);
  }
  const auto& v = r.window;
  double mx = *std::max_element(v.begin(), v.end());
  double mn = *std::min_element(v.begin(), v.end());
  if (mx == 0.0) {
    r.trend = RadiusTrend::vanishing;
    r.sigma = r.gate_sigma = inf;
    return r;
  }
  if (std::isinf(mx)) {
    r.trend = RadiusTrend::increasing;
    r.sigma = r.gate_sigma = 0.0;
    return r;
  }
  std::size_t half = v.size() / 2;
  double m1 = std::accumulate(v.begin(), v.begin() + static_cast<long>(half), 0.0) / static_cast<double>(half);
  double m2 = std::accumulate(v.begin() + static_cast<long>(half), v.end(), 0.0) /
              static_cast<double>(v.size() - half);
  double mean = 0.5 * (m1 + m2);
  if ((mx - mn) > 0.5 * mean && std::abs(m2 - m1) <= 0.05 * std::max(m1, m2)) {
    r.trend = RadiusTrend::oscillating;
    r.sigma = r.gate_sigma = std::numeric_limits<double>::quiet_NaN();
  } else if (m2 > 1.05 * m1) {
    r.trend = RadiusTrend::increasing;
    r.sigma = r.gate_sigma = 0.0;
  } else if (m2 * 1.05 < m1) {
    r.trend = RadiusTrend::decreasing;
    r.sigma = r.gate_sigma = inf;
  } else {
    r.trend = RadiusTrend::converged;
    r.sigma = 1.0 / std::accumulate(v.begin(), v.end(), 0.0) * static_cast<double>(v.size());
    r.gate_sigma = 1.0 / mx;
  }
  return r;
}

// u = sum_{n <= N} alpha_n v_n^G
class GPolySeries {
 public:
  GPolySeries(const TwoVarDerivator& G, const AlphaStream& alpha, double c, int N,
              RadiusEstimate radius = {}, double tail = 0.0)
      : G_(G), polys_(G, c, N), c_(c), N_(N), tail_(tail), radius_(std::move(radius)) {
    for (int n = 0; n <= N; ++n) scaled_alpha_.push_back(alpha.times_factorial(n));
  }

  int N() const { return N_; }
  double c() const { return c_; }
  const TwoVarDerivator& derivator() const { return G_; }
  double tail_bound() const { return tail_; }
  const RadiusEstimate& radius() const { return radius_; }

  complex operator()(double t, double x) const { return combine(t, x, 0); }
  // term-by-term ladders: d_x v_n = n v_{n-1}, d_t v_n = c^2 n(n-1) v_{n-2}
  complex du_dx(double t, double x) const { return combine(t, x, 1); }
  complex du_dxx(double t, double x) const { return combine(t, x, 2); }
  complex du_dt(double t, double x) const { return c_ * c_ * combine(t, x, 2); }

  complex numeric_residual(double t, double x, const DiffConfig& cfg = {}) const {
    return heat_residual([this](double s, double y) { return (*this)(s, y); }, t, x, G_.g(), G_.h(), c_, cfg);
  }

 private:
  // sum_n alpha_n n!/(n-k)! v_{n-k}^G, using the scaled polynomials v_j^G / j!
  complex combine(double t, double x, int k) const {
    auto v = polys_.scaled_all(t, x);
    complex s = 0.0;
    for (int n = k; n <= N_; ++n)
      s += scaled_alpha_[static_cast<std::size_t>(n)] * v[static_cast<std::size_t>(n - k)];
    return s;
  }

  TwoVarDerivator G_;
  HeatGPolynomials polys_;
  double c_;
  int N_;
  std::vector<complex> scaled_alpha_;  // alpha_n n!
  double tail_;
  RadiusEstimate radius_;
};

// Gate g(T) < sigma / c^2 (with the conservative sigma) before summing.
inline GPolySeries gpoly_series_solution(const TwoVarDerivator& G, const AlphaStream& alpha, double c,
                                         double T, double L, int N, int probe = 200) {
  G.require(TwoVarDerivator::Kind::sum, "gpoly_series_solution");
  if (N < 0) throw argument_error("gpoly_series_solution: N must be nonnegative");
  if (!(c > 0.0)) throw argument_error("gpoly_series_solution: c must be positive");
  if (T < 0.0 || T > G.g().hi() || L < 0.0 || L > G.h().hi())
    throw domain_error("gpoly_series_solution: [0,T] x [0,L] outside the derivator domains");
  auto rad = radius_sigma(alpha, std::max(probe, N));
  double gT = G.g().eval(T);
  if (rad.trend == RadiusTrend::oscillating)
    throw gate_error("radius gate: 2n|alpha_n|^(2/n)/e does not settle (oscillating); sigma unknown");
  if (!(gT < rad.gate_sigma / (c * c)))
    throw gate_error("radius gate: g(T) = " + detail::fmt(gT) + " is not below sigma/c^2 = " +
                     detail::fmt(rad.gate_sigma) + "/" + detail::fmt(c * c));
  // sum_{n > N} |alpha_n| v_n^G(T, L), until terms are negligible
  const int extra = 400;
  HeatGPolynomials big(G, c, N + extra);
  auto v = big.scaled_all(T, L);
  double tail = 0.0;
  int small_run = 0;
  for (int n = N + 1; n <= N + extra; ++n) {
    double vn = v[static_cast<std::size_t>(n)];
    double term = vn > 0.0 ? std::exp(alpha.log_magnitude(n) + std::lgamma(n + 1.0) + std::log(vn)) : 0.0;
    tail += term;
    small_run = term <= 1e-17 * std::max(tail, 1e-300) ? small_run + 1 : 0;
    if (small_run >= 10) break;
    if (n == N + extra) tail = std::numeric_limits<double>::infinity();
  }
  return GPolySeries(G, alpha, c, N, std::move(rad), tail);
}

// a_{m,n} = c^{2m} (n+2m)!/(n! m!) alpha_{n+2m}, kept as an exact integer factor.
class CoefficientGrid {
 public:
  using Int = boost::multiprecision::cpp_int;

  struct Entry {
    Int factor;       // (n+2m)! / (n! m!)
    int c2_power;     // m
    int alpha_index;  // n + 2m
  };

  CoefficientGrid(int M, int Nmax) : M_(M), N_(Nmax) {
    if (M < 0 || Nmax < 0) throw argument_error("CoefficientGrid: negative size");
    for (int m = 0; m <= M; ++m)
      for (int n = 0; n <= Nmax + 2 * (M - m); ++n) grid_[{m, n}] = {exact_factor(m, n), m, n + 2 * m};
  }

  const Entry& at(int m, int n) const {
    auto it = grid_.find({m, n});
    if (it == grid_.end()) throw argument_error("CoefficientGrid: index out of range");
    return it->second;
  }

  // For tests: replaces one stored factor by factor + delta.
  void perturb(int m, int n, long delta) { grid_.at({m, n}).factor += delta; }

  // a_{m+1,n} (m+1) = c^2 (n+2)(n+1) a_{m,n+2}, checked exactly.
  struct Violation {
    int m, n;
  };
  std::vector<Violation> check_recurrence() const {
    std::vector<Violation> bad;
    for (int m = 0; m < M_; ++m)
      for (int n = 0; n <= N_ + 2 * (M_ - m - 1); ++n) {
        const auto& lhs = at(m + 1, n);
        const auto& rhs = at(m, n + 2);
        bool ok = lhs.factor * (m + 1) == rhs.factor * (n + 2) * (n + 1) &&
                  lhs.c2_power == rhs.c2_power + 1 && lhs.alpha_index == rhs.alpha_index;
        if (!ok) bad.push_back({m, n});
      }
    return bad;
  }

  complex value(int m, int n, double c, const AlphaStream& alpha) const {
    const auto& e = at(m, n);
    return e.factor.convert_to<double>() * std::pow(c * c, e.c2_power) * alpha.value(e.alpha_index);
  }

  int M() const { return M_; }
  int Nmax() const { return N_; }

 private:
  static Int exact_factor(int m, int n) {
    Int num = 1;
    for (int k = n + 1; k <= n + 2 * m; ++k) num *= k;
    Int den = 1;
    for (int k = 2; k <= m; ++k) den *= k;
    return num / den;
  }

  int M_, N_;
  std::map<std::pair<int, int>, Entry> grid_;
};

// sum_{m,n} a_{m,n} g_m(t) h_n(x) over m <= M, n + 2m <= K
inline complex grid_series_value(const CoefficientGrid& grid, const TwoVarDerivator& G, double c,
                                 const AlphaStream& alpha, int K, double t, double x) {
  MonomialTable gt(G.g(), 0.0, K / 2 + 1), hx(G.h(), 0.0, K + 1);
  auto g = gt.all(t);
  auto h = hx.all(x);
  complex s = 0.0;
  for (int m = 0; 2 * m <= K && m <= grid.M(); ++m)
    for (int n = 0; n + 2 * m <= K; ++n)
      s += grid.value(m, n, c, alpha) * g[static_cast<std::size_t>(m)] * h[static_cast<std::size_t>(n)];
  return s;
}

struct ProductPartials {
  complex dt;   // du / d_G t
  complex dxx;  // d^2 u / d_G x^2
};

// v(x)/h(x) w'_g(t) and w(t)/g(t)^2 v''_h(x)
inline ProductPartials product_partials(const TwoVarDerivator& G, double t, double x, complex w,
                                        complex w_g, complex v, complex v_hh) {
  G.require(TwoVarDerivator::Kind::product, "product_partials");
  double gt = G.g().eval(t), hx = G.h().eval(x);
  return {v / hx * w_g, w / (gt * gt) * v_hh};
}

// The same two derivatives as limit quotients of u on the slices of G.
template <class U>
ProductPartials raw_product_partials(U&& u, const TwoVarDerivator& G, double t, double x,
                                     const DiffConfig& cfg = {}) {
  G.require(TwoVarDerivator::Kind::product, "raw_product_partials");
  auto st = G.slice_t(x);
  auto sx = G.slice_x(t);
  complex dt = g_derivative([&](double s) { return complex(u(s, x)); }, t, st, cfg);
  complex dxx = g_derivative2([&](double y) { return complex(u(t, y)); }, x, sx, cfg);
  return {dt, dxx};
}

struct IndependenceReport {
  std::vector<std::pair<double, double>> atom_values;  // (x, 1 - lambda/h(x) dh(x)^2)
  bool independent = true;
  complex determinant;  // v1(0) v2'(0) - v2(0) v1'(0) for the canonical pair
};

// u = x0 exp_g(lambda c^2 / g^2; 0, t) v(x), v'' = lambda/h v, v(0) = x0, v'(0) = v0
class ProductSolution {
 public:
  ProductSolution(TwoVarDerivator G, double lambda, double c, double x0, ExpGFunction w,
                  SecondOrderSolution v, IndependenceReport ind, Regressivity reg)
      : G_(std::move(G)), lambda_(lambda), c_(c), x0_(x0), w_(std::move(w)), v_(std::move(v)),
        ind_(std::move(ind)), reg_(reg) {}

  complex w(double t) const { return x0_ * w_(t); }
  complex v(double x) const { return v_.value(x); }
  complex operator()(double t, double x) const { return w(t) * v(x); }

  const IndependenceReport& independence() const { return ind_; }
  const Regressivity& regressivity() const { return reg_; }
  const TwoVarDerivator& derivator() const { return G_; }
  double lambda() const { return lambda_; }

  // product_partials with w'_g and v''_h taken numerically on w and on the solved v'
  complex residual(double t, double x, const DiffConfig& cfg = {}) const {
    complex wg = g_derivative([this](double s) { return w(s); }, t, G_.g(), cfg);
    complex vhh = g_derivative([this](double y) { return v_.derivative(y); }, x, G_.h(), cfg);
    auto p = product_partials(G_, t, x, w(t), wg, v(x), vhh);
    return p.dt - c_ * c_ * p.dxx;
  }

 private:
  TwoVarDerivator G_;
  double lambda_, c_, x0_;
  ExpGFunction w_;
  SecondOrderSolution v_;
  IndependenceReport ind_;
  Regressivity reg_;
};

inline ProductSolution solve_product_case(const TwoVarDerivator& G, double lambda, double c, double x0,
                                          double v0, double T, double L, const OdeOptions& opt = {}) {
  G.require(TwoVarDerivator::Kind::product, "solve_product_case");
  if (!(c > 0.0)) throw argument_error("solve_product_case: c must be positive");
  if (!(T > 0.0) || T > G.g().hi() || G.g().lo() > 0.0 || !(L > 0.0) || L > G.h().hi() || G.h().lo() > 0.0)
    throw domain_error("solve_product_case: [0,T] x [0,L] outside the derivator domains");
  const Derivator& g = G.g();
  const Derivator& h = G.h();
  auto p = [g, lambda, c](double t) {
    double gt = g.eval(t);
    return complex(lambda * c * c / (gt * gt));
  };
  ExpGFunction w(g, p, 0.0);
  auto zero = [](double) { return complex(0.0); };
  auto q = [h, lambda](double x) { return complex(-lambda / h.eval(x)); };
  // solved over the whole h-domain so derivative stencils at x = L stay inside
  auto v = solve_second_order(zero, q, zero, x0, v0, 0.0, h.hi(), h, opt);

  IndependenceReport ind;
  for (const auto& a : h.atoms()) {
    if (a.t < 0.0 || a.t > L) continue;
    double val = 1.0 - lambda / h.eval(a.t) * a.gap * a.gap;
    ind.atom_values.emplace_back(a.t, val);
    if (val == 0.0) ind.independent = false;
  }
  auto v1 = solve_second_order(zero, q, zero, 1.0, 0.0, 0.0, h.hi(), h, opt);
  auto v2 = solve_second_order(zero, q, zero, 0.0, 1.0, 0.0, h.hi(), h, opt);
  ind.determinant = v1.value(0.0) * v2.derivative(0.0) - v2.value(0.0) * v1.derivative(0.0);

  auto reg = is_regressive(p, g, 0.0, T);
  return ProductSolution(G, lambda, c, x0, std::move(w), std::move(v), std::move(ind), reg);
}

}  // namespace stieltjes
