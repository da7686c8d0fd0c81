#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "derivator.hpp"
#include "errors.hpp"
#include "ls_integral.hpp"

namespace stieltjes {

struct OdeOptions {
  double mesh = 1e-3;  // max g-increment between nodes on the coarsest grid
  double tol = 1e-6;   // sup-norm stopping tolerance for the extrapolated solution
  int max_halvings = 6;
};

// Nodes on [a, b] containing every atom, breakpoint and both ends.
struct StieltjesGrid {
  std::vector<double> nodes;
  std::vector<char> is_atom;

  static StieltjesGrid build(const Derivator& d, double a, double b, double mesh) {
    if (!(a < b)) throw argument_error("StieltjesGrid: need a < b");
    if (!(mesh > 0.0)) throw argument_error("StieltjesGrid: mesh must be positive");
    if (a < d.lo() || b > d.hi()) throw domain_error("StieltjesGrid: interval outside domain");
    std::vector<double> fixed{a, b};
    for (double bp : d.breakpoints())
      if (bp > a && bp < b) fixed.push_back(bp);
    for (const auto& at : d.atoms())
      if (at.t > a && at.t < b) fixed.push_back(at.t);
    std::sort(fixed.begin(), fixed.end());
    fixed.erase(std::unique(fixed.begin(), fixed.end()), fixed.end());

    StieltjesGrid g;
    for (std::size_t i = 0; i + 1 < fixed.size(); ++i) {
      double p = fixed[i], q = fixed[i + 1];
      g.nodes.push_back(p);
      double inc = d.eval(q) - d.right_limit(p);
      if (inc <= 0.0) continue;
      auto n = static_cast<long>(std::ceil(inc / mesh));
      for (long k = 1; k < n; ++k) g.nodes.push_back(d.step_right(p, inc * k / n));
    }
    g.nodes.push_back(b);
    g.flag_atoms(d);
    return g;
  }

  // Splits every interval carrying continuous measure into `factor` equal g-pieces.
  // Returns the finer grid and the position of each original node in it.
  std::pair<StieltjesGrid, std::vector<std::size_t>> refine(const Derivator& d, int factor) const {
    StieltjesGrid g;
    std::vector<std::size_t> map;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      map.push_back(g.nodes.size());
      g.nodes.push_back(nodes[i]);
      if (i + 1 == nodes.size()) break;
      double inc = d.eval(nodes[i + 1]) - d.right_limit(nodes[i]);
      if (inc <= 0.0) continue;
      for (int k = 1; k < factor; ++k) g.nodes.push_back(d.step_right(nodes[i], inc * k / factor));
    }
    g.flag_atoms(d);
    return {std::move(g), std::move(map)};
  }

 private:
  void flag_atoms(const Derivator& d) {
    is_atom.assign(nodes.size(), 0);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) is_atom[i] = d.is_atom(nodes[i]) ? 1 : 0;
  }
};

template <class T, std::size_t N>
using State = std::array<T, N>;

// States just before (pre) and just after (post) each node.
template <class T, std::size_t N>
struct Trajectory {
  std::vector<double> t;
  std::vector<State<T, N>> pre, post;
};

namespace detail {

template <class T, std::size_t N>
State<T, N> axpy(const State<T, N>& x, const State<T, N>& r, double h) {
  State<T, N> out;
  for (std::size_t i = 0; i < N; ++i) out[i] = x[i] + r[i] * h;
  return out;
}

template <class T, std::size_t N>
bool finite_state(const State<T, N>& x) {
  for (const auto& v : x)
    if (!finite_value(v)) return false;
  return true;
}

}  // namespace detail

// Explicit Stieltjes-Euler. At an atom the jump F * gap is applied first, then the
// continuous increment to the next node starts from the post-jump state.
template <class T, std::size_t N, class F>
Trajectory<T, N> euler_stieltjes(F&& field, const State<T, N>& x0, const StieltjesGrid& grid,
                                 const Derivator& d) {
  Trajectory<T, N> tr;
  const std::size_t M = grid.nodes.size();
  tr.t = grid.nodes;
  tr.pre.resize(M);
  tr.post.resize(M);
  State<T, N> x = x0;
  for (std::size_t k = 0; k < M; ++k) {
    double tk = grid.nodes[k];
    tr.pre[k] = x;
    if (grid.is_atom[k]) x = detail::axpy(x, field(tk, x), d.jump(tk));
    tr.post[k] = x;
    if (k + 1 == M) break;
    double inc = d.eval(grid.nodes[k + 1]) - d.right_limit(tk);
    if (inc > 0.0) {
      double tr_pt = grid.is_atom[k] ? std::nextafter(tk, std::numeric_limits<double>::infinity()) : tk;
      x = detail::axpy(x, field(tr_pt, x), inc);
    }
    if (!detail::finite_state(x))
      throw divergence_error("euler_stieltjes: non-finite state after t=" + detail::fmt(tk), tk);
  }
  return tr;
}

// Extrapolated solution on a coarse grid with cubic Hermite interpolation in g.
template <class T, std::size_t N>
class DenseTrajectory {
 public:
  using StateT = State<T, N>;

  DenseTrajectory(Derivator d, Trajectory<T, N> tr, std::vector<StateT> slope_pre,
                  std::vector<StateT> slope_post, int levels)
      : d_(std::move(d)),
        tr_(std::move(tr)),
        slope_pre_(std::move(slope_pre)),
        slope_post_(std::move(slope_post)),
        levels_(levels) {}

  double lo() const { return tr_.t.front(); }
  double hi() const { return tr_.t.back(); }
  int levels_used() const { return levels_; }
  const Trajectory<T, N>& nodes() const { return tr_; }

  StateT operator()(double t) const {
    if (t < lo() || t > hi()) throw domain_error("DenseTrajectory: t outside solved interval");
    auto it = std::lower_bound(tr_.t.begin(), tr_.t.end(), t);
    auto k = static_cast<std::size_t>(it - tr_.t.begin());
    if (tr_.t[k] == t) return tr_.pre[k];
    --k;  // t in (t_k, t_{k+1})
    double tk = tr_.t[k], tn = tr_.t[k + 1];
    double inc = d_.eval(tn) - d_.right_limit(tk);
    if (inc <= 0.0) return tr_.post[k];
    double s = (d_.eval(t) - d_.right_limit(tk)) / inc;
    double s2 = s * s, s3 = s2 * s;
    double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2,
           h11 = s3 - s2;
    StateT out;
    for (std::size_t i = 0; i < N; ++i)
      out[i] = h00 * tr_.post[k][i] + h10 * inc * slope_post_[k][i] + h01 * tr_.pre[k + 1][i] +
               h11 * inc * slope_pre_[k + 1][i];
    return out;
  }

  StateT right_limit(double t) const {
    auto it = std::lower_bound(tr_.t.begin(), tr_.t.end(), t);
    if (it != tr_.t.end() && *it == t) return tr_.post[static_cast<std::size_t>(it - tr_.t.begin())];
    return (*this)(t);
  }

 private:
  Derivator d_;
  Trajectory<T, N> tr_;
  std::vector<StateT> slope_pre_, slope_post_;
  int levels_;
};

// Euler under mesh halving with a Richardson tableau (error exponents 1, 2, ...)
// on the coarse nodes, until successive extrapolants differ by less than tol.
template <class T, std::size_t N, class F>
DenseTrajectory<T, N> solve_stieltjes(F&& field, const State<T, N>& x0, double a, double b,
                                      const Derivator& d, const OdeOptions& opt = {}) {
  if (!(opt.tol > 0.0) || opt.max_halvings < 1) throw argument_error("OdeOptions: invalid");
  auto coarse = StieltjesGrid::build(d, a, b, opt.mesh);
  const std::size_t M = coarse.nodes.size();
  using Row = std::vector<T>;  // pre and post values of every coarse node, flattened
  auto flatten = [&](const Trajectory<T, N>& tr, const std::vector<std::size_t>& map) {
    Row r;
    r.reserve(2 * M * N);
    for (std::size_t k = 0; k < M; ++k)
      for (std::size_t i = 0; i < N; ++i) {
        r.push_back(tr.pre[map[k]][i]);
        r.push_back(tr.post[map[k]][i]);
      }
    return r;
  };

  std::vector<Row> prev_row;
  Row best;
  double diff = 0.0;
  int level = 0;
  for (; level <= opt.max_halvings; ++level) {
    auto [grid, map] = coarse.refine(d, 1 << level);
    auto tr = euler_stieltjes<T, N>(field, x0, grid, d);
    std::vector<Row> row{flatten(tr, map)};
    for (std::size_t j = 1; j <= prev_row.size(); ++j) {
      double factor = std::pow(2.0, static_cast<double>(j)) - 1.0;
      Row r(row[j - 1].size());
      for (std::size_t e = 0; e < r.size(); ++e)
        r[e] = row[j - 1][e] + (row[j - 1][e] - prev_row[j - 1][e]) / factor;
      row.push_back(std::move(r));
    }
    if (level > 0) {
      diff = 0.0;
      for (std::size_t e = 0; e < best.size(); ++e)
        diff = std::max(diff, static_cast<double>(std::abs(row.back()[e] - best[e])));
    }
    best = row.back();
    prev_row = std::move(row);
    if (level > 0 && diff < opt.tol) break;
  }
  if (level > opt.max_halvings)
    throw convergence_error("solve_stieltjes: no convergence within " +
                                std::to_string(opt.max_halvings) + " halvings (sup difference " +
                                detail::fmt(diff) + ")",
                            diff, diff);

  Trajectory<T, N> out;
  out.t = coarse.nodes;
  out.pre.resize(M);
  out.post.resize(M);
  std::vector<State<T, N>> sp(M), sq(M);
  for (std::size_t k = 0; k < M; ++k) {
    for (std::size_t i = 0; i < N; ++i) {
      out.pre[k][i] = best[2 * (k * N + i)];
      out.post[k][i] = best[2 * (k * N + i) + 1];
    }
    double tk = coarse.nodes[k];
    sp[k] = field(tk, out.pre[k]);
    double tr_pt = coarse.is_atom[k] ? std::nextafter(tk, std::numeric_limits<double>::infinity()) : tk;
    sq[k] = k + 1 < M ? field(tr_pt, out.post[k]) : sp[k];
  }
  return DenseTrajectory<T, N>(d, std::move(out), std::move(sp), std::move(sq), level + 1);
}

using Coefficient = std::function<complex(double)>;

// v'' + P v' + Q v = f with v(a) = x0, v'(a) = v0, as the system (v, v').
class SecondOrderSolution {
 public:
  SecondOrderSolution(DenseTrajectory<complex, 2> traj, Coefficient P, Coefficient Q, Coefficient f,
                      Derivator d)
      : traj_(std::move(traj)), P_(std::move(P)), Q_(std::move(Q)), f_(std::move(f)), d_(std::move(d)) {}

  complex value(double x) const { return traj_(x)[0]; }
  complex derivative(double x) const { return traj_(x)[1]; }
  complex operator()(double x) const { return value(x); }
  // From the equation, at the representative point x*.
  complex second_derivative(double x) const {
    double xs = d_.t_star(x);
    auto s = traj_(xs);
    return f_(xs) - P_(xs) * s[1] - Q_(xs) * s[0];
  }
  const DenseTrajectory<complex, 2>& trajectory() const { return traj_; }

 private:
  DenseTrajectory<complex, 2> traj_;
  Coefficient P_, Q_, f_;
  Derivator d_;
};

inline SecondOrderSolution solve_second_order(Coefficient P, Coefficient Q, Coefficient f, complex x0,
                                              complex v0, double a, double b, const Derivator& d,
                                              const OdeOptions& opt = {}) {
  auto field = [&](double t, const State<complex, 2>& s) {
    return State<complex, 2>{s[1], f(t) - P(t) * s[1] - Q(t) * s[0]};
  };
  auto traj = solve_stieltjes<complex, 2>(field, {x0, v0}, a, b, d, opt);
  return SecondOrderSolution(std::move(traj), std::move(P), std::move(Q), std::move(f), d);
}

struct PeriodicFirstOrder {
  DenseTrajectory<complex, 1> solution;
  bool unique = true;
  complex multiplier;  // x(L; 1) - x(L; 0)

  complex operator()(double x) const { return solution(x)[0]; }
};

// u' = coef(x) u + forcing(x) on [lo, lo + L] with u(lo) = u(lo + L).
inline PeriodicFirstOrder solve_periodic_first_order(Coefficient coef, Coefficient forcing, double L,
                                                     const Derivator& d, const OdeOptions& opt = {},
                                                     double lo = 0.0) {
  auto field = [&](double t, const State<complex, 1>& s) {
    return State<complex, 1>{coef(t) * s[0] + forcing(t)};
  };
  double b = lo + L;
  auto s0 = solve_stieltjes<complex, 1>(field, {complex(0.0)}, lo, b, d, opt);
  auto s1 = solve_stieltjes<complex, 1>(field, {complex(1.0)}, lo, b, d, opt);
  complex r = s0(b)[0];
  complex M = s1(b)[0] - r;
  double eps = 100.0 * opt.tol;
  if (std::abs(1.0 - M) > eps) {
    complex start = r / (1.0 - M);
    return {solve_stieltjes<complex, 1>(field, {start}, lo, b, d, opt), true, M};
  }
  if (std::abs(r) > eps)
    throw no_solution_error("periodic first-order problem: multiplier is 1 and the forcing is "
                            "inconsistent with periodicity");
  return {std::move(s1), false, M};
}

}  // namespace stieltjes
