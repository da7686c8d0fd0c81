#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <stieltjes/derivator.hpp>

namespace fixtures {

using stieltjes::Derivator;

// g(t) = t for t <= 1/2, t + 1 for t > 1/2
inline Derivator jump_g(double lo = 0.0, double hi = 1.0) {
  return Derivator::Builder(lo, lo).affine(0.5, 1.0).jump(1.0).affine(hi, 1.0).build();
}

// h(x) = x + 2 on [0,1], 3 on (1, 3/2], 2x + 1 after
inline Derivator plateau_h(double hi = 2.0) {
  return Derivator::Builder(0.0, 2.0).affine(1.0, 1.0).flat(1.5).jump(1.0).affine(hi, 2.0).build();
}

// t + sum over k >= 1 of delta * 1{t > kL}, on [lo, lo + periods * L]
inline Derivator staircase(double L, double delta, int periods, double lo = 0.0) {
  Derivator::Builder b(lo, lo);
  double pos = lo;
  for (int k = 1; k <= periods; ++k) {
    pos = lo + k * L;
    b.affine(pos - 0.25 * L, 1.0).flat(pos);
    if (k < periods) b.jump(delta);
  }
  return b.build();
}

// slope 3, flat run, atom, shallow slope; with an atom at the left end
inline Derivator mixed() {
  return Derivator::Builder(0.0, 0.0)
      .jump(0.25)
      .affine(0.3, 3.0)
      .flat(0.7)
      .jump(0.5)
      .affine(1.2, 0.5)
      .jump(0.2)
      .affine(2.0, 1.5)
      .build();
}

// two atoms and a steep middle piece
inline Derivator two_atoms() {
  return Derivator::Builder(0.0, 0.0)
      .affine(0.4, 0.5)
      .jump(0.3)
      .affine(0.9, 2.0)
      .jump(0.6)
      .affine(2.0, 1.0)
      .build();
}

struct Named {
  std::string name;
  Derivator d;
};

inline std::vector<Named> all() {
  return {{"identity", Derivator::identity(0.0, 2.0)},
          {"jump_g", jump_g(0.0, 2.0)},
          {"plateau_h", plateau_h()},
          {"mixed", mixed()},
          {"two_atoms", two_atoms()}};
}

// n points in [a, b] avoiding atoms, constancy sets and a margin around breakpoints.
inline std::vector<double> regular_points(const Derivator& d, double a, double b, int n,
                                          double margin = 1e-3) {
  std::vector<double> cand;
  const int dense = 40 * n;
  for (int i = 0; i <= dense; ++i) {
    double t = a + (b - a) * (i + 0.5) / (dense + 1);
    bool ok = d.is_regular(t);
    for (double bp : d.breakpoints()) ok &= std::abs(t - bp) > margin;
    ok &= std::abs(t - d.lo()) > margin && std::abs(t - d.hi()) > margin;
    if (ok) cand.push_back(t);
  }
  std::vector<double> out;
  if (cand.empty()) return out;
  for (int i = 0; i < n; ++i)
    out.push_back(cand[static_cast<std::size_t>(i) * (cand.size() - 1) / std::max(1, n - 1)]);
  return out;
}

}  // namespace fixtures
