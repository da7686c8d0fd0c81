#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace stieltjes {

using complex = std::complex<double>;

struct Affine {
  double slope = 0.0;
  double intercept = 0.0;
};

struct Flat {
  double level = 0.0;
};

struct Segment {
  double t_lo = 0.0;
  double t_hi = 0.0;
  std::variant<Affine, Flat> kind;

  double value(double t) const {
    if (const auto* a = std::get_if<Affine>(&kind)) return a->slope * t + a->intercept;
    return std::get<Flat>(kind).level;
  }
  double slope() const {
    if (const auto* a = std::get_if<Affine>(&kind)) return a->slope;
    return 0.0;
  }
  bool is_flat() const { return slope() == 0.0; }
};

struct Atom {
  double t = 0.0;
  double gap = 0.0;
};

// Open interval (lo, hi) on which the derivator is constant.
struct ConstancyInterval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double t) const { return lo < t && t < hi; }
};

struct TranslationCheck {
  bool ok = true;
  double max_deviation = 0.0;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline bool close(double a, double b, double rel = 1e-12) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

// Left-continuous nondecreasing function on [lo, hi], piecewise affine or flat,
// with finitely many declared jumps. Immutable after construction.
class Derivator {
 public:
  class Builder;

  Derivator(double lo, double hi, std::vector<Segment> segments, std::vector<Atom> atoms)
      : lo_(lo), hi_(hi), segments_(std::move(segments)), atoms_(std::move(atoms)) {
    validate();
    build_constancy();
  }

  static Derivator affine(double slope, double intercept, double lo, double hi) {
    return Derivator(lo, hi, {Segment{lo, hi, Affine{slope, intercept}}}, {});
  }
  static Derivator identity(double lo, double hi) { return affine(1.0, 0.0, lo, hi); }
  static Derivator constant(double level, double lo, double hi) {
    return Derivator(lo, hi, {Segment{lo, hi, Flat{level}}}, {});
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  std::span<const Segment> segments() const { return segments_; }
  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const ConstancyInterval> constancy_intervals() const { return constancy_; }

  double operator()(double t) const { return eval(t); }

  double eval(double t) const {
    check_closed(t, "eval");
    if (t == lo_) return segments_.front().value(lo_) - jump_unchecked(lo_);
    return segments_[segment_index(t)].value(t);
  }

  double right_limit(double t) const {
    check_half_open(t, "right_limit");
    return eval(t) + jump_unchecked(t);
  }

  double jump(double t) const {
    check_half_open(t, "jump");
    return jump_unchecked(t);
  }

  bool is_atom(double t) const { return jump_unchecked(t) > 0.0; }

  std::optional<ConstancyInterval> constancy_at(double t) const {
    for (const auto& c : constancy_)
      if (c.contains(t)) return c;
    return std::nullopt;
  }
  bool in_constancy(double t) const { return constancy_at(t).has_value(); }
  bool is_regular(double t) const { return !is_atom(t) && !in_constancy(t); }

  double t_star(double t) const {
    check_closed(t, "t_star");
    if (auto c = constancy_at(t)) return c->hi;
    return t;
  }

  double measure_interval(double a, double b) const {
    if (a > b) throw argument_error("measure_interval: a > b");
    check_closed(a, "measure_interval");
    check_closed(b, "measure_interval");
    return eval(b) - eval(a);
  }

  // mu_g([a,b) \ D_g)
  double continuous_measure(double a, double b) const {
    double m = measure_interval(a, b);
    for (const auto& at : atoms_)
      if (at.t >= a && at.t < b) m -= at.gap;
    return std::max(m, 0.0);
  }

  std::vector<Atom> atoms_in(double a, double b) const {
    std::vector<Atom> out;
    for (const auto& at : atoms_)
      if (at.t >= a && at.t < b) out.push_back(at);
    return out;
  }

  // Segment end points strictly inside (lo, hi).
  std::vector<double> breakpoints() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < segments_.size(); ++i) out.push_back(segments_[i].t_lo);
    return out;
  }

  // First atom strictly after t, or hi.
  double next_stop(double t) const {
    auto it = std::upper_bound(atoms_.begin(), atoms_.end(), t,
                               [](double v, const Atom& a) { return v < a.t; });
    return it == atoms_.end() ? hi_ : it->t;
  }
  // Last atom strictly before t, or lo.
  double prev_stop(double t) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), t,
                               [](const Atom& a, double v) { return a.t < v; });
    return it == atoms_.begin() ? lo_ : std::prev(it)->t;
  }

  // g-increment available to the right of t without crossing an atom.
  double right_room(double t) const {
    if (t >= hi_) return 0.0;
    return std::max(0.0, eval(next_stop(t)) - right_limit(t));
  }
  double left_room(double t) const {
    if (t <= lo_) return 0.0;
    return std::max(0.0, eval(t) - right_limit(prev_stop(t)));
  }

  // Point s > t with g(s) - g(t+) = delta, for 0 < delta <= right_room(t).
  double step_right(double t, double delta) const {
    double target = right_limit(t) + delta;
    std::size_t i = t == lo_ ? 0 : segment_index(t);
    if (segments_[i].t_hi == t && i + 1 < segments_.size()) ++i;
    for (; i < segments_.size(); ++i) {
      const auto& s = segments_[i];
      if (s.slope() > 0.0 && s.value(s.t_hi) >= target) {
        double x = (target - std::get<Affine>(s.kind).intercept) / s.slope();
        return std::clamp(x, std::max(s.t_lo, t), s.t_hi);
      }
    }
    return hi_;
  }

  // Point s < t with g(t) - g(s) = delta, for 0 < delta <= left_room(t).
  double step_left(double t, double delta) const {
    double target = eval(t) - delta;
    std::size_t i = segment_index(t);
    for (std::size_t k = i + 1; k-- > 0;) {
      const auto& s = segments_[k];
      if (s.slope() > 0.0 && s.value(s.t_lo) <= target) {
        double x = (target - std::get<Affine>(s.kind).intercept) / s.slope();
        return std::clamp(x, s.t_lo, std::min(s.t_hi, t));
      }
    }
    return lo_;
  }

  // g + c
  Derivator shifted(double c) const {
    auto segs = segments_;
    for (auto& s : segs) {
      if (auto* a = std::get_if<Affine>(&s.kind)) a->intercept += c;
      else std::get<Flat>(s.kind).level += c;
    }
    return Derivator(lo_, hi_, std::move(segs), atoms_);
  }

  // the same function on [a, b], a subinterval of the domain
  Derivator restricted(double a, double b) const {
    if (!(lo_ <= a && a < b && b <= hi_))
      throw domain_error("restricted: [" + detail::fmt(a) + ", " + detail::fmt(b) + "] not inside the domain");
    std::vector<Segment> segs;
    for (auto s : segments_) {
      if (s.t_hi <= a || s.t_lo >= b) continue;
      s.t_lo = std::max(s.t_lo, a);
      s.t_hi = std::min(s.t_hi, b);
      segs.push_back(s);
    }
    std::vector<Atom> atoms;
    for (const auto& at : atoms_)
      if (at.t >= a && at.t < b) atoms.push_back(at);
    return Derivator(a, b, std::move(segs), std::move(atoms));
  }

  // k * g, k > 0
  Derivator scaled(double k) const {
    if (!(k > 0.0)) throw argument_error("scaled: factor must be positive");
    auto segs = segments_;
    for (auto& s : segs) {
      if (auto* a = std::get_if<Affine>(&s.kind)) {
        a->slope *= k;
        a->intercept *= k;
      } else {
        std::get<Flat>(s.kind).level *= k;
      }
    }
    auto ats = atoms_;
    for (auto& a : ats) a.gap *= k;
    return Derivator(lo_, hi_, std::move(segs), std::move(ats));
  }

  TranslationCheck check_translation_condition(
      double L, std::span<const std::pair<double, double>> samples, double tol = 1e-12) const {
    if (!(L > 0.0)) throw argument_error("check_translation_condition: L must be positive");
    TranslationCheck r;
    for (auto [x, y] : samples) {
      for (double v : {x, y, x + L, y + L})
        if (v < lo_ || v > hi_)
          throw domain_error("check_translation_condition: sample " + detail::fmt(v) +
                             " outside domain");
      double dev = std::abs((eval(x + L) - eval(y + L)) - (eval(x) - eval(y)));
      r.max_deviation = std::max(r.max_deviation, dev);
    }
    r.ok = r.max_deviation <= tol;
    return r;
  }

 private:
  double lo_, hi_;
  std::vector<Segment> segments_;
  std::vector<Atom> atoms_;
  std::vector<ConstancyInterval> constancy_;

  void check_closed(double t, const char* op) const {
    if (!(t >= lo_ && t <= hi_))
      throw domain_error(std::string(op) + ": t=" + detail::fmt(t) + " outside [" +
                         detail::fmt(lo_) + ", " + detail::fmt(hi_) + "]");
  }
  void check_half_open(double t, const char* op) const {
    if (!(t >= lo_ && t < hi_))
      throw domain_error(std::string(op) + ": t=" + detail::fmt(t) + " outside [" +
                         detail::fmt(lo_) + ", " + detail::fmt(hi_) + ")");
  }

  // Index of the segment with t_lo < t <= t_hi (t > lo).
  std::size_t segment_index(double t) const {
    auto it = std::lower_bound(segments_.begin(), segments_.end(), t,
                               [](const Segment& s, double v) { return s.t_hi < v; });
    if (it == segments_.end()) return segments_.size() - 1;
    return static_cast<std::size_t>(it - segments_.begin());
  }

  double jump_unchecked(double t) const {
    auto it = std::lower_bound(atoms_.begin(), atoms_.end(), t,
                               [](const Atom& a, double v) { return a.t < v; });
    return it != atoms_.end() && it->t == t ? it->gap : 0.0;
  }

  void validate() const {
    auto fail = [](const std::string& m) { throw validation_error("derivator: " + m); };
    if (!std::isfinite(lo_) || !std::isfinite(hi_) || !(lo_ < hi_))
      fail("domain must be a finite interval with lo < hi");
    if (segments_.empty()) fail("segments must cover the domain");
    if (segments_.front().t_lo != lo_ || segments_.back().t_hi != hi_)
      fail("segments must cover [domain_lo, domain_hi]");
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const auto& s = segments_[i];
      if (!(s.t_lo < s.t_hi)) fail("segment bounds must satisfy t_lo < t_hi");
      if (i > 0 && segments_[i - 1].t_hi != s.t_lo)
        fail("segments must be ordered and non-overlapping (gap or overlap at " +
             detail::fmt(s.t_lo) + ")");
      if (const auto* a = std::get_if<Affine>(&s.kind)) {
        if (!std::isfinite(a->slope) || !std::isfinite(a->intercept))
          fail("affine coefficients must be finite");
        if (a->slope < 0.0) fail("slope >= 0 for Affine (monotonicity)");
      } else if (!std::isfinite(std::get<Flat>(s.kind).level)) {
        fail("flat level must be finite");
      }
    }
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const auto& a = atoms_[i];
      if (!(a.gap > 0.0) || !std::isfinite(a.gap)) fail("atom gaps must be positive and finite");
      if (a.t < lo_ || a.t >= hi_) fail("atom at " + detail::fmt(a.t) + " outside [lo, hi)");
      if (i > 0 && !(atoms_[i - 1].t < a.t)) fail("atoms must be strictly increasing");
      bool at_break = a.t == lo_;
      for (std::size_t k = 1; k < segments_.size(); ++k) at_break |= segments_[k].t_lo == a.t;
      if (!at_break)
        fail("atom at " + detail::fmt(a.t) +
             " is not at a segment breakpoint (left-continuity / atom consistency)");
    }
    for (std::size_t k = 1; k < segments_.size(); ++k) {
      double b = segments_[k].t_lo;
      double left = segments_[k - 1].value(b);
      double right = segments_[k].value(b);
      double jmp = right - left;
      double declared = jump_unchecked(b);
      if (!detail::close(jmp, declared)) {
        if (jmp < 0.0 && !detail::close(jmp, 0.0))
          fail("global monotonicity violated at " + detail::fmt(b));
        fail("atoms must be exactly the points where right_limit - eval > 0 (at " +
             detail::fmt(b) + ": segment jump " + detail::fmt(jmp) + ", declared gap " +
             detail::fmt(declared) + ")");
      }
    }
  }

  void build_constancy() {
    std::size_t i = 0;
    while (i < segments_.size()) {
      if (!segments_[i].is_flat()) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j + 1 < segments_.size() && segments_[j + 1].is_flat() &&
             jump_unchecked(segments_[j + 1].t_lo) == 0.0)
        ++j;
      constancy_.push_back({segments_[i].t_lo, segments_[j].t_hi});
      i = j + 1;
    }
  }
};

// Incremental construction from a starting value: pieces are appended left to right.
class Derivator::Builder {
 public:
  explicit Builder(double lo, double value_at_lo = 0.0) : lo_(lo), pos_(lo), value_(value_at_lo) {}

  Builder& jump(double gap) {
    atoms_.push_back({pos_, gap});
    value_ += gap;
    return *this;
  }
  Builder& affine(double to, double slope) {
    segments_.push_back({pos_, to, Affine{slope, value_ - slope * pos_}});
    value_ += slope * (to - pos_);
    pos_ = to;
    return *this;
  }
  Builder& flat(double to) {
    segments_.push_back({pos_, to, Flat{value_}});
    pos_ = to;
    return *this;
  }
  Derivator build() const { return Derivator(lo_, pos_, segments_, atoms_); }

 private:
  double lo_, pos_, value_;
  std::vector<Segment> segments_;
  std::vector<Atom> atoms_;
};

}  // namespace stieltjes
