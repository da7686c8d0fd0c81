#pragma once

// Problem files as JSON (nlohmann::json).

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "derivator.hpp"
#include "errors.hpp"
#include "heat1d.hpp"
#include "heat2d.hpp"

namespace stieltjes::io {

using json = nlohmann::json;

namespace detail {

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) throw parse_error(where + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw parse_error(where + ": missing \"" + key + "\"");
  return *it;
}

inline double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw parse_error(where + ": expected a number");
  return j.get<double>();
}

inline double number(const json& j, const char* key, const std::string& where) {
  return number(field(j, key, where), where + "." + key);
}

inline double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  return j.contains(key) ? number(j, key, where) : fallback;
}

inline int integer_or(const json& j, const char* key, int fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw parse_error(where + "." + key + ": expected an integer");
  return v.get<int>();
}

}  // namespace detail

// a number or [re, im]
inline complex complex_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  throw parse_error(where + ": expected a number or [re, im]");
}

inline complex complex_or(const json& j, const char* key, complex fallback, const std::string& where) {
  return j.contains(key) ? complex_from_json(j.at(key), where + "." + key) : fallback;
}

// {"domain":[lo,hi], "segments":[{"from","to","kind":"affine","slope","intercept"} |
//  {"from","to","kind":"flat","level"}], "atoms":[{"t","gap"}]}
inline Derivator derivator_from_json(const json& j, const std::string& where = "derivator") {
  using detail::field;
  using detail::number;
  const auto& dom = field(j, "domain", where);
  if (!dom.is_array() || dom.size() != 2) throw parse_error(where + ".domain: expected [lo, hi]");
  double lo = number(dom[0], where + ".domain"), hi = number(dom[1], where + ".domain");
  const auto& segs = field(j, "segments", where);
  if (!segs.is_array()) throw parse_error(where + ".segments: expected an array");
  std::vector<Segment> out;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    std::string w = where + ".segments[" + std::to_string(i) + "]";
    const auto& s = segs[i];
    Segment seg{number(s, "from", w), number(s, "to", w), Flat{}};
    const auto& kind = field(s, "kind", w);
    if (kind == "affine")
      seg.kind = Affine{number(s, "slope", w), number(s, "intercept", w)};
    else if (kind == "flat")
      seg.kind = Flat{number(s, "level", w)};
    else
      throw parse_error(w + ".kind: expected \"affine\" or \"flat\"");
    out.push_back(seg);
  }
  std::vector<Atom> atoms;
  if (j.contains("atoms")) {
    const auto& as = j.at("atoms");
    if (!as.is_array()) throw parse_error(where + ".atoms: expected an array");
    for (std::size_t i = 0; i < as.size(); ++i) {
      std::string w = where + ".atoms[" + std::to_string(i) + "]";
      atoms.push_back({number(as[i], "t", w), number(as[i], "gap", w)});
    }
  }
  return Derivator(lo, hi, std::move(out), std::move(atoms));
}

inline json derivator_to_json(const Derivator& d) {
  json segs = json::array();
  for (const auto& s : d.segments()) {
    json e{{"from", s.t_lo}, {"to", s.t_hi}};
    if (const auto* a = std::get_if<Affine>(&s.kind)) {
      e["kind"] = "affine";
      e["slope"] = a->slope;
      e["intercept"] = a->intercept;
    } else {
      e["kind"] = "flat";
      e["level"] = std::get<Flat>(s.kind).level;
    }
    segs.push_back(e);
  }
  json atoms = json::array();
  for (const auto& a : d.atoms()) atoms.push_back({{"t", a.t}, {"gap", a.gap}});
  return {{"domain", {d.lo(), d.hi()}}, {"segments", segs}, {"atoms", atoms}};
}

inline SeparatedTerm term_from_json(const json& j, const std::string& where) {
  return {complex_from_json(detail::field(j, "lambda", where), where + ".lambda"),
          complex_or(j, "a", 0.0, where), complex_or(j, "b", 0.0, where)};
}

inline std::vector<SeparatedTerm> terms_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw parse_error(where + ": expected an array");
  std::vector<SeparatedTerm> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(term_from_json(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

// {"kind":"inv_sqrt_factorial"} | {"kind":"inv_factorial"} | {"kind":"geometric","ratio":r}
// | {"kind":"values","values":[...]}; optional "scale" multiplies every coefficient.
inline AlphaStream alpha_from_json(const json& j, const std::string& where = "alpha") {
  const auto& kind = detail::field(j, "kind", where);
  double scale = detail::number_or(j, "scale", 1.0, where);
  if (!(scale > 0.0)) throw parse_error(where + ".scale: must be positive");
  double ls = std::log(scale);
  auto from_log = [scale, ls](auto logf) {
    return AlphaStream{[scale, logf](int n) { return complex(scale * std::exp(logf(n))); },
                       [ls, logf](int n) { return ls + logf(n); }};
  };
  if (kind == "inv_sqrt_factorial") return from_log([](int n) { return -0.5 * std::lgamma(n + 1.0); });
  if (kind == "inv_factorial") return from_log([](int n) { return -std::lgamma(n + 1.0); });
  if (kind == "geometric") {
    double r = detail::number(j, "ratio", where);
    if (!(r > 0.0)) throw parse_error(where + ".ratio: must be positive");
    double lr = std::log(r);
    return from_log([lr](int n) { return n * lr; });
  }
  if (kind == "values") {
    const auto& vs = detail::field(j, "values", where);
    if (!vs.is_array()) throw parse_error(where + ".values: expected an array");
    std::vector<complex> v;
    for (std::size_t i = 0; i < vs.size(); ++i)
      v.push_back(scale * complex_from_json(vs[i], where + ".values[" + std::to_string(i) + "]"));
    return {[v](int n) { return n < static_cast<int>(v.size()) ? v[static_cast<std::size_t>(n)] : complex(0.0); },
            {}};
  }
  throw parse_error(where + ".kind: unknown coefficient family");
}

inline TwoVarDerivator two_var_from_json(const json& j, const std::string& where = "G") {
  const auto& kind = detail::field(j, "kind", where);
  auto g = derivator_from_json(detail::field(j, "g", where), where + ".g");
  auto h = derivator_from_json(detail::field(j, "h", where), where + ".h");
  if (kind == "sum") return TwoVarDerivator::sum(std::move(g), std::move(h));
  if (kind == "product") return TwoVarDerivator::product(std::move(g), std::move(h));
  throw parse_error(where + ".kind: expected \"sum\" or \"product\"");
}

enum class Mode { ivp, general, periodic, dirichlet, neumann, gpoly_series, product_eigen };

inline Mode mode_from_string(const std::string& s) {
  if (s == "ivp") return Mode::ivp;
  if (s == "general") return Mode::general;
  if (s == "periodic") return Mode::periodic;
  if (s == "dirichlet") return Mode::dirichlet;
  if (s == "neumann") return Mode::neumann;
  if (s == "gpoly-series") return Mode::gpoly_series;
  if (s == "product-eigen") return Mode::product_eigen;
  throw parse_error("mode: unknown mode \"" + s + "\"");
}

inline bool is_two_variable(Mode m) { return m == Mode::gpoly_series || m == Mode::product_eigen; }

struct BrokenCoefficient {
  int m = 0, n = 0;
  long long delta = 1;
};

struct EigenScan {
  double lambda_min = -100.0;
  double lambda_max = 0.0;
  int count = 4;
};

// A parsed problem. One-variable modes fill `heat`; two-variable modes fill `G`.
struct Problem {
  Mode mode = Mode::ivp;
  double c = 1.0, T = 1.0, L = 1.0;
  std::optional<HeatProblem> heat;
  std::optional<TwoVarDerivator> G;

  InitialData u0;
  std::vector<SeparatedTerm> terms;
  complex lambda = 0.0;
  double amplitude = 1.0;  // dirichlet a / neumann b
  std::optional<AlphaStream> alpha;
  int N = 40;
  int probe = 200;
  double x0 = 1.0, v0 = 0.0;
  std::optional<BrokenCoefficient> broken;
  EigenScan eigs;

  // the t- and x-derivators on which grids and derivatives live
  const Derivator& g() const { return heat ? heat->g() : G->g(); }
  const Derivator& h() const { return heat ? heat->h() : G->h(); }
};

inline Problem problem_from_json(const json& j) {
  using detail::field;
  using detail::number;
  const std::string w = "problem";
  if (!j.is_object()) throw parse_error("problem: expected a JSON object");
  Problem p;
  const auto& mode = field(j, "mode", w);
  if (!mode.is_string()) throw parse_error("problem.mode: expected a string");
  p.mode = mode_from_string(mode.get<std::string>());
  p.c = number(j, "c", w);
  p.T = number(j, "T", w);
  p.L = number(j, "L", w);

  if (is_two_variable(p.mode)) {
    p.G = two_var_from_json(field(j, "G", w));
    const char* need = p.mode == Mode::gpoly_series ? "sum" : "product";
    if (field(j.at("G"), "kind", "G") != need)
      throw parse_error(std::string("problem.G.kind: mode ") + mode.get<std::string>() + " needs a " + need +
                        " derivator");
  } else {
    p.heat.emplace(derivator_from_json(field(j, "g", w), "g"), derivator_from_json(field(j, "h", w), "h"), p.c,
                   p.T, p.L);
  }

  switch (p.mode) {
    case Mode::ivp: {
      const auto& u = field(j, "u0", w);
      p.u0.a0 = complex_or(u, "a0", 0.0, "u0");
      p.u0.b0 = complex_or(u, "b0", 0.0, "u0");
      if (u.contains("modes")) p.u0.modes = terms_from_json(u.at("modes"), "u0.modes");
      break;
    }
    case Mode::general:
      p.terms = terms_from_json(field(j, "terms", w), "terms");
      break;
    case Mode::periodic:
      p.lambda = complex_from_json(field(j, "lambda", w), "lambda");
      break;
    case Mode::dirichlet:
      p.lambda = number(j, "lambda", w);
      p.amplitude = detail::number_or(j, "a", 1.0, w);
      break;
    case Mode::neumann:
      p.lambda = number(j, "lambda", w);
      p.amplitude = detail::number_or(j, "b", 1.0, w);
      break;
    case Mode::gpoly_series:
      p.alpha = alpha_from_json(field(j, "alpha", w));
      p.N = detail::integer_or(j, "N", p.N, w);
      p.probe = detail::integer_or(j, "probe", p.probe, w);
      if (j.contains("broken_coefficient")) {
        const auto& b = j.at("broken_coefficient");
        p.broken = BrokenCoefficient{detail::integer_or(b, "m", 0, "broken_coefficient"),
                                     detail::integer_or(b, "n", 0, "broken_coefficient"),
                                     detail::integer_or(b, "delta", 1, "broken_coefficient")};
      }
      break;
    case Mode::product_eigen:
      p.lambda = number(j, "lambda", w);
      p.x0 = detail::number_or(j, "x0", 1.0, w);
      p.v0 = detail::number_or(j, "v0", 0.0, w);
      break;
  }
  if (j.contains("eigs")) {
    const auto& e = j.at("eigs");
    p.eigs.lambda_min = detail::number_or(e, "lambda_min", p.eigs.lambda_min, "eigs");
    p.eigs.lambda_max = detail::number_or(e, "lambda_max", p.eigs.lambda_max, "eigs");
    p.eigs.count = detail::integer_or(e, "count", p.eigs.count, "eigs");
  }
  return p;
}

// Reads and parses a file; JSON syntax and schema problems both surface as parse_error.
inline Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json j;
  try {
    j = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw parse_error(path + ": " + e.what());
  }
  try {
    return problem_from_json(j);
  } catch (const json::exception& e) {
    throw parse_error(path + ": " + e.what());
  }
}

}  // namespace stieltjes::io
