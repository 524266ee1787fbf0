#pragma once

// Gallery of hypersurface models: Grauert-tube boundaries around totally real
// surfaces, plus the Heisenberg and unit-sphere reference models.
//
// Graph charts always use z = x + iy, w = u + iv and v = phi(x, y, u).  Implicit
// charts are sampled through three real chart coordinates that are mapped onto
// the surface by a per-chart sampler.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "cartan/cartan_graph.hpp"
#include "cartan/cartan_implicit.hpp"
#include "cartan/errors.hpp"
#include "cartan/expr.hpp"

namespace cartan {

inline constexpr double kDefaultMargin = 1e-6;

// ---------------------------------------------------------------------------
// Scalar helpers

/// epsilon = sqrt((1 - cos sqrt(eps)) / (1 + cos sqrt(eps))) = tan(sqrt(eps) / 2).
inline double eps_reparam(double eps) {
  const double hi = std::numbers::pi * std::numbers::pi / 4.0;
  if (!(eps > 0.0 && eps < hi)) throw DomainError("eps must lie in (0, (pi/2)^2)");
  return std::tan(std::sqrt(eps) / 2.0);
}

/// Inverse of eps_reparam.
inline double eps_from_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  const double s = 2.0 * std::atan(epsilon);
  return s * s;
}

/// Kaehler potential of the hyperbolic tube, valid in the cone 2y^2 + v^2 <= x^2, x > 0.
inline double rho_hyperbolic(double u, double v, double x, double y) {
  (void)u;
  if (!(x > 0.0) || 2.0 * y * y + v * v > x * x) throw DomainError("point outside the security cone 2y^2 + v^2 <= x^2");
  const double arg = std::clamp(1.0 - 2.0 * (y * y + v * v) / (x * x + y * y), -1.0, 1.0);
  const double a = std::acos(arg);
  return a * a;
}

enum class Metric { Flat, Elliptic, Hyperbolic };

inline const char* metric_name(Metric m) {
  switch (m) {
    case Metric::Flat: return "flat";
    case Metric::Elliptic: return "ell";
    case Metric::Hyperbolic: return "hyp";
  }
  return "?";
}

inline Metric metric_from_name(std::string_view s) {
  if (s == "flat") return Metric::Flat;
  if (s == "ell" || s == "elliptic") return Metric::Elliptic;
  if (s == "hyp" || s == "hyperbolic") return Metric::Hyperbolic;
  throw LookupError("unknown metric '" + std::string(s) + "'");
}

/// Distance from (x, y) to the totally real line of each model.
inline double distance(Metric m, double x, double y) {
  switch (m) {
    case Metric::Flat:
      return std::abs(y);
    case Metric::Elliptic: {
      const double c = std::sqrt(1.0 + x * x) / std::sqrt(1.0 + x * x + y * y);
      return std::acos(std::min(1.0, c));
    }
    case Metric::Hyperbolic: {
      if (!(y > 0.0)) throw DomainError("hyperbolic distance needs y > 0");
      return std::acosh(std::max(1.0, std::hypot(x, y) / y));
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Plurisubharmonicity

struct PshResult {
  std::array<std::array<Complex, 2>, 2> levi_matrix{};
  double min_eigenvalue = 0.0;
  double max_eigenvalue = 0.0;
};

namespace models_detail {

inline PshResult hermitian_eigen(const std::array<std::array<Complex, 2>, 2>& m) {
  if (std::abs(m[0][1] - std::conj(m[1][0])) > 1e-10 * (1.0 + std::abs(m[0][1])) ||
      std::abs(m[0][0].imag()) > 1e-10 * (1.0 + std::abs(m[0][0])) ||
      std::abs(m[1][1].imag()) > 1e-10 * (1.0 + std::abs(m[1][1])))
    throw DomainError("complex Hessian is not hermitian; is r real-valued?");
  const double a = m[0][0].real(), d = m[1][1].real();
  const double mean = 0.5 * (a + d);
  const double rad = std::hypot(0.5 * (a - d), std::abs(m[0][1]));
  return {m, mean - rad, mean + rad};
}

}  // namespace models_detail

/// Complex Hessian of a real function r(x, y, u, v), z = x + iy, w = u + iv.
inline PshResult psh_check(const Expr& r, const std::array<double, 4>& point, const Params& params = {}) {
  const auto& vars = r.variables();
  if (vars == std::vector<std::string>{"x", "y", "u", "v"}) {
    const Jet<double> j = taylor_expand<double>(r, std::span<const double>(point), 2, params);
    auto d2 = [&](int a, int b) {
      std::array<int, 4> e{};
      ++e[a];
      ++e[b];
      return j.derivative_value(MultiIndex(std::vector<int>(e.begin(), e.end())));
    };
    // d/dz_j = (d/dx_j - i d/dy_j)/2 with (x_j, y_j) = (x, y) or (u, v).
    auto block = [&](int j, int k) {
      const int xj = 2 * j, yj = 2 * j + 1, xk = 2 * k, yk = 2 * k + 1;
      return 0.25 * Complex(d2(xj, xk) + d2(yj, yk), d2(xj, yk) - d2(yj, xk));
    };
    return models_detail::hermitian_eigen({{{block(0, 0), block(0, 1)}, {block(1, 0), block(1, 1)}}});
  }
  if (vars == std::vector<std::string>{"z", "w", "zb", "wb"}) {
    const Complex z{point[0], point[1]}, w{point[2], point[3]};
    const std::array<Complex, 4> pt{z, w, std::conj(z), std::conj(w)};
    const Jet<Complex> j = taylor_expand<Complex>(r, std::span<const Complex>(pt), 2, params);
    auto mixed = [&](int a, int b) {
      std::array<int, 4> e{};
      ++e[a];
      ++e[b + 2];
      return j.derivative_value(MultiIndex(std::vector<int>(e.begin(), e.end())));
    };
    return models_detail::hermitian_eigen({{{mixed(0, 0), mixed(0, 1)}, {mixed(1, 0), mixed(1, 1)}}});
  }
  throw ShapeError("psh_check expects an expression over {x, y, u, v} or {z, w, zb, wb}");
}

// ---------------------------------------------------------------------------
// Charts

/// A chart v = phi(x, y, u), either from an expression or solved from an implicit F.
class GraphChart {
 public:
  using Solver = std::function<std::optional<double>(GraphPoint)>;

  GraphChart(std::string name, GraphHypersurface h, std::string note = {})
      : name_(std::move(name)), note_(std::move(note)), expr_(std::move(h)) {
    formula_ = "v = " + expr_->phi().source();
  }

  /// Graph obtained by solving F = 0 for v with `solve` and lifting to a jet by Newton.
  GraphChart(std::string name, ImplicitHypersurface f, Solver solve, std::string note = {})
      : name_(std::move(name)), note_(std::move(note)), implicit_(std::move(f)), solve_(std::move(solve)) {
    formula_ = "v solved from 0 = " + implicit_->defining_function().source();
  }

  const std::string& name() const noexcept { return name_; }
  const std::string& formula() const noexcept { return formula_; }
  const std::string& note() const noexcept { return note_; }
  const std::optional<GraphHypersurface>& hypersurface() const noexcept { return expr_; }

  bool admissible(GraphPoint p) const {
    if (expr_) return expr_->admissible(p);
    try {
      return solve_(p).has_value();
    } catch (const DomainError&) {
      return false;
    }
  }

  double value(GraphPoint p) const {
    if (expr_) return expr_->value(p);
    auto v = solve_(p);
    if (!v) throw ChartError("no surface point over (x, y, u) in this chart");
    return *v;
  }

  Jet<double> jet(GraphPoint p, int degree) const {
    if (expr_) return expr_->jet(p, degree);
    return solve_graph_jet(*implicit_, p, value(p), degree);
  }

  CartanGraphResult invariant(GraphPoint p, const GraphOptions& opt = {}) const {
    if (!admissible(p)) throw ChartError("point outside the graph chart's domain");
    return cartan_invariant_graph(jet(p, kInvariantDegree), p, opt);
  }

 private:
  std::string name_;
  std::string formula_;
  std::string note_;
  std::optional<GraphHypersurface> expr_;
  std::optional<ImplicitHypersurface> implicit_;
  Solver solve_;
};

/// 0 = F(z, w, zb, wb) with a sampler from three real chart coordinates to surface points.
struct ImplicitChart {
  using Sampler = std::function<std::optional<ImplicitPoint>(const std::array<double, 3>&)>;

  std::string name;
  ImplicitHypersurface surface;
  std::array<std::string, 3> coords;
  Sampler sampler;
  std::string note;

  bool admissible(const std::array<double, 3>& c) const {
    try {
      return sampler(c).has_value();
    } catch (const DomainError&) {
      return false;
    }
  }

  ImplicitResult invariant(const std::array<double, 3>& c, const ImplicitOptions& opt = {}) const {
    auto p = sampler(c);
    if (!p) throw ChartError("chart coordinates do not map onto the surface");
    return cartan_locus_iw(surface, *p, opt);
  }
};

enum class ModelKind { Graph, Implicit, Both };

inline const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::Graph: return "graph";
    case ModelKind::Implicit: return "implicit";
    case ModelKind::Both: return "both";
  }
  return "?";
}

/// Which level the boundary sits at: rho = eps (intrinsic tubes), rho = eps^2 (product
/// metrics), or a fixed surface with no radius.
enum class LevelConvention { RhoEqualsEps, RhoEqualsEpsSquared, Fixed };

inline const char* level_name(LevelConvention c) {
  switch (c) {
    case LevelConvention::RhoEqualsEps: return "rho = eps";
    case LevelConvention::RhoEqualsEpsSquared: return "rho = eps^2";
    case LevelConvention::Fixed: return "fixed surface";
  }
  return "?";
}

struct ParamSpec {
  std::string name;
  double default_value;
  std::string range;
};

/// Random point generator in graph-chart coordinates.
using Sampler3 = std::function<std::array<double, 3>(std::mt19937_64&)>;

inline Sampler3 uniform_box(std::array<double, 3> lo, std::array<double, 3> hi) {
  return [lo, hi](std::mt19937_64& rng) {
    std::array<double, 3> p{};
    for (std::size_t k = 0; k < 3; ++k) p[k] = std::uniform_real_distribution<double>(lo[k], hi[k])(rng);
    return p;
  };
}

struct ModelEntry {
  std::string id;
  ModelKind kind = ModelKind::Graph;
  std::vector<ParamSpec> parameters;
  Params values;
  std::vector<GraphChart> graphs;
  std::vector<ImplicitChart> implicits;
  LevelConvention level = LevelConvention::Fixed;
  std::string notes;
  /// For kind Both: graph-chart point (x, y, u) with v = phi mapped to the implicit chart.
  std::function<ImplicitPoint(GraphPoint, double)> graph_to_implicit;
  /// Random graph-chart points for cross-checks (candidates are filtered by admissibility).
  Sampler3 sample;

  const GraphChart& graph(std::string_view name) const {
    for (const auto& g : graphs)
      if (g.name() == name) return g;
    throw LookupError("model '" + id + "' has no graph chart '" + std::string(name) + "'");
  }
  const ImplicitChart& implicit(std::string_view name) const {
    for (const auto& c : implicits)
      if (c.name == name) return c;
    throw LookupError("model '" + id + "' has no implicit chart '" + std::string(name) + "'");
  }
  bool has_graph(std::string_view name) const {
    for (const auto& g : graphs)
      if (g.name() == name) return true;
    return false;
  }
  bool has_implicit(std::string_view name) const {
    for (const auto& c : implicits)
      if (c.name == name) return true;
    return false;
  }
};

namespace models_detail {

inline GraphChart graph_chart(std::string name, const std::string& phi, const Params& params,
                              const std::vector<std::string>& domain, std::string note = {}) {
  return GraphChart(std::move(name), GraphHypersurface::from_text(phi, params, domain, kDefaultMargin), std::move(note));
}

inline double get(const Params& p, const std::string& k) {
  auto it = p.find(k);
  if (it == p.end()) throw LookupError("missing parameter '" + k + "'");
  return it->second;
}

/// Resolves user parameters against a spec list: unknown names are rejected, missing
/// ones take defaults.
inline Params resolve(const std::vector<ParamSpec>& spec, const Params& given) {
  Params out;
  for (const auto& s : spec) out[s.name] = s.default_value;
  for (const auto& [k, v] : given) {
    if (!out.count(k)) throw LookupError("unknown parameter '" + k + "'");
    out[k] = v;
  }
  return out;
}

/// Finds v >= 0 with Re F(x + iy, u + iv) = 0 by bracketing on [0, vmax] and Newton polish.
inline std::optional<double> solve_v(const ImplicitHypersurface& h, GraphPoint p, double vmax) {
  auto f = [&](double v) { return h.value({Complex(p.x, p.y), Complex(p.u, v)}).real(); };
  constexpr int kSteps = 64;
  double a = 0.0, fa = f(0.0);
  for (int k = 1; k <= kSteps; ++k) {
    const double b = vmax * k / kSteps, fb = f(b);
    if (fa == 0.0) return a;
    if ((fa < 0.0) != (fb < 0.0)) {
      double lo = a, hi = b, flo = fa;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi), fm = f(mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      return 0.5 * (lo + hi);
    }
    a = b;
    fa = fb;
  }
  return std::nullopt;
}

}  // namespace models_detail

// ---------------------------------------------------------------------------
// Models

/// Boundary of the hyperbolic tube.  Parameters: `epsilon` (normalized) or `eps`
/// (the radius, converted through eps_reparam); `epsilon` wins when both are given.
inline ModelEntry hyperbolic_tube(const Params& given = {}) {
  double epsilon = 0.5;
  if (auto it = given.find("eps"); it != given.end()) epsilon = eps_reparam(it->second);
  if (auto it = given.find("epsilon"); it != given.end()) epsilon = it->second;
  for (const auto& [k, v] : given)
    if (k != "eps" && k != "epsilon") throw LookupError("unknown parameter '" + k + "'");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  const double eps = eps_from_epsilon(epsilon);
  const double c = std::cos(std::sqrt(eps));

  ModelEntry m;
  m.id = "hyperbolic-tube";
  m.kind = ModelKind::Both;
  m.parameters = {{"epsilon", 0.5, "(0, 1)"}, {"eps", eps_from_epsilon(0.5), "(0, (pi/2)^2)"}};
  m.values = {{"epsilon", epsilon}, {"eps", eps}};
  m.level = LevelConvention::RhoEqualsEps;
  const Params p{{"epsilon", epsilon}};

  m.graphs.push_back(models_detail::graph_chart("v-graph", "sqrt(epsilon^2*x^2 - y^2)", p,
                                                {"x", "epsilon^2*x^2 - y^2"}));
  m.graphs.push_back(models_detail::graph_chart(
      "y-graph", "sqrt(epsilon^2*u^2 - y^2)", p, {"u", "epsilon^2*u^2 - y^2"},
      "y = sqrt(epsilon^2 x^2 - v^2) after relabeling z' = w, w' = z; chart coordinates (x, y, u) "
      "stand for the original (u, v, x) and the graph value is the original y"));

  // -(1/4) [(z - zb)^2 + ...] = v^2 - epsilon^2 x^2 + y^2 with z = u + iv, w = x + iy.
  const std::string fn = "-((z - zb)^2 + (1 + epsilon^2)*(w^2 + wb^2) - 2*(1 - epsilon^2)*w*wb)/4";
  auto to_implicit = [](GraphPoint g, double v) { return ImplicitPoint{Complex(g.u, v), Complex(g.x, g.y)}; };
  auto v_of = [epsilon](const std::array<double, 3>& q) -> std::optional<double> {
    const double r = epsilon * epsilon * q[0] * q[0] - q[1] * q[1];
    if (!(q[0] > 0.0) || !(r > kDefaultMargin)) return std::nullopt;
    return std::sqrt(r);
  };
  m.implicits.push_back({"implicit", ImplicitHypersurface::from_text(fn, p), {"x", "y", "u"},
                         [=](const std::array<double, 3>& q) -> std::optional<ImplicitPoint> {
                           auto v = v_of(q);
                           if (!v) return std::nullopt;
                           return to_implicit({q[0], q[1], q[2]}, *v);
                         },
                         "z = u + iv, w = x + iy; F normalized so that F = v^2 - epsilon^2 x^2 + y^2"});

  // The un-normalized boundary r_eps = 2v^2 - (1 - c)x^2 + (1 + c)y^2.
  const Params pc{{"c", c}};
  m.implicits.push_back(
      {"implicit-r", ImplicitHypersurface::from_text("-(z - zb)^2/2 - (1 - c)*(w + wb)^2/4 - (1 + c)*(w - wb)^2/4", pc),
       {"x", "y", "u"},
       [=](const std::array<double, 3>& q) -> std::optional<ImplicitPoint> {
         auto v = v_of(q);
         if (!v) return std::nullopt;
         return to_implicit({q[0], q[1], q[2]}, *v * std::sqrt((1.0 + c) / 2.0));
       },
       "r_eps = 2v^2 - (1 - cos sqrt eps) x^2 + (1 + cos sqrt eps) y^2, z = u + iv, w = x + iy"});

  m.graph_to_implicit = to_implicit;
  // |y| <= 0.9 epsilon x keeps samples off the chart edge, where the graph turns vertical
  // and the bracket terms grow like (epsilon^2 x^2 - y^2)^-4 against ^-2 for the invariant.
  m.sample = [epsilon](std::mt19937_64& rng) {
    const double x = std::uniform_real_distribution<double>(0.2, 3.0)(rng);
    const double t = std::uniform_real_distribution<double>(-0.9, 0.9)(rng);
    const double u = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    return std::array<double, 3>{x, t * epsilon * x, u};
  };
  m.notes =
      "Boundary of {rho < eps} around the hyperbolic plane; normalized form v^2 = epsilon^2 x^2 - y^2 with "
      "epsilon = tan(sqrt(eps)/2).  The implicit chart is scaled by -1/4 relative to "
      "(z - zb)^2 + (1 + epsilon^2)(w^2 + wb^2) - 2(1 - epsilon^2) w wb, which multiplies I_[w] by 4^-16.";
  return m;
}

/// Original v of the un-normalized boundary from the normalized graph value.
inline double hyperbolic_original_v(double v_normalized, double eps) {
  return v_normalized * std::sqrt((1.0 + std::cos(std::sqrt(eps))) / 2.0);
}

/// Tube of radius eps for the product metric d_left x d_right around V_left x V_right.
inline ModelEntry product_tube(Metric left, Metric right, const Params& given = {}) {
  const std::vector<ParamSpec> spec{{"eps", 0.3, "small positive"}};
  const Params p = models_detail::resolve(spec, given);
  if (!(p.at("eps") > 0.0)) throw DomainError("eps must be positive");

  std::string d2;
  std::vector<std::string> domain;
  switch (left) {
    case Metric::Flat: d2 = "y^2"; break;
    case Metric::Elliptic: d2 = "arcsin(y/sqrt(1 + x^2 + y^2))^2"; break;
    case Metric::Hyperbolic:
      d2 = "arcsinh(x/y)^2";
      domain.push_back("y");
      break;
  }
  const std::string radicand = "eps^2 - " + d2;
  const std::string r = "sqrt(" + radicand + ")";
  domain.push_back(radicand);
  std::string phi;
  switch (right) {
    case Metric::Flat: phi = r; break;
    case Metric::Hyperbolic:
      phi = "u/sinh(" + r + ")";
      domain.push_back("u");
      break;
    case Metric::Elliptic:
      phi = "sqrt(1 + u^2)*sin(" + r + ")/cos(" + r + ")";
      domain.push_back("cos(" + r + ")");
      break;
  }

  ModelEntry m;
  m.id = std::string("product-") + metric_name(left) + "-" + metric_name(right);
  m.kind = ModelKind::Graph;
  m.parameters = spec;
  m.values = p;
  m.level = LevelConvention::RhoEqualsEpsSquared;
  m.graphs.push_back(models_detail::graph_chart("graph", phi, p, domain));
  m.notes = std::string("rho = d_") + metric_name(left) + "(x, y)^2 + d_" + metric_name(right) +
            "(u, v)^2 solved for v.  The arcsin and arcsinh rows use the squared distance, as the "
            "derivation x/y = sinh(sqrt(eps^2 - v^2)) requires.";
  if (left == Metric::Elliptic && right == Metric::Elliptic) {
    const std::string e = "sqrt(eps^2 - arccos(sqrt(1 + x^2)/sqrt(1 + x^2 + y^2))^2)";
    m.graphs.push_back(models_detail::graph_chart(
        "root-form", "(1 + sqrt(1 - 4*(1 + u^2)*sin(" + e + ")^2))/(2*sin(" + e + "))", p,
        {"y", "eps^2 - arccos(sqrt(1 + x^2)/sqrt(1 + x^2 + y^2))^2", "1 - 4*(1 + u^2)*sin(" + e + ")^2"},
        "quadratic-root closed form; does not satisfy rho = eps^2 and is kept for diagnostics only"));
    m.notes += "  The chart 'graph' is v = tan(E) sqrt(1 + u^2); 'root-form' is a diagnostic alternative.";
  }
  return m;
}

/// Product-metric distance squared; the defining function of product tubes.
inline double rho_product(Metric left, Metric right, double x, double y, double u, double v) {
  const double a = distance(left, x, y), b = distance(right, u, v);
  return a * a + b * b;
}

/// Flat tori and their extrinsic tubes.  case 1: V = {y = alpha x, v = beta u};
/// case 2: V = {x = 0, v = beta u}; case 3: V = {x = 0 = u}.
inline ModelEntry torus_tube(int which, const Params& given = {}) {
  ModelEntry m;
  m.level = LevelConvention::RhoEqualsEpsSquared;
  if (which == 1) {
    m.parameters = {{"alpha", 0.0, "real"}, {"beta", 0.0, "real"}, {"eps", 0.5, "positive"}};
    m.values = models_detail::resolve(m.parameters, given);
    m.id = "torus-case1";
    m.kind = ModelKind::Graph;
    const std::string rad = "eps^2 - (alpha*x - y)^2/(alpha^2 + 1)^2";
    m.graphs.push_back(models_detail::graph_chart("graph", "beta*u - (beta^2 + 1)*sqrt(" + rad + ")", m.values, {rad}));
    m.notes = "(alpha x - y)^2/(alpha^2 + 1)^2 + (beta u - v)^2/(beta^2 + 1)^2 = eps^2, lower sheet.";
  } else if (which == 2) {
    m.parameters = {{"beta", 0.0, "real"}, {"eps", 0.5, "positive"}};
    m.values = models_detail::resolve(m.parameters, given);
    m.id = "torus-case2";
    m.kind = ModelKind::Graph;
    m.graphs.push_back(
        models_detail::graph_chart("graph", "beta*u - (beta^2 + 1)*sqrt(eps^2 - x^2)", m.values, {"eps^2 - x^2"}));
    m.notes = "x^2 + (beta u - v)^2/(beta^2 + 1)^2 = eps^2, lower sheet.";
  } else if (which == 3) {
    m.parameters = {{"eps", 0.3, "positive"}};
    m.values = models_detail::resolve(m.parameters, given);
    m.id = "torus-case3";
    m.kind = ModelKind::Implicit;
    const double eps = m.values.at("eps");
    m.implicits.push_back({"implicit",
                           ImplicitHypersurface::from_text("((z + zb)/2)^2 + ((w + wb)/2)^2 - eps^2", m.values),
                           {"x", "y", "v"},
                           [eps](const std::array<double, 3>& q) -> std::optional<ImplicitPoint> {
                             const double r = eps * eps - q[0] * q[0];
                             if (!(r > kDefaultMargin)) return std::nullopt;
                             return ImplicitPoint{Complex(q[0], q[1]), Complex(std::sqrt(r), q[2])};
                           },
                           "u = sqrt(eps^2 - x^2) > 0 so that F_w = u does not vanish"});
    m.notes = "x^2 + u^2 = eps^2; not a v-graph, implicit chart only.";
  } else {
    throw LookupError("torus case must be 1, 2 or 3");
  }
  if (!(m.values.at("eps") > 0.0)) throw DomainError("eps must be positive");
  return m;
}

/// rho = 4 (Im z)^2 + 4 (Im w)^2 = eps for the flat torus.
inline ModelEntry flat_torus(const Params& given = {}) {
  ModelEntry m;
  m.id = "flat-torus";
  m.kind = ModelKind::Graph;
  m.parameters = {{"eps", 0.1, "positive"}};
  m.values = models_detail::resolve(m.parameters, given);
  m.level = LevelConvention::RhoEqualsEps;
  m.graphs.push_back(models_detail::graph_chart("graph", "sqrt(eps/4 - y^2)", m.values, {"eps/4 - y^2"}));
  m.notes = "Intrinsic tube of the flat torus, rho = 4y^2 + 4v^2.";
  return m;
}

/// Tube of radius sqrt(eps) around the round sphere inside the quadric
/// z1^2 + z2^2 + z3^2 = 1, charted by (z1, z2) with z3 = sqrt(1 - z1^2 - z2^2).
inline ModelEntry sphere_tube(const Params& given = {}) {
  ModelEntry m;
  m.id = "sphere-tube";
  m.kind = ModelKind::Both;
  m.parameters = {{"eps", 0.1, "(0, 0.25)"}};
  m.values = models_detail::resolve(m.parameters, given);
  const double eps = m.values.at("eps");
  if (!(eps > 0.0 && eps < 0.25)) throw DomainError("sphere tube needs 0 < eps < 0.25");
  m.level = LevelConvention::RhoEqualsEps;
  const auto f = ImplicitHypersurface::from_text(
      "z*zb + w*wb + sqrt(1 - z^2 - w^2)*sqrt(1 - zb^2 - wb^2) - cosh(sqrt(eps))", m.values);
  const double vmax = 2.0 * std::sinh(std::sqrt(eps)) + 0.5;
  auto in_chart = [](GraphPoint p) { return p.x * p.x + p.y * p.y + p.u * p.u < 0.25; };
  auto solve = [f, vmax, in_chart](GraphPoint p) -> std::optional<double> {
    if (!in_chart(p)) return std::nullopt;
    return models_detail::solve_v(f, p, vmax);
  };
  m.graphs.emplace_back("graph", f, solve, "v solved numerically from the implicit chart (upper sheet, v > 0)");
  auto to_implicit = [](GraphPoint g, double v) { return ImplicitPoint{Complex(g.x, g.y), Complex(g.u, v)}; };
  m.implicits.push_back({"implicit", f, {"x", "y", "u"},
                         [=](const std::array<double, 3>& q) -> std::optional<ImplicitPoint> {
                           auto v = solve({q[0], q[1], q[2]});
                           if (!v) return std::nullopt;
                           return to_implicit({q[0], q[1], q[2]}, *v);
                         },
                         "z = z1 = x + iy, w = z2 = u + iv with v > 0 solved from F = 0"});
  m.graph_to_implicit = to_implicit;
  // The tube's imaginary radius is about sinh(sqrt(eps)/2); staying well inside it keeps
  // the v-graph away from its vertical edge.
  const double ry = 0.6 * std::sinh(std::sqrt(eps) / 2.0);
  m.sample = uniform_box({-0.3, -ry, -0.3}, {0.3, ry, 0.3});
  m.notes =
      "rho = arccosh(|z1|^2 + |z2|^2 + |z3|^2)^2 on the quadric, level rho = eps.  Local chart via the "
      "principal branch z3 = sqrt(1 - z1^2 - z2^2), used for |z1|^2 + Re(z2)^2 < 1/4.";
  return m;
}

inline ModelEntry heisenberg() {
  ModelEntry m;
  m.id = "heisenberg";
  m.kind = ModelKind::Graph;
  m.graphs.push_back(models_detail::graph_chart("graph", "x^2 + y^2", {}, {}));
  m.notes = "v = |z|^2, the flat model.";
  return m;
}

inline ModelEntry unit_sphere() {
  ModelEntry m;
  m.id = "unit-sphere";
  m.kind = ModelKind::Both;
  const auto f = ImplicitHypersurface::from_text("z*zb + w*wb - 1", {});
  auto solve = [f](GraphPoint p) -> std::optional<double> {
    if (p.x * p.x + p.y * p.y + p.u * p.u > 1.0 - 1e-2) return std::nullopt;
    return models_detail::solve_v(f, p, 1.0);
  };
  m.graphs.emplace_back("graph", f, solve, "upper sheet v = sqrt(1 - |z|^2 - u^2)");
  auto to_implicit = [](GraphPoint g, double v) { return ImplicitPoint{Complex(g.x, g.y), Complex(g.u, v)}; };
  m.implicits.push_back({"implicit", f, {"x", "y", "u"},
                         [=](const std::array<double, 3>& q) -> std::optional<ImplicitPoint> {
                           const double r = 1.0 - q[0] * q[0] - q[1] * q[1] - q[2] * q[2];
                           if (!(r > 1e-2)) return std::nullopt;
                           return to_implicit({q[0], q[1], q[2]}, std::sqrt(r));
                         },
                         "z = x + iy, w = u + iv with v = sqrt(1 - x^2 - y^2 - u^2)"});
  m.graph_to_implicit = to_implicit;
  m.sample = uniform_box({-0.7, -0.7, -0.7}, {0.7, 0.7, 0.7});
  m.notes = "|z|^2 + |w|^2 = 1, umbilical everywhere.";
  return m;
}

/// Catalog of model ids accepted by make_model.
inline std::vector<std::string> model_ids() {
  std::vector<std::string> ids{"heisenberg", "unit-sphere", "hyperbolic-tube", "sphere-tube", "flat-torus",
                               "torus-case1", "torus-case2", "torus-case3"};
  for (Metric l : {Metric::Flat, Metric::Elliptic, Metric::Hyperbolic})
    for (Metric r : {Metric::Flat, Metric::Elliptic, Metric::Hyperbolic})
      ids.push_back(std::string("product-") + metric_name(l) + "-" + metric_name(r));
  return ids;
}

inline ModelEntry make_model(std::string_view id, const Params& params = {}) {
  auto no_params = [&] {
    if (!params.empty()) throw LookupError("model '" + std::string(id) + "' takes no parameters");
  };
  if (id == "heisenberg") return no_params(), heisenberg();
  if (id == "unit-sphere") return no_params(), unit_sphere();
  if (id == "hyperbolic-tube") return hyperbolic_tube(params);
  if (id == "sphere-tube") return sphere_tube(params);
  if (id == "flat-torus") return flat_torus(params);
  if (id == "torus-case1") return torus_tube(1, params);
  if (id == "torus-case2") return torus_tube(2, params);
  if (id == "torus-case3") return torus_tube(3, params);
  if (id.starts_with("product-")) {
    const auto rest = id.substr(8);
    const auto dash = rest.find('-');
    if (dash != std::string_view::npos)
      return product_tube(metric_from_name(rest.substr(0, dash)), metric_from_name(rest.substr(dash + 1)), params);
  }
  throw LookupError("unknown model '" + std::string(id) + "'");
}

}  // namespace cartan
