#pragma once

// Cartan invariant of a Levi-nondegenerate hypersurface graphed as v = phi(x, y, u)
// in coordinates z = x + i y, w = u + i v.
//
// Vector fields
//   L    = d/dz    + A    d/du,   A    = -phi_z    / ( i + phi_u)
//   Lbar = d/dzbar + Abar d/du,   Abar = -phi_zbar / (-i + phi_u)
// with d/dz = (d/dx - i d/dy)/2.  The Levi factor l is the d/du coefficient of
// i [L, Lbar], and the key function is
//   Pbar = (l_zbar - l Abar_u + Abar l_u) / l          (l is real)
// where subscripts are coordinate partials.  The relative invariant is
//   J = -2 Lb(L(Lb(P))) + 3 Lb(Lb(L(P))) - 7 P Lb(L(P)) + 4 P L(Lb(P))
//       - L(P) Lb(P) + 2 P P L(P)
// (P standing for Pbar).  Degree bookkeeping: phi at 6, l at 4, Pbar at 3, then
// three more field applications reach degree 0.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cartan/errors.hpp"
#include "cartan/expr.hpp"
#include "cartan/jet.hpp"

namespace cartan {

inline constexpr int kInvariantDegree = 6;

struct GraphPoint {
  double x = 0.0;
  double y = 0.0;
  double u = 0.0;
};

/// v = phi(x, y, u) with optional domain predicates (admissible iff each > margin).
class GraphHypersurface {
 public:
  GraphHypersurface(Expr phi, Params params, std::vector<Expr> domain = {}, double margin = 0.0)
      : phi_(std::move(phi)), params_(std::move(params)), domain_(std::move(domain)), margin_(margin) {
    require_vars(phi_);
    for (const auto& d : domain_) require_vars(d);
  }

  /// Parses phi and the predicates over {x, y, u}; parameters are those of `params`.
  static GraphHypersurface from_text(std::string_view phi, Params params, const std::vector<std::string>& domain = {},
                                     double margin = 0.0) {
    std::set<std::string> names;
    for (const auto& [k, v] : params) names.insert(k);
    std::vector<Expr> preds;
    for (const auto& d : domain) preds.push_back(Expr::parse(d, {"x", "y", "u"}, names));
    return GraphHypersurface(Expr::parse(phi, {"x", "y", "u"}, names), std::move(params), std::move(preds), margin);
  }

  const Expr& phi() const noexcept { return phi_; }
  const Params& params() const noexcept { return params_; }
  const std::vector<Expr>& domain() const noexcept { return domain_; }
  double margin() const noexcept { return margin_; }

  bool admissible(GraphPoint p) const {
    const std::array<double, 3> pt{p.x, p.y, p.u};
    try {
      for (const auto& d : domain_)
        if (!(eval_scalar<double>(d, std::span<const double>(pt), params_) > margin_)) return false;
      (void)eval_scalar<double>(phi_, std::span<const double>(pt), params_);
    } catch (const DomainError&) {
      return false;
    }
    return true;
  }

  double value(GraphPoint p) const {
    const std::array<double, 3> pt{p.x, p.y, p.u};
    return eval_scalar<double>(phi_, std::span<const double>(pt), params_);
  }

  Jet<double> jet(GraphPoint p, int degree) const {
    const std::array<double, 3> pt{p.x, p.y, p.u};
    return taylor_expand<double>(phi_, std::span<const double>(pt), degree, params_);
  }

 private:
  static void require_vars(const Expr& e) {
    if (e.variables() != std::vector<std::string>{"x", "y", "u"})
      throw ShapeError("graph expressions must be over the variables {x, y, u}");
  }

  Expr phi_;
  Params params_;
  std::vector<Expr> domain_;
  double margin_;
};

struct GraphOptions {
  double levi_tol = 1e-10;
  double real_residue_tol = 1e-9;
};

struct CartanGraphResult {
  Complex j_star;
  double levi_factor = 0.0;
  Complex pbar_value;
  GraphPoint point;
  /// The six bracket terms with their integer weights applied; they sum to j_star.
  std::array<Complex, 6> terms{};

  /// Largest weighted bracket term; |j_star| / scale() measures how far the sum is
  /// from complete cancellation.
  double scale() const {
    double s = 0.0;
    for (const auto& t : terms) s = std::max(s, std::abs(t));
    return s;
  }

  /// |j_star| relative to scale(); exactly 0 when every term vanishes.
  double normalized() const {
    const double s = scale();
    return s > 0.0 ? std::abs(j_star) / s : 0.0;
  }
};

namespace graph_detail {

constexpr int kX = 0;
constexpr int kY = 1;
constexpr int kU = 2;
inline const Complex kI{0.0, 1.0};

inline Jet<Complex> d_z(const Jet<Complex>& f) { return 0.5 * (partial(f, kX) - kI * partial(f, kY)); }
inline Jet<Complex> d_zbar(const Jet<Complex>& f) { return 0.5 * (partial(f, kX) + kI * partial(f, kY)); }
inline Jet<Complex> d_u(const Jet<Complex>& f) { return partial(f, kU); }

/// Levi factor jet (degree phi.degree() - 2) together with A, Abar (same degree).
struct LeviData {
  Jet<Complex> levi;
  Jet<Complex> a;
  Jet<Complex> abar;
};

inline LeviData levi_data(const Jet<Complex>& phi) {
  if (phi.degree() < 2) throw ShapeError("Levi factor needs a jet of degree >= 2");
  const int d = phi.degree() - 2;
  const Jet<Complex> pz = d_z(phi);
  const Jet<Complex> pzb = d_zbar(phi);
  const Jet<Complex> pu = d_u(phi);
  const Jet<Complex> pzzb = d_zbar(pz);
  const Jet<Complex> pzu = d_u(pz);
  const Jet<Complex> pzbu = d_u(pzb);
  const Jet<Complex> puu = d_u(pu);
  const Jet<Complex> z = pz.truncated(d);
  const Jet<Complex> zb = pzb.truncated(d);
  const Jet<Complex> u = pu.truncated(d);
  const Jet<Complex> one_plus = 1.0 + u * u;
  Jet<Complex> num = pzzb * one_plus - kI * zb * pzu + kI * z * pzbu - zb * pzu * u - z * pzbu * u + z * zb * puu;
  Jet<Complex> levi = 2.0 * num / (one_plus * one_plus);
  Jet<Complex> a = -z / (kI + u);
  Jet<Complex> abar = -zb / (-kI + u);
  return {std::move(levi), std::move(a), std::move(abar)};
}

inline double checked_levi_value(Complex levi, const GraphOptions& opt) {
  if (std::abs(levi.imag()) >= opt.real_residue_tol * (1.0 + std::abs(levi.real())))
    throw DomainError("Levi factor is not real (imaginary residue " + format_number(levi.imag()) +
                      "); the graphing function is not real-valued here");
  if (std::abs(levi.real()) <= opt.levi_tol)
    throw LeviDegenerateError("Levi-degenerate point: |Levi factor| = " + format_number(std::abs(levi.real())));
  return levi.real();
}

}  // namespace graph_detail

enum class VectorField { L, Lbar };

/// L(f) = f_z + A f_u, or Lbar(f) = f_zbar + Abar f_u; the result has degree f.degree() - 1.
inline Jet<Complex> apply_vector_field(VectorField which, const Jet<Complex>& f, const Jet<Complex>& a,
                                       const Jet<Complex>& abar) {
  using namespace graph_detail;
  if (f.degree() < 1) throw ShapeError("vector field applied to a degree-0 jet (degree exhausted)");
  const int d = f.degree() - 1;
  const Jet<Complex>& coeff = which == VectorField::L ? a : abar;
  if (coeff.degree() < d) throw ShapeError("vector field coefficient has too low a degree");
  const Jet<Complex> dir = which == VectorField::L ? d_z(f) : d_zbar(f);
  return dir + coeff.truncated(d) * d_u(f);
}

/// Levi factor from a phi jet of degree >= 2 (only its 2-jet matters).
inline double levi_factor(const Jet<double>& phi, const GraphOptions& opt = {}) {
  auto data = graph_detail::levi_data(to_complex(phi.truncated(2)));
  return graph_detail::checked_levi_value(data.levi.value(), opt);
}

inline double levi_factor(const GraphHypersurface& h, GraphPoint p, const GraphOptions& opt = {}) {
  return levi_factor(h.jet(p, 2), opt);
}

/// Pbar as a jet of degree phi.degree() - 3, plus A, Abar at that degree + 1.
struct KeyFunction {
  Jet<Complex> pbar;
  Jet<Complex> a;
  Jet<Complex> abar;
  double levi_factor;
};

inline KeyFunction key_function_pbar(const Jet<double>& phi, const GraphOptions& opt = {}) {
  using namespace graph_detail;
  if (phi.degree() < 3) throw ShapeError("key function needs a jet of degree >= 3");
  auto data = levi_data(to_complex(phi));
  const double levi0 = checked_levi_value(data.levi.value(), opt);
  const int d = data.levi.degree() - 1;
  const Jet<Complex> l = data.levi.truncated(d);
  const Jet<Complex> numerator = d_zbar(data.levi) - l * d_u(data.abar) + data.abar.truncated(d) * d_u(data.levi);
  return {numerator / l, std::move(data.a), std::move(data.abar), levi0};
}

inline Complex key_function_pbar(const GraphHypersurface& h, GraphPoint p, const GraphOptions& opt = {}) {
  return key_function_pbar(h.jet(p, 3), opt).pbar.value();
}

/// The relative invariant from a degree-6 jet of the graphing function at `p`.
inline CartanGraphResult cartan_invariant_graph(const Jet<double>& phi, GraphPoint p, const GraphOptions& opt = {}) {
  if (phi.num_vars() != 3) throw ShapeError("graphing function jets have three variables (x, y, u)");
  if (phi.degree() < kInvariantDegree)
    throw ShapeError("the invariant needs a degree-" + std::to_string(kInvariantDegree) + " jet");
  const Jet<double> phi6 = phi.truncated(kInvariantDegree);
  auto key = key_function_pbar(phi6, opt);
  auto L = [&](const Jet<Complex>& f) { return apply_vector_field(VectorField::L, f, key.a, key.abar); };
  auto Lb = [&](const Jet<Complex>& f) { return apply_vector_field(VectorField::Lbar, f, key.a, key.abar); };

  const Jet<Complex>& P = key.pbar;  // degree 3
  const Jet<Complex> LP = L(P);      // 2
  const Jet<Complex> LbP = Lb(P);    // 2
  const Jet<Complex> LLbP = L(LbP);  // 1
  const Jet<Complex> LbLP = Lb(LP);  // 1
  const Complex LbLLbP = Lb(LLbP).value();
  const Complex LbLbLP = Lb(LbLP).value();

  const Complex p0 = P.value();
  CartanGraphResult r;
  r.point = p;
  r.levi_factor = key.levi_factor;
  r.pbar_value = p0;
  r.terms = {-2.0 * LbLLbP,
             3.0 * LbLbLP,
             -7.0 * p0 * LbLP.value(),
             4.0 * p0 * LLbP.value(),
             -LP.value() * LbP.value(),
             2.0 * p0 * p0 * LP.value()};
  r.j_star = Complex{};
  for (const auto& t : r.terms) r.j_star += t;
  return r;
}

inline CartanGraphResult cartan_invariant_graph(const GraphHypersurface& h, GraphPoint p,
                                                const GraphOptions& opt = {}) {
  if (!h.admissible(p)) throw ChartError("point outside the graph chart's domain");
  return cartan_invariant_graph(h.jet(p, kInvariantDegree), p, opt);
}

}  // namespace cartan
