#pragma once

// Umbilical locus of a hypersurface 0 = F(z, w, zbar, wbar) through
//
//   I_[w] = 12 F_w^9 (I_1 + ... + I_7)
//
// with Lbar = -F_wbar d/dzbar + F_zbar d/dwbar,
//   h(F) = F_z F_z F_ww - 2 F_z F_w F_zw + F_w F_w F_zz,
//   l(F) = F_zbar F_z F_wwbar - F_zbar F_w F_zwbar - F_wbar F_z F_zwbar + F_wbar F_w F_zzbar,
// a = l/F_w^2, b = h/F_w^3 and
//   I_1 =       a^3     Lbar^4 b          I_5 =  15 a (Lbar a)^2  Lbar^2 b
//   I_2 =  -6   a^2 Lbar a  Lbar^3 b      I_6 =  10 a Lbar a Lbar^2 a  Lbar b
//   I_3 =  -4   a^2 Lbar^2 a Lbar^2 b     I_7 = -15 (Lbar a)^3 Lbar b
//   I_4 =  -    a^2 Lbar^3 a Lbar b
//
// z, w, zbar, wbar are independent jet variables (polarization), seeded at
// (z0, w0, conj z0, conj w0).

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cartan/cartan_graph.hpp"
#include "cartan/errors.hpp"
#include "cartan/expr.hpp"
#include "cartan/jet.hpp"

namespace cartan {

struct ImplicitPoint {
  Complex z;
  Complex w;
};

/// 0 = F(z, w, zb, wb).
class ImplicitHypersurface {
 public:
  ImplicitHypersurface(Expr f, Params params) : f_(std::move(f)), params_(std::move(params)) {
    if (f_.variables() != std::vector<std::string>{"z", "w", "zb", "wb"})
      throw ShapeError("implicit defining functions must be over the variables {z, w, zb, wb}");
  }

  static ImplicitHypersurface from_text(std::string_view f, Params params) {
    std::set<std::string> names;
    for (const auto& [k, v] : params) names.insert(k);
    return ImplicitHypersurface(Expr::parse(f, {"z", "w", "zb", "wb"}, names), std::move(params));
  }

  const Expr& defining_function() const noexcept { return f_; }
  const Params& params() const noexcept { return params_; }

  Complex value(ImplicitPoint p) const {
    const std::array<Complex, 4> pt{p.z, p.w, std::conj(p.z), std::conj(p.w)};
    return eval_scalar<Complex>(f_, std::span<const Complex>(pt), params_);
  }

  Jet<Complex> jet(ImplicitPoint p, int degree) const {
    const std::array<Complex, 4> pt{p.z, p.w, std::conj(p.z), std::conj(p.w)};
    return taylor_expand<Complex>(f_, std::span<const Complex>(pt), degree, params_);
  }

 private:
  Expr f_;
  Params params_;
};

namespace implicit_detail {

constexpr int kZ = 0;
constexpr int kW = 1;
constexpr int kZb = 2;
constexpr int kWb = 3;

}  // namespace implicit_detail

/// h(F) and l(F) as jets of degree F.degree() - 2.
inline std::pair<Jet<Complex>, Jet<Complex>> second_order_combinations(const Jet<Complex>& f) {
  using namespace implicit_detail;
  if (f.num_vars() != 4) throw ShapeError("implicit jets have four variables (z, w, zb, wb)");
  if (f.degree() < 2) throw ShapeError("h(F), l(F) need a jet of degree >= 2");
  const int d = f.degree() - 2;
  const Jet<Complex> fz = partial(f, kZ);
  const Jet<Complex> fw = partial(f, kW);
  const Jet<Complex> fzb = partial(f, kZb);
  const Jet<Complex> fwb = partial(f, kWb);
  const Jet<Complex> fzz = partial(fz, kZ);
  const Jet<Complex> fzw = partial(fz, kW);
  const Jet<Complex> fww = partial(fw, kW);
  const Jet<Complex> fwwb = partial(fw, kWb);
  const Jet<Complex> fzwb = partial(fz, kWb);
  const Jet<Complex> fzzb = partial(fz, kZb);
  const Jet<Complex> z = fz.truncated(d);
  const Jet<Complex> w = fw.truncated(d);
  const Jet<Complex> zb = fzb.truncated(d);
  const Jet<Complex> wb = fwb.truncated(d);
  Jet<Complex> h = z * z * fww - 2.0 * z * w * fzw + w * w * fzz;
  Jet<Complex> l = zb * z * fwwb - zb * w * fzwb - wb * z * fzwb + wb * w * fzzb;
  return {std::move(h), std::move(l)};
}

/// Lbar(f) = -F_wb f_zb + F_zb f_wb, one degree below f.
inline Jet<Complex> lbar_apply(const Jet<Complex>& f, const Jet<Complex>& F) {
  using namespace implicit_detail;
  if (f.degree() < 1) throw ShapeError("Lbar applied to a degree-0 jet (degree exhausted)");
  if (F.degree() < f.degree()) throw ShapeError("defining-function jet has too low a degree for Lbar");
  const int d = f.degree() - 1;
  return -(partial(F, kWb).truncated(d) * partial(f, kZb)) + partial(F, kZb).truncated(d) * partial(f, kWb);
}

struct ImplicitOptions {
  /// |F(p)| must be below on_surface_tol * scale, scale = max(1, |grad F|).
  double on_surface_tol = 1e-8;
  double fw_tol = 1e-10;
  double levi_tol = 1e-10;
  /// Points with tol < |F| < 100 tol are moved by one Newton step along grad F.
  bool project = true;
};

struct ImplicitResult {
  Complex i_w;
  std::array<Complex, 7> terms{};
  Complex f_w;
  Complex l_value;
  ImplicitPoint point;

  /// Largest weighted term, 12 |F_w|^9 max |I_i|; |i_w| / scale() measures how far the
  /// sum is from complete cancellation.
  double scale() const {
    double m = 0.0;
    for (const auto& t : terms) m = std::max(m, std::abs(t));
    return 12.0 * std::pow(std::abs(f_w), 9) * m;
  }

  /// |i_w| relative to scale(); exactly 0 when every term vanishes.
  double normalized() const {
    const double s = scale();
    return s > 0.0 ? std::abs(i_w) / s : 0.0;
  }
};

namespace implicit_detail {

/// Real gradient of F in (Re z, Im z, Re w, Im w) from the first-order jet.
inline std::array<double, 4> real_gradient(const Jet<Complex>& f1) {
  const Complex fz = f1[1 + kZ], fw = f1[1 + kW], fzb = f1[1 + kZb], fwb = f1[1 + kWb];
  const Complex i{0.0, 1.0};
  return {(fz + fzb).real(), (i * (fz - fzb)).real(), (fw + fwb).real(), (i * (fw - fwb)).real()};
}

inline double norm(const std::array<double, 4>& g) {
  return std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
}

}  // namespace implicit_detail

/// Distance-to-surface check; returns the (possibly Newton-projected) point.
inline ImplicitPoint ensure_on_surface(const ImplicitHypersurface& h, ImplicitPoint p, const ImplicitOptions& opt = {}) {
  using namespace implicit_detail;
  const Jet<Complex> f1 = h.jet(p, 1);
  const auto g = real_gradient(f1);
  const double scale = std::max(1.0, norm(g));
  const Complex value = f1.value();
  if (std::abs(value.imag()) > 1e-9 * scale * std::max(1.0, std::abs(value.real())))
    throw ChartError("defining function is not real on the conjugate locus (Im F = " +
                     format_number(value.imag()) + ")");
  const double residual = std::abs(value.real());
  const double tol = opt.on_surface_tol * scale;
  if (residual <= tol) return p;
  if (opt.project && residual < 100.0 * tol) {
    const double n2 = norm(g) * norm(g);
    const double step = value.real() / n2;
    return {Complex(p.z.real() - step * g[0], p.z.imag() - step * g[1]),
            Complex(p.w.real() - step * g[2], p.w.imag() - step * g[3])};
  }
  throw ChartError("point is not on the hypersurface (|F| = " + format_number(residual) + ")");
}

/// I_[w] from a jet of F of degree >= 6 seeded at the point.
inline ImplicitResult cartan_locus_iw(const Jet<Complex>& F, ImplicitPoint p, const ImplicitOptions& opt = {}) {
  using namespace implicit_detail;
  if (F.num_vars() != 4) throw ShapeError("implicit jets have four variables (z, w, zb, wb)");
  if (F.degree() < kInvariantDegree)
    throw ShapeError("I_[w] needs a degree-" + std::to_string(kInvariantDegree) + " jet");
  const Jet<Complex> f6 = F.truncated(kInvariantDegree);
  const Complex fw0 = f6[1 + kW];
  if (std::abs(fw0) <= opt.fw_tol) throw DomainError("F_w vanishes at the point; I_[w] is only defined where F_w != 0");

  auto [h, l] = second_order_combinations(f6);  // degree 4
  if (std::abs(l.value()) <= opt.levi_tol)
    throw LeviDegenerateError("Levi-degenerate point: |l(F)| = " + format_number(std::abs(l.value())));
  const Jet<Complex> fw = partial(f6, kW).truncated(h.degree());
  const Jet<Complex> fw2 = fw * fw;
  const Jet<Complex> a = l / fw2;
  const Jet<Complex> b = h / (fw2 * fw);

  // Lbar^k a for k <= 3, Lbar^k b for k <= 4, all evaluated at the point.
  std::array<Complex, 4> la{};
  std::array<Complex, 5> lb{};
  Jet<Complex> cur = a;
  la[0] = cur.value();
  for (int k = 1; k <= 3; ++k) {
    cur = lbar_apply(cur, f6);
    la[static_cast<std::size_t>(k)] = cur.value();
  }
  cur = b;
  lb[0] = cur.value();
  for (int k = 1; k <= 4; ++k) {
    cur = lbar_apply(cur, f6);
    lb[static_cast<std::size_t>(k)] = cur.value();
  }

  const Complex a0 = la[0], a1 = la[1], a2 = la[2], a3 = la[3];
  ImplicitResult r;
  r.point = p;
  r.f_w = fw0;
  r.l_value = l.value();
  r.terms = {a0 * a0 * a0 * lb[4],
             -6.0 * a0 * a0 * a1 * lb[3],
             -4.0 * a0 * a0 * a2 * lb[2],
             -a0 * a0 * a3 * lb[1],
             15.0 * a0 * a1 * a1 * lb[2],
             10.0 * a0 * a1 * a2 * lb[1],
             -15.0 * a1 * a1 * a1 * lb[1]};
  Complex sum{};
  for (const auto& t : r.terms) sum += t;
  r.i_w = 12.0 * std::pow(fw0, 9) * sum;
  return r;
}

inline ImplicitResult cartan_locus_iw(const ImplicitHypersurface& h, ImplicitPoint p, const ImplicitOptions& opt = {}) {
  const ImplicitPoint q = ensure_on_surface(h, p, opt);
  return cartan_locus_iw(h.jet(q, kInvariantDegree), q, opt);
}

namespace implicit_detail {

/// Pads a jet to a higher degree with zero coefficients.
inline Jet<double> pad_degree(const Jet<double>& a, int degree) {
  auto layout = JetLayout::get(a.num_vars(), degree);
  std::vector<double> c(layout->size(), 0.0);
  std::copy(a.coefficients().begin(), a.coefficients().end(), c.begin());
  return Jet<double>(layout, std::move(c));
}

/// F(x+iy, u+iv, x-iy, u-iv) with v = graph + t, as a jet in (x, y, u, t).
inline Jet<Complex> restricted(const ImplicitHypersurface& h, GraphPoint p, const Jet<double>& graph) {
  const int d = graph.degree();
  const Complex i{0.0, 1.0};
  auto var = [&](int k, double value) { return Jet<Complex>::variable(k, value, 4, d); };
  const Jet<Complex> x = var(0, p.x), y = var(1, p.y), u = var(2, p.u), t = var(3, 0.0);
  const Jet<Complex> v = to_complex(embed(graph, 4)) + t;
  const std::array<Jet<Complex>, 4> args{x + i * y, u + i * v, x - i * y, u - i * v};
  return eval_jet<Complex>(h.defining_function(), std::span<const Jet<Complex>>(args), h.params());
}

}  // namespace implicit_detail

/// Solves F = 0 for v near v0 (coordinates z = x + iy, w = u + iv) and returns the
/// degree-`degree` jet of the graphing function v = phi(x, y, u) at p.
inline Jet<double> solve_graph_jet(const ImplicitHypersurface& h, GraphPoint p, double v0, int degree) {
  using namespace implicit_detail;
  // Constant term by scalar Newton.
  double v = v0;
  for (int it = 0;; ++it) {
    const Jet<Complex> g = restricted(h, p, Jet<double>::constant(v, 3, 1));
    const double f = g.value().real();
    const double df = g[4].real();  // coefficient of t
    if (std::abs(df) < 1e-14) throw LeviDegenerateError("F_v vanishes; the surface is not a v-graph here");
    const double step = f / df;
    v -= step;
    if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(v))) break;
    if (it == 60) throw ChartError("graph solve did not converge");
  }
  // Quadratically convergent Newton on the full jet.
  Jet<double> graph = Jet<double>::constant(v, 3, degree);
  for (int it = 0; it < 6; ++it) {
    const Jet<Complex> g = restricted(h, p, graph);
    const Jet<double> g0 = real_part(last_variable_coefficient(g, 0));
    if (degree == 0) break;
    const Jet<double> g1 = pad_degree(real_part(last_variable_coefficient(g, 1)), degree);
    graph = graph - g0 / g1;
  }
  return graph;
}

}  // namespace cartan
