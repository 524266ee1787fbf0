#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cartan/cartan_implicit.hpp"
#include "cartan/tube_models.hpp"
#include "support.hpp"

using namespace cartan;
using testing_support::max_abs;
using testing_support::rel_err;

namespace {

const char* kSphere = "z*zb + w*wb - 1";
const char* kMPrimeRaw = "(z - zb)^2 + (1 + epsilon^2)*(w^2 + wb^2) - 2*(1 - epsilon^2)*w*wb";

ImplicitHypersurface surface(const std::string& f, Params p = {}) { return ImplicitHypersurface::from_text(f, p); }

Complex m_prime_closed_form(double e, Complex w) {
  return 27.0 / 64.0 * std::pow(e, 8) * (1.0 - std::pow(e, 4)) * std::pow(std::conj(w), 2) * std::pow(w, 6);
}

// Random point on the unit sphere with |w| > 0.1.
ImplicitPoint sphere_point(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  for (;;) {
    std::array<double, 4> g{n(rng), n(rng), n(rng), n(rng)};
    const double r = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);
    const ImplicitPoint p{Complex(g[0], g[1]) / r, Complex(g[2], g[3]) / r};
    if (std::abs(p.w) > 0.1) return p;
  }
}

}  // namespace

TEST(SecondOrder, SphereHVanishesLIsOne) {
  auto h = surface(kSphere);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = sphere_point(rng);
    auto [hj, lj] = second_order_combinations(h.jet(p, 6));
    EXPECT_EQ(hj.degree(), 4);
    EXPECT_EQ(max_abs(hj), 0.0);
    EXPECT_NEAR(std::abs(lj.value() - 1.0), 0.0, 1e-14);
  }
}

TEST(SecondOrder, MPrimeMatchesFiniteDifferences) {
  // Polarized partials by complex central differences in each independent variable.
  const Params par{{"epsilon", 0.5}};
  auto h = surface(kMPrimeRaw, par);
  const ImplicitPoint p{Complex(0.0, 0.5), Complex(1.0, 0.0)};
  const std::array<Complex, 4> q{p.z, p.w, std::conj(p.z), std::conj(p.w)};
  auto F = [&](std::array<Complex, 4> r) {
    return eval_scalar<Complex>(h.defining_function(), std::span<const Complex>(r), par);
  };
  const double s = 1e-3;
  auto shift = [&](std::array<Complex, 4> r, int k, double d) {
    r[static_cast<std::size_t>(k)] += d;
    return r;
  };
  auto d1 = [&](int k) { return (F(shift(q, k, s)) - F(shift(q, k, -s))) / (2 * s); };
  auto d2 = [&](int i, int j) {
    return (F(shift(shift(q, i, s), j, s)) - F(shift(shift(q, i, s), j, -s)) - F(shift(shift(q, i, -s), j, s)) +
            F(shift(shift(q, i, -s), j, -s))) /
           (4 * s * s);
  };
  const Complex fz = d1(0), fw = d1(1), fzb = d1(2), fwb = d1(3);
  const Complex expect_h = fz * fz * d2(1, 1) - 2.0 * fz * fw * d2(0, 1) + fw * fw * d2(0, 0);
  const Complex expect_l =
      fzb * fz * d2(1, 3) - fzb * fw * d2(0, 3) - fwb * fz * d2(0, 3) + fwb * fw * d2(0, 2);
  auto [hj, lj] = second_order_combinations(h.jet(p, 6));
  EXPECT_LT(rel_err(hj.value(), expect_h), 1e-8);
  EXPECT_LT(rel_err(lj.value(), expect_l), 1e-8);
  EXPECT_GT(std::abs(hj.value()), 0.0);
}

TEST(SecondOrder, ShapeErrors) {
  EXPECT_THROW(second_order_combinations(Jet<Complex>::constant(1.0, 4, 1)), ShapeError);
  EXPECT_THROW(second_order_combinations(Jet<Complex>::constant(1.0, 3, 4)), ShapeError);
}

TEST(LbarApply, Examples) {
  auto h = surface(kSphere);
  const ImplicitPoint p{Complex(0.6, 0.0), Complex(0.0, 0.8)};
  const auto F = h.jet(p, 4);
  const auto c = Jet<Complex>::constant(Complex(2.0, 1.0), 4, 3);
  EXPECT_EQ(max_abs(lbar_apply(c, F)), 0.0);
  const auto zb = Jet<Complex>::variable(2, std::conj(p.z), 4, 3);
  const auto w = Jet<Complex>::variable(1, p.w, 4, 2);
  EXPECT_LT(testing_support::max_abs_diff(lbar_apply(zb, F), -w), 1e-15);
}

TEST(LbarApply, AnnihilatesHolomorphicJets) {
  auto h = surface(kMPrimeRaw, {{"epsilon", 0.3}});
  const ImplicitPoint p{Complex(0.1, 0.2), Complex(1.0, 0.1)};
  const auto F = h.jet(p, 5);
  const auto z = Jet<Complex>::variable(0, p.z, 4, 5), w = Jet<Complex>::variable(1, p.w, 4, 5);
  const auto g = exp(z * w) + z * z * z / (w + 2.0);
  EXPECT_EQ(max_abs(lbar_apply(g, F)), 0.0);
}

TEST(LbarApply, DegreeExhausted) {
  const auto F = Jet<Complex>::constant(1.0, 4, 3);
  EXPECT_THROW(lbar_apply(Jet<Complex>::constant(1.0, 4, 0), F), ShapeError);
  EXPECT_THROW(lbar_apply(Jet<Complex>::constant(1.0, 4, 4), F), ShapeError);
}

TEST(CartanImplicit, SphereIsUmbilical) {
  auto h = surface(kSphere);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const auto r = cartan_locus_iw(h, sphere_point(rng));
    EXPECT_LT(std::abs(r.i_w), 1e-9);
  }
}

TEST(CartanImplicit, MPrimeReferencePoint) {
  auto r = cartan_locus_iw(surface(kMPrimeRaw, {{"epsilon", 0.5}}), {Complex(0.0, 0.5), Complex(1.0, 0.0)});
  // The raw F is -4 times the normalized one; I_[w] has weight 16.
  const Complex expect = m_prime_closed_form(0.5, 1.0) * std::pow(4.0, 16);
  EXPECT_LT(rel_err(r.i_w, expect), 1e-10);
  EXPECT_NEAR(m_prime_closed_form(0.5, 1.0).real(), 1.54495e-3, 1e-8);
}

TEST(CartanImplicit, MPrimeClosedForm) {
  std::mt19937_64 rng(3);
  for (double e : {0.2, 0.5, 0.8}) {
    const auto m = hyperbolic_tube({{"epsilon", e}});
    const auto& chart = m.implicit("implicit");
    int n = 0;
    while (n < 100) {
      const auto q = m.sample(rng);
      if (q[0] <= 0.2) continue;
      const auto p = *chart.sampler(q);
      const auto r = chart.invariant(q);
      EXPECT_LT(rel_err(r.i_w, m_prime_closed_form(e, p.w)), 1e-8) << e;
      ++n;
    }
  }
}

TEST(CartanImplicit, WeightSixteenScaling) {
  const ImplicitPoint p{Complex(0.3, 0.2), Complex(0.9, -0.4)};
  const std::string f = "z*zb + 2*w*wb + 0.3*(z^2*wb + zb^2*w) - 1";
  auto base = surface(f);
  // Move p onto the surface along w by solving the real quadratic in |w| scaling.
  const double val = base.value(p).real();
  const double ww = std::norm(p.w);
  const double k = std::sqrt((ww * 2.0 - val) / (ww * 2.0));
  ImplicitPoint q{p.z, p.w * k};
  for (int it = 0; it < 50 && std::abs(base.value(q).real()) > 1e-14; ++it) {
    const double fv = base.value(q).real();
    const double df = (base.value({q.z, q.w * (1.0 + 1e-7)}).real() - fv) / 1e-7;
    q.w *= 1.0 - fv / df;
  }
  const auto r1 = cartan_locus_iw(base, q);
  for (double lambda : {2.0, -0.5, 3.0}) {
    auto scaled = surface(std::to_string(lambda) + "*(" + f + ")");
    const auto r = cartan_locus_iw(scaled, q);
    EXPECT_LT(rel_err(r.i_w, std::pow(lambda, 16) * r1.i_w), 1e-10) << lambda;
  }
  EXPECT_GT(std::abs(r1.i_w), 0.0);
}

TEST(CartanImplicit, TorusCase3Constant) {
  const auto m = torus_tube(3, {{"eps", 0.3}});
  const auto& chart = m.implicits.front();
  const double expect = 27.0 * std::pow(0.3, 8) / 64.0;
  for (auto q : {std::array<double, 3>{0.18, 0.0, 0.0}, {0.18, 0.7, -1.2}, {-0.25, -0.3, 0.4}, {0.0, 1.0, 2.0}}) {
    const auto r = chart.invariant(q);
    EXPECT_LT(rel_err(r.i_w, expect), 1e-10);
    EXPECT_GT(std::abs(r.i_w), 1e-12 * std::abs(12.0 * std::pow(r.f_w, 9)));
  }
}

TEST(CartanImplicit, InternalConsistency) {
  const auto m = hyperbolic_tube({{"epsilon", 0.4}});
  const auto r = m.implicit("implicit").invariant({1.2, 0.3, 0.5});
  Complex s{};
  for (const auto& t : r.terms) s += t;
  EXPECT_EQ(r.i_w, 12.0 * std::pow(r.f_w, 9) * s);
  EXPECT_GT(r.normalized(), 0.0);
  EXPECT_LE(r.normalized(), 7.0);
}

TEST(CartanImplicit, OffSurfaceRejected) {
  auto h = surface(kSphere);
  EXPECT_THROW(cartan_locus_iw(h, {Complex(0.5, 0.0), Complex(0.5, 0.0)}), ChartError);
}

TEST(CartanImplicit, NearSurfaceProjected) {
  auto h = surface(kSphere);
  const ImplicitPoint on{Complex(0.6, 0.0), Complex(0.0, 0.8)};
  const ImplicitPoint off{on.z * (1.0 + 1e-7), on.w};
  const ImplicitPoint q = ensure_on_surface(h, off);
  EXPECT_LT(std::abs(h.value(q)), std::abs(h.value(off)) * 1e-3);
  EXPECT_NO_THROW(cartan_locus_iw(h, off));
  ImplicitOptions strict;
  strict.project = false;
  EXPECT_THROW(cartan_locus_iw(h, off, strict), ChartError);
}

TEST(CartanImplicit, VanishingFwRejected) {
  auto h = surface(kSphere);
  EXPECT_THROW(cartan_locus_iw(h, {Complex(1.0, 0.0), Complex(0.0, 0.0)}), DomainError);
}

TEST(CartanImplicit, LeviFlatRejected) {
  auto h = surface("w + wb");
  EXPECT_THROW(cartan_locus_iw(h, {Complex(0.3, 0.1), Complex(0.0, 0.5)}), LeviDegenerateError);
}

TEST(CartanImplicit, NonRealDefiningFunctionRejected) {
  auto h = surface("z - 1 + w*wb");
  EXPECT_THROW(cartan_locus_iw(h, {Complex(0.75, 0.1), Complex(0.5, 0.0)}), ChartError);
  EXPECT_THROW(cartan_locus_iw(h, {Complex(0.5, 0.5), Complex(0.5, 0.2)}), ChartError);
}

TEST(CartanImplicit, DegreeTooLow) {
  auto h = surface(kSphere);
  EXPECT_THROW(cartan_locus_iw(h.jet({Complex(0.6, 0), Complex(0, 0.8)}, 5), {}), ShapeError);
}

TEST(CartanImplicit, OriginalTubeAndItsLinearImagesAreNowhereUmbilical) {
  // M_eps in original coordinates (z = u + iv, w = x + iy) and two linear images, z' = z k and
  // z' = z / k.  Only the second lands exactly on (1 + c) times the normalized chart.
  std::mt19937_64 rng(4);
  for (double eps : {0.3, 1.0, 2.0}) {
    const auto m = hyperbolic_tube({{"eps", eps}});
    const auto& original = m.implicit("implicit-r");
    const double c = std::cos(std::sqrt(eps));
    const double k = std::sqrt((1.0 + c) / 2.0);
    const std::string r_eps = "-(Z - Zb)^2/2 - (1 - c)*(w + wb)^2/4 - (1 + c)*(w - wb)^2/4";
    auto image_of = [&](const std::string& sub) {
      std::string f = r_eps;
      for (auto [from, to] : {std::pair<std::string, std::string>{"Zb", "(zb" + sub + ")"}, {"Z", "(z" + sub + ")"}})
        for (std::size_t at; (at = f.find(from)) != std::string::npos;) f.replace(at, from.size(), to);
      return surface(f, {{"c", c}, {"k", k}});
    };
    const auto forward = image_of("/k");
    const auto inverse = image_of("*k");
    for (int trial = 0; trial < 50; ++trial) {
      const auto q = m.sample(rng);
      const auto p = *original.sampler(q);
      const auto a = original.invariant(q);
      const auto b = cartan_locus_iw(forward, {p.z * k, p.w});
      const auto d = cartan_locus_iw(inverse, {p.z / k, p.w});
      EXPECT_GT(a.normalized(), 1e-7);
      EXPECT_GT(b.normalized(), 1e-7);
      EXPECT_GT(d.normalized(), 1e-7);
      const auto n = m.implicit("implicit").invariant(q);
      EXPECT_LT(rel_err(d.i_w, std::pow(1.0 + c, 16) * n.i_w), 1e-8);
    }
  }
}

TEST(GraphSolve, UnitSphereJetMatchesExplicitGraph) {
  auto h = surface(kSphere);
  auto g = GraphHypersurface::from_text("sqrt(1 - x^2 - y^2 - u^2)", {});
  for (GraphPoint p : {GraphPoint{0.1, 0.2, 0.3}, GraphPoint{-0.4, 0.1, -0.2}}) {
    const auto solved = solve_graph_jet(h, p, 0.5, 6);
    const auto explicit_jet = g.jet(p, 6);
    EXPECT_LT(testing_support::max_abs_diff(solved, explicit_jet), 1e-12 * max_abs(explicit_jet));
  }
}
