#pragma once

// Oracles shared by the test suites: random jets, finite-difference stencils and a
// golden-section minimizer.  None of these touch the jet kernel's own calculus.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "cartan/jet.hpp"

namespace testing_support {

using cartan::Complex;
using cartan::Jet;

template <class T>
T random_scalar(std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  if constexpr (std::is_same_v<T, double>)
    return d(rng);
  else
    return T(d(rng), d(rng));
}

template <class T>
Jet<T> random_jet(std::mt19937_64& rng, int nv, int deg, T constant = T{}) {
  auto layout = cartan::JetLayout::get(nv, deg);
  std::vector<T> c(layout->size());
  for (auto& v : c) v = random_scalar<T>(rng);
  if (constant != T{}) c[0] = constant;
  return Jet<T>(layout, std::move(c));
}

template <class T>
double max_abs_diff(const Jet<T>& a, const Jet<T>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

template <class T>
double max_abs(const Jet<T>& a) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k]));
  return m;
}

/// Fornberg weights for the m-th derivative at 0 from samples at the given offsets.
inline std::vector<double> fd_weights(const std::vector<double>& x, int m) {
  const int n = static_cast<int>(x.size()) - 1;
  std::vector<std::vector<double>> c(x.size(), std::vector<double>(static_cast<std::size_t>(m) + 1, 0.0));
  double c1 = 1.0, c4 = x[0];
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[static_cast<std::size_t>(i)];
    for (int j = 0; j < i; ++j) {
      const double c3 = x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
              c1 * (k * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k - 1)] -
                    c5 * c[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(k)]) / c2;
        c[static_cast<std::size_t>(i)][0] = -c1 * c5 * c[static_cast<std::size_t>(i - 1)][0] / c2;
      }
      for (int k = mn; k >= 1; --k)
        c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] =
            (c4 * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] -
             k * c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k - 1)]) / c3;
      c[static_cast<std::size_t>(j)][0] = c4 * c[static_cast<std::size_t>(j)][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) w[i] = c[i][static_cast<std::size_t>(m)];
  return w;
}

/// Degree-`deg` Taylor jet of f : R^3 -> R at p, every coefficient from tensor-product
/// finite-difference stencils on a (2 half + 1)^3 grid of spacing h.
inline Jet<double> fd_jet3(const std::function<double(double, double, double)>& f, std::array<double, 3> p, int deg,
                           double h, int half) {
  const int n = 2 * half + 1;
  std::vector<double> offs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) offs[static_cast<std::size_t>(i)] = (i - half) * h;
  std::vector<std::vector<double>> w(static_cast<std::size_t>(deg) + 1);
  for (int m = 0; m <= deg; ++m) w[static_cast<std::size_t>(m)] = fd_weights(offs, m);
  std::vector<double> grid(static_cast<std::size_t>(n * n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        grid[static_cast<std::size_t>((i * n + j) * n + k)] =
            f(p[0] + offs[static_cast<std::size_t>(i)], p[1] + offs[static_cast<std::size_t>(j)],
              p[2] + offs[static_cast<std::size_t>(k)]);
  auto layout = cartan::JetLayout::get(3, deg);
  std::vector<double> c(layout->size());
  for (std::size_t idx = 0; idx < layout->size(); ++idx) {
    auto e = layout->exponents(idx);
    const auto& wa = w[static_cast<std::size_t>(e[0])];
    const auto& wb = w[static_cast<std::size_t>(e[1])];
    const auto& wc = w[static_cast<std::size_t>(e[2])];
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          s += wa[static_cast<std::size_t>(i)] * wb[static_cast<std::size_t>(j)] * wc[static_cast<std::size_t>(k)] *
               grid[static_cast<std::size_t>((i * n + j) * n + k)];
    double fact = 1.0;
    for (int v : e)
      for (int q = 2; q <= v; ++q) fact *= q;
    c[idx] = s / fact;
  }
  return Jet<double>(layout, std::move(c));
}

/// Golden-section minimum of a unimodal f on [a, b], bracket shrunk below tol.
inline double golden_min(const std::function<double(double)>& f, double a, double b, double tol = 1e-8) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return f(0.5 * (a + b));
}

inline double rel_err(Complex a, Complex b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing_support
