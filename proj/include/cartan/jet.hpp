#pragma once

// Truncated multivariate Taylor series ("jets") over double or std::complex<double>.
//
// A Jet of `num_vars` variables and degree `d` stores every coefficient of total
// degree <= d, densely, in graded order: all multi-indices of degree 0, then 1,
// then 2, ... and inside one degree lexicographically with the first variable's
// exponent descending.  Because the order inside a degree does not depend on d,
// the coefficients of a lower-degree truncation are a prefix of the full array.
//
// The coefficient stored for multi-index a is (d^a f)(p) / a!.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "cartan/errors.hpp"

namespace cartan {

using Complex = std::complex<double>;

template <class T>
inline constexpr bool is_complex_v = false;
template <>
inline constexpr bool is_complex_v<Complex> = true;

template <class T>
concept JetScalar = std::same_as<T, double> || std::same_as<T, Complex>;

/// Exponent vector of a monomial, one entry per variable.
class MultiIndex {
 public:
  MultiIndex() = default;
  MultiIndex(std::initializer_list<int> exps) : exps_(exps) { validate(); }
  explicit MultiIndex(std::vector<int> exps) : exps_(std::move(exps)) { validate(); }

  static MultiIndex unit(int num_vars, int index) {
    std::vector<int> e(static_cast<std::size_t>(num_vars), 0);
    e.at(static_cast<std::size_t>(index)) = 1;
    return MultiIndex(std::move(e));
  }

  std::size_t size() const noexcept { return exps_.size(); }
  int operator[](std::size_t i) const { return exps_[i]; }
  std::span<const int> exponents() const noexcept { return exps_; }

  int total_degree() const noexcept {
    int d = 0;
    for (int e : exps_) d += e;
    return d;
  }

  /// a! = prod a_i!
  double factorial() const noexcept {
    double f = 1.0;
    for (int e : exps_)
      for (int k = 2; k <= e; ++k) f *= k;
    return f;
  }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  void validate() const {
    for (int e : exps_)
      if (e < 0) throw ShapeError("multi-index exponents must be non-negative");
  }
  std::vector<int> exps_;
};

/// Index tables shared by every jet with the same (num_vars, degree).
class JetLayout {
 public:
  struct Product {
    std::uint32_t lhs;
    std::uint32_t rhs;
  };
  struct DerivativeSource {
    std::uint32_t source;  // index in this layout
    double factor;         // a_var + 1
  };

  static constexpr int kMaxVars = 6;
  static constexpr int kMaxDegree = 8;

  static std::shared_ptr<const JetLayout> get(int num_vars, int degree) {
    if (num_vars < 1 || num_vars > kMaxVars)
      throw ShapeError("jet variable count out of range: " + std::to_string(num_vars));
    if (degree < 0 || degree > kMaxDegree)
      throw ShapeError("jet degree out of range: " + std::to_string(degree));
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{num_vars, degree}];
    if (!slot) slot = std::shared_ptr<const JetLayout>(new JetLayout(num_vars, degree));
    return slot;
  }

  int num_vars() const noexcept { return num_vars_; }
  int degree() const noexcept { return degree_; }
  std::size_t size() const noexcept { return degrees_.size(); }

  /// Number of coefficients of total degree <= d (binomial(n + d, n)).
  std::size_t size_up_to(int d) const noexcept {
    return d < 0 ? 0 : degree_begin_[static_cast<std::size_t>(std::min(d, degree_)) + 1];
  }

  int degree_of(std::size_t k) const noexcept { return degrees_[k]; }

  std::span<const int> exponents(std::size_t k) const noexcept {
    return {exponents_.data() + k * static_cast<std::size_t>(num_vars_),
            static_cast<std::size_t>(num_vars_)};
  }

  std::optional<std::size_t> index_of(std::span<const int> alpha) const noexcept {
    if (alpha.size() != static_cast<std::size_t>(num_vars_)) return std::nullopt;
    int total = 0;
    std::size_t key = 0;
    for (int e : alpha) {
      if (e < 0) return std::nullopt;
      total += e;
      if (total > degree_) return std::nullopt;
      key = key * static_cast<std::size_t>(degree_ + 1) + static_cast<std::size_t>(e);
    }
    return static_cast<std::size_t>(lookup_[key]);
  }

  /// Pairs (i, j) whose monomials multiply to monomial k (truncated product).
  std::span<const Product> products_into(std::size_t k) const noexcept {
    return {products_.data() + product_begin_[k], product_begin_[k + 1] - product_begin_[k]};
  }

  /// For d/d(var): entry k of the degree-1-lower layout reads from `source` here.
  std::span<const DerivativeSource> derivative_sources(int var) const noexcept {
    const std::size_t n = size_up_to(degree_ - 1);
    return {derivative_.data() + static_cast<std::size_t>(var) * n, n};
  }

 private:
  JetLayout(int num_vars, int degree) : num_vars_(num_vars), degree_(degree) {
    const auto nv = static_cast<std::size_t>(num_vars);
    std::vector<int> current(nv, 0);
    degree_begin_.push_back(0);
    for (int d = 0; d <= degree; ++d) {
      emit_degree(current, 0, d, d);
      degree_begin_.push_back(degrees_.size());
    }

    std::size_t table = 1;
    for (int i = 0; i < num_vars; ++i) table *= static_cast<std::size_t>(degree + 1);
    lookup_.assign(table, 0);
    for (std::size_t k = 0; k < size(); ++k) {
      std::size_t key = 0;
      for (int e : exponents(k)) key = key * static_cast<std::size_t>(degree + 1) + static_cast<std::size_t>(e);
      lookup_[key] = static_cast<std::uint32_t>(k);
    }

    std::vector<std::vector<Product>> grouped(size());
    std::vector<int> sum(nv);
    for (std::size_t i = 0; i < size(); ++i) {
      for (std::size_t j = 0; j < size(); ++j) {
        if (degrees_[i] + degrees_[j] > degree) break;  // graded order: degrees_ non-decreasing
        auto a = exponents(i);
        auto b = exponents(j);
        for (std::size_t v = 0; v < nv; ++v) sum[v] = a[v] + b[v];
        grouped[*index_of(sum)].push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
      }
    }
    product_begin_.push_back(0);
    for (auto& g : grouped) {
      products_.insert(products_.end(), g.begin(), g.end());
      product_begin_.push_back(products_.size());
    }

    if (degree >= 1) {
      const std::size_t n = size_up_to(degree - 1);
      derivative_.reserve(nv * n);
      for (std::size_t var = 0; var < nv; ++var) {
        for (std::size_t k = 0; k < n; ++k) {
          auto a = exponents(k);
          std::copy(a.begin(), a.end(), sum.begin());
          sum[var] += 1;
          derivative_.push_back({static_cast<std::uint32_t>(*index_of(sum)), static_cast<double>(sum[var])});
        }
      }
    }
  }

  void emit_degree(std::vector<int>& current, std::size_t var, int remaining, int total) {
    if (var + 1 == current.size()) {
      current[var] = remaining;
      exponents_.insert(exponents_.end(), current.begin(), current.end());
      degrees_.push_back(total);
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      current[var] = e;
      emit_degree(current, var + 1, remaining - e, total);
    }
    current[var] = 0;
  }

  int num_vars_;
  int degree_;
  std::vector<int> exponents_;
  std::vector<int> degrees_;
  std::vector<std::size_t> degree_begin_;
  std::vector<std::uint32_t> lookup_;
  std::vector<Product> products_;
  std::vector<std::size_t> product_begin_;
  std::vector<DerivativeSource> derivative_;
};


/// Truncated Taylor expansion of a scalar field at a point.
template <JetScalar T>
class Jet {
 public:
  using scalar_type = T;

  Jet(std::shared_ptr<const JetLayout> layout, std::vector<T> coeffs)
      : layout_(std::move(layout)), c_(std::move(coeffs)) {
    if (c_.size() != layout_->size()) throw ShapeError("coefficient count does not match the jet layout");
    check_finite("construction");
  }

  static Jet zero(int num_vars, int degree) {
    auto layout = JetLayout::get(num_vars, degree);
    return Jet(layout, std::vector<T>(layout->size(), T{}), Unchecked{});
  }

  static Jet constant(T value, int num_vars, int degree) {
    Jet j = zero(num_vars, degree);
    j.c_[0] = value;
    j.check_finite("constant");
    return j;
  }

  /// The coordinate function of variable `index`, based at `value`.
  static Jet variable(int index, T value, int num_vars, int degree) {
    if (index < 0 || index >= num_vars)
      throw ShapeError("variable index " + std::to_string(index) + " out of range for " +
                       std::to_string(num_vars) + " variables");
    Jet j = constant(value, num_vars, degree);
    if (degree >= 1) j.c_[1 + static_cast<std::size_t>(index)] = T{1};
    return j;
  }

  int num_vars() const noexcept { return layout_->num_vars(); }
  int degree() const noexcept { return layout_->degree(); }
  std::size_t size() const noexcept { return c_.size(); }
  const JetLayout& layout() const noexcept { return *layout_; }
  const std::shared_ptr<const JetLayout>& layout_ptr() const noexcept { return layout_; }

  std::span<const T> coefficients() const noexcept { return c_; }
  const T& operator[](std::size_t k) const { return c_[k]; }
  T value() const noexcept { return c_[0]; }

  T coefficient(const MultiIndex& alpha) const {
    if (alpha.size() != static_cast<std::size_t>(num_vars()))
      throw ShapeError("multi-index has the wrong number of variables");
    if (alpha.total_degree() > degree())
      throw ShapeError("multi-index degree " + std::to_string(alpha.total_degree()) +
                       " exceeds jet degree " + std::to_string(degree()));
    return c_[*layout_->index_of(alpha.exponents())];
  }

  /// The actual partial derivative value a! * coefficient(a).
  T derivative_value(const MultiIndex& alpha) const { return coefficient(alpha) * alpha.factorial(); }

  /// Drops every term above `new_degree`.
  Jet truncated(int new_degree) const {
    if (new_degree > degree()) throw ShapeError("cannot raise the degree of a jet by truncation");
    if (new_degree == degree()) return *this;
    auto layout = JetLayout::get(num_vars(), new_degree);
    return Jet(layout, std::vector<T>(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(layout->size())),
               Unchecked{});
  }

  Jet operator-() const {
    Jet r = *this;
    for (auto& v : r.c_) v = -v;
    return r;
  }

  Jet& operator+=(const Jet& b) {
    require_same_shape(b, "add");
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] += b.c_[k];
    check_finite("add");
    return *this;
  }
  Jet& operator-=(const Jet& b) {
    require_same_shape(b, "sub");
    for (std::size_t k = 0; k < c_.size(); ++k) c_[k] -= b.c_[k];
    check_finite("sub");
    return *this;
  }
  Jet& operator*=(const Jet& b) { return *this = *this * b; }
  Jet& operator/=(const Jet& b) { return *this = *this / b; }

  Jet& operator+=(T s) {
    c_[0] += s;
    check_finite("add");
    return *this;
  }
  Jet& operator-=(T s) {
    c_[0] -= s;
    check_finite("sub");
    return *this;
  }
  Jet& operator*=(T s) {
    for (auto& v : c_) v *= s;
    check_finite("mul");
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator+(Jet a, T s) { return a += s; }
  friend Jet operator+(T s, Jet a) { return a += s; }
  friend Jet operator-(Jet a, T s) { return a -= s; }
  friend Jet operator-(T s, const Jet& a) { return (-a) += s; }
  friend Jet operator*(Jet a, T s) { return a *= s; }
  friend Jet operator*(T s, Jet a) { return a *= s; }
  friend Jet operator/(Jet a, T s) {
    if (std::abs(s) <= kDivisionFloor) throw DomainError("division by a (near-)zero scalar");
    return a *= (T{1} / s);
  }

  /// Truncated Cauchy product.
  friend Jet operator*(const Jet& a, const Jet& b) {
    a.require_same_shape(b, "mul");
    const JetLayout& lay = *a.layout_;
    std::vector<T> out(a.c_.size());
    for (std::size_t k = 0; k < out.size(); ++k) {
      T acc{};
      for (const auto& p : lay.products_into(k)) acc += a.c_[p.lhs] * b.c_[p.rhs];
      out[k] = acc;
    }
    Jet r(a.layout_, std::move(out), Unchecked{});
    r.check_finite("mul");
    return r;
  }

  /// d = a / b, solved coefficient by coefficient in graded order from d * b = a.
  friend Jet operator/(const Jet& a, const Jet& b) {
    a.require_same_shape(b, "div");
    const T b0 = b.c_[0];
    if (std::abs(b0) <= kDivisionFloor) throw DomainError("division by a jet with (near-)zero constant term");
    const JetLayout& lay = *a.layout_;
    std::vector<T> out(a.c_.size());
    const T inv = T{1} / b0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      T acc = a.c_[k];
      for (const auto& p : lay.products_into(k))
        if (p.rhs != 0) acc -= out[p.lhs] * b.c_[p.rhs];
      out[k] = acc * inv;
    }
    Jet r(a.layout_, std::move(out), Unchecked{});
    r.check_finite("div");
    return r;
  }
  friend Jet operator/(T s, const Jet& b) { return constant(s, b.num_vars(), b.degree()) / b; }

  static constexpr double kDivisionFloor = 1e-300;

 private:
  struct Unchecked {};
  Jet(std::shared_ptr<const JetLayout> layout, std::vector<T> coeffs, Unchecked)
      : layout_(std::move(layout)), c_(std::move(coeffs)) {}

  template <JetScalar U>
  friend class Jet;
  template <JetScalar U>
  friend Jet<U> partial(const Jet<U>&, int);
  template <JetScalar U>
  friend Jet<U> compose_series(const Jet<U>&, std::span<const U>);

  void require_same_shape(const Jet& b, const char* op) const {
    if (layout_ != b.layout_)
      throw ShapeError(std::string("jet shape mismatch in ") + op + ": (" + std::to_string(num_vars()) + " vars, deg " +
                       std::to_string(degree()) + ") vs (" + std::to_string(b.num_vars()) + " vars, deg " +
                       std::to_string(b.degree()) + ")");
  }

  void check_finite(const char* op) const {
    for (const auto& v : c_) {
      if constexpr (is_complex_v<T>) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
          throw DomainError(std::string("non-finite jet coefficient after ") + op);
      } else {
        if (!std::isfinite(v)) throw DomainError(std::string("non-finite jet coefficient after ") + op);
      }
    }
  }

  std::shared_ptr<const JetLayout> layout_;
  std::vector<T> c_;
};

/// d/d(variable `var`); the result has one degree less.
template <JetScalar T>
Jet<T> partial(const Jet<T>& a, int var) {
  if (a.degree() < 1) throw ShapeError("cannot differentiate a degree-0 jet");
  if (var < 0 || var >= a.num_vars()) throw ShapeError("derivative variable out of range");
  auto lower = JetLayout::get(a.num_vars(), a.degree() - 1);
  std::vector<T> out(lower->size());
  auto src = a.layout().derivative_sources(var);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = a.c_[src[k].source] * src[k].factor;
  return Jet<T>(lower, std::move(out), typename Jet<T>::Unchecked{});
}

/// Same jet with complex scalars.
inline Jet<Complex> to_complex(const Jet<double>& a) {
  std::vector<Complex> c(a.coefficients().begin(), a.coefficients().end());
  return Jet<Complex>(a.layout_ptr(), std::move(c));
}

inline Jet<double> real_part(const Jet<Complex>& a) {
  std::vector<double> c(a.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = a[k].real();
  return Jet<double>(a.layout_ptr(), std::move(c));
}

inline Jet<double> imag_part(const Jet<Complex>& a) {
  std::vector<double> c(a.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = a[k].imag();
  return Jet<double>(a.layout_ptr(), std::move(c));
}

/// Re-expresses `a` as a jet in `num_vars` >= a.num_vars() variables; the extra
/// (trailing) variables do not occur.
template <JetScalar T>
Jet<T> embed(const Jet<T>& a, int num_vars) {
  if (num_vars < a.num_vars()) throw ShapeError("embed cannot drop variables");
  auto layout = JetLayout::get(num_vars, a.degree());
  std::vector<T> out(layout->size(), T{});
  std::vector<int> alpha(static_cast<std::size_t>(num_vars), 0);
  for (std::size_t k = 0; k < a.size(); ++k) {
    auto e = a.layout().exponents(k);
    std::copy(e.begin(), e.end(), alpha.begin());
    out[*layout->index_of(alpha)] = a[k];
  }
  return Jet<T>(layout, std::move(out));
}

/// Coefficient of t^power, t the last variable, as a jet in the remaining variables.
template <JetScalar T>
Jet<T> last_variable_coefficient(const Jet<T>& a, int power) {
  if (a.num_vars() < 2) throw ShapeError("need at least two variables");
  if (power < 0 || power > a.degree()) throw ShapeError("power out of range");
  auto layout = JetLayout::get(a.num_vars() - 1, a.degree() - power);
  std::vector<T> out(layout->size());
  std::vector<int> alpha(static_cast<std::size_t>(a.num_vars()), 0);
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto e = layout->exponents(k);
    std::copy(e.begin(), e.end(), alpha.begin());
    alpha.back() = power;
    out[k] = a[*a.layout().index_of(alpha)];
  }
  return Jet<T>(layout, std::move(out));
}

// ---------------------------------------------------------------------------
// Elementary functions.

enum class Function { Sqrt, Exp, Log, Sin, Cos, Sinh, Cosh, Arcsin, Arccos, Arcsinh, Arccosh };

inline constexpr std::array<std::pair<std::string_view, Function>, 11> kFunctionNames{{
    {"sqrt", Function::Sqrt},
    {"exp", Function::Exp},
    {"log", Function::Log},
    {"sin", Function::Sin},
    {"cos", Function::Cos},
    {"sinh", Function::Sinh},
    {"cosh", Function::Cosh},
    {"arcsin", Function::Arcsin},
    {"arccos", Function::Arccos},
    {"arcsinh", Function::Arcsinh},
    {"arccosh", Function::Arccosh},
}};

inline std::optional<Function> function_from_name(std::string_view name) {
  for (const auto& [n, f] : kFunctionNames)
    if (n == name) return f;
  return std::nullopt;
}

inline std::string_view function_name(Function f) {
  for (const auto& [n, g] : kFunctionNames)
    if (g == f) return n;
  return "?";
}

namespace detail {

// Univariate truncated series helpers; index = power of t.
template <class T>
std::vector<T> series_mul(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> r(a.size(), T{});
  for (std::size_t n = 0; n < r.size(); ++n)
    for (std::size_t k = 0; k <= n; ++k) r[n] += a[k] * b[n - k];
  return r;
}

// h^p for h[0] != 0, with g[0] supplied so that branch choices stay with the caller.
template <class T>
std::vector<T> series_pow(const std::vector<T>& h, double p, T g0) {
  std::vector<T> g(h.size(), T{});
  g[0] = g0;
  for (std::size_t n = 1; n < g.size(); ++n) {
    T acc{};
    for (std::size_t k = 1; k <= n; ++k)
      acc += (p * static_cast<double>(k) - static_cast<double>(n - k)) * h[k] * g[n - k];
    g[n] = acc / (static_cast<double>(n) * h[0]);
  }
  return g;
}

// Taylor coefficients of integral of f', given f(a0) and the series of f'.
template <class T>
std::vector<T> antiderivative(T value, const std::vector<T>& derivative, std::size_t count) {
  std::vector<T> r(count, T{});
  r[0] = value;
  for (std::size_t n = 1; n < count; ++n) r[n] = derivative[n - 1] / static_cast<double>(n);
  return r;
}

[[noreturn]] inline void domain_fail(Function f, const std::string& why) {
  throw DomainError(std::string(function_name(f)) + ": " + why);
}

}  // namespace detail

/// Coefficients c_n of f(a0 + t) = sum c_n t^n, n = 0..degree.  Complex scalars use
/// principal branches; the inverse trigonometric/hyperbolic functions are real-only.
template <JetScalar T>
std::vector<T> taylor_coefficients(Function f, T a0, int degree) {
  const std::size_t count = static_cast<std::size_t>(degree) + 1;
  std::vector<T> c(count, T{});
  double fact = 1.0;
  auto cyclic = [&](std::array<T, 4> cycle, bool period2) {
    for (std::size_t n = 0; n < count; ++n) {
      if (n > 0) fact *= static_cast<double>(n);
      c[n] = cycle[period2 ? n % 2 : n % 4] / fact;
    }
  };
  // s = a0 + t as a series, used by the inverse functions.
  std::vector<T> s(count + 1, T{});
  s[0] = a0;
  if (s.size() > 1) s[1] = T{1};

  // Values alone are defined on the closed domains; only derivatives blow up at the ends.
  if (degree == 0) {
    if constexpr (!is_complex_v<T>) {
      const bool closed_ok = (f == Function::Sqrt && a0 == 0.0) ||
                             ((f == Function::Arcsin || f == Function::Arccos) && std::abs(a0) == 1.0) ||
                             (f == Function::Arccosh && a0 == 1.0);
      if (closed_ok) {
        c[0] = f == Function::Sqrt     ? 0.0
               : f == Function::Arcsin ? std::asin(a0)
               : f == Function::Arccos ? std::acos(a0)
                                       : 0.0;
        return c;
      }
    }
  }

  switch (f) {
    case Function::Exp: {
      const T e = std::exp(a0);
      cyclic({e, e, e, e}, true);
      break;
    }
    case Function::Sin:
      cyclic({std::sin(a0), std::cos(a0), -std::sin(a0), -std::cos(a0)}, false);
      break;
    case Function::Cos:
      cyclic({std::cos(a0), -std::sin(a0), -std::cos(a0), std::sin(a0)}, false);
      break;
    case Function::Sinh:
      cyclic({std::sinh(a0), std::cosh(a0), T{}, T{}}, true);
      break;
    case Function::Cosh:
      cyclic({std::cosh(a0), std::sinh(a0), T{}, T{}}, true);
      break;
    case Function::Log: {
      if constexpr (is_complex_v<T>) {
        if (std::abs(a0) == 0.0) detail::domain_fail(f, "argument is zero");
      } else {
        if (!(a0 > 0.0)) detail::domain_fail(f, "argument must be positive, got " + std::to_string(a0));
      }
      c[0] = std::log(a0);
      T power = a0;
      for (std::size_t n = 1; n < count; ++n, power *= a0)
        c[n] = ((n % 2 == 1) ? T{1} : T{-1}) / (static_cast<double>(n) * power);
      break;
    }
    case Function::Sqrt: {
      if constexpr (is_complex_v<T>) {
        if (std::abs(a0) == 0.0) detail::domain_fail(f, "argument is zero");
      } else {
        if (!(a0 > 0.0)) detail::domain_fail(f, "argument must be positive, got " + std::to_string(a0));
      }
      std::vector<T> h(count, T{});
      h[0] = a0;
      if (count > 1) h[1] = T{1};
      c = detail::series_pow(h, 0.5, std::sqrt(a0));
      break;
    }
    case Function::Arcsin:
    case Function::Arccos:
    case Function::Arcsinh:
    case Function::Arccosh: {
      if constexpr (is_complex_v<T>) {
        detail::domain_fail(f, "not supported for complex jets");
      } else {
        std::vector<T> sq = detail::series_mul(s, s);
        std::vector<T> radicand(count, T{});
        T value{};
        double sign = 1.0;
        for (std::size_t n = 0; n < count; ++n) radicand[n] = sq[n];
        switch (f) {
          case Function::Arcsin:
          case Function::Arccos:
            if (!(std::abs(a0) < 1.0)) detail::domain_fail(f, "requires |argument| < 1, got " + std::to_string(a0));
            for (auto& v : radicand) v = -v;
            radicand[0] += 1.0;  // 1 - s^2
            value = (f == Function::Arcsin) ? std::asin(a0) : std::acos(a0);
            sign = (f == Function::Arcsin) ? 1.0 : -1.0;
            break;
          case Function::Arcsinh:
            radicand[0] += 1.0;  // 1 + s^2
            value = std::asinh(a0);
            break;
          default:
            if (!(a0 > 1.0)) detail::domain_fail(f, "requires argument > 1, got " + std::to_string(a0));
            radicand[0] -= 1.0;  // s^2 - 1
            value = std::acosh(a0);
            break;
        }
        auto deriv = detail::series_pow(radicand, -0.5, 1.0 / std::sqrt(radicand[0]));
        for (auto& v : deriv) v *= sign;
        c = detail::antiderivative(value, deriv, count);
      }
      break;
    }
  }
  return c;
}

/// sum_n coeffs[n] * (a - a0)^n, truncated; Horner in the nilpotent part of a.
template <JetScalar T>
Jet<T> compose_series(const Jet<T>& a, std::span<const T> coeffs) {
  Jet<T> t = a;
  t.c_[0] = T{};
  const int top = std::min<int>(a.degree(), static_cast<int>(coeffs.size()) - 1);
  Jet<T> r = Jet<T>::constant(coeffs[static_cast<std::size_t>(top)], a.num_vars(), a.degree());
  for (int n = top - 1; n >= 0; --n) {
    r = r * t;
    r += coeffs[static_cast<std::size_t>(n)];
  }
  return r;
}

template <JetScalar T>
Jet<T> apply_function(Function f, const Jet<T>& a) {
  auto coeffs = taylor_coefficients<T>(f, a.value(), a.degree());
  for (const auto& v : coeffs) {
    bool finite;
    if constexpr (is_complex_v<T>)
      finite = std::isfinite(v.real()) && std::isfinite(v.imag());
    else
      finite = std::isfinite(v);
    if (!finite) detail::domain_fail(f, "non-finite Taylor coefficient");
  }
  return compose_series<T>(a, coeffs);
}

/// a^n by repeated squaring; negative n divides (a0 must be nonzero).
template <JetScalar T>
Jet<T> pow_int(const Jet<T>& a, int n) {
  if (n < 0) return T{1} / pow_int(a, -n);
  Jet<T> result = Jet<T>::constant(T{1}, a.num_vars(), a.degree());
  Jet<T> base = a;
  bool first = true;
  for (unsigned e = static_cast<unsigned>(n); e != 0; e >>= 1) {
    if (e & 1U) {
      result = first ? base : result * base;
      first = false;
    }
    if (e > 1) base = base * base;
  }
  return result;
}

template <JetScalar T> Jet<T> sqrt(const Jet<T>& a) { return apply_function(Function::Sqrt, a); }
template <JetScalar T> Jet<T> exp(const Jet<T>& a) { return apply_function(Function::Exp, a); }
template <JetScalar T> Jet<T> log(const Jet<T>& a) { return apply_function(Function::Log, a); }
template <JetScalar T> Jet<T> sin(const Jet<T>& a) { return apply_function(Function::Sin, a); }
template <JetScalar T> Jet<T> cos(const Jet<T>& a) { return apply_function(Function::Cos, a); }
template <JetScalar T> Jet<T> sinh(const Jet<T>& a) { return apply_function(Function::Sinh, a); }
template <JetScalar T> Jet<T> cosh(const Jet<T>& a) { return apply_function(Function::Cosh, a); }
template <JetScalar T> Jet<T> arcsin(const Jet<T>& a) { return apply_function(Function::Arcsin, a); }
template <JetScalar T> Jet<T> arccos(const Jet<T>& a) { return apply_function(Function::Arccos, a); }
template <JetScalar T> Jet<T> arcsinh(const Jet<T>& a) { return apply_function(Function::Arcsinh, a); }
template <JetScalar T> Jet<T> arccosh(const Jet<T>& a) { return apply_function(Function::Arccosh, a); }

}  // namespace cartan
