#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <vector>

#include "nued/polyalg/gaussian_rational.hpp"
#include "nued/polyalg/monomial.hpp"

namespace nued::polyalg {

namespace detail {

/// Double-double value for compensated evaluation. Expanded polynomials can
/// cancel catastrophically (e.g. (x+z)^3 stored as four monomials, evaluated
/// where x is close to -z), and plain double accumulation then leaves noise of
/// order |largest term| * eps, which can exceed the true value by orders of
/// magnitude. Error-free products and sums keep ~106 significant bits through
/// the accumulation, so the returned double is accurate whenever the true
/// value is representable.
struct DD {
  double hi = 0.0;
  double lo = 0.0;
};

inline DD two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

inline DD two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

inline DD dd_add(DD a, DD b) {
  DD s = two_sum(a.hi, b.hi);
  s.lo += a.lo + b.lo;
  return two_sum(s.hi, s.lo);
}

inline DD dd_mul(DD a, double b) {
  DD p = two_prod(a.hi, b);
  p.lo = std::fma(a.lo, b, p.lo);
  return two_sum(p.hi, p.lo);
}

}  // namespace detail

/// Sparse multivariate polynomial over GaussianRational coefficients.
/// Terms are kept canonical: no zero coefficients, fixed monomial order.
struct Poly {
  std::uint32_t nvars = 0;
  std::map<Monomial, GaussianRational> terms;

  Poly() = default;
  explicit Poly(std::uint32_t n) : nvars(n) {}

  static Poly zero(std::uint32_t n) { return Poly(n); }

  static Poly constant(std::uint32_t n, GaussianRational c) {
    Poly p(n);
    if (!c.is_zero()) p.terms.emplace(Monomial{std::vector<std::uint32_t>(n, 0), {}}, std::move(c));
    return p;
  }

  static Poly variable(std::uint32_t n, std::uint32_t j, GaussianRational c = GaussianRational(1)) {
    if (j >= n) throw std::out_of_range("Poly::variable index");
    Poly p(n);
    Monomial m{std::vector<std::uint32_t>(n, 0), {}};
    m.state[j] = 1;
    if (!c.is_zero()) p.terms.emplace(std::move(m), std::move(c));
    return p;
  }

  static Poly param(std::uint32_t n, int symbol, std::uint32_t power = 1,
                    GaussianRational c = GaussianRational(1)) {
    Poly p(n);
    Monomial m{std::vector<std::uint32_t>(n, 0), {}};
    if (power > 0) m.params[symbol] = power;
    if (!c.is_zero()) p.terms.emplace(std::move(m), std::move(c));
    return p;
  }

  static Poly term(std::uint32_t n, Monomial m, GaussianRational c) {
    if (m.state.size() != n) throw std::invalid_argument("Poly::term monomial arity mismatch");
    Poly p(n);
    if (!c.is_zero()) p.terms.emplace(std::move(m), std::move(c));
    return p;
  }

  bool is_zero() const { return terms.empty(); }

  void add_term(const Monomial& m, const GaussianRational& c) {
    if (c.is_zero()) return;
    auto [it, inserted] = terms.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second.is_zero()) terms.erase(it);
    }
  }

  Poly& operator+=(const Poly& o) {
    check_arity(o);
    for (const auto& [m, c] : o.terms) add_term(m, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    check_arity(o);
    for (const auto& [m, c] : o.terms) add_term(m, -c);
    return *this;
  }
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator-(const Poly& a) {
    Poly r(a.nvars);
    for (const auto& [m, c] : a.terms) r.terms.emplace(m, -c);
    return r;
  }

  friend Poly operator*(const Poly& a, const Poly& b) {
    a.check_arity(b);
    Poly r(a.nvars);
    for (const auto& [ma, ca] : a.terms)
      for (const auto& [mb, cb] : b.terms) r.add_term(ma * mb, ca * cb);
    return r;
  }

  Poly scaled(const GaussianRational& c) const {
    Poly r(nvars);
    if (c.is_zero()) return r;
    for (const auto& [m, k] : terms) r.terms.emplace(m, k * c);
    return r;
  }

  Poly pow(std::uint32_t k) const {
    Poly r = Poly::constant(nvars, GaussianRational(1));
    for (std::uint32_t i = 0; i < k; ++i) r = r * (*this);
    return r;
  }

  Poly derivative(std::uint32_t j) const {
    if (j >= nvars) throw std::out_of_range("Poly::derivative index");
    Poly r(nvars);
    for (const auto& [m, c] : terms) {
      if (m.state[j] == 0) continue;
      Monomial d = m;
      const std::uint32_t e = d.state[j];
      d.state[j] = e - 1;
      r.add_term(d, c * GaussianRational(static_cast<long>(e)));
    }
    return r;
  }

  std::uint32_t max_state_degree() const {
    std::uint32_t d = 0;
    for (const auto& [m, c] : terms) d = std::max(d, m.state_degree());
    return d;
  }

  /// Smallest state degree among terms; UINT32_MAX for the zero polynomial.
  std::uint32_t min_state_degree() const {
    std::uint32_t d = std::numeric_limits<std::uint32_t>::max();
    for (const auto& [m, c] : terms) d = std::min(d, m.state_degree());
    return d;
  }

  Poly truncate_above_state_degree(std::uint32_t cap) const {
    Poly r(nvars);
    for (const auto& [m, c] : terms)
      if (m.state_degree() <= cap) r.terms.emplace(m, c);
    return r;
  }

  std::set<int> used_params() const {
    std::set<int> s;
    for (const auto& [m, c] : terms)
      for (const auto& [sym, e] : m.params) s.insert(sym);
    return s;
  }

  bool has_params() const {
    for (const auto& [m, c] : terms)
      if (!m.params.empty()) return true;
    return false;
  }

  bool is_real() const {
    for (const auto& [m, c] : terms)
      if (!c.is_real()) return false;
    return true;
  }

  /// Substitute state variable j by subs[j] (parameter symbols pass through).
  /// With `cap`, terms above that state degree are dropped as they are formed.
  Poly substitute(std::span<const Poly> subs,
                  std::uint32_t cap = std::numeric_limits<std::uint32_t>::max()) const {
    if (subs.size() != nvars) throw std::invalid_argument("Poly::substitute arity mismatch");
    const std::uint32_t n_out = subs.empty() ? 0 : subs[0].nvars;
    for (const auto& p : subs)
      if (p.nvars != n_out) throw std::invalid_argument("Poly::substitute mixed arities");

    // Power cache per variable, grown on demand.
    std::vector<std::vector<Poly>> powers(nvars);
    auto power_of = [&](std::uint32_t j, std::uint32_t e) -> const Poly& {
      auto& cache = powers[j];
      if (cache.empty()) cache.push_back(Poly::constant(n_out, GaussianRational(1)));
      while (cache.size() <= e) {
        Poly next = cache.back() * subs[j];
        if (cap != std::numeric_limits<std::uint32_t>::max())
          next = next.truncate_above_state_degree(cap);
        cache.push_back(std::move(next));
      }
      return cache[e];
    };

    Poly r(n_out);
    for (const auto& [m, c] : terms) {
      Poly acc = Poly::term(n_out, Monomial{std::vector<std::uint32_t>(n_out, 0), m.params}, c);
      for (std::uint32_t j = 0; j < nvars; ++j)
        if (m.state[j] > 0) acc = acc * power_of(j, m.state[j]);
      if (cap != std::numeric_limits<std::uint32_t>::max())
        acc = acc.truncate_above_state_degree(cap);
      r += acc;
    }
    return r;
  }

  /// Numeric evaluation. param_value(symbol) supplies parameter values.
  std::complex<double> evaluate(std::span<const std::complex<double>> x,
                                const std::function<double(int)>& param_value) const {
    if (x.size() != nvars) throw std::invalid_argument("Poly::evaluate arity mismatch");
    std::complex<double> acc{0.0, 0.0};
    for (const auto& [m, c] : terms) {
      std::complex<double> v = c.to_complex();
      for (std::uint32_t j = 0; j < nvars; ++j)
        for (std::uint32_t e = 0; e < m.state[j]; ++e) v *= x[j];
      for (const auto& [sym, e] : m.params) v *= std::pow(param_value(sym), static_cast<int>(e));
      acc += v;
    }
    return acc;
  }

  /// Numeric evaluation at a real point with compensated (double-double)
  /// products and accumulation. Coefficients must be real. Use this for
  /// right-hand sides and residuals: expanded forms of factored polynomials
  /// evaluate with severe cancellation in plain double arithmetic.
  double evaluate_real(std::span<const double> x,
                       const std::function<double(int)>& param_value) const {
    if (x.size() != nvars) throw std::invalid_argument("Poly::evaluate_real arity mismatch");
    detail::DD acc;
    for (const auto& [m, c] : terms) {
      if (!c.is_real()) throw std::invalid_argument("Poly::evaluate_real: complex coefficient");
      detail::DD v{c.to_complex().real(), 0.0};
      for (std::uint32_t j = 0; j < nvars; ++j)
        for (std::uint32_t e = 0; e < m.state[j]; ++e) v = detail::dd_mul(v, x[j]);
      for (const auto& [sym, e] : m.params) {
        const double p = param_value(sym);
        for (std::uint32_t k = 0; k < e; ++k) v = detail::dd_mul(v, p);
      }
      acc = detail::dd_add(acc, v);
    }
    return acc.hi + acc.lo;
  }

  /// Exact evaluation at a rational point. The result has no state variables:
  /// it is a polynomial in the parameter symbols alone.
  Poly evaluate_exact(std::span<const GaussianRational> x) const {
    if (x.size() != nvars) throw std::invalid_argument("Poly::evaluate_exact arity mismatch");
    Poly r(0);
    for (const auto& [m, c] : terms) {
      GaussianRational v = c;
      for (std::uint32_t j = 0; j < nvars; ++j)
        for (std::uint32_t e = 0; e < m.state[j]; ++e) v *= x[j];
      r.add_term(Monomial{{}, m.params}, v);
    }
    return r;
  }

  /// Substitute every parameter symbol by an exact rational value.
  Poly substitute_params_exact(const std::function<GaussianRational(int)>& value) const {
    Poly r(nvars);
    for (const auto& [m, c] : terms) {
      GaussianRational v = c;
      for (const auto& [sym, e] : m.params) {
        GaussianRational base = value(sym);
        for (std::uint32_t k = 0; k < e; ++k) v *= base;
      }
      r.add_term(Monomial{m.state, {}}, v);
    }
    return r;
  }

  friend bool operator==(const Poly& a, const Poly& b) {
    return a.nvars == b.nvars && a.terms == b.terms;
  }

 private:
  void check_arity(const Poly& o) const {
    if (nvars != o.nvars) throw std::invalid_argument("Poly arity mismatch");
  }
};

}  // namespace nued::polyalg
