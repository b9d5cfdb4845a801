#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nued/polyalg/param_binding.hpp"
#include "nued/polyalg/poly.hpp"

namespace nued::polyalg {

/// Polynomial self-map of R^n (or C^n) with time entering only through
/// bound parameter symbols. When the map has the form lambda*X + H with H
/// carrying no constant or linear terms, `linear_coefficient` records lambda.
struct ParamPolyMap {
  std::uint32_t dim = 0;
  std::vector<Poly> coords;
  std::vector<ParamBinding> bindings;
  std::optional<Rational> linear_coefficient;

  static ParamPolyMap identity(std::uint32_t n) {
    ParamPolyMap m;
    m.dim = n;
    m.coords.reserve(n);
    for (std::uint32_t j = 0; j < n; ++j) m.coords.push_back(Poly::variable(n, j));
    m.linear_coefficient = Rational(1);
    return m;
  }

  const ParamBinding* find_binding(int symbol) const {
    for (const auto& b : bindings)
      if (b.symbol == symbol) return &b;
    return nullptr;
  }

  bool is_real() const {
    for (const auto& p : coords)
      if (!p.is_real()) return false;
    return true;
  }

  /// Structural checks: arities, binding coverage/uniqueness, and (when the
  /// linear coefficient is declared) that coords - lambda*X has no terms of
  /// state degree 0 or 1.
  void validate() const {
    if (coords.size() != dim) throw std::invalid_argument("ParamPolyMap: coordinate count != dim");
    for (const auto& p : coords)
      if (p.nvars != dim) throw std::invalid_argument("ParamPolyMap: coordinate arity mismatch");
    for (std::size_t i = 0; i < bindings.size(); ++i)
      for (std::size_t j = i + 1; j < bindings.size(); ++j)
        if (bindings[i].symbol == bindings[j].symbol)
          throw std::invalid_argument("ParamPolyMap: duplicate binding for symbol");
    for (const auto& p : coords)
      for (int sym : p.used_params())
        if (!find_binding(sym))
          throw std::invalid_argument("ParamPolyMap: unbound parameter symbol");
    if (linear_coefficient) {
      const auto h = nonlinear_part();
      for (const auto& p : h)
        if (!p.is_zero() && p.min_state_degree() < 2)
          throw std::invalid_argument(
              "ParamPolyMap: declared linear coefficient leaves degree <= 1 remainder");
    }
  }

  /// H = coords - lambda*X. Requires a declared linear coefficient.
  std::vector<Poly> nonlinear_part() const {
    if (!linear_coefficient) throw std::logic_error("ParamPolyMap: no linear coefficient declared");
    std::vector<Poly> h;
    h.reserve(dim);
    for (std::uint32_t j = 0; j < dim; ++j)
      h.push_back(coords[j] - Poly::variable(dim, j, GaussianRational(*linear_coefficient)));
    return h;
  }

  double param_value(int symbol, double t) const {
    const ParamBinding* b = find_binding(symbol);
    if (!b) throw std::invalid_argument("ParamPolyMap: unknown parameter symbol");
    return b->at(t);
  }

  std::vector<std::complex<double>> evaluate(double t,
                                             std::span<const std::complex<double>> x) const {
    auto pv = [&](int sym) { return param_value(sym, t); };
    std::vector<std::complex<double>> y;
    y.reserve(dim);
    for (const auto& p : coords) y.push_back(p.evaluate(x, pv));
    return y;
  }

  /// Real-point evaluation with compensated accumulation; see
  /// Poly::evaluate_real for why plain double arithmetic is not enough here.
  std::vector<double> evaluate_real(double t, std::span<const double> x) const {
    auto pv = [&](int sym) { return param_value(sym, t); };
    std::vector<double> r(dim);
    for (std::uint32_t j = 0; j < dim; ++j) r[j] = coords[j].evaluate_real(x, pv);
    return r;
  }

  /// Exact image of a rational point: one parameter-polynomial per coordinate.
  std::vector<Poly> evaluate_exact(std::span<const GaussianRational> x) const {
    std::vector<Poly> y;
    y.reserve(dim);
    for (const auto& p : coords) y.push_back(p.evaluate_exact(x));
    return y;
  }
};

/// Dense matrix of polynomials (Jacobians, nilpotency powers).
struct PolyMatrix {
  std::uint32_t rows = 0, cols = 0, nvars = 0;
  std::vector<Poly> entries;

  PolyMatrix() = default;
  PolyMatrix(std::uint32_t r, std::uint32_t c, std::uint32_t n)
      : rows(r), cols(c), nvars(n), entries(static_cast<std::size_t>(r) * c, Poly::zero(n)) {}

  Poly& at(std::uint32_t i, std::uint32_t j) { return entries[static_cast<std::size_t>(i) * cols + j]; }
  const Poly& at(std::uint32_t i, std::uint32_t j) const {
    return entries[static_cast<std::size_t>(i) * cols + j];
  }

  bool is_zero() const {
    for (const auto& p : entries)
      if (!p.is_zero()) return false;
    return true;
  }

  friend PolyMatrix operator*(const PolyMatrix& a, const PolyMatrix& b) {
    if (a.cols != b.rows || a.nvars != b.nvars)
      throw std::invalid_argument("PolyMatrix: shape mismatch");
    PolyMatrix r(a.rows, b.cols, a.nvars);
    for (std::uint32_t i = 0; i < a.rows; ++i)
      for (std::uint32_t j = 0; j < b.cols; ++j) {
        Poly acc(a.nvars);
        for (std::uint32_t k = 0; k < a.cols; ++k) acc += a.at(i, k) * b.at(k, j);
        r.at(i, j) = std::move(acc);
      }
    return r;
  }

  friend bool operator==(const PolyMatrix& a, const PolyMatrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.entries == b.entries;
  }
};

}  // namespace nued::polyalg
