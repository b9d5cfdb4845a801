#pragma once

#include "nued/polyalg/operations.hpp"
#include "nued/polyalg/poly_map.hpp"

namespace nued::polyalg {

inline constexpr int kDecaySymbol = 0;  // conventional id for the shared decay factor

/// 3-d cubic map with nilpotent nonlinear Jacobian and one decay factor:
///   (lambda*x + s*y^3, lambda*y + s*(x+z)^3, lambda*z - s*y^3),  s = e^{-t}.
inline ParamPolyMap nilpotent_cubic_map(Rational lambda = Rational(-1), double kappa = 1.0) {
  const std::uint32_t n = 3;
  ParamPolyMap m;
  m.dim = n;
  m.bindings.push_back(ParamBinding::exp_decay(kDecaySymbol, "s", kappa));
  m.linear_coefficient = lambda;

  const Poly x = Poly::variable(n, 0), y = Poly::variable(n, 1), z = Poly::variable(n, 2);
  const Poly s = Poly::param(n, kDecaySymbol);
  const GaussianRational lam{lambda};

  m.coords.push_back(x.scaled(lam) + s * y.pow(3));
  m.coords.push_back(y.scaled(lam) + s * (x + z).pow(3));
  m.coords.push_back(z.scaled(lam) - s * y.pow(3));
  m.validate();
  return m;
}

/// 3-d cubic map coupling pairwise sums, linear part -X:
///   (-x + s*(x+y)^3, -y + s*((x+z)^3 - (x+y)^3), -z - s*(x+y)^3),  s = e^{-t}.
inline ParamPolyMap sum_coupled_cubic_map(double kappa = 1.0) {
  const std::uint32_t n = 3;
  ParamPolyMap m;
  m.dim = n;
  m.bindings.push_back(ParamBinding::exp_decay(kDecaySymbol, "s", kappa));
  m.linear_coefficient = Rational(-1);

  const Poly x = Poly::variable(n, 0), y = Poly::variable(n, 1), z = Poly::variable(n, 2);
  const Poly s = Poly::param(n, kDecaySymbol);

  m.coords.push_back(-x + s * (x + y).pow(3));
  m.coords.push_back(-y + s * ((x + z).pow(3) - (x + y).pow(3)));
  m.coords.push_back(-z - s * (x + y).pow(3));
  m.validate();
  return m;
}

/// Scalar map x - x^3: a polynomial map that is not injective (0, 1, -1 share
/// the image 0). Autonomous, no parameter symbols.
inline ParamPolyMap scalar_cubic_fold_map() {
  ParamPolyMap m;
  m.dim = 1;
  m.linear_coefficient = Rational(1);
  const Poly x = Poly::variable(1, 0);
  m.coords.push_back(x - x.pow(3));
  m.validate();
  return m;
}

}  // namespace nued::polyalg
