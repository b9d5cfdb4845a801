#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "nued/odeint/transition.hpp"
#include "nued/odeint/vector_field.hpp"
#include "nued/polyalg/operations.hpp"
#include "nued/polyalg/poly_map.hpp"

namespace nued::odeint {

/// Evaluate a polynomial matrix at state x, resolving parameters through the
/// owning map's bindings at time t. Entries must be real.
inline Eigen::MatrixXd evaluate_poly_matrix(const polyalg::PolyMatrix& m,
                                            const polyalg::ParamPolyMap& owner, double t,
                                            const Eigen::VectorXd& x) {
  std::vector<std::complex<double>> point(x.size());
  for (int i = 0; i < x.size(); ++i) point[i] = std::complex<double>(x(i), 0.0);
  Eigen::MatrixXd out(m.rows, m.cols);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) {
      const std::complex<double> v =
          m.at(i, j).evaluate(point, [&owner, t](int sym) { return owner.param_value(sym, t); });
      if (std::abs(v.imag()) > 1e-12 * (1.0 + std::abs(v.real())))
        throw std::runtime_error("evaluate_poly_matrix: entry is not real");
      out(i, j) = v.real();
    }
  return out;
}

/// Vector field of a real parametrized polynomial map, x' interpretation:
/// the map's coordinates are read as the right-hand side (the linear
/// coefficient, when declared, is already part of each coordinate).
inline VectorField polynomial_field(const polyalg::ParamPolyMap& map) {
  if (!map.is_real()) throw std::invalid_argument("polynomial_field: map must be real");
  map.validate();
  VectorField f;
  f.dim = map.dim;
  f.rhs = [map](double t, const Eigen::VectorXd& x) {
    std::vector<double> p(x.data(), x.data() + x.size());
    const std::vector<double> v = map.evaluate_real(t, p);
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
  };
  return f;
}

/// Variational system along a reference signal: A(t) = (Jacobian of the map)
/// evaluated at omega(t). Signal breakpoints become forced integrator stops.
inline LinearSystem linearize_along(const polyalg::ParamPolyMap& map, const PiecewiseSignal& omega) {
  if (!map.is_real()) throw std::invalid_argument("linearize_along: map must be real");
  if (omega.dim != static_cast<int>(map.dim))
    throw std::invalid_argument("linearize_along: signal dimension mismatch");
  map.validate();
  const polyalg::PolyMatrix jac = polyalg::jacobian(map);
  LinearSystem sys;
  sys.dim = map.dim;
  sys.label = "linearized";
  sys.mandatory_times = omega.breakpoints;
  sys.coeff = [jac, map, omega](double t) {
    const Eigen::VectorXd x = omega(t);
    return evaluate_poly_matrix(jac, map, t, x);
  };
  return sys;
}

}  // namespace nued::odeint
