#pragma once

#include <cmath>
#include <stdexcept>

#include "nued/odeint/vector_field.hpp"

namespace nued::odeint {

/// Closed-form solution of v' = lambda v + c v^3 through (t0, v0), obtained
/// from the linear equation for w = v^{-2}:
///   w' = -2 lambda w - 2c,  w(t) = (w0 - w_inf) e^{-2 lambda (t - t0)} + w_inf,
/// with w_inf = -c / lambda. The solution exists while w(t) > 0 and blows up
/// at the first root of w when one lies ahead of t0.
struct BernoulliSolution {
  double lambda = 0.0;
  double c = 0.0;
  double t0 = 0.0;
  double v0 = 0.0;
  bool blows_up = false;
  double blowup_time = 0.0;

  double w_at(double t) const {
    if (v0 == 0.0) return std::numeric_limits<double>::infinity();
    const double w_inf = -c / lambda;
    const double w0 = 1.0 / (v0 * v0);
    return (w0 - w_inf) * std::exp(-2.0 * lambda * (t - t0)) + w_inf;
  }

  double operator()(double t) const {
    if (v0 == 0.0) return 0.0;
    if (blows_up && t >= blowup_time)
      throw std::domain_error("BernoulliSolution: evaluated at or past blowup time");
    const double w = w_at(t);
    if (w <= 0.0) throw std::domain_error("BernoulliSolution: outside domain of existence");
    return (v0 > 0.0 ? 1.0 : -1.0) / std::sqrt(w);
  }
};

inline BernoulliSolution bernoulli_reference(double lambda, double c, double t0, double v0) {
  if (lambda == 0.0 || c == 0.0)
    throw std::invalid_argument("bernoulli_reference: lambda and c must be nonzero");
  BernoulliSolution s;
  s.lambda = lambda;
  s.c = c;
  s.t0 = t0;
  s.v0 = v0;
  if (v0 != 0.0) {
    const double w_inf = -c / lambda;
    const double w0 = 1.0 / (v0 * v0);
    // w(t) = 0  <=>  e^{-2 lambda (t - t0)} = w_inf / (w_inf - w0).
    const double ratio = w_inf / (w_inf - w0);
    if (w_inf != w0 && ratio > 0.0) {
      const double tau = std::log(ratio) / (-2.0 * lambda);
      if (tau > 0.0) {
        s.blows_up = true;
        s.blowup_time = t0 + tau;
      }
    }
  }
  return s;
}

inline VectorField bernoulli_field(double lambda, double c) {
  VectorField f;
  f.dim = 1;
  f.rhs = [lambda, c](double, const Eigen::VectorXd& x) {
    Eigen::VectorXd out(1);
    out(0) = lambda * x(0) + c * x(0) * x(0) * x(0);
    return out;
  };
  return f;
}

}  // namespace nued::odeint
