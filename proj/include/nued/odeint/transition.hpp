#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nued/odeint/integrate.hpp"

namespace nued::odeint {

/// Nonautonomous linear system x' = A(t) x. Closed-form transition data is
/// attached when available; otherwise transition matrices are integrated
/// column-wise from the identity.
struct LinearSystem {
  int dim = 0;
  std::function<Eigen::MatrixXd(double)> coeff;
  /// Phi(t, s) when known in closed form.
  std::optional<std::function<Eigen::MatrixXd(double, double)>> closed_phi;
  /// Declared diagonal structure: component i evolves independently.
  bool diagonal = false;
  std::vector<std::function<double(double)>> diag_coeff;
  std::vector<double> mandatory_times;
  std::string label;

  void validate() const {
    if (dim <= 0) throw std::invalid_argument("LinearSystem: dim must be positive");
    if (!coeff && !closed_phi) throw std::invalid_argument("LinearSystem: no coefficient or closed form");
    if (diagonal && static_cast<int>(diag_coeff.size()) != dim && !closed_phi)
      throw std::invalid_argument("LinearSystem: diagonal system needs per-coordinate coefficients");
  }
};

/// Transition matrices Phi(t, s) for every t in `times` (sorted, all >= s).
/// The matrix ODE is integrated once over the whole span with forced stops
/// at the requested times.
inline std::vector<Eigen::MatrixXd> transition_matrices(const LinearSystem& sys, double s,
                                                        const std::vector<double>& times,
                                                        IntegratorConfig cfg = {}) {
  sys.validate();
  const int n = sys.dim;
  std::vector<Eigen::MatrixXd> result;
  result.reserve(times.size());
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (times[i + 1] < times[i]) throw std::invalid_argument("transition_matrices: times not sorted");
  if (!times.empty() && times.front() < s - 1e-14)
    throw std::invalid_argument("transition_matrices: time before base point");
  if (times.empty()) return result;

  if (sys.closed_phi) {
    for (double t : times) result.push_back((*sys.closed_phi)(t, s));
    return result;
  }

  // Vectorize Phi column-major; Phi' = A(t) Phi, Phi(s, s) = I.
  VectorField field;
  field.dim = n * n;
  field.mandatory_times = sys.mandatory_times;
  field.rhs = [&sys, n](double t, const Eigen::VectorXd& v) {
    const Eigen::MatrixXd phi = Eigen::Map<const Eigen::MatrixXd>(v.data(), n, n);
    const Eigen::MatrixXd dphi = sys.coeff(t) * phi;
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(dphi.data(), n * n));
  };

  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd v0 = Eigen::Map<const Eigen::VectorXd>(id.data(), n * n);

  cfg.sample_times = times;
  // The blowup guard is meant for nonlinear fields; linear transition norms
  // may legitimately grow past it over long windows.
  cfg.blowup_threshold = std::max(cfg.blowup_threshold, 1e250);
  const SolveOutcome sol = integrate(field, s, v0, times.back(), cfg);
  if (!sol.completed())
    throw std::runtime_error("transition_matrices: integration failed (" + sol.diagnostics + ")");

  std::size_t k = 0;
  for (double t : times) {
    if (std::abs(t - s) <= 1e-14 * std::max(1.0, std::abs(s))) {
      result.push_back(id);
      continue;
    }
    while (k < sol.trajectory.times.size() &&
           sol.trajectory.times[k] < t - 1e-10 * std::max(1.0, std::abs(t)))
      ++k;
    if (k >= sol.trajectory.times.size() ||
        std::abs(sol.trajectory.times[k] - t) > 1e-9 * std::max(1.0, std::abs(t)))
      throw std::runtime_error("transition_matrices: requested time not hit by integrator");
    result.push_back(Eigen::Map<const Eigen::MatrixXd>(sol.trajectory.states[k].data(), n, n));
  }
  return result;
}

inline Eigen::MatrixXd transition_matrix(const LinearSystem& sys, double s, double t,
                                         const IntegratorConfig& cfg = {}) {
  return transition_matrices(sys, s, {t}, cfg).front();
}

/// Constant diagonal system x_i' = lambda_i x_i with exact closed form.
inline LinearSystem diag_system(std::vector<double> lambdas) {
  LinearSystem sys;
  sys.dim = static_cast<int>(lambdas.size());
  sys.diagonal = true;
  sys.label = "diag";
  auto lams = std::make_shared<std::vector<double>>(std::move(lambdas));
  sys.coeff = [lams](double) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(lams->size(), lams->size());
    for (std::size_t i = 0; i < lams->size(); ++i) a(i, i) = (*lams)[i];
    return a;
  };
  for (std::size_t i = 0; i < lams->size(); ++i)
    sys.diag_coeff.push_back([lams, i](double) { return (*lams)[i]; });
  sys.closed_phi = [lams](double t, double s) {
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(lams->size(), lams->size());
    for (std::size_t i = 0; i < lams->size(); ++i) phi(i, i) = std::exp((*lams)[i] * (t - s));
    return phi;
  };
  return sys;
}

/// Scalar system x' = (lambda0 + a t sin t) x. Antiderivative of the
/// coefficient: lambda0 t + a (sin t - t cos t), giving an exact transition.
inline LinearSystem oscillating_system(double lambda0, double a) {
  LinearSystem sys;
  sys.dim = 1;
  sys.diagonal = true;
  sys.label = "oscillating";
  sys.coeff = [lambda0, a](double t) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = lambda0 + a * t * std::sin(t);
    return m;
  };
  sys.diag_coeff = {[lambda0, a](double t) { return lambda0 + a * t * std::sin(t); }};
  auto anti = [lambda0, a](double t) { return lambda0 * t + a * (std::sin(t) - t * std::cos(t)); };
  sys.closed_phi = [anti](double t, double s) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = std::exp(anti(t) - anti(s));
    return m;
  };
  return sys;
}

/// General scalar system from a coefficient and its antiderivative.
inline LinearSystem scalar_system(std::function<double(double)> coeff,
                                  std::function<double(double)> antiderivative,
                                  std::string label = "scalar") {
  LinearSystem sys;
  sys.dim = 1;
  sys.diagonal = true;
  sys.label = std::move(label);
  auto c = std::make_shared<std::function<double(double)>>(std::move(coeff));
  auto f = std::make_shared<std::function<double(double)>>(std::move(antiderivative));
  sys.coeff = [c](double t) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = (*c)(t);
    return m;
  };
  sys.diag_coeff = {[c](double t) { return (*c)(t); }};
  sys.closed_phi = [f](double t, double s) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = std::exp((*f)(t) - (*f)(s));
    return m;
  };
  return sys;
}

}  // namespace nued::odeint
