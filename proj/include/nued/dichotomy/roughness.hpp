#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "nued/dichotomy/types.hpp"

namespace nued::dichotomy {

struct PreconditionViolated : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Certificate predicted for the perturbed system x' = [A(t) + B(t)]x when the
/// unperturbed system carries `cert` and the perturbation obeys
/// ||B(t)|| <= delta * exp(-eps_pert * t) with delta < alpha / K and
/// eps_pert >= cert.eps. The constant K and nonuniform exponent survive; the
/// decay rate drops to alpha - delta * K.
inline DichotomyCertificate roughness_predict(const DichotomyCertificate& cert, double delta,
                                              double eps_pert) {
  if (!(delta >= 0.0) || !std::isfinite(delta))
    throw PreconditionViolated("roughness_predict: delta must be finite and nonnegative");
  if (!(eps_pert >= cert.eps - 1e-12))
    throw PreconditionViolated(
        "roughness_predict: perturbation decay exponent " + std::to_string(eps_pert) +
        " is weaker than the certificate's nonuniform exponent " + std::to_string(cert.eps));
  if (!(delta < cert.alpha / cert.K))
    throw PreconditionViolated("roughness_predict: delta " + std::to_string(delta) +
                               " >= alpha/K = " + std::to_string(cert.alpha / cert.K));
  DichotomyCertificate out = cert;
  out.alpha = cert.alpha - delta * cert.K;
  out.max_slack = 0.0;  // prediction, not a fit: no sampled margin
  if (!(out.eps < out.alpha))
    throw PreconditionViolated(
        "roughness_predict: perturbed rate alpha - delta*K = " + std::to_string(out.alpha) +
        " does not exceed the nonuniform exponent " + std::to_string(out.eps));
  return out;
}

/// Extend a certificate valid for s >= interval_start = T to all s >= 0,
/// given a bound ||Phi(t,s)|| <= L on the initial patch 0 <= s <= t <= T.
/// The constant inflates to L * K * exp(alpha * T); rates are unchanged.
inline DichotomyCertificate extend_certificate(const DichotomyCertificate& cert, double L) {
  if (!(L >= 1.0) || !std::isfinite(L))
    throw PreconditionViolated("extend_certificate: patch bound L must be finite and >= 1");
  if (!(cert.interval_start >= 0.0))
    throw PreconditionViolated("extend_certificate: certificate interval start must be >= 0");
  DichotomyCertificate out = cert;
  out.K = L * cert.K * std::exp(cert.alpha * cert.interval_start);
  out.interval_start = 0.0;
  out.max_slack = 0.0;
  return out;
}

}  // namespace nued::dichotomy
