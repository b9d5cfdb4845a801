#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nued::dichotomy {

/// One measured transition norm ||Phi(t, s)||, t >= s >= 0.
struct NormSample {
  double t = 0.0;
  double s = 0.0;
  double norm = 0.0;
};

struct NormSampleGrid {
  std::vector<NormSample> entries;
  std::string system_id;
  double horizon = 0.0;
  double s_step = 0.0;
  double tau_step = 0.0;

  void validate() const {
    for (const NormSample& e : entries) {
      if (!(e.norm > 0.0) || !std::isfinite(e.norm))
        throw std::invalid_argument("NormSampleGrid: norms must be positive and finite");
      if (!(e.t >= e.s) || !(e.s >= 0.0))
        throw std::invalid_argument("NormSampleGrid: need t >= s >= 0");
    }
  }
};

struct Projector {
  int rank = -1;
  enum class Kind { identity, zero, declared_splitting } kind = Kind::identity;
};

/// Certificate for ||Phi(t,s)P(s)|| <= K e^{-alpha (t-s) + eps s} on
/// J = [interval_start, infinity). eps in [0, alpha) for a strict certificate.
struct DichotomyCertificate {
  double K = 1.0;
  double alpha = 0.0;
  double eps = 0.0;
  Projector projector;
  double interval_start = 0.0;
  double max_slack = 0.0;  // worst margin over the fitted samples, >= 0
};

struct InfeasibleWitness {
  double t = 0.0;
  double s = 0.0;
  double norm = 0.0;
  double alpha = 0.0;  // probe at which this sample forced unbounded K
  double eps = 0.0;
  std::string note;
};

struct FitOptions {
  double alpha_min = 1e-3;
  double alpha_max = 20.0;
  double eps_min = 0.0;
  double eps_max = 10.0;
  double coarse_eps_step = 0.25;
  double eps_tol = 1e-3;
  double alpha_tol = 1e-4;
  // Strict NUED coupling eps <= alpha - coupling_gap; disable for
  // spectrum-style classification where only some contraction is needed.
  bool couple = true;
  double coupling_gap = 1e-6;
  // Feasibility notion on a finite grid: required log K must not grow by more
  // than stability_tol when the grid is restricted to half its tau and s
  // ranges, and must stay under logK_cap.
  double stability_tol = 0.02;
  double logK_cap = std::log(1e12);
};

struct FitResult {
  bool feasible = false;
  std::optional<DichotomyCertificate> certificate;
  std::optional<InfeasibleWitness> witness;
  std::string detail;
};

}  // namespace nued::dichotomy
