#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nued/dichotomy/fit.hpp"

namespace nued::dichotomy {

/// Norm history of one trajectory started at time t0 from a state of norm
/// x0_norm. times[i] >= t0 and norms[i] = |x(times[i])|.
struct DecaySeries {
  double t0 = 0.0;
  double x0_norm = 0.0;
  std::vector<double> times;
  std::vector<double> norms;
};

struct EnvelopeFit {
  double K = 1.0;
  double alpha = 0.0;
  double eps = 0.0;
  double max_slack = 0.0;  // min over samples of log(envelope) - log(norm), >= 0
};

struct EnvelopeViolation {
  std::size_t trajectory = 0;
  double t = 0.0;
  double norm = 0.0;
  std::string note;
};

struct EnvelopeOutcome {
  bool ok = false;
  std::optional<EnvelopeFit> fit;
  std::optional<EnvelopeViolation> violation;
};

struct EnvelopeOptions {
  // A trajectory with x0_norm below this floor must stay below it; it cannot
  // scale a multiplicative envelope.
  double zero_floor = 1e-12;
  // Decay slower than alpha_min is indistinguishable from non-decay on a
  // finite window; such ensembles are reported as violations.
  FitOptions fit{.alpha_min = 0.01};
};

/// Fit a single envelope |x(t)| <= K * exp(eps*t0) * |x0| * exp(-alpha(t-t0))
/// across an ensemble, with the same lexicographic objective as the linear
/// certificate fit (min eps, max alpha, min K). Returns a violation carrying
/// the obstructing sample when no decaying envelope exists.
inline EnvelopeOutcome fit_gnuas_envelope(const std::vector<DecaySeries>& ensemble,
                                          EnvelopeOptions opts = {}) {
  EnvelopeOutcome out;
  detail::SampleArrays a;
  std::vector<std::pair<std::size_t, std::size_t>> origin;  // (series, sample)

  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    const DecaySeries& sr = ensemble[i];
    if (sr.times.size() != sr.norms.size())
      throw std::invalid_argument("fit_gnuas_envelope: times/norms length mismatch");
    if (!(sr.t0 >= 0.0)) throw std::invalid_argument("fit_gnuas_envelope: t0 must be >= 0");
    if (sr.x0_norm <= opts.zero_floor) {
      for (std::size_t k = 0; k < sr.times.size(); ++k)
        if (sr.norms[k] > opts.zero_floor) {
          out.violation = EnvelopeViolation{
              i, sr.times[k], sr.norms[k],
              "trajectory starts at (numerically) zero norm but leaves the zero floor"};
          return out;
        }
      continue;
    }
    for (std::size_t k = 0; k < sr.times.size(); ++k) {
      if (sr.times[k] < sr.t0 - 1e-12)
        throw std::invalid_argument("fit_gnuas_envelope: sample before t0");
      const double n = std::max(sr.norms[k], 1e-300);
      a.push(std::max(0.0, sr.times[k] - sr.t0), sr.t0, std::log(n / sr.x0_norm));
      origin.emplace_back(i, k);
    }
  }

  if (a.size() == 0) {
    out.ok = true;
    out.fit = EnvelopeFit{1.0, opts.fit.alpha_max, 0.0, 0.0};
    return out;
  }

  const detail::FitCore core = detail::fit_core(a, opts.fit);
  if (!core.feasible) {
    const auto [series, sample] = origin[core.witness_argmax];
    out.violation =
        EnvelopeViolation{series, ensemble[series].times[sample], ensemble[series].norms[sample],
                          "no decaying envelope: required constant keeps growing with the "
                          "observation window at this sample"};
    return out;
  }

  EnvelopeFit fit;
  fit.eps = core.eps;
  fit.alpha = core.alpha;
  fit.K = std::max(1.0, std::exp(core.logK));
  const double logK = std::log(fit.K);
  double slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i)
    slack = std::min(slack, logK + fit.eps * a.sigma[i] - fit.alpha * a.tau[i] - a.logv[i]);
  if (slack < 0.0 && slack > -1e-12) {
    fit.K *= std::exp(-slack + 1e-15);
    slack = 1e-15;
  }
  fit.max_slack = slack;
  out.ok = true;
  out.fit = fit;
  return out;
}

}  // namespace nued::dichotomy
