#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nued/dichotomy/envelope.hpp"
#include "nued/injectivity/decide.hpp"
#include "nued/injectivity/family.hpp"
#include "nued/odeint/integrate.hpp"
#include "nued/odeint/linearize.hpp"
#include "nued/polyalg/operations.hpp"
#include "nued/polyalg/poly_map.hpp"

namespace nued::mycheck {

struct IcGrid {
  std::vector<Eigen::VectorXd> states;
  std::vector<double> t0s;

  /// Product grid: one state per tuple of per-coordinate values.
  static IcGrid cube(const std::vector<double>& values, std::uint32_t dim,
                     std::vector<double> start_times) {
    if (values.empty() || start_times.empty())
      throw std::invalid_argument("IcGrid::cube: values and start times must be nonempty");
    IcGrid g;
    g.t0s = std::move(start_times);
    std::size_t total = 1;
    for (std::uint32_t j = 0; j < dim; ++j) total *= values.size();
    for (std::size_t k = 0; k < total; ++k) {
      Eigen::VectorXd x(dim);
      std::size_t rem = k;
      for (std::uint32_t j = 0; j < dim; ++j) {
        x(j) = values[rem % values.size()];
        rem /= values.size();
      }
      g.states.push_back(std::move(x));
    }
    return g;
  }
};

struct GnuasConfig {
  double horizon_offset = 40.0;   // each trajectory runs on [t0, t0 + offset]
  double decay_threshold = 1e-6;  // required final norm
  double sample_step = 0.25;
  double sum_identity_tol = 1e-8;  // relative to max(1, |x0_i + x0_j|)
  odeint::IntegratorConfig integrator;
  dichotomy::EnvelopeOptions envelope;
};

struct TrajectorySummary {
  double t0 = 0.0;
  Eigen::VectorXd x0;
  bool completed = false;
  bool decayed = false;
  double final_norm = 0.0;
  // Max over samples and annihilating pairs of the scaled identity error; 0
  // when the map has no such pairs.
  double max_sum_identity_error = 0.0;
  std::string note;
};

struct GnuasReport {
  std::vector<TrajectorySummary> trajectories;
  std::size_t blowups = 0;
  bool all_decayed = false;
  // Coordinate pairs (i, j) whose cubic parts cancel exactly, so that
  // x_i(t) + x_j(t) = e^{lambda (t - t0)} (x0_i + x0_j) along every solution.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> sum_pairs;
  bool sum_identity_ok = true;
  dichotomy::EnvelopeOutcome envelope;
  bool envelope_dominates = false;
  std::string summary;
};

/// Coordinate pairs (i < j) with H_i + H_j = 0 exactly.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> annihilating_pairs(
    const polyalg::ParamPolyMap& map) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  if (!map.linear_coefficient) return pairs;
  const std::vector<polyalg::Poly> h = map.nonlinear_part();
  for (std::uint32_t i = 0; i < map.dim; ++i)
    for (std::uint32_t j = i + 1; j < map.dim; ++j)
      if ((h[i] + h[j]).is_zero()) pairs.emplace_back(i, j);
  return pairs;
}

/// Integrate the ensemble, require decay below the threshold by the horizon,
/// fit one decay envelope across all trajectories, and check the exact
/// linear-combination identities the map's structure provides. Blowups are
/// reported, not asserted.
inline GnuasReport verify_gnuas(const polyalg::ParamPolyMap& map, const IcGrid& grid,
                                GnuasConfig cfg = {}) {
  map.validate();
  if (!map.is_real()) throw std::invalid_argument("verify_gnuas: map must be real");
  if (grid.states.empty() || grid.t0s.empty())
    throw std::invalid_argument("verify_gnuas: empty initial-condition grid");
  for (const auto& x0 : grid.states)
    if (x0.size() != static_cast<int>(map.dim))
      throw std::invalid_argument("verify_gnuas: initial condition dimension mismatch");

  GnuasReport report;
  report.sum_pairs = annihilating_pairs(map);
  const double lambda =
      map.linear_coefficient ? map.linear_coefficient->get_d() : 0.0;

  const odeint::VectorField field = odeint::polynomial_field(map);
  std::vector<dichotomy::DecaySeries> ensemble;

  for (double t0 : grid.t0s) {
    std::vector<double> samples;
    for (double t = t0; t <= t0 + cfg.horizon_offset + 1e-12; t += cfg.sample_step)
      samples.push_back(t);
    for (const Eigen::VectorXd& x0 : grid.states) {
      TrajectorySummary ts;
      ts.t0 = t0;
      ts.x0 = x0;

      odeint::IntegratorConfig icfg = cfg.integrator;
      icfg.sample_times = samples;
      const odeint::SolveOutcome out =
          odeint::integrate(field, t0, x0, t0 + cfg.horizon_offset, icfg);
      ts.completed = out.completed();
      if (!ts.completed) {
        ++report.blowups;
        std::ostringstream os;
        os << "stopped at t = " << out.stop_time << ": " << out.diagnostics;
        ts.note = os.str();
        report.trajectories.push_back(std::move(ts));
        continue;
      }

      dichotomy::DecaySeries series;
      series.t0 = t0;
      series.x0_norm = x0.norm();
      series.times.push_back(t0);
      series.norms.push_back(x0.norm());
      for (std::size_t k = 0; k < out.trajectory.times.size(); ++k) {
        const double t = out.trajectory.times[k];
        if (t <= t0) continue;
        series.times.push_back(t);
        series.norms.push_back(out.trajectory.states[k].norm());

        for (const auto& [i, j] : report.sum_pairs) {
          const double expected = std::exp(lambda * (t - t0)) * (x0(i) + x0(j));
          const double actual = out.trajectory.states[k](i) + out.trajectory.states[k](j);
          const double scale = std::max(1.0, std::abs(x0(i) + x0(j)));
          ts.max_sum_identity_error =
              std::max(ts.max_sum_identity_error, std::abs(actual - expected) / scale);
        }
      }
      ts.final_norm = series.norms.back();
      ts.decayed = ts.final_norm < cfg.decay_threshold;
      if (ts.max_sum_identity_error > cfg.sum_identity_tol) report.sum_identity_ok = false;
      ensemble.push_back(std::move(series));
      report.trajectories.push_back(std::move(ts));
    }
  }

  report.all_decayed = report.blowups == 0;
  for (const auto& ts : report.trajectories)
    if (ts.completed && !ts.decayed) report.all_decayed = false;

  if (!ensemble.empty()) report.envelope = dichotomy::fit_gnuas_envelope(ensemble, cfg.envelope);

  if (report.envelope.ok && report.envelope.fit) {
    const dichotomy::EnvelopeFit& fit = *report.envelope.fit;
    report.envelope_dominates = true;
    for (const auto& series : ensemble) {
      if (series.x0_norm <= cfg.envelope.zero_floor) {
        for (double n : series.norms)
          if (n > cfg.envelope.zero_floor) report.envelope_dominates = false;
        continue;
      }
      const double base = std::log(fit.K) + fit.eps * series.t0 + std::log(series.x0_norm);
      for (std::size_t k = 0; k < series.times.size(); ++k) {
        const double bound = base - fit.alpha * (series.times[k] - series.t0);
        const double value =
            series.norms[k] <= cfg.envelope.zero_floor ? -1e300 : std::log(series.norms[k]);
        if (value > bound + 1e-9) report.envelope_dominates = false;
      }
    }
  }

  std::ostringstream os;
  os << report.trajectories.size() << " trajectories, " << report.blowups << " blowup(s); "
     << (report.all_decayed ? "all decayed below " : "NOT all decayed below ")
     << cfg.decay_threshold << " by t0 + " << cfg.horizon_offset << "; envelope "
     << (report.envelope.ok ? "fitted" : "violation");
  if (report.envelope.ok && report.envelope.fit)
    os << " (K = " << report.envelope.fit->K << ", alpha = " << report.envelope.fit->alpha
       << ", eps = " << report.envelope.fit->eps << ")";
  if (!report.sum_pairs.empty())
    os << "; exact linear-combination identity "
       << (report.sum_identity_ok ? "verified" : "VIOLATED") << " on " << report.sum_pairs.size()
       << " coordinate pair(s)";
  report.summary = os.str();
  return report;
}

struct ConstantSolutionConfig {
  double window = 20.0;  // the shifted system is integrated on [0, window]
  double step = 0.25;
  double tol = 1e-6;              // allowed drift from the constant value
  double premise_rel_tol = 1e-10;  // image-collision tolerance for the premise
  std::size_t premise_probes = 9;
  odeint::IntegratorConfig integrator;
};

struct ConstantSolutionReport {
  bool premise_ok = false;     // the two points share images on the probe set
  bool premise_exact = false;  // premise decided by exact arithmetic
  bool shifted_origin_exact = false;  // G(t, 0) = 0 as exact polynomials
  bool constant_ok = false;           // trajectory stays within tol of z0
  bool gnuas_violated = false;        // a nonzero non-decaying solution exists
  double max_drift = 0.0;
  std::vector<double> z0;
  std::string note;
};

/// Exercise the constant-solution mechanic: given two points with equal
/// images across the probe window, conjugate the family by the shift taking x
/// to the origin and verify that z0 = y - x is (numerically) a constant
/// solution of the shifted system — a solution that cannot converge to zero.
inline ConstantSolutionReport constant_solution_check(const injectivity::ParamFamily& fam,
                                                      const std::vector<double>& x,
                                                      const std::vector<double>& y,
                                                      ConstantSolutionConfig cfg = {}) {
  fam.validate();
  if (x.size() != fam.dimension || y.size() != fam.dimension)
    throw std::invalid_argument("constant_solution_check: point dimension mismatch");
  if (x == y) throw std::invalid_argument("constant_solution_check: x and y must differ");
  if (!(cfg.window > 0.0) || !(cfg.step > 0.0) || cfg.premise_probes < 2)
    throw std::invalid_argument("constant_solution_check: invalid configuration");

  ConstantSolutionReport report;
  report.z0.resize(fam.dimension);
  for (std::uint32_t j = 0; j < fam.dimension; ++j) report.z0[j] = y[j] - x[j];

  // Premise: F_t(x) = F_t(y) — exact when the polynomial route applies,
  // otherwise probed on an evenly spaced window grid.
  bool exact_route = false;
  if (fam.exact_map) {
    std::vector<polyalg::Rational> xr, yr;
    for (double v : x) xr.emplace_back(v);
    for (double v : y) yr.emplace_back(v);
    const auto fate = injectivity::detail::resolve_pair_exact(*fam.exact_map, xr, yr);
    if (fate.exact) {
      exact_route = true;
      report.premise_exact = true;
      report.premise_ok = fate.collides_for_all_t;
      if (!report.premise_ok) report.note = "premise_failure: images separate for positive t";
    }
  }
  if (!exact_route) {
    report.premise_ok = true;
    for (std::size_t k = 0; k < cfg.premise_probes && report.premise_ok; ++k) {
      const double t =
          cfg.window * static_cast<double>(k) / static_cast<double>(cfg.premise_probes - 1);
      double residual = 0.0;
      if (!injectivity::detail::float_collides(fam, t, x, y, cfg.premise_rel_tol, &residual)) {
        report.premise_ok = false;
        std::ostringstream os;
        os << "premise_failure: images differ at t = " << t << " (residual " << residual << ")";
        report.note = os.str();
      }
    }
  }
  if (!report.premise_ok) return report;

  // Shifted system.
  odeint::VectorField field;
  field.dim = static_cast<int>(fam.dimension);
  if (fam.exact_map) {
    std::vector<polyalg::GaussianRational> xg, yg;
    for (double v : x) xg.emplace_back(polyalg::Rational(v));
    for (double v : y) yg.emplace_back(polyalg::Rational(v));
    const polyalg::ShiftConjugateResult shifted = polyalg::shift_conjugate(*fam.exact_map, xg, yg);
    shifted.map.validate();
    report.shifted_origin_exact = true;
    const std::vector<polyalg::GaussianRational> zero(fam.dimension);
    for (const polyalg::Poly& p : shifted.map.evaluate_exact(zero))
      if (!p.is_zero()) report.shifted_origin_exact = false;
    field = odeint::polynomial_field(shifted.map);
  } else {
    const auto eval = fam.evaluator;
    const std::vector<double> base = x;
    field.rhs = [eval, base](double t, const Eigen::VectorXd& z) {
      std::vector<double> shifted_point(base.size());
      for (std::size_t j = 0; j < base.size(); ++j) shifted_point[j] = z(j) + base[j];
      const std::vector<double> fz = eval(t, shifted_point);
      const std::vector<double> fx = eval(t, base);
      Eigen::VectorXd out(static_cast<int>(base.size()));
      for (std::size_t j = 0; j < base.size(); ++j) out(j) = fz[j] - fx[j];
      return out;
    };
    report.note = "shifted system built numerically from the family evaluator";
  }

  Eigen::VectorXd z0(fam.dimension);
  for (std::uint32_t j = 0; j < fam.dimension; ++j) z0(j) = report.z0[j];

  odeint::IntegratorConfig icfg = cfg.integrator;
  icfg.sample_times.clear();
  for (double t = cfg.step; t <= cfg.window + 1e-12; t += cfg.step)
    icfg.sample_times.push_back(t);
  const odeint::SolveOutcome out = odeint::integrate(field, 0.0, z0, cfg.window, icfg);
  if (!out.completed()) {
    std::ostringstream os;
    os << "integration stopped at t = " << out.stop_time << ": " << out.diagnostics;
    report.note = os.str();
    return report;
  }
  for (const Eigen::VectorXd& z : out.trajectory.states)
    report.max_drift = std::max(report.max_drift, (z - z0).norm());
  report.constant_ok = report.max_drift <= cfg.tol;
  report.gnuas_violated = report.constant_ok && z0.norm() > 0.0;
  return report;
}

}  // namespace nued::mycheck
