#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "nued/odeint/vector_field.hpp"

namespace nued::odeint {

namespace detail {

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                          e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                          e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
};

inline bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace detail

/// Adaptive embedded Runge-Kutta 5(4) with forced stops at sample times,
/// field discontinuities, and the final time. With cfg.fixed_step > 0 the
/// same stepper runs without error control (reference/convergence studies).
inline SolveOutcome integrate(const VectorField& field, double t0, const Eigen::VectorXd& x0,
                              double tf, const IntegratorConfig& cfg = {}) {
  using D = detail::Dopri5;
  if (tf < t0) throw std::invalid_argument("integrate: tf < t0");
  if (tf - t0 > cfg.horizon_cap) throw std::invalid_argument("integrate: window exceeds horizon cap");

  SolveOutcome out;
  Trajectory& traj = out.trajectory;
  traj.t0 = t0;
  traj.x0 = x0;

  const bool record_all = cfg.sample_times.empty();

  // Forced stops: sorted unique list of sample times, discontinuities, tf.
  std::vector<double> stops;
  for (double ts : cfg.sample_times)
    if (ts > t0 && ts <= tf) stops.push_back(ts);
  for (double tm : field.mandatory_times)
    if (tm > t0 && tm < tf) stops.push_back(tm);
  stops.push_back(tf);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-14; }),
              stops.end());

  auto is_sample = [&](double t) {
    if (record_all) return true;
    auto it = std::lower_bound(cfg.sample_times.begin(), cfg.sample_times.end(), t - 1e-12);
    return it != cfg.sample_times.end() && std::abs(*it - t) <= 1e-12 * std::max(1.0, std::abs(t));
  };

  traj.times.push_back(t0);
  traj.states.push_back(x0);

  double t = t0;
  Eigen::VectorXd x = x0;
  std::size_t stop_idx = 0;

  if (x.norm() > cfg.blowup_threshold) {
    out.kind = SolveOutcome::Kind::blowup;
    out.stop_time = t0;
    out.last_norm = x.norm();
    return out;
  }
  if (t0 == tf) return out;

  const bool fixed = cfg.fixed_step > 0.0;
  double h = fixed ? cfg.fixed_step : std::min({cfg.max_step, (tf - t0) / 100.0, stops[0] - t0});
  h = std::max(h, 1e-12);

  Eigen::VectorXd k1 = field.rhs(t, x);
  bool k1_valid = true;

  while (t < tf - 1e-14 * std::max(1.0, std::abs(tf))) {
    const double target = stops[stop_idx];
    double h_try = std::min(h, target - t);
    if (fixed) h_try = std::min(cfg.fixed_step, target - t);
    const bool lands_on_target = (t + h_try >= target - 1e-14 * std::max(1.0, std::abs(target)));
    if (lands_on_target) h_try = target - t;

    if (!k1_valid) {
      k1 = field.rhs(t, x);
      k1_valid = true;
    }
    const Eigen::VectorXd k2 = field.rhs(t + D::c2 * h_try, x + h_try * (D::a21 * k1));
    const Eigen::VectorXd k3 = field.rhs(t + D::c3 * h_try, x + h_try * (D::a31 * k1 + D::a32 * k2));
    const Eigen::VectorXd k4 =
        field.rhs(t + D::c4 * h_try, x + h_try * (D::a41 * k1 + D::a42 * k2 + D::a43 * k3));
    const Eigen::VectorXd k5 = field.rhs(
        t + D::c5 * h_try, x + h_try * (D::a51 * k1 + D::a52 * k2 + D::a53 * k3 + D::a54 * k4));
    const Eigen::VectorXd k6 =
        field.rhs(t + h_try,
                  x + h_try * (D::a61 * k1 + D::a62 * k2 + D::a63 * k3 + D::a64 * k4 + D::a65 * k5));
    const Eigen::VectorXd x_new =
        x + h_try * (D::b1 * k1 + D::b3 * k3 + D::b4 * k4 + D::b5 * k5 + D::b6 * k6);
    const Eigen::VectorXd k7 = field.rhs(t + h_try, x_new);

    const bool stages_ok = detail::finite(x_new) && detail::finite(k7);
    double err = 0.0;
    if (stages_ok && !fixed) {
      const Eigen::VectorXd e = h_try * (D::e1 * k1 + D::e3 * k3 + D::e4 * k4 + D::e5 * k5 +
                                         D::e6 * k6 + D::e7 * k7);
      double acc = 0.0;
      for (int i = 0; i < e.size(); ++i) {
        const double scale =
            cfg.atol + cfg.rtol * std::max(std::abs(x(i)), std::abs(x_new(i)));
        const double q = e(i) / scale;
        acc += q * q;
      }
      err = std::sqrt(acc / static_cast<double>(e.size()));
    }

    if (!stages_ok || (!fixed && err > 1.0)) {
      ++traj.rejected;
      const double shrink = stages_ok ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.25;
      h = h_try * std::min(shrink, 0.9);
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        out.kind = SolveOutcome::Kind::step_failure;
        out.stop_time = t;
        out.last_norm = x.norm();
        out.diagnostics = "step size underflow";
        return out;
      }
      continue;
    }

    // Accept.
    t = lands_on_target ? target : t + h_try;
    x = x_new;
    k1 = k7;  // FSAL
    ++traj.steps;

    if (!fixed) {
      const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h = std::min(cfg.max_step, h_try * std::min(5.0, std::max(0.2, grow)));
    }

    const double norm = x.norm();
    if (norm > cfg.blowup_threshold) {
      out.kind = SolveOutcome::Kind::blowup;
      out.stop_time = t;
      out.last_norm = norm;
      if (record_all || is_sample(t)) {
        traj.times.push_back(t);
        traj.states.push_back(x);
      }
      return out;
    }

    if (lands_on_target) {
      if (is_sample(t)) {
        traj.times.push_back(t);
        traj.states.push_back(x);
      }
      ++stop_idx;
      // Crossing a discontinuity: the stored derivative is stale.
      k1_valid = false;
      if (stop_idx >= stops.size()) break;
    } else if (record_all) {
      traj.times.push_back(t);
      traj.states.push_back(x);
    }
  }

  out.kind = SolveOutcome::Kind::completed;
  out.last_norm = x.norm();
  out.stop_time = t;
  return out;
}

/// Uniform grid helper: count points from a to b inclusive.
inline std::vector<double> uniform_grid(double a, double b, std::size_t count) {
  std::vector<double> g;
  if (count == 0) return g;
  g.reserve(count);
  if (count == 1) {
    g.push_back(a);
    return g;
  }
  for (std::size_t i = 0; i < count; ++i)
    g.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  return g;
}

}  // namespace nued::odeint
