#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nued::odeint {

struct VectorField {
  int dim = 0;
  std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> rhs;
  // Times where the right-hand side may be discontinuous; steps never cross them.
  std::vector<double> mandatory_times;
};

struct IntegratorConfig {
  double rtol = 1e-9;
  double atol = 1e-12;
  double max_step = 1.0;
  double blowup_threshold = 1e8;
  double horizon_cap = 1e4;  // refuse longer windows outright
  std::vector<double> sample_times;  // empty: record every accepted step
  double fixed_step = 0.0;           // > 0: disable adaptivity, use this step
};

struct Trajectory {
  double t0 = 0.0;
  Eigen::VectorXd x0;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;
  std::size_t steps = 0;
  std::size_t rejected = 0;
};

struct SolveOutcome {
  enum class Kind { completed, blowup, step_failure };
  Kind kind = Kind::completed;
  Trajectory trajectory;
  double stop_time = 0.0;  // blowup/step-failure location
  double last_norm = 0.0;
  std::string diagnostics;

  bool completed() const { return kind == Kind::completed; }
};

/// Piecewise-defined bounded signal t -> R^n. Piece i applies on
/// [breakpoints[i-1], breakpoints[i]) with the first piece reaching back to
/// -inf and the last one onward to +inf.
struct PiecewiseSignal {
  int dim = 0;
  std::vector<double> breakpoints;
  std::vector<std::function<Eigen::VectorXd(double)>> pieces;
  std::optional<double> declared_bound;  // sup_t ||omega(t)|| when known

  Eigen::VectorXd operator()(double t) const {
    if (pieces.empty()) throw std::logic_error("PiecewiseSignal: no pieces");
    std::size_t i = 0;
    while (i < breakpoints.size() && t >= breakpoints[i]) ++i;
    return pieces[i](t);
  }

  static PiecewiseSignal zero(int n) {
    PiecewiseSignal s;
    s.dim = n;
    s.pieces = {[n](double) { return Eigen::VectorXd::Zero(n).eval(); }};
    s.declared_bound = 0.0;
    return s;
  }

  static PiecewiseSignal constant(const Eigen::VectorXd& v) {
    PiecewiseSignal s;
    s.dim = static_cast<int>(v.size());
    s.pieces = {[v](double) { return v; }};
    s.declared_bound = v.norm();
    return s;
  }

  static PiecewiseSignal switched(const Eigen::VectorXd& before, const Eigen::VectorXd& after,
                                  double t_switch) {
    if (before.size() != after.size()) throw std::invalid_argument("switched: size mismatch");
    PiecewiseSignal s;
    s.dim = static_cast<int>(before.size());
    s.breakpoints = {t_switch};
    s.pieces = {[before](double) { return before; }, [after](double) { return after; }};
    s.declared_bound = std::max(before.norm(), after.norm());
    return s;
  }

  static PiecewiseSignal sinusoid(const Eigen::VectorXd& amplitude, double freq) {
    PiecewiseSignal s;
    s.dim = static_cast<int>(amplitude.size());
    s.pieces = {[amplitude, freq](double t) {
      Eigen::VectorXd v = amplitude;
      for (int i = 0; i < v.size(); ++i) v(i) *= std::sin(freq * t + 0.5 * i);
      return v;
    }};
    s.declared_bound = amplitude.norm();
    return s;
  }
};

}  // namespace nued::odeint
