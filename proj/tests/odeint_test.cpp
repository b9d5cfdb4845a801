#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nued/odeint/bernoulli.hpp"
#include "nued/odeint/integrate.hpp"
#include "nued/odeint/linearize.hpp"
#include "nued/odeint/transition.hpp"
#include "nued/polyalg/families.hpp"
#include "nued/rng.hpp"

using namespace nued;
using namespace nued::odeint;

namespace {

// Classical fixed-step RK4, kept test-local as an independent oracle.
Eigen::VectorXd rk4_solve(const VectorField& f, double t0, Eigen::VectorXd x, double tf, double h) {
  double t = t0;
  while (t < tf - 1e-12) {
    const double step = std::min(h, tf - t);
    const Eigen::VectorXd k1 = f.rhs(t, x);
    const Eigen::VectorXd k2 = f.rhs(t + step / 2, x + (step / 2) * k1);
    const Eigen::VectorXd k3 = f.rhs(t + step / 2, x + (step / 2) * k2);
    const Eigen::VectorXd k4 = f.rhs(t + step, x + step * k3);
    x += (step / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
    t += step;
  }
  return x;
}

IntegratorConfig tight_cfg() {
  IntegratorConfig cfg;
  cfg.rtol = 1e-10;
  cfg.atol = 1e-300;  // pure relative control; solutions here never vanish
  return cfg;
}

}  // namespace

TEST_CASE("constant diagonal system matches exponentials through the numeric path") {
  LinearSystem sys = diag_system({-1.0, -2.0});
  LinearSystem numeric = sys;
  numeric.closed_phi.reset();

  const std::vector<double> grid = uniform_grid(0.0, 10.0, 21);
  const auto closed = transition_matrices(sys, 0.0, grid);
  const auto integ = transition_matrices(numeric, 0.0, grid, tight_cfg());
  REQUIRE(closed.size() == grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    REQUIRE(closed[k](0, 0) == Catch::Approx(std::exp(-grid[k])).epsilon(1e-12));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        REQUIRE(integ[k](i, j) == Catch::Approx(closed[k](i, j)).margin(1e-9).epsilon(1e-9));
  }
}

TEST_CASE("oscillating scalar system: numeric transition tracks the closed form on [0,30]") {
  LinearSystem sys = oscillating_system(-3.0, 2.0);
  LinearSystem numeric = sys;
  numeric.closed_phi.reset();

  const std::vector<double> grid = uniform_grid(0.5, 30.0, 60);
  const auto closed = transition_matrices(sys, 0.0, grid);
  const auto integ = transition_matrices(numeric, 0.0, grid, tight_cfg());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double rel = std::abs(integ[k](0, 0) - closed[k](0, 0)) / std::abs(closed[k](0, 0));
    INFO("t = " << grid[k]);
    REQUIRE(rel < 1e-7);
  }
}

TEST_CASE("fixed-step mode converges with order at least four") {
  VectorField f;
  f.dim = 1;
  f.rhs = [](double t, const Eigen::VectorXd& x) {
    Eigen::VectorXd out(1);
    out(0) = -x(0) + std::sin(t);
    return out;
  };
  const auto exact = [](double t) { return 1.5 * std::exp(-t) + 0.5 * (std::sin(t) - std::cos(t)); };
  Eigen::VectorXd x0(1);
  x0 << 1.0;

  auto err_for = [&](double h) {
    IntegratorConfig cfg;
    cfg.fixed_step = h;
    cfg.sample_times = {2.0};
    const SolveOutcome sol = integrate(f, 0.0, x0, 2.0, cfg);
    REQUIRE(sol.completed());
    return std::abs(sol.trajectory.states.back()(0) - exact(2.0));
  };

  const double e1 = err_for(0.1);
  const double e2 = err_for(0.05);
  const double order = std::log2(e1 / e2);
  INFO("errors " << e1 << " " << e2 << " order " << order);
  REQUIRE(order > 4.0);
}

TEST_CASE("adaptive integration agrees with a fixed-step RK4 oracle on the cubic system") {
  const auto map = polyalg::nilpotent_cubic_map();
  const VectorField f = polynomial_field(map);
  Eigen::VectorXd x0(3);
  x0 << 0.8, -1.1, 0.4;

  const Eigen::VectorXd oracle = rk4_solve(f, 0.0, x0, 20.0, 1e-3);

  IntegratorConfig cfg;
  cfg.sample_times = {20.0};
  const SolveOutcome sol = integrate(f, 0.0, x0, 20.0, cfg);
  REQUIRE(sol.completed());
  REQUIRE((sol.trajectory.states.back() - oracle).norm() < 1e-6);
}

TEST_CASE("sample times are hit exactly and recorded in order") {
  VectorField f;
  f.dim = 1;
  f.rhs = [](double, const Eigen::VectorXd& x) { return Eigen::VectorXd(-x); };
  Eigen::VectorXd x0(1);
  x0 << 2.0;
  IntegratorConfig cfg;
  cfg.sample_times = {0.3, 1.0, 2.5};
  const SolveOutcome sol = integrate(f, 0.0, x0, 3.0, cfg);
  REQUIRE(sol.completed());
  REQUIRE(sol.trajectory.times.size() == 4);  // t0 plus three samples
  REQUIRE(sol.trajectory.times[0] == 0.0);
  REQUIRE(sol.trajectory.times[1] == 0.3);
  REQUIRE(sol.trajectory.times[2] == 1.0);
  REQUIRE(sol.trajectory.times[3] == 2.5);
  for (std::size_t k = 1; k < 4; ++k)
    REQUIRE(sol.trajectory.states[k](0) ==
            Catch::Approx(2.0 * std::exp(-sol.trajectory.times[k])).epsilon(1e-9));
}

TEST_CASE("discontinuous coefficient with a declared breakpoint stays accurate") {
  VectorField f;
  f.dim = 1;
  f.mandatory_times = {1.0};
  f.rhs = [](double t, const Eigen::VectorXd& x) {
    Eigen::VectorXd out(1);
    out(0) = (t < 1.0 ? 1.0 : -1.0) * x(0);
    return out;
  };
  Eigen::VectorXd x0(1);
  x0 << 1.0;
  IntegratorConfig cfg = tight_cfg();
  cfg.sample_times = {2.0};
  const SolveOutcome sol = integrate(f, 0.0, x0, 2.0, cfg);
  REQUIRE(sol.completed());
  // e^{+1} over [0,1], e^{-1} over [1,2].
  REQUIRE(sol.trajectory.states.back()(0) == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("cocycle identity for a coupled nonautonomous system") {
  LinearSystem sys;
  sys.dim = 2;
  sys.coeff = [](double t) {
    Eigen::MatrixXd a(2, 2);
    a << -1.0, std::sin(t), 0.3, -2.0;
    return a;
  };
  const Eigen::MatrixXd full = transition_matrix(sys, 0.0, 4.0, tight_cfg());
  const Eigen::MatrixXd first = transition_matrix(sys, 0.0, 1.7, tight_cfg());
  const Eigen::MatrixXd second = transition_matrix(sys, 1.7, 4.0, tight_cfg());
  REQUIRE((second * first - full).norm() < 1e-8);
}

TEST_CASE("transition at the base point is the identity") {
  LinearSystem sys = oscillating_system(-1.0, 0.5);
  sys.closed_phi.reset();
  const auto mats = transition_matrices(sys, 2.0, {2.0, 3.0});
  REQUIRE(mats[0](0, 0) == 1.0);
  REQUIRE(mats[1](0, 0) > 0.0);
}

TEST_CASE("bernoulli closed form: subcritical decay and exact special case") {
  // v' = -v + v^3, v(0) = 1/2  =>  v(t) = (3 e^{2t} + 1)^{-1/2}.
  const BernoulliSolution s = bernoulli_reference(-1.0, 1.0, 0.0, 0.5);
  REQUIRE_FALSE(s.blows_up);
  for (double t : {0.0, 0.5, 1.0, 2.0, 5.0})
    REQUIRE(s(t) == Catch::Approx(1.0 / std::sqrt(3.0 * std::exp(2.0 * t) + 1.0)).epsilon(1e-14));

  const SolveOutcome sol = [&] {
    IntegratorConfig cfg = tight_cfg();
    cfg.sample_times = {1.0, 2.0, 4.0};
    Eigen::VectorXd x0(1);
    x0 << 0.5;
    return integrate(bernoulli_field(-1.0, 1.0), 0.0, x0, 4.0, cfg);
  }();
  REQUIRE(sol.completed());
  for (std::size_t k = 1; k < sol.trajectory.times.size(); ++k)
    REQUIRE(sol.trajectory.states[k](0) ==
            Catch::Approx(s(sol.trajectory.times[k])).epsilon(1e-8));
}

TEST_CASE("bernoulli supercritical data blows up at the predicted time") {
  // v' = -v + v^3, v(0) = 2: blowup at t = ln(4/3) / 2.
  const BernoulliSolution s = bernoulli_reference(-1.0, 1.0, 0.0, 2.0);
  REQUIRE(s.blows_up);
  REQUIRE(s.blowup_time == Catch::Approx(0.5 * std::log(4.0 / 3.0)).epsilon(1e-14));

  Eigen::VectorXd x0(1);
  x0 << 2.0;
  const SolveOutcome sol = integrate(bernoulli_field(-1.0, 1.0), 0.0, x0, 1.0);
  REQUIRE(sol.kind == SolveOutcome::Kind::blowup);
  REQUIRE(sol.last_norm >= 1e8);
  REQUIRE(std::abs(sol.stop_time - s.blowup_time) < 1e-3 * s.blowup_time);
}

TEST_CASE("bernoulli randomized cases: closed form vs integration") {
  Rng rng(7);
  for (int trial = 0; trial < 6; ++trial) {
    const double lambda = -rng.uniform(0.2, 3.0);
    const double c = rng.uniform(0.2, 3.0);
    const double v_crit = std::sqrt(-lambda / c);

    SECTION("subcritical trial " + std::to_string(trial)) {
      const double v0 = rng.uniform(0.05, 0.9) * v_crit;
      const BernoulliSolution s = bernoulli_reference(lambda, c, 0.0, v0);
      REQUIRE_FALSE(s.blows_up);
      IntegratorConfig cfg = tight_cfg();
      cfg.sample_times = {2.0};
      Eigen::VectorXd x0(1);
      x0 << v0;
      const SolveOutcome sol = integrate(bernoulli_field(lambda, c), 0.0, x0, 2.0, cfg);
      REQUIRE(sol.completed());
      REQUIRE(sol.trajectory.states.back()(0) == Catch::Approx(s(2.0)).margin(1e-9).epsilon(1e-7));
    }

    SECTION("supercritical trial " + std::to_string(trial)) {
      const double v0 = rng.uniform(1.1, 3.0) * v_crit;
      const BernoulliSolution s = bernoulli_reference(lambda, c, 0.0, v0);
      REQUIRE(s.blows_up);
      Eigen::VectorXd x0(1);
      x0 << v0;
      const SolveOutcome sol =
          integrate(bernoulli_field(lambda, c), 0.0, x0, s.blowup_time + 1.0);
      REQUIRE(sol.kind == SolveOutcome::Kind::blowup);
      REQUIRE(std::abs(sol.stop_time - s.blowup_time) < 1e-3 * std::max(1.0, s.blowup_time));
    }
  }
}

TEST_CASE("polynomial field evaluation matches the exact map evaluation") {
  const auto map = polyalg::sum_coupled_cubic_map();
  const VectorField f = polynomial_field(map);
  Rng rng(11);
  for (int k = 0; k < 10; ++k) {
    Eigen::VectorXd x(3);
    for (int i = 0; i < 3; ++i) x(i) = rng.uniform(-2.0, 2.0);
    const double t = rng.uniform(0.0, 3.0);
    const Eigen::VectorXd v = f.rhs(t, x);
    const std::vector<double> xs{x(0), x(1), x(2)};
    const std::vector<double> ref = map.evaluate_real(t, xs);
    for (int i = 0; i < 3; ++i) REQUIRE(v(i) == Catch::Approx(ref[i]).margin(1e-15));
  }
}

TEST_CASE("linearization along a constant signal reproduces the hand Jacobian") {
  const auto map = polyalg::nilpotent_cubic_map();
  Eigen::VectorXd omega0(3);
  omega0 << 0.7, -0.3, 1.2;
  const LinearSystem sys = linearize_along(map, PiecewiseSignal::constant(omega0));

  for (double t : {0.0, 0.8, 2.5}) {
    const double s = std::exp(-t);
    const double y2 = 3.0 * s * omega0(1) * omega0(1);
    const double xz2 = 3.0 * s * (omega0(0) + omega0(2)) * (omega0(0) + omega0(2));
    Eigen::MatrixXd expected(3, 3);
    expected << -1.0, y2, 0.0, xz2, -1.0, xz2, 0.0, -y2, -1.0;
    REQUIRE((sys.coeff(t) - expected).norm() < 1e-14);
  }
}

TEST_CASE("linearized transition satisfies the matrix differential equation") {
  const auto map = polyalg::nilpotent_cubic_map();
  Eigen::VectorXd omega0(3);
  omega0 << 0.5, 0.9, -0.2;
  const LinearSystem sys = linearize_along(map, PiecewiseSignal::constant(omega0));

  const double h = 1e-5;
  for (double t : {0.5, 1.5}) {
    const Eigen::MatrixXd plus = transition_matrix(sys, 0.0, t + h, tight_cfg());
    const Eigen::MatrixXd minus = transition_matrix(sys, 0.0, t - h, tight_cfg());
    const Eigen::MatrixXd mid = transition_matrix(sys, 0.0, t, tight_cfg());
    const Eigen::MatrixXd fd = (plus - minus) / (2.0 * h);
    REQUIRE((fd - sys.coeff(t) * mid).norm() < 1e-6);
  }
}

TEST_CASE("piecewise signals: factories, bounds, right continuity") {
  const PiecewiseSignal zero = PiecewiseSignal::zero(3);
  REQUIRE(zero(1.0).norm() == 0.0);
  REQUIRE(zero.declared_bound.value() == 0.0);

  Eigen::VectorXd c(2);
  c << 3.0, -4.0;
  const PiecewiseSignal cst = PiecewiseSignal::constant(c);
  REQUIRE((cst(10.0) - c).norm() == 0.0);
  REQUIRE(*cst.declared_bound == Catch::Approx(5.0));

  Eigen::VectorXd a(1), b(1);
  a << 1.0;
  b << -2.0;
  const PiecewiseSignal sw = PiecewiseSignal::switched(a, b, 1.5);
  REQUIRE(sw(0.0)(0) == 1.0);
  REQUIRE(sw(1.4999)(0) == 1.0);
  REQUIRE(sw(1.5)(0) == -2.0);  // right continuous at the breakpoint
  REQUIRE(sw(9.0)(0) == -2.0);
  REQUIRE(*sw.declared_bound == Catch::Approx(2.0));
  REQUIRE(sw.breakpoints == std::vector<double>{1.5});

  Eigen::VectorXd amp(2);
  amp << 1.5, 1.5;
  const PiecewiseSignal sin2 = PiecewiseSignal::sinusoid(amp, 0.7);
  REQUIRE(sin2(0.3)(0) == Catch::Approx(1.5 * std::sin(0.7 * 0.3)));
  REQUIRE(sin2(0.3)(1) == Catch::Approx(1.5 * std::sin(0.7 * 0.3 + 0.5)));
  REQUIRE(*sin2.declared_bound == Catch::Approx(amp.norm()));
}

TEST_CASE("step failure and guard rails") {
  VectorField bad;
  bad.dim = 1;
  bad.rhs = [](double, const Eigen::VectorXd&) {
    Eigen::VectorXd out(1);
    out(0) = std::numeric_limits<double>::quiet_NaN();
    return out;
  };
  Eigen::VectorXd x0(1);
  x0 << 1.0;
  const SolveOutcome sol = integrate(bad, 0.0, x0, 1.0);
  REQUIRE(sol.kind == SolveOutcome::Kind::step_failure);

  VectorField ok;
  ok.dim = 1;
  ok.rhs = [](double, const Eigen::VectorXd& x) { return Eigen::VectorXd(-x); };
  REQUIRE_THROWS_AS(integrate(ok, 0.0, x0, 2e4), std::invalid_argument);
  REQUIRE_THROWS_AS(integrate(ok, 1.0, x0, 0.0), std::invalid_argument);
}

TEST_CASE("uniform grid endpoints and spacing") {
  const auto g = uniform_grid(1.0, 3.0, 5);
  REQUIRE(g.size() == 5);
  REQUIRE(g.front() == 1.0);
  REQUIRE(g.back() == 3.0);
  REQUIRE(g[2] == Catch::Approx(2.0));
  REQUIRE(uniform_grid(0, 1, 1).size() == 1);
  REQUIRE(uniform_grid(0, 1, 0).empty());
}
