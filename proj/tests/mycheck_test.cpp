#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "nued/injectivity/builtins.hpp"
#include "nued/mycheck/gnuas.hpp"
#include "nued/mycheck/hypotheses.hpp"
#include "nued/mycheck/reproduce.hpp"
#include "nued/polyalg/families.hpp"

using Catch::Approx;
using namespace nued;
using namespace nued::mycheck;

namespace {

Eigen::VectorXd unit_y3() {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(3);
  v(1) = 1.0;
  return v;
}

/// Closed-form threshold for the cross-cubic map with decay rate 1:
/// first T with sqrt(18) * L * e^{-T} <= delta * e^{-eps T}.
double cross_cubic_threshold(double L, double delta, double eps) {
  return std::max(0.0, std::log(std::sqrt(18.0) * L / delta) / (1.0 - eps));
}

/// (-x + s*y^2, -y, -z): the first coordinate's remainder is quadratic, so no
/// cubic-power bound exists.
polyalg::ParamPolyMap quadratic_remainder_map() {
  using polyalg::Poly;
  polyalg::ParamPolyMap m;
  m.dim = 3;
  m.bindings.push_back(polyalg::ParamBinding::exp_decay(polyalg::kDecaySymbol, "s", 1.0));
  m.linear_coefficient = polyalg::Rational(-1);
  const Poly x = Poly::variable(3, 0), y = Poly::variable(3, 1), z = Poly::variable(3, 2);
  const Poly s = Poly::param(3, polyalg::kDecaySymbol);
  m.coords = {-x + s * (y * y), -y, -z};
  m.validate();
  return m;
}

/// (-x + s*x^3, -y + s*y^3, -z + s*z^3): cubic-homogeneous, but the Jacobian
/// of the cubic part is diagonal and not nilpotent.
polyalg::ParamPolyMap diagonal_cubic_map() {
  using polyalg::Poly;
  polyalg::ParamPolyMap m;
  m.dim = 3;
  m.bindings.push_back(polyalg::ParamBinding::exp_decay(polyalg::kDecaySymbol, "s", 1.0));
  m.linear_coefficient = polyalg::Rational(-1);
  const Poly x = Poly::variable(3, 0), y = Poly::variable(3, 1), z = Poly::variable(3, 2);
  const Poly s = Poly::param(3, polyalg::kDecaySymbol);
  m.coords = {-x + s * x.pow(3), -y + s * y.pow(3), -z + s * z.pow(3)};
  m.validate();
  return m;
}

/// Scalar x + s*x^3 with positive linear coefficient: solutions from large
/// initial conditions blow up, and no decay certificate budget exists.
polyalg::ParamPolyMap supercritical_scalar_map() {
  using polyalg::Poly;
  polyalg::ParamPolyMap m;
  m.dim = 1;
  m.bindings.push_back(polyalg::ParamBinding::exp_decay(polyalg::kDecaySymbol, "s", 1.0));
  m.linear_coefficient = polyalg::Rational(1);
  const Poly x = Poly::variable(1, 0);
  const Poly s = Poly::param(1, polyalg::kDecaySymbol);
  m.coords = {x + s * x.pow(3)};
  m.validate();
  return m;
}

/// Scalar x + x^3 without any parameter: autonomous supercritical growth.
polyalg::ParamPolyMap autonomous_blowup_map() {
  using polyalg::Poly;
  polyalg::ParamPolyMap m;
  m.dim = 1;
  m.linear_coefficient = polyalg::Rational(1);
  const Poly x = Poly::variable(1, 0);
  m.coords = {x + x.pow(3)};
  m.validate();
  return m;
}

std::vector<odeint::PiecewiseSignal> small_suite(int dim) {
  std::vector<odeint::PiecewiseSignal> suite;
  suite.push_back(odeint::PiecewiseSignal::zero(dim));
  suite.push_back(odeint::PiecewiseSignal::constant(
      Eigen::VectorXd::Ones(dim) / std::sqrt(static_cast<double>(dim))));
  return suite;
}

}  // namespace

TEST_CASE("decay threshold: closed form matches the analytic value") {
  const auto map = polyalg::nilpotent_cubic_map(polyalg::Rational(-1));
  const auto omega = odeint::PiecewiseSignal::constant(unit_y3());

  const ConditionIvCertificate cert = condition_iv_threshold(map, omega, 0.5, 0.0);
  CHECK(cert.method == "closed_form");
  CHECK(cert.valid);
  CHECK(cert.L_omega == Approx(1.0).margin(1e-15));
  // Independent form of the same threshold: -(1/2) * ln(delta^2 / (18 L^2)).
  const double expected = -0.5 * std::log(0.25 / 18.0);
  CHECK(expected == Approx(2.1383330595080276).margin(1e-14));
  CHECK(cert.T_omega == Approx(expected).margin(1e-9));
  CHECK(cert.max_violation <= 1e-9 * cert.delta);
  CHECK(cert.eps == 0.0);
  CHECK(cert.delta == 0.5);

  // The norm touches the bound at T and stays below it afterwards.
  CHECK(std::sqrt(18.0) * std::exp(-cert.T_omega) == Approx(0.5).epsilon(1e-12));
}

TEST_CASE("decay threshold: zero signal needs no waiting time") {
  const auto map = polyalg::nilpotent_cubic_map(polyalg::Rational(-1));
  const ConditionIvCertificate cert =
      condition_iv_threshold(map, odeint::PiecewiseSignal::zero(3), 0.5, 0.0);
  CHECK(cert.method == "closed_form");
  CHECK(cert.T_omega == 0.0);
  CHECK(cert.L_omega == 0.0);
  CHECK(cert.valid);
}

TEST_CASE("decay threshold: monotone in the budget") {
  const auto map = polyalg::nilpotent_cubic_map(polyalg::Rational(-1));
  const auto omega = odeint::PiecewiseSignal::constant(unit_y3());
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 19; ++k) {
    const double delta = 0.05 * k;
    const ConditionIvCertificate cert = condition_iv_threshold(map, omega, delta, 0.0);
    CHECK(cert.valid);
    CHECK(cert.T_omega == Approx(cross_cubic_threshold(1.0, delta, 0.0)).margin(1e-9));
    CHECK(cert.T_omega <= prev + 1e-12);
    prev = cert.T_omega;
  }
}

TEST_CASE("decay threshold: nonzero decay exponent in the bound") {
  const auto map = polyalg::nilpotent_cubic_map(polyalg::Rational(-1));
  const auto omega = odeint::PiecewiseSignal::constant(unit_y3());

  ConditionIvCertificate cert = condition_iv_threshold(map, omega, 0.5, 0.5);
  CHECK(cert.method == "closed_form");
  CHECK(cert.valid);
  CHECK(cert.T_omega == Approx(cross_cubic_threshold(1.0, 0.5, 0.5)).margin(1e-9));
  CHECK(cert.T_omega == Approx(2.0 * 2.1383330595080276).margin(1e-9));

  // An exponent close to the decay rate stretches the threshold tenfold.
  cert = condition_iv_threshold(map, omega, 0.5, 0.9);
  CHECK(cert.valid);
  CHECK(cert.T_omega == Approx(10.0 * 2.1383330595080276).margin(1e-7));
}

TEST_CASE("decay threshold: switched signal uses the worst plateau") {
  const auto map = polyalg::nilpotent_cubic_map(polyalg::Rational(-1));
  Eigen::VectorXd lo = unit_y3(), hi = 2.0 * unit_y3();
  const auto omega = odeint::PiecewiseSignal::switched(lo, hi, 3.0);
  const ConditionIvCertificate cert = condition_iv_threshold(map, omega, 0.5, 0.0);
  CHECK(cert.method == "closed_form");
  CHECK(cert.valid);
  CHECK(cert.L_omega == Approx(4.0).margin(1e-12));
  CHECK(cert.T_omega == Approx(cross_cubic_threshold(4.0, 0.5, 0.0)).margin(1e-9));
  CHECK(cert.T_omega > 3.0);  // the threshold lands after the switch
}

TEST_CASE("decay threshold: scan path against a hand-computed norm") {
  // The sum-coupled map is not of the cross-cubic shape, so the threshold is
  // found by scanning. Along the constant signal (0,1,0) the cubic part's
  // Jacobian is 3 e^{-t} [[1,1,0],[-1,-1,0],[-1,-1,0]] with norm 3*sqrt(6)*e^{-t}.
  const auto map = polyalg::sum_coupled_cubic_map();
  const auto omega = odeint::PiecewiseSignal::constant(unit_y3());
  const ConditionIvCertificate cert = condition_iv_threshold(map, omega, 0.5, 0.0);
  const double t_exact = std::log(3.0 * std::sqrt(6.0) / 0.5);
  CHECK(cert.method == "scan");
  CHECK(cert.valid);
  CHECK(cert.T_omega >= t_exact - 1e-9);
  CHECK(cert.T_omega <= t_exact + 0.05 + 1e-9);  // one scan step of resolution
}

TEST_CASE("decay threshold: scan with exponent at the decay rate") {
  const auto map = polyalg::nilpotent_cubic_map(polyalg::Rational(-1));
  // eps equal to the decay rate: the ratio norm/bound is constant and above
  // one, so no threshold exists within any horizon.
  CHECK_THROWS_AS(
      condition_iv_threshold(map, odeint::PiecewiseSignal::constant(unit_y3()), 0.5, 1.0),
      std::runtime_error);
  // The zero signal satisfies any bound from the start, even on the scan path.
  const ConditionIvCertificate cert =
      condition_iv_threshold(map, odeint::PiecewiseSignal::zero(3), 0.5, 1.0);
  CHECK(cert.method == "scan");
  CHECK(cert.T_omega == 0.0);
  CHECK(cert.valid);
}

TEST_CASE("decay threshold: rejects invalid arguments") {
  const auto map = polyalg::nilpotent_cubic_map(polyalg::Rational(-1));
  const auto omega = odeint::PiecewiseSignal::constant(unit_y3());

  CHECK_THROWS_AS(condition_iv_threshold(map, omega, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(condition_iv_threshold(map, omega, 1.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(condition_iv_threshold(map, omega, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(condition_iv_threshold(map, omega, -0.2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(condition_iv_threshold(map, omega, 0.5, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(condition_iv_threshold(map, odeint::PiecewiseSignal::zero(2), 0.5, 0.0),
                  std::invalid_argument);

  // Positive linear coefficient: no budget 0 < delta < -lambda exists.
  CHECK_THROWS_AS(condition_iv_threshold(polyalg::scalar_cubic_fold_map(),
                                         odeint::PiecewiseSignal::zero(1), 0.5, 0.0),
                  std::invalid_argument);

  // A map without a declared linear coefficient is rejected.
  polyalg::ParamPolyMap cubic_only;
  cubic_only.dim = 1;
  cubic_only.coords = {polyalg::Poly::variable(1, 0).pow(3)};
  cubic_only.validate();
  CHECK_THROWS_AS(
      condition_iv_threshold(cubic_only, odeint::PiecewiseSignal::zero(1), 0.5, 0.0),
      std::invalid_argument);

  // A horizon shorter than the threshold is an error on both paths.
  IvOptions iv;
  iv.horizon = 1.0;
  CHECK_THROWS_AS(condition_iv_threshold(map, omega, 0.5, 0.0, iv), std::runtime_error);
  CHECK_THROWS_AS(
      condition_iv_threshold(polyalg::sum_coupled_cubic_map(), omega, 0.5, 0.0, iv),
      std::runtime_error);
}

TEST_CASE("default signal suite covers the documented shapes") {
  const auto suite = default_omega_suite(3);
  REQUIRE(suite.size() == 5);
  for (const auto& w : suite) CHECK(w.dim == 3);
  CHECK(suite[0](1.0).norm() == 0.0);
  CHECK(suite[1](1.0).norm() == Approx(1.0));
  CHECK(suite[2](1.0).norm() == Approx(5.0));
  REQUIRE(suite[3].breakpoints.size() == 1);
  CHECK(suite[3].breakpoints[0] == Approx(5.5));
}

TEST_CASE("hypothesis battery passes on the cross-cubic map") {
  const auto map = polyalg::nilpotent_cubic_map(polyalg::Rational(-1));
  HypothesisConfig cfg;
  cfg.grid = dichotomy::GridSpec{20.0, 1.0, 0.5};
  cfg.iv.horizon = 30.0;
  const HypothesisReport report = check_hypotheses(map, default_omega_suite(3), cfg);

  REQUIRE(report.entries.size() == 7);
  const std::vector<std::string> order{"G1",     "G2",      "G3star",  "cond_i",
                                       "cond_ii", "cond_iii", "cond_iv"};
  for (std::size_t i = 0; i < order.size(); ++i) CHECK(report.entries[i].id == order[i]);

  CHECK(report.hypotheses_hold);
  REQUIRE(report.find("G1") != nullptr);
  CHECK(report.find("G1")->status == CheckStatus::evidence_only);
  CHECK(report.find("G1")->details.find("comparison-guaranteed") != std::string::npos);
  for (const char* id : {"G2", "G3star", "cond_i", "cond_ii", "cond_iii", "cond_iv"}) {
    REQUIRE(report.find(id) != nullptr);
    CHECK(report.find(id)->status == CheckStatus::pass);
  }
  CHECK(report.find("cond_ii")->details.find("index 3") != std::string::npos);

  REQUIRE(report.iv_certificates.size() == 5);
  for (const auto& c : report.iv_certificates) CHECK(c.valid);
  CHECK(report.iv_certificates[0].T_omega == 0.0);  // zero signal
  CHECK(report.iv_certificates[1].method == "closed_form");
  CHECK(!report.summary.empty());
}

TEST_CASE("hypothesis battery flags a non-cubic coordinate") {
  HypothesisConfig cfg;
  cfg.grid = dichotomy::GridSpec{10.0, 1.0, 0.5};
  cfg.iv.horizon = 20.0;
  const HypothesisReport report =
      check_hypotheses(quadratic_remainder_map(), small_suite(3), cfg);

  CHECK_FALSE(report.hypotheses_hold);
  CHECK(report.find("cond_ii")->status == CheckStatus::fail);
  CHECK(report.find("cond_ii")->details.find("coordinate 0") != std::string::npos);
  CHECK(report.find("cond_iii")->status == CheckStatus::fail);
  CHECK(report.find("cond_iii")->details.find("cubic") != std::string::npos);
  CHECK(report.find("G2")->status == CheckStatus::pass);
  CHECK(report.find("G1")->status == CheckStatus::evidence_only);
}

TEST_CASE("hypothesis battery flags a non-nilpotent cubic part") {
  HypothesisConfig cfg;
  cfg.grid = dichotomy::GridSpec{10.0, 1.0, 0.5};
  cfg.iv.horizon = 20.0;
  cfg.ic_values = {-0.5, 0.0, 0.5};  // keep the existence probe inside the basin
  const HypothesisReport report = check_hypotheses(diagonal_cubic_map(), small_suite(3), cfg);

  CHECK_FALSE(report.hypotheses_hold);
  CHECK(report.find("cond_ii")->status == CheckStatus::fail);
  CHECK(report.find("cond_ii")->details.find("nilpotent") != std::string::npos);
  CHECK(report.find("cond_iii")->status == CheckStatus::pass);  // the cubic bound still exists
  CHECK(report.find("G1")->status == CheckStatus::evidence_only);
}

TEST_CASE("hypothesis battery fails wholesale on a supercritical map") {
  HypothesisConfig cfg;
  cfg.grid = dichotomy::GridSpec{10.0, 1.0, 0.5};
  cfg.iv.horizon = 20.0;
  const HypothesisReport report =
      check_hypotheses(supercritical_scalar_map(), small_suite(1), cfg);

  CHECK_FALSE(report.hypotheses_hold);
  CHECK(report.find("G1")->status == CheckStatus::fail);        // blowup probes
  CHECK(report.find("G2")->status == CheckStatus::pass);        // still fixes the origin
  CHECK(report.find("G3star")->status == CheckStatus::fail);    // no decaying certificate
  CHECK(report.find("cond_i")->status == CheckStatus::pass);
  CHECK(report.find("cond_ii")->status == CheckStatus::fail);   // 3x^2 is not nilpotent
  CHECK(report.find("cond_iv")->status == CheckStatus::fail);   // no budget below -lambda
  CHECK(report.find("cond_iv")->details.find("delta") != std::string::npos);
}

TEST_CASE("hypothesis battery rejects bad inputs") {
  const auto map = polyalg::nilpotent_cubic_map(polyalg::Rational(-1));
  CHECK_THROWS_AS(check_hypotheses(map, {}), std::invalid_argument);
  CHECK_THROWS_AS(check_hypotheses(map, {odeint::PiecewiseSignal::zero(2)}),
                  std::invalid_argument);

  polyalg::ParamPolyMap cubic_only;
  cubic_only.dim = 1;
  cubic_only.coords = {polyalg::Poly::variable(1, 0).pow(3)};
  cubic_only.validate();
  CHECK_THROWS_AS(check_hypotheses(cubic_only, {odeint::PiecewiseSignal::zero(1)}),
                  std::invalid_argument);
}

TEST_CASE("initial-condition cube enumerates the product grid") {
  const IcGrid g = IcGrid::cube({-1.0, 1.0}, 2, {0.0, 5.0});
  REQUIRE(g.states.size() == 4);
  REQUIRE(g.t0s.size() == 2);
  CHECK(g.states[0](0) == -1.0);
  CHECK(g.states[0](1) == -1.0);
  CHECK(g.states[1](0) == 1.0);   // first coordinate varies fastest
  CHECK(g.states[1](1) == -1.0);
  CHECK(g.states[3](0) == 1.0);
  CHECK(g.states[3](1) == 1.0);

  CHECK_THROWS_AS(IcGrid::cube({}, 2, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(IcGrid::cube({1.0}, 2, {}), std::invalid_argument);
}

TEST_CASE("annihilating pairs are detected exactly") {
  auto pairs = annihilating_pairs(polyalg::nilpotent_cubic_map(polyalg::Rational(-1)));
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].first == 0);
  CHECK(pairs[0].second == 2);

  pairs = annihilating_pairs(polyalg::sum_coupled_cubic_map());
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].first == 0);
  CHECK(pairs[0].second == 2);

  CHECK(annihilating_pairs(polyalg::scalar_cubic_fold_map()).empty());

  polyalg::ParamPolyMap no_linear;
  no_linear.dim = 2;
  no_linear.coords = {polyalg::Poly::variable(2, 0).pow(3),
                      polyalg::Poly::variable(2, 1).pow(3)};
  no_linear.validate();
  CHECK(annihilating_pairs(no_linear).empty());
}

TEST_CASE("ensemble decay verification on the cross-cubic map") {
  const auto map = polyalg::nilpotent_cubic_map(polyalg::Rational(-1));
  const IcGrid grid = IcGrid::cube({-5.0, 0.0, 5.0}, 3, {0.0});
  const GnuasReport report = verify_gnuas(map, grid);

  CHECK(report.trajectories.size() == 27);
  CHECK(report.blowups == 0);
  CHECK(report.all_decayed);
  for (const auto& ts : report.trajectories) {
    CHECK(ts.completed);
    CHECK(ts.decayed);
    CHECK(ts.final_norm < 1e-6);
  }

  REQUIRE(report.sum_pairs.size() == 1);
  CHECK(report.sum_pairs[0] == std::make_pair(0u, 2u));
  CHECK(report.sum_identity_ok);
  for (const auto& ts : report.trajectories) CHECK(ts.max_sum_identity_error <= 1e-8);

  REQUIRE(report.envelope.ok);
  REQUIRE(report.envelope.fit.has_value());
  CHECK(report.envelope_dominates);
  CHECK(report.envelope.fit->eps == Approx(0.0).margin(1e-9));  // single start time
  CHECK(report.envelope.fit->alpha > 0.5);
  CHECK(report.envelope.fit->alpha < 1.5);
  CHECK(report.envelope.fit->K >= 1.0);
  CHECK(report.envelope.fit->max_slack >= 0.0);
  CHECK(report.summary.find("all decayed") != std::string::npos);
}

TEST_CASE("ensemble verification reports non-decay as an envelope violation") {
  // x - x^3 pulls 0.5 up toward the equilibrium at 1, and keeps 1 in place:
  // nothing decays, and no decaying envelope can cover a flat norm history.
  const auto map = polyalg::scalar_cubic_fold_map();
  IcGrid grid;
  grid.t0s = {0.0};
  grid.states = {Eigen::VectorXd::Constant(1, 0.5), Eigen::VectorXd::Constant(1, 1.0)};
  GnuasConfig cfg;
  cfg.horizon_offset = 20.0;
  const GnuasReport report = verify_gnuas(map, grid, cfg);

  CHECK(report.blowups == 0);
  CHECK_FALSE(report.all_decayed);
  CHECK_FALSE(report.envelope.ok);
  REQUIRE(report.envelope.violation.has_value());
  CHECK(report.envelope.violation->norm > 0.5);
  CHECK_FALSE(report.envelope_dominates);
  CHECK(report.sum_pairs.empty());
  CHECK(report.sum_identity_ok);  // vacuous: no pairs to check
  CHECK(report.summary.find("violation") != std::string::npos);
}

TEST_CASE("ensemble verification reports blowups without asserting") {
  IcGrid grid;
  grid.t0s = {0.0};
  grid.states = {Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 2.0)};
  GnuasConfig cfg;
  cfg.horizon_offset = 10.0;
  const GnuasReport report = verify_gnuas(autonomous_blowup_map(), grid, cfg);

  CHECK(report.blowups == 1);
  CHECK_FALSE(report.all_decayed);
  bool saw_note = false;
  for (const auto& ts : report.trajectories)
    if (!ts.completed) {
      saw_note = true;
      CHECK(ts.note.find("stopped") != std::string::npos);
    }
  CHECK(saw_note);
  // The surviving ensemble is the zero trajectory, which any envelope covers.
  CHECK(report.envelope.ok);
}

TEST_CASE("ensemble verification rejects bad grids") {
  const auto map = polyalg::nilpotent_cubic_map(polyalg::Rational(-1));
  IcGrid empty;
  CHECK_THROWS_AS(verify_gnuas(map, empty), std::invalid_argument);
  IcGrid wrong_dim;
  wrong_dim.t0s = {0.0};
  wrong_dim.states = {Eigen::VectorXd::Zero(2)};
  CHECK_THROWS_AS(verify_gnuas(map, wrong_dim), std::invalid_argument);
}

TEST_CASE("constant-solution check: exact route on the scalar fold") {
  const auto fam = injectivity::builtin_family("noninjective_demo");
  const ConstantSolutionReport report = constant_solution_check(fam, {0.0}, {1.0});

  CHECK(report.premise_ok);
  CHECK(report.premise_exact);
  CHECK(report.shifted_origin_exact);
  CHECK(report.constant_ok);
  CHECK(report.gnuas_violated);
  REQUIRE(report.z0.size() == 1);
  CHECK(report.z0[0] == 1.0);
  CHECK(report.max_drift <= 1e-9);
}

TEST_CASE("constant-solution check: premise failure is reported, not thrown") {
  const auto fam = injectivity::builtin_family("noninjective_demo");
  // F(0) = 0 but F(2) = -6: the images differ, so the premise fails.
  const ConstantSolutionReport report = constant_solution_check(fam, {0.0}, {2.0});
  CHECK_FALSE(report.premise_ok);
  CHECK(report.premise_exact);
  CHECK(report.note.find("premise_failure") != std::string::npos);
  CHECK_FALSE(report.constant_ok);
  CHECK_FALSE(report.gnuas_violated);
}

TEST_CASE("constant-solution check: float route on an evaluator-only family") {
  // The two-branch family sends every point above the parameter to zero, so
  // 101 and 102 share images across the whole window, with no exact map.
  const auto fam = injectivity::builtin_family("example_3_2");
  const ConstantSolutionReport report = constant_solution_check(fam, {101.0}, {102.0});

  CHECK(report.premise_ok);
  CHECK_FALSE(report.premise_exact);
  CHECK_FALSE(report.shifted_origin_exact);
  CHECK(report.note.find("numerically") != std::string::npos);
  CHECK(report.constant_ok);
  CHECK(report.gnuas_violated);
  CHECK(report.max_drift <= 1e-9);
}

TEST_CASE("constant-solution check rejects bad inputs") {
  const auto fam = injectivity::builtin_family("noninjective_demo");
  CHECK_THROWS_AS(constant_solution_check(fam, {1.0}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(constant_solution_check(fam, {0.0, 1.0}, {1.0}), std::invalid_argument);
  ConstantSolutionConfig cfg;
  cfg.window = 0.0;
  CHECK_THROWS_AS(constant_solution_check(fam, {0.0}, {1.0}, cfg), std::invalid_argument);
  cfg = ConstantSolutionConfig{};
  cfg.premise_probes = 1;
  CHECK_THROWS_AS(constant_solution_check(fam, {0.0}, {1.0}, cfg), std::invalid_argument);
}

TEST_CASE("reproduction bundle: two-branch scalar family") {
  const ReproduceReport report = reproduce_example("3.2");
  CHECK(report.id == "3.2");
  CHECK(report.all_checks_pass);
  REQUIRE(report.verdicts.size() == 4);
  bool saw_pair = false;
  for (const auto& [k, v] : report.facts)
    if (k == "colliding pair") saw_pair = true;
  CHECK(saw_pair);
  CHECK(!report.summary.empty());

  // The bundle is deterministic end to end.
  const ReproduceReport again = reproduce_example("3.2");
  CHECK(again.summary == report.summary);
}

TEST_CASE("reproduction bundle: sum-coupled family and its published inverse") {
  const ReproduceReport report = reproduce_example("3.3");
  CHECK(report.id == "3.3");
  CHECK(report.all_checks_pass);

  std::string published_match, composition;
  for (const auto& [k, v] : report.facts) {
    if (k == "published inverse formula matches derived inverse") published_match = v;
    if (k == "composition of the family with the published formula") composition = v;
  }
  // The published closed form does not invert the family; the bundle reports
  // the discrepancy as facts without failing any check.
  CHECK(published_match == "no");
  CHECK(composition.find("fails in coordinate") != std::string::npos);
}

TEST_CASE("reproduction bundle: oscillating-coefficient family") {
  const ReproduceReport report = reproduce_example("3.4");
  CHECK(report.id == "3.4");
  CHECK(report.all_checks_pass);

  bool saw_certificate = false, saw_witness = false;
  for (const auto& [k, v] : report.facts) {
    if (k == "certificate (K, alpha, eps)") saw_certificate = true;
    if (k == "infeasibility witness (t, s)") saw_witness = true;
  }
  CHECK(saw_certificate);
  CHECK(saw_witness);
}

TEST_CASE("reproduction bundle: cross-cubic map end to end") {
  const ReproduceReport report = reproduce_example("4.2");
  CHECK(report.id == "4.2");
  for (const auto& c : report.checks) {
    INFO(c.name << " — " << c.detail);
    CHECK(c.pass);
  }
  CHECK(report.all_checks_pass);

  bool saw_threshold = false;
  for (const auto& [k, v] : report.facts)
    if (k == "threshold time") {
      saw_threshold = true;
      CHECK(std::abs(std::stod(v) - 2.1383330595080276) < 1e-9);
    }
  CHECK(saw_threshold);
}

TEST_CASE("reproduction bundle rejects unknown ids") {
  CHECK_THROWS_AS(reproduce_example("9.9"), std::invalid_argument);
  CHECK_THROWS_AS(reproduce_example(""), std::invalid_argument);
}
