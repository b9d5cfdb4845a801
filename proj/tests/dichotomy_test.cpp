#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "nued/dichotomy/comparison.hpp"
#include "nued/dichotomy/envelope.hpp"
#include "nued/dichotomy/fit.hpp"
#include "nued/dichotomy/roughness.hpp"
#include "nued/dichotomy/spectrum.hpp"
#include "nued/odeint/transition.hpp"

using namespace nued;
using namespace nued::dichotomy;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

// Invariants every feasible fit must satisfy on its own grid.
void require_certificate_invariants(const FitResult& res, const NormSampleGrid& grid) {
  REQUIRE(res.feasible);
  REQUIRE(res.certificate.has_value());
  const DichotomyCertificate& c = *res.certificate;
  REQUIRE(c.K >= 1.0);
  REQUIRE(c.alpha > 0.0);
  REQUIRE(c.eps >= 0.0);
  REQUIRE(c.eps <= c.alpha - 1e-6);
  REQUIRE(c.max_slack >= 0.0);
  REQUIRE(certificate_slack(grid, c) >= 0.0);
}

// Rectangle grid with norm = exp(rate_tau * (t-s) + rate_s * s), an exact
// closed-form oracle for the fitter.
NormSampleGrid synthetic_grid(double rate_tau, double rate_s, double extent) {
  NormSampleGrid g;
  g.system_id = "synthetic";
  g.horizon = 2 * extent;
  g.s_step = 0.5;
  g.tau_step = 0.5;
  for (double s = 0.0; s <= extent + 1e-12; s += 0.5)
    for (double tau = 0.0; tau <= extent + 1e-12; tau += 0.5)
      g.entries.push_back(NormSample{s + tau, s, std::exp(rate_tau * tau + rate_s * s)});
  return g;
}

}  // namespace

TEST_CASE("constant contraction admits a tight uniform certificate") {
  const FitResult res = fit_system_certificate(odeint::diag_system({-1.0}));
  const NormSampleGrid grid = collect_norm_samples(odeint::diag_system({-1.0}));
  require_certificate_invariants(res, grid);
  CHECK(res.certificate->K <= 1.1);
  CHECK(res.certificate->alpha >= 0.95);
  CHECK(res.certificate->alpha <= 1.05);
  CHECK(res.certificate->eps <= 0.05);
  CHECK(res.certificate->interval_start == 0.0);
}

TEST_CASE("oscillating coefficient requires a nonuniform exponent") {
  const NormSampleGrid grid = collect_norm_samples(odeint::oscillating_system(-4.0, -1.0));

  const FitResult res = fit_stability_certificate(grid);
  require_certificate_invariants(res, grid);
  CHECK(res.certificate->eps >= 1.8);
  CHECK(res.certificate->eps <= 2.2);
  // eps is minimized first, so at the least feasible eps the alpha window may
  // collapse to eps itself; it can never stably exceed the decay ceiling ~3.
  CHECK(res.certificate->alpha > res.certificate->eps);
  CHECK(res.certificate->alpha <= 3.5);

  const FitResult uniform = check_uniform_fit(grid);
  REQUIRE_FALSE(uniform.feasible);
  REQUIRE(uniform.witness.has_value());
  CHECK(uniform.witness->eps == 0.0);
}

TEST_CASE("stronger oscillation defeats the strict coupled fit") {
  const FitResult res = fit_system_certificate(odeint::oscillating_system(-2.0, -1.0));
  REQUIRE_FALSE(res.feasible);
  REQUIRE(res.witness.has_value());
  const InfeasibleWitness& w = *res.witness;

  // The demonstrating sample sits on the t = 2k*pi (transient growth peak),
  // s = (2j+1)*pi (decay trough) lattice of the coefficient -2 - t*sin(t).
  const double k = std::round(w.t / (2 * kPi));
  const double j = std::round((w.s / kPi - 1) / 2);
  CHECK(k >= 1);
  CHECK(j >= 0);
  CHECK(std::abs(w.t - 2 * k * kPi) <= 0.5);
  CHECK(std::abs(w.s - (2 * j + 1) * kPi) <= 0.5);
  CHECK(w.norm > 0.0);
  CHECK_FALSE(w.note.empty());
}

TEST_CASE("synthetic grid with known exponents recovers its parameters") {
  const NormSampleGrid grid = synthetic_grid(-2.0, 1.0, 10.0);
  const FitResult res = fit_stability_certificate(grid);
  require_certificate_invariants(res, grid);
  CHECK(res.certificate->eps == Approx(1.0).margin(0.01));
  CHECK(res.certificate->alpha == Approx(2.0).margin(0.01));
  CHECK(res.certificate->K <= 1.2);
}

TEST_CASE("pure decay grid needs no nonuniform allowance") {
  const NormSampleGrid grid = synthetic_grid(-1.5, 0.0, 10.0);
  const FitResult res = fit_stability_certificate(grid);
  require_certificate_invariants(res, grid);
  CHECK(res.certificate->eps == 0.0);
  CHECK(res.certificate->alpha == Approx(1.5).margin(0.01));
}

TEST_CASE("nested grids never relax the nonuniform exponent") {
  SECTION("synthetic rectangles") {
    const FitResult small = fit_stability_certificate(synthetic_grid(-2.0, 1.0, 10.0));
    const FitResult large = fit_stability_certificate(synthetic_grid(-2.0, 1.0, 20.0));
    REQUIRE(small.feasible);
    REQUIRE(large.feasible);
    CHECK(large.certificate->eps >= small.certificate->eps - 1e-6);
  }
  SECTION("oscillating system horizons") {
    const auto sys = odeint::oscillating_system(-4.0, -1.0);
    const FitResult small =
        fit_stability_certificate(collect_norm_samples(sys, GridSpec{.horizon = 30.0}));
    const FitResult large =
        fit_stability_certificate(collect_norm_samples(sys, GridSpec{.horizon = 50.0}));
    REQUIRE(small.feasible);
    REQUIRE(large.feasible);
    CHECK(large.certificate->eps >= small.certificate->eps - 1e-6);
  }
}

TEST_CASE("scalar constant spectrum is a narrow interval at the coefficient") {
  for (const double lam : {0.7, -1.3}) {
    const auto sys = odeint::scalar_system([lam](double) { return lam; },
                                           [lam](double t) { return lam * t; }, "const");
    const SpectrumEstimate est = estimate_spectrum(sys);
    INFO("lambda = " << lam);
    REQUIRE(est.intervals.size() == 1);
    const double width = est.intervals[0].hi - est.intervals[0].lo;
    const double mid = 0.5 * (est.intervals[0].hi + est.intervals[0].lo);
    CHECK(width <= 0.01);
    CHECK(std::abs(mid - lam) <= 0.005);
    CHECK_FALSE(est.left_unbounded);
    CHECK_FALSE(est.right_unbounded);
    CHECK_FALSE(est.low_confidence);
    REQUIRE(est.growth.feasible);
    CHECK(est.growth.nu == Approx(lam).margin(0.01));
    CHECK(est.growth.delta <= 0.01);
  }
}

TEST_CASE("diagonal spectrum separates eigenvalue clusters") {
  const SpectrumEstimate est = estimate_spectrum(odeint::diag_system({-2.0, -1.0}));
  REQUIRE(est.intervals.size() == 2);
  const double mid0 = 0.5 * (est.intervals[0].lo + est.intervals[0].hi);
  const double mid1 = 0.5 * (est.intervals[1].lo + est.intervals[1].hi);
  CHECK(std::abs(mid0 - (-2.0)) <= 0.02);
  CHECK(std::abs(mid1 - (-1.0)) <= 0.02);
  CHECK_FALSE(est.low_confidence);

  SECTION("matches the union of scalar spectra") {
    const auto scalar_est = [](double lam) {
      return estimate_spectrum(odeint::scalar_system([lam](double) { return lam; },
                                                     [lam](double t) { return lam * t; }, "c"));
    };
    const SpectrumEstimate sA = scalar_est(-2.0), sB = scalar_est(-1.0);
    REQUIRE(sA.intervals.size() == 1);
    REQUIRE(sB.intervals.size() == 1);
    CHECK(std::abs(est.intervals[0].lo - sA.intervals[0].lo) <= 0.004);
    CHECK(std::abs(est.intervals[0].hi - sA.intervals[0].hi) <= 0.004);
    CHECK(std::abs(est.intervals[1].lo - sB.intervals[0].lo) <= 0.004);
    CHECK(std::abs(est.intervals[1].hi - sB.intervals[0].hi) <= 0.004);
  }

  SECTION("growth bound dominates the sampled norms") {
    REQUIRE(est.growth.feasible);
    CHECK(est.growth.nu == Approx(-1.0).margin(0.01));
    const NormSampleGrid grid = collect_norm_samples(odeint::diag_system({-2.0, -1.0}));
    for (const NormSample& e : grid.entries)
      REQUIRE(std::log(e.norm) <=
              std::log(est.growth.M) + est.growth.nu * (e.t - e.s) + est.growth.delta * e.s + 1e-9);
  }
}

TEST_CASE("oscillating spectrum covers the analytic window") {
  const auto sys = odeint::oscillating_system(-4.0, -1.0);
  const SpectrumEstimate est = estimate_spectrum(sys);
  REQUIRE(est.intervals.size() == 1);
  // The coefficient -4 - t*sin(t) produces net finite-time rates filling
  // [-5, -3] asymptotically.
  CHECK(est.intervals[0].lo >= -5.2);
  CHECK(est.intervals[0].lo <= -4.8);
  CHECK(est.intervals[0].hi >= -3.2);
  CHECK(est.intervals[0].hi <= -2.8);
  CHECK_FALSE(est.low_confidence);

  REQUIRE(est.growth.feasible);
  const NormSampleGrid grid = collect_norm_samples(sys);
  for (const NormSample& e : grid.entries)
    REQUIRE(std::log(e.norm) <=
            std::log(est.growth.M) + est.growth.nu * (e.t - e.s) + est.growth.delta * e.s + 1e-9);
}

TEST_CASE("roughness prediction arithmetic and preconditions") {
  DichotomyCertificate cert;
  cert.K = 1.0;
  cert.alpha = 1.0;
  cert.eps = 0.0;

  SECTION("rate drops by delta * K") {
    const DichotomyCertificate out = roughness_predict(cert, 0.5, 0.0);
    CHECK(out.K == 1.0);
    CHECK(out.alpha == Approx(0.5));
    CHECK(out.eps == 0.0);
  }
  SECTION("zero perturbation changes nothing") {
    const DichotomyCertificate out = roughness_predict(cert, 0.0, 0.0);
    CHECK(out.K == cert.K);
    CHECK(out.alpha == cert.alpha);
    CHECK(out.eps == cert.eps);
  }
  SECTION("delta must stay below alpha / K") {
    cert.K = 2.0;
    REQUIRE_THROWS_AS(roughness_predict(cert, 0.6, 0.0), PreconditionViolated);
  }
  SECTION("perturbation may not decay slower than the certificate's exponent") {
    cert.eps = 0.5;
    cert.alpha = 2.0;
    REQUIRE_THROWS_AS(roughness_predict(cert, 0.1, 0.3), PreconditionViolated);
  }
  SECTION("degraded rate must still exceed the nonuniform exponent") {
    cert.K = 1.5;
    cert.alpha = 1.0;
    cert.eps = 0.5;
    REQUIRE_THROWS_AS(roughness_predict(cert, 0.4, 0.5), PreconditionViolated);
  }
}

TEST_CASE("roughness prediction validates against a sampled perturbed system") {
  const FitResult base = fit_system_certificate(odeint::diag_system({-1.0}));
  REQUIRE(base.feasible);
  const DichotomyCertificate predicted = roughness_predict(*base.certificate, 0.5, 0.0);

  // Perturbed coefficient -1 + 0.5 sin t, perturbation norm <= 0.5 = delta.
  const auto perturbed = odeint::scalar_system(
      [](double t) { return -1.0 + 0.5 * std::sin(t); },
      [](double t) { return -t - 0.5 * std::cos(t); }, "perturbed");
  const NormSampleGrid grid = collect_norm_samples(perturbed);
  CHECK(certificate_slack(grid, predicted) >= 0.0);
}

TEST_CASE("extension constant reproduces the patch arithmetic") {
  DichotomyCertificate cert;
  cert.K = 1.5;
  cert.alpha = 1.0;
  cert.eps = 0.2;
  cert.interval_start = 1.0;

  const DichotomyCertificate ext = extend_certificate(cert, 2.0);
  CHECK(std::abs(ext.K - 3.0 * std::exp(1.0)) <= 1e-12);
  CHECK(ext.interval_start == 0.0);
  CHECK(ext.alpha == cert.alpha);
  CHECK(ext.eps == cert.eps);

  cert.interval_start = 0.0;
  CHECK(extend_certificate(cert, 2.0).K == Approx(2.0 * cert.K));

  REQUIRE_THROWS_AS(extend_certificate(cert, 0.5), PreconditionViolated);
}

TEST_CASE("certificate fitted on a late window extends to the full one") {
  const NormSampleGrid full = collect_norm_samples(odeint::diag_system({-1.0}));
  NormSampleGrid late = full;
  late.entries.clear();
  for (const NormSample& e : full.entries)
    if (e.s >= 2.0) late.entries.push_back(e);

  const FitResult res = fit_stability_certificate(late);
  require_certificate_invariants(res, late);
  CHECK(res.certificate->interval_start == 2.0);

  // ||Phi(t,s)|| <= 1 on the initial patch of a contraction.
  const DichotomyCertificate ext = extend_certificate(*res.certificate, 1.0);
  CHECK(ext.interval_start == 0.0);
  CHECK(certificate_slack(full, ext) >= 0.0);
}

TEST_CASE("contracting ensemble fits a tight envelope") {
  std::vector<DecaySeries> ensemble;
  for (const double t0 : {0.0, 2.0})
    for (const double x0 : {1.0, 2.0, -3.0}) {
      DecaySeries s;
      s.t0 = t0;
      s.x0_norm = std::abs(x0);
      for (double t = t0; t <= t0 + 20.0 + 1e-12; t += 0.5) {
        s.times.push_back(t);
        s.norms.push_back(std::abs(x0) * std::exp(-(t - t0)));
      }
      ensemble.push_back(std::move(s));
    }

  const EnvelopeOutcome out = fit_gnuas_envelope(ensemble);
  REQUIRE(out.ok);
  REQUIRE(out.fit.has_value());
  CHECK(out.fit->K >= 1.0);
  CHECK(out.fit->K <= 1.1);
  CHECK(out.fit->alpha == Approx(1.0).margin(0.05));
  CHECK(out.fit->eps <= 0.05);
  CHECK(out.fit->max_slack >= 0.0);

  // Exhaustive domination of every input sample.
  for (const DecaySeries& s : ensemble)
    for (std::size_t k = 0; k < s.times.size(); ++k)
      REQUIRE(s.norms[k] <= out.fit->K * std::exp(out.fit->eps * s.t0) * s.x0_norm *
                                std::exp(-out.fit->alpha * (s.times[k] - s.t0)) +
                            1e-12);
}

TEST_CASE("constant trajectory defeats the envelope") {
  DecaySeries flat;
  flat.t0 = 0.0;
  flat.x0_norm = 1.0;
  for (double t = 0.0; t <= 20.0 + 1e-12; t += 0.5) {
    flat.times.push_back(t);
    flat.norms.push_back(1.0);
  }

  SECTION("alone") {
    const EnvelopeOutcome out = fit_gnuas_envelope({flat});
    REQUIRE_FALSE(out.ok);
    REQUIRE(out.violation.has_value());
    CHECK(out.violation->trajectory == 0);
    CHECK(out.violation->t == Approx(20.0));
    CHECK(out.violation->norm == Approx(1.0));
    CHECK_FALSE(out.violation->note.empty());
  }
  SECTION("mixed with a decaying trajectory") {
    DecaySeries good;
    good.t0 = 0.0;
    good.x0_norm = 1.0;
    for (double t = 0.0; t <= 20.0 + 1e-12; t += 0.5) {
      good.times.push_back(t);
      good.norms.push_back(std::exp(-t));
    }
    const EnvelopeOutcome out = fit_gnuas_envelope({good, flat});
    REQUIRE_FALSE(out.ok);
    REQUIRE(out.violation.has_value());
    CHECK(out.violation->trajectory == 1);
  }
}

TEST_CASE("numerically zero trajectories") {
  DecaySeries zero;
  zero.t0 = 0.0;
  zero.x0_norm = 0.0;
  zero.times = {0.0, 1.0, 2.0};
  zero.norms = {0.0, 0.0, 0.0};

  SECTION("impose no envelope constraint") {
    const EnvelopeOutcome out = fit_gnuas_envelope({zero});
    REQUIRE(out.ok);
    CHECK(out.fit->K == 1.0);
  }
  SECTION("escaping the zero floor is a violation") {
    zero.norms = {0.0, 0.0, 1e-6};
    const EnvelopeOutcome out = fit_gnuas_envelope({zero});
    REQUIRE_FALSE(out.ok);
    REQUIRE(out.violation.has_value());
    CHECK(out.violation->trajectory == 0);
    CHECK(out.violation->t == Approx(2.0));
    CHECK(out.violation->note.find("zero") != std::string::npos);
  }
}

TEST_CASE("comparison function classes") {
  SECTION("exponential-decay product surface is class KL") {
    ComparisonFunctionSample s;
    s.claim = ComparisonClass::KL;
    for (double r = 0.0; r <= 5.0 + 1e-12; r += 0.5) s.grid.push_back(r);
    for (double tau = 0.0; tau <= 10.0 + 1e-12; tau += 0.5) s.second_grid.push_back(tau);
    for (const double r : s.grid) {
      std::vector<double> row;
      for (const double tau : s.second_grid) row.push_back(r * std::exp(-tau));
      s.surface.push_back(std::move(row));
    }
    const ComparisonVerdict v = validate_comparison_function(s);
    CHECK(v.pass);
  }

  SECTION("identity is class K-infinity on a long grid") {
    ComparisonFunctionSample s;
    s.claim = ComparisonClass::Kinf;
    for (double x = 0.0; x <= 2000.0 + 1e-12; x += 50.0) {
      s.grid.push_back(x);
      s.values.push_back(x);
    }
    CHECK(validate_comparison_function(s).pass);
  }

  SECTION("bounded function fails the K-infinity divergence proxy") {
    ComparisonFunctionSample s;
    s.claim = ComparisonClass::Kinf;
    for (double x = 0.0; x <= 2000.0 + 1e-12; x += 50.0) {
      s.grid.push_back(x);
      s.values.push_back(x / (1.0 + x));
    }
    const ComparisonVerdict v = validate_comparison_function(s);
    REQUIRE_FALSE(v.pass);
    REQUIRE(v.violation.has_value());
    CHECK(v.violation->x == Approx(2000.0));
    CHECK(v.violation->requirement.find("divergence") != std::string::npos);
  }

  SECTION("decaying exponential fails class K at the origin") {
    ComparisonFunctionSample s;
    s.claim = ComparisonClass::K;
    s.grid = {0.0, 1.0, 2.0};
    s.values = {1.0, std::exp(-1.0), std::exp(-2.0)};
    const ComparisonVerdict v = validate_comparison_function(s);
    REQUIRE_FALSE(v.pass);
    REQUIRE(v.violation.has_value());
    CHECK(v.violation->x == 0.0);
    CHECK(v.violation->value == 1.0);
  }

  SECTION("square root is class K") {
    ComparisonFunctionSample s;
    s.claim = ComparisonClass::K;
    s.grid = {0.0, 1.0, 4.0, 9.0};
    s.values = {0.0, 1.0, 2.0, 3.0};
    CHECK(validate_comparison_function(s).pass);
  }

  SECTION("positive constants are class N, zero is not") {
    ComparisonFunctionSample s;
    s.claim = ComparisonClass::N;
    s.grid = {0.0, 1.0, 2.0};
    s.values = {5.0, 5.0, 5.0};
    CHECK(validate_comparison_function(s).pass);

    s.values = {0.0, 5.0, 5.0};
    const ComparisonVerdict v = validate_comparison_function(s);
    REQUIRE_FALSE(v.pass);
    CHECK(v.violation->x == 0.0);
    CHECK(v.violation->requirement.find("positive") != std::string::npos);
  }

  SECTION("surface that never decays fails KL with the offending slice") {
    ComparisonFunctionSample s;
    s.claim = ComparisonClass::KL;
    s.grid = {0.0, 1.0, 2.0};
    s.second_grid = {0.0, 5.0, 10.0};
    for (const double r : s.grid) {
      std::vector<double> row;
      for (const double tau : s.second_grid) row.push_back(r * (std::exp(-tau) + 0.1));
      s.surface.push_back(std::move(row));
    }
    const ComparisonVerdict v = validate_comparison_function(s);
    REQUIRE_FALSE(v.pass);
    REQUIRE(v.violation.has_value());
    CHECK(v.violation->requirement.find("decay") != std::string::npos);
    CHECK(v.violation->x > 0.0);  // the r = 0 slice is vacuously fine
  }

  SECTION("surface that dips in the first argument fails KL at the dip") {
    ComparisonFunctionSample s;
    s.claim = ComparisonClass::KL;
    s.grid = {0.0, 1.0, 2.0, 3.0};
    s.second_grid = {0.0, 1.0};
    const double vals[] = {0.0, 0.84, 0.91, 0.14};
    for (std::size_t i = 0; i < 4; ++i)
      s.surface.push_back({vals[i], vals[i] * std::exp(-10.0)});
    const ComparisonVerdict v = validate_comparison_function(s);
    REQUIRE_FALSE(v.pass);
    REQUIRE(v.violation.has_value());
    CHECK(v.violation->x == 3.0);
    CHECK(v.violation->requirement.find("nondecreasing") != std::string::npos);
  }

  SECTION("grids must be strictly increasing") {
    ComparisonFunctionSample s;
    s.claim = ComparisonClass::K;
    s.grid = {0.0, 1.0, 1.0};
    s.values = {0.0, 1.0, 2.0};
    REQUIRE_THROWS_AS(validate_comparison_function(s), std::invalid_argument);
  }
}
