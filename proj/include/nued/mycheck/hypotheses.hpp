#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nued/dichotomy/fit.hpp"
#include "nued/linalg.hpp"
#include "nued/odeint/bernoulli.hpp"
#include "nued/odeint/integrate.hpp"
#include "nued/odeint/linearize.hpp"
#include "nued/polyalg/analysis.hpp"
#include "nued/polyalg/operations.hpp"
#include "nued/polyalg/poly_map.hpp"
#include "nued/rng.hpp"

namespace nued::mycheck {

enum class CheckStatus { pass, fail, evidence_only };

inline std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::evidence_only: return "evidence_only";
  }
  return "unknown";
}

struct CheckEntry {
  std::string id;  // one of G1, G2, G3star, cond_i, cond_ii, cond_iii, cond_iv
  CheckStatus status = CheckStatus::fail;
  std::string details;
};

/// Certificate that the Jacobian of the cubic part, evaluated along a bounded
/// reference signal, stays under delta * e^{-eps t} from the threshold time
/// onward (validated by sampling through the horizon).
struct ConditionIvCertificate {
  double eps = 0.0;            // decay exponent of the allowed bound
  double delta = 0.0;          // perturbation budget, must satisfy delta < -lambda
  double T_omega = 0.0;        // first time from which the bound holds
  double L_omega = 0.0;        // sampled sup of the signal functional (closed-form path)
  double max_violation = 0.0;  // max over validation samples of ||JH|| - bound
  bool valid = false;
  std::string method;  // "closed_form" or "scan"
};

struct HypothesisReport {
  std::vector<CheckEntry> entries;                      // fixed id order
  std::vector<ConditionIvCertificate> iv_certificates;  // one per signal
  bool hypotheses_hold = false;  // no failed entry (evidence_only does not block)
  std::string summary;

  const CheckEntry* find(const std::string& id) const {
    for (const auto& e : entries)
      if (e.id == id) return &e;
    return nullptr;
  }
};

struct IvOptions {
  double horizon = 50.0;
  double scan_step = 0.05;
  // Floating slack, relative to the decaying bound itself, allowed at the
  // threshold where the closed form touches the bound with equality.
  double slack_tol = 1e-9;
};

struct HypothesisConfig {
  IvOptions iv;
  std::optional<double> delta;  // budget for the cubic-Jacobian bound; default -lambda/2
  double eps_iv = 0.0;          // exponent used for the per-signal certificates
  dichotomy::GridSpec grid;     // transition-norm grid for the spectral fits
  dichotomy::FitOptions fit;
  odeint::IntegratorConfig integrator;
  // Existence probe: product grid over these values per coordinate, falling
  // back to seeded random draws when the product grows past max_grid_points.
  std::vector<double> ic_values{-5.0, 0.0, 5.0};
  std::size_t max_grid_points = 64;
  std::size_t random_ic_count = 32;
  double g1_horizon = 40.0;
  std::uint64_t seed = 20250819;
};

namespace detail {

/// The cubic part H of a map lambda*X + H, carrying the parent's bindings.
inline polyalg::ParamPolyMap nonlinear_map(const polyalg::ParamPolyMap& map) {
  polyalg::ParamPolyMap h;
  h.dim = map.dim;
  h.bindings = map.bindings;
  h.coords = map.nonlinear_part();
  return h;
}

inline double jacobian_norm_at(const polyalg::PolyMatrix& jac, const polyalg::ParamPolyMap& owner,
                               double t, const Eigen::VectorXd& w) {
  return op_norm(odeint::evaluate_poly_matrix(jac, owner, t, w));
}

/// Detected shape for which ||JH(t, w)|| has the closed form
/// sqrt(18) * e^{-rate t} * max{w_2^2, (w_1 + w_3)^2}: dimension 3, a single
/// exponentially decaying factor s, and cubic part (s*y^3, s*(x+z)^3, -s*y^3).
struct CrossCubicStructure {
  int symbol = 0;
  double rate = 1.0;
};

inline std::optional<CrossCubicStructure> detect_cross_cubic(const polyalg::ParamPolyMap& map) {
  if (map.dim != 3 || !map.linear_coefficient) return std::nullopt;
  const std::vector<polyalg::Poly> h = map.nonlinear_part();
  std::set<int> symbols;
  for (const auto& p : h)
    for (int sym : p.used_params()) symbols.insert(sym);
  if (symbols.size() != 1) return std::nullopt;
  const int sym = *symbols.begin();
  const polyalg::ParamBinding* b = map.find_binding(sym);
  if (!b || b->kind != polyalg::BindingKind::exp_decay) return std::nullopt;

  using polyalg::Poly;
  const Poly y = Poly::variable(3, 1);
  const Poly xz = Poly::variable(3, 0) + Poly::variable(3, 2);
  const Poly s = Poly::param(3, sym);
  const Poly sy3 = s * (y * y * y);
  const Poly sc3 = s * (xz * xz * xz);
  if (!(h[0] - sy3).is_zero()) return std::nullopt;
  if (!(h[1] - sc3).is_zero()) return std::nullopt;
  if (!(h[2] + sy3).is_zero()) return std::nullopt;
  return CrossCubicStructure{sym, b->rate};
}

/// Sampled sup of max{w_2(t)^2, (w_1(t) + w_3(t))^2} over [0, horizon],
/// probing breakpoints from both sides.
inline double sample_signal_functional(const odeint::PiecewiseSignal& w, double horizon,
                                       double step) {
  double sup = 0.0;
  auto probe = [&](double t) {
    const Eigen::VectorXd v = w(t);
    const double a = v(1) * v(1);
    const double b = (v(0) + v(2)) * (v(0) + v(2));
    sup = std::max(sup, std::max(a, b));
  };
  for (double t = 0.0; t <= horizon + 1e-12; t += step) probe(t);
  for (double bp : w.breakpoints)
    if (bp > 0.0 && bp <= horizon) {
      probe(std::max(0.0, bp - 1e-9));
      probe(bp);
    }
  return sup;
}

inline std::vector<Eigen::VectorXd> existence_grid(std::uint32_t dim,
                                                   const HypothesisConfig& cfg) {
  std::size_t count = 1;
  for (std::uint32_t j = 0; j < dim; ++j) {
    count *= cfg.ic_values.size();
    if (count > cfg.max_grid_points) break;
  }
  std::vector<Eigen::VectorXd> grid;
  if (count <= cfg.max_grid_points) {
    const std::size_t base = cfg.ic_values.size();
    std::size_t total = 1;
    for (std::uint32_t j = 0; j < dim; ++j) total *= base;
    for (std::size_t k = 0; k < total; ++k) {
      Eigen::VectorXd x(dim);
      std::size_t rem = k;
      for (std::uint32_t j = 0; j < dim; ++j) {
        x(j) = cfg.ic_values[rem % base];
        rem /= base;
      }
      grid.push_back(std::move(x));
    }
  } else {
    const double lo = *std::min_element(cfg.ic_values.begin(), cfg.ic_values.end());
    const double hi = *std::max_element(cfg.ic_values.begin(), cfg.ic_values.end());
    Rng rng(cfg.seed);
    for (std::size_t k = 0; k < cfg.random_ic_count; ++k) {
      Eigen::VectorXd x(dim);
      for (std::uint32_t j = 0; j < dim; ++j) x(j) = rng.uniform(lo, hi);
      grid.push_back(std::move(x));
    }
  }
  return grid;
}

}  // namespace detail

/// Find the first time T from which ||JH(t, omega(t))|| <= delta * e^{-eps t}
/// holds through the horizon, and validate the bound by sampling. Uses the
/// closed form when the map has the detected cross-cubic shape (and eps is
/// below the decay rate); otherwise scans the sampled norms.
inline ConditionIvCertificate condition_iv_threshold(const polyalg::ParamPolyMap& map,
                                                     const odeint::PiecewiseSignal& omega,
                                                     double delta, double eps,
                                                     IvOptions opts = {}) {
  map.validate();
  if (!map.is_real())
    throw std::invalid_argument("condition_iv_threshold: map must be real");
  if (!map.linear_coefficient)
    throw std::invalid_argument(
        "condition_iv_threshold: map must have the form lambda*X + H");
  const double lambda = map.linear_coefficient->get_d();
  if (!(eps >= 0.0)) throw std::invalid_argument("condition_iv_threshold: eps must be >= 0");
  if (!(delta > 0.0) || !(delta < -lambda))
    throw std::invalid_argument("condition_iv_threshold: need 0 < delta < -lambda");
  if (omega.dim != static_cast<int>(map.dim))
    throw std::invalid_argument("condition_iv_threshold: signal dimension mismatch");

  ConditionIvCertificate cert;
  cert.eps = eps;
  cert.delta = delta;

  const polyalg::ParamPolyMap h = detail::nonlinear_map(map);
  const polyalg::PolyMatrix jac = polyalg::jacobian(h);
  auto norm_at = [&](double t) { return detail::jacobian_norm_at(jac, h, t, omega(t)); };

  const auto structure = detail::detect_cross_cubic(map);
  if (structure && eps < structure->rate) {
    const double L = detail::sample_signal_functional(omega, opts.horizon, opts.scan_step);
    cert.L_omega = L;
    cert.method = "closed_form";
    cert.T_omega =
        L == 0.0 ? 0.0
                 : std::max(0.0, std::log(std::sqrt(18.0) * L / delta) / (structure->rate - eps));
    if (cert.T_omega > opts.horizon)
      throw std::runtime_error("condition_iv_threshold: no threshold found within horizon");
  } else {
    // Scan: T is the first grid time strictly after the last sampled violation.
    std::vector<double> times;
    for (double t = 0.0; t <= opts.horizon + 1e-12; t += opts.scan_step) times.push_back(t);
    std::optional<std::size_t> last_violation;
    for (std::size_t i = 0; i < times.size(); ++i) {
      // Relative slack: the bound decays exponentially, so an absolute margin
      // would eventually swallow genuine violations.
      const double bound = delta * std::exp(-eps * times[i]);
      if (norm_at(times[i]) > bound * (1.0 + opts.slack_tol)) last_violation = i;
    }
    cert.method = "scan";
    if (!last_violation) {
      cert.T_omega = 0.0;
    } else if (*last_violation + 1 >= times.size()) {
      throw std::runtime_error("condition_iv_threshold: no threshold found within horizon");
    } else {
      cert.T_omega = times[*last_violation + 1];
    }
  }

  double worst = -std::numeric_limits<double>::infinity();
  bool ok = true;
  auto check = [&](double t) {
    const double bound = delta * std::exp(-eps * t);
    const double norm = norm_at(t);
    worst = std::max(worst, norm - bound);
    if (norm > bound * (1.0 + opts.slack_tol)) ok = false;
  };
  for (double t = cert.T_omega; t <= opts.horizon + 1e-12; t += opts.scan_step) check(t);
  for (double bp : omega.breakpoints)
    if (bp >= cert.T_omega && bp <= opts.horizon) check(bp);
  cert.max_violation = worst;
  cert.valid = ok;
  return cert;
}

/// Default bounded reference signals: the zero signal, constant vectors at
/// norms 1 and 5, a piecewise-constant switch, and a sinusoid.
inline std::vector<odeint::PiecewiseSignal> default_omega_suite(std::uint32_t dim) {
  const int n = static_cast<int>(dim);
  const Eigen::VectorXd unit = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
  std::vector<odeint::PiecewiseSignal> suite;
  suite.push_back(odeint::PiecewiseSignal::zero(n));
  suite.push_back(odeint::PiecewiseSignal::constant(unit));
  suite.push_back(odeint::PiecewiseSignal::constant(5.0 * unit));
  suite.push_back(odeint::PiecewiseSignal::switched(unit, -2.0 * unit, 5.5));
  suite.push_back(odeint::PiecewiseSignal::sinusoid(Eigen::VectorXd::Ones(n), 1.0));
  return suite;
}

/// Run the full hypothesis battery on a map lambda*X + H with lambda < 0:
/// structural continuity and homogeneity/nilpotency of the cubic part, a
/// bounded shared coefficient, per-signal Jacobian-decay certificates, exact
/// vanishing at the origin, an existence probe over an initial-condition
/// grid, and per-signal stability-certificate fits for the linearizations.
inline HypothesisReport check_hypotheses(const polyalg::ParamPolyMap& map,
                                         const std::vector<odeint::PiecewiseSignal>& omega_suite,
                                         HypothesisConfig cfg = {}) {
  map.validate();
  if (!map.is_real()) throw std::invalid_argument("check_hypotheses: map must be real");
  if (!map.linear_coefficient)
    throw std::invalid_argument("check_hypotheses: map must have the form lambda*X + H");
  if (omega_suite.empty())
    throw std::invalid_argument("check_hypotheses: signal suite must not be empty");
  for (const auto& w : omega_suite)
    if (w.dim != static_cast<int>(map.dim))
      throw std::invalid_argument("check_hypotheses: signal dimension mismatch");

  const double lambda = map.linear_coefficient->get_d();
  const polyalg::ParamPolyMap h = detail::nonlinear_map(map);

  HypothesisReport report;

  // cond_i: every time dependence enters through a binding whose evaluator is
  // a continuous function by construction.
  {
    CheckEntry e{"cond_i", CheckStatus::pass, ""};
    std::ostringstream os;
    os << map.bindings.size()
       << " parameter binding(s); each binds a continuous time factor by construction";
    e.details = os.str();
    report.entries.push_back(std::move(e));
  }

  // cond_ii: per-coordinate zero-or-cubic homogeneity plus exact nilpotency
  // of the Jacobian of the cubic part.
  bool homogeneous_ok = true;
  {
    CheckEntry e{"cond_ii", CheckStatus::pass, ""};
    std::ostringstream os;
    for (std::uint32_t j = 0; j < h.dim; ++j) {
      const polyalg::Homogeneity hom = polyalg::homogeneity_degree(h.coords[j]);
      const bool ok = hom.kind == polyalg::Homogeneity::Kind::zero ||
                      (hom.kind == polyalg::Homogeneity::Kind::homogeneous && hom.degree == 3);
      if (!ok) {
        homogeneous_ok = false;
        os << "coordinate " << j << " is not zero or cubic-homogeneous; ";
      }
    }
    const polyalg::NilpotencyResult nil = polyalg::is_nilpotent(polyalg::jacobian(h));
    if (!nil.nilpotent) os << "Jacobian of the cubic part is not nilpotent; ";
    if (homogeneous_ok && nil.nilpotent) {
      std::ostringstream ok;
      ok << "all coordinates zero or cubic-homogeneous; Jacobian nilpotent with index "
         << nil.index;
      e.details = ok.str();
    } else {
      e.status = CheckStatus::fail;
      e.details = os.str();
    }
    report.entries.push_back(std::move(e));
  }

  // cond_iii: the shared coefficient factor is bounded (finite declared sup),
  // giving ||H(t,x)|| <= C * a(t) * ||x||^3 with an explicit C.
  std::optional<polyalg::CubicBound> cubic;
  {
    CheckEntry e{"cond_iii", CheckStatus::pass, ""};
    std::set<int> symbols;
    for (const auto& p : h.coords)
      for (int sym : p.used_params()) symbols.insert(sym);
    bool bounded = true;
    std::ostringstream os;
    for (int sym : symbols) {
      const polyalg::ParamBinding* b = h.find_binding(sym);
      if (!b || !std::isfinite(b->sup()) || b->sup() < 0.0) {
        bounded = false;
        os << "factor '" << (b ? b->name : "?") << "' has no finite bound; ";
      }
    }
    if (!homogeneous_ok) {
      bounded = false;
      os << "no cubic-power bound: the map is not zero-or-cubic-homogeneous; ";
    }
    if (bounded) {
      try {
        polyalg::CubicBoundOptions bopts;
        bopts.samples = 2000;
        cubic = polyalg::cubic_bound_constant(h, bopts);
        double sup_a = 1.0;
        for (const auto& [sym, e2] : cubic->shared_params)
          sup_a *= std::pow(h.find_binding(sym)->sup(), static_cast<double>(e2));
        os << "||H(t,x)|| <= " << cubic->coefficient_bound
           << " * a(t) * ||x||^3 with sup a = " << sup_a;
      } catch (const std::exception& ex) {
        bounded = false;
        os << "coefficient bound unavailable: " << ex.what();
      }
    }
    e.status = bounded ? CheckStatus::pass : CheckStatus::fail;
    e.details = os.str();
    report.entries.push_back(std::move(e));
  }

  // cond_iv: a Jacobian-decay certificate for every signal in the suite.
  {
    CheckEntry e{"cond_iv", CheckStatus::pass, ""};
    const double delta = cfg.delta.value_or(-lambda / 2.0);
    std::ostringstream os;
    bool all_ok = true;
    for (std::size_t i = 0; i < omega_suite.size(); ++i) {
      try {
        ConditionIvCertificate c =
            condition_iv_threshold(map, omega_suite[i], delta, cfg.eps_iv, cfg.iv);
        if (!c.valid) all_ok = false;
        os << "signal " << i << ": T = " << c.T_omega << " (" << c.method << ")"
           << (c.valid ? "" : " INVALID") << "; ";
        report.iv_certificates.push_back(std::move(c));
      } catch (const std::exception& ex) {
        all_ok = false;
        os << "signal " << i << ": " << ex.what() << "; ";
      }
    }
    e.status = all_ok ? CheckStatus::pass : CheckStatus::fail;
    e.details = os.str();
    report.entries.push_back(std::move(e));
  }

  // G2: the origin is a fixed point, exactly.
  {
    CheckEntry e{"G2", CheckStatus::pass, "exact image of the origin is zero"};
    const std::vector<polyalg::GaussianRational> zero(map.dim);
    bool ok = true;
    for (const polyalg::Poly& p : map.evaluate_exact(zero))
      if (!p.is_zero()) ok = false;
    if (!ok) {
      e.status = CheckStatus::fail;
      e.details = "map does not vanish at the origin";
    }
    report.entries.push_back(std::move(e));
  }

  // G1: existence probed on a grid of initial conditions; never more than
  // evidence (a finite probe cannot certify global forward existence).
  {
    CheckEntry e{"G1", CheckStatus::evidence_only, ""};
    const odeint::VectorField field = odeint::polynomial_field(map);
    const std::vector<Eigen::VectorXd> grid = detail::existence_grid(map.dim, cfg);
    std::size_t completed = 0, guaranteed = 0;
    std::optional<double> radius;
    if (cubic && lambda < 0.0) {
      double sup_a = 1.0;
      for (const auto& [sym, e2] : cubic->shared_params)
        sup_a *= std::pow(h.find_binding(sym)->sup(), static_cast<double>(e2));
      const double c = cubic->coefficient_bound * sup_a;
      if (c > 0.0) radius = std::sqrt(-lambda / c);
    }
    std::ostringstream os;
    bool blowup = false;
    for (const Eigen::VectorXd& x0 : grid) {
      odeint::IntegratorConfig icfg = cfg.integrator;
      icfg.sample_times = {cfg.g1_horizon};
      const odeint::SolveOutcome out = odeint::integrate(field, 0.0, x0, cfg.g1_horizon, icfg);
      if (out.completed()) {
        ++completed;
      } else {
        blowup = true;
        os << "probe from norm " << x0.norm() << " stopped at t = " << out.stop_time << "; ";
      }
      if (radius && x0.norm() <= *radius) ++guaranteed;
    }
    if (blowup) {
      e.status = CheckStatus::fail;
      e.details = os.str();
    } else {
      os << completed << "/" << grid.size() << " probes completed to t = " << cfg.g1_horizon;
      if (radius)
        os << "; comparison-guaranteed region ||x0|| <= " << *radius << " covers " << guaranteed
           << " probe(s); existence outside it is probed, not proved";
      e.details = os.str();
    }
    report.entries.push_back(std::move(e));
  }

  // G3star: for each signal, the linearization along it admits a stability
  // certificate with eps < alpha. Checked on the finite suite only; the
  // quantifier over all bounded signals is out of reach.
  {
    CheckEntry e{"G3star", CheckStatus::pass, ""};
    std::vector<std::future<dichotomy::FitResult>> futures;
    futures.reserve(omega_suite.size());
    for (const auto& w : omega_suite)
      futures.push_back(std::async(std::launch::async, [&map, &cfg, w] {
        const odeint::LinearSystem sys = odeint::linearize_along(map, w);
        return dichotomy::fit_system_certificate(sys, cfg.grid, cfg.fit, cfg.integrator);
      }));
    std::ostringstream os;
    bool all_ok = true;
    for (std::size_t i = 0; i < futures.size(); ++i) {
      const dichotomy::FitResult fit = futures[i].get();
      const bool ok =
          fit.feasible && fit.certificate && fit.certificate->eps < fit.certificate->alpha;
      if (!ok) all_ok = false;
      os << "signal " << i << ": ";
      if (fit.certificate)
        os << "K = " << fit.certificate->K << ", alpha = " << fit.certificate->alpha
           << ", eps = " << fit.certificate->eps;
      else
        os << "infeasible";
      os << (ok ? "" : " FAIL") << "; ";
    }
    os << "(finite signal suite; the bound over all bounded signals is not certified)";
    e.status = all_ok ? CheckStatus::pass : CheckStatus::fail;
    e.details = os.str();
    report.entries.push_back(std::move(e));
  }

  // Fixed presentation order.
  const std::vector<std::string> order{"G1", "G2", "G3star", "cond_i", "cond_ii", "cond_iii",
                                       "cond_iv"};
  std::vector<CheckEntry> ordered;
  for (const auto& id : order)
    for (auto& e : report.entries)
      if (e.id == id) ordered.push_back(std::move(e));
  report.entries = std::move(ordered);

  report.hypotheses_hold = true;
  std::ostringstream sum;
  for (const auto& e : report.entries) {
    if (e.status == CheckStatus::fail) report.hypotheses_hold = false;
    sum << e.id << ": " << to_string(e.status) << " — " << e.details << "\n";
  }
  report.summary = sum.str();
  return report;
}

}  // namespace nued::mycheck
