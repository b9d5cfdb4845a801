#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nued/cli/system_io.hpp"
#include "nued/dichotomy/fit.hpp"
#include "nued/dichotomy/spectrum.hpp"
#include "nued/injectivity/decide.hpp"
#include "nued/mycheck/hypotheses.hpp"
#include "nued/mycheck/reproduce.hpp"
#include "nued/odeint/integrate.hpp"
#include "nued/odeint/linearize.hpp"
#include "nued/polyalg/operations.hpp"

namespace nued::cli {

/// What one subcommand produced: a JSON payload or a CSV body, plus the
/// process exit code (0 pass, 1 check failed, 2 usage/input error).
struct CommandResult {
  int exit_code = 0;
  json payload;
  std::string csv;
  bool is_csv = false;
  std::string note;  // human remark for stderr (never part of the payload)
};

namespace detail {

inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const polyalg::ParamPolyMap& map_of(const LoadedSystem& sys) {
  if (sys.map) return *sys.map;
  throw ParseError(sys.id + ": this command needs a polynomial map (kind poly_map, or a builtin "
                            "with an exact polynomial form)");
}

inline odeint::VectorField field_of(const LoadedSystem& sys) {
  if (sys.map) return odeint::polynomial_field(*sys.map);
  if (sys.family) {
    const injectivity::ParamFamily fam = *sys.family;
    odeint::VectorField f;
    f.dim = static_cast<int>(fam.dimension);
    f.rhs = [fam](double t, const Eigen::VectorXd& x) {
      const std::vector<double> p(x.data(), x.data() + x.size());
      const std::vector<double> v = fam.evaluator(t, p);
      return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
    };
    return f;
  }
  if (sys.linear) {
    const odeint::LinearSystem lin = *sys.linear;
    odeint::VectorField f;
    f.dim = lin.dim;
    f.mandatory_times = lin.mandatory_times;
    f.rhs = [lin](double t, const Eigen::VectorXd& x) { return Eigen::VectorXd(lin.coeff(t) * x); };
    return f;
  }
  throw ParseError(sys.id + ": no dynamics available");
}

/// Linear system for transition/fit/spectrum commands. Polynomial maps are
/// linearized along the zero signal (the variational system at the origin).
inline odeint::LinearSystem linear_of(const LoadedSystem& sys) {
  if (sys.linear) return *sys.linear;
  if (sys.map)
    return odeint::linearize_along(*sys.map,
                                   odeint::PiecewiseSignal::zero(static_cast<int>(sys.map->dim)));
  throw ParseError(sys.id + ": this command needs a linear system (kind linear_closed_form) or a "
                            "polynomial map to linearize at the origin");
}

inline injectivity::ParamFamily family_of(const LoadedSystem& sys) {
  if (sys.family) return *sys.family;
  if (sys.map) {
    const polyalg::ParamPolyMap map = *sys.map;
    injectivity::ParamFamily fam;
    fam.id = sys.id;
    fam.dimension = map.dim;
    fam.domain = "R^" + std::to_string(map.dim);
    fam.exact_map = map;
    fam.evaluator = [map](double t, std::span<const double> x) {
      return map.evaluate_real(t, x);
    };
    fam.validate();
    return fam;
  }
  throw ParseError(sys.id + ": this command needs a parametrized family (builtin or poly_map)");
}

// ---- payload serializers ----

inline json to_json(const dichotomy::DichotomyCertificate& c) {
  json j;
  j["K"] = c.K;
  j["alpha"] = c.alpha;
  j["eps"] = c.eps;
  j["interval_start"] = c.interval_start;
  j["max_slack"] = c.max_slack;
  j["projector_rank"] = c.projector.rank;
  return j;
}

inline json to_json(const dichotomy::InfeasibleWitness& w) {
  json j;
  j["t"] = w.t;
  j["s"] = w.s;
  j["norm"] = w.norm;
  j["alpha"] = w.alpha;
  j["eps"] = w.eps;
  j["note"] = w.note;
  return j;
}

inline json to_json(const dichotomy::FitResult& r) {
  json j;
  j["feasible"] = r.feasible;
  j["detail"] = r.detail;
  if (r.certificate) j["certificate"] = to_json(*r.certificate);
  if (r.witness) j["witness"] = to_json(*r.witness);
  return j;
}

inline json to_json(const injectivity::InjectivityVerdict& v) {
  json j;
  j["notion"] = injectivity::to_string(v.notion);
  j["outcome"] = injectivity::to_string(v.outcome);
  j["method"] = v.method;
  j["detail"] = v.detail;
  j["seed"] = v.seed;
  if (v.witness) {
    json w;
    w["x"] = v.witness->x;
    w["y"] = v.witness->y;
    w["tau"] = v.witness->tau;
    w["t_set"] = v.witness->t_set;
    w["residual"] = v.witness->residual;
    w["exact"] = v.witness->exact;
    w["note"] = v.witness->note;
    j["witness"] = std::move(w);
  }
  if (v.stats) {
    json s;
    s["pairs_sampled"] = v.stats->pairs_sampled;
    s["t_points_checked"] = v.stats->t_points_checked;
    s["taus_covered"] = v.stats->taus_covered;
    s["separations_verified"] = v.stats->separations_verified;
    s["injective_points"] = v.stats->injective_points;
    j["stats"] = std::move(s);
  }
  return j;
}

inline json to_json(const mycheck::HypothesisReport& r) {
  json j;
  json entries = json::array();
  for (const auto& e : r.entries) {
    json ej;
    ej["id"] = e.id;
    ej["status"] = mycheck::to_string(e.status);
    ej["details"] = e.details;
    entries.push_back(std::move(ej));
  }
  j["entries"] = std::move(entries);
  json certs = json::array();
  for (const auto& c : r.iv_certificates) {
    json cj;
    cj["eps"] = c.eps;
    cj["delta"] = c.delta;
    cj["T_omega"] = c.T_omega;
    cj["L_omega"] = c.L_omega;
    cj["max_violation"] = c.max_violation;
    cj["valid"] = c.valid;
    cj["method"] = c.method;
    certs.push_back(std::move(cj));
  }
  j["iv_certificates"] = std::move(certs);
  j["hypotheses_hold"] = r.hypotheses_hold;
  j["summary"] = r.summary;
  return j;
}

inline json to_json(const mycheck::ReproduceReport& r) {
  json j;
  j["id"] = r.id;
  j["all_checks_pass"] = r.all_checks_pass;
  j["summary"] = r.summary;
  json checks = json::array();
  for (const auto& c : r.checks) {
    json cj;
    cj["name"] = c.name;
    cj["pass"] = c.pass;
    cj["detail"] = c.detail;
    checks.push_back(std::move(cj));
  }
  j["checks"] = std::move(checks);
  json facts = json::array();
  for (const auto& [name, value] : r.facts) {
    json fj;
    fj["name"] = name;
    fj["value"] = value;
    facts.push_back(std::move(fj));
  }
  j["facts"] = std::move(facts);
  json verdicts = json::array();
  for (const auto& v : r.verdicts) verdicts.push_back(to_json(v));
  j["verdicts"] = std::move(verdicts);
  return j;
}

}  // namespace detail

// ---- subcommands ----

struct SimulateOptions {
  std::vector<double> x0;
  double t0 = 0.0;
  double tf = 40.0;
  std::size_t samples = 161;  // uniform output grid including both endpoints
  odeint::IntegratorConfig integrator;
};

inline CommandResult run_simulate(const LoadedSystem& sys, const SimulateOptions& opt) {
  const odeint::VectorField field = detail::field_of(sys);
  if (static_cast<int>(opt.x0.size()) != field.dim)
    throw ParseError("simulate: initial state has " + std::to_string(opt.x0.size()) +
                     " entries, system dimension is " + std::to_string(field.dim));
  if (!(opt.tf > opt.t0)) throw ParseError("simulate: need tf > t0");
  if (opt.samples < 2) throw ParseError("simulate: need at least 2 samples");

  odeint::IntegratorConfig cfg = opt.integrator;
  cfg.sample_times = odeint::uniform_grid(opt.t0, opt.tf, opt.samples);
  Eigen::VectorXd x0 = Eigen::Map<const Eigen::VectorXd>(opt.x0.data(), opt.x0.size());
  const odeint::SolveOutcome out = odeint::integrate(field, opt.t0, x0, opt.tf, cfg);

  CommandResult res;
  res.is_csv = true;
  std::string& csv = res.csv;
  csv = "t";
  for (int i = 1; i <= field.dim; ++i) csv += ",x" + std::to_string(i);
  csv += "\n";
  for (std::size_t k = 0; k < out.trajectory.times.size(); ++k) {
    csv += detail::csv_number(out.trajectory.times[k]);
    const Eigen::VectorXd& x = out.trajectory.states[k];
    for (int i = 0; i < x.size(); ++i) csv += "," + detail::csv_number(x(i));
    csv += "\n";
  }
  res.exit_code = out.completed() ? 0 : 1;
  if (!out.completed())
    res.note = std::string("integration stopped: ") +
               (out.kind == odeint::SolveOutcome::Kind::blowup ? "blowup" : "step failure") +
               " at t = " + detail::csv_number(out.stop_time);
  return res;
}

struct TransitionOptions {
  dichotomy::GridSpec grid;
  odeint::IntegratorConfig integrator;
};

inline CommandResult run_transition(const LoadedSystem& sys, const TransitionOptions& opt) {
  const odeint::LinearSystem lin = detail::linear_of(sys);
  const dichotomy::NormSampleGrid grid =
      dichotomy::collect_norm_samples(lin, opt.grid, opt.integrator);
  CommandResult res;
  res.is_csv = true;
  res.csv = "t,s,norm\n";
  for (const auto& e : grid.entries)
    res.csv += detail::csv_number(e.t) + "," + detail::csv_number(e.s) + "," +
               detail::csv_number(e.norm) + "\n";
  return res;
}

struct FitCommandOptions {
  dichotomy::GridSpec grid;
  dichotomy::FitOptions fit;
  odeint::IntegratorConfig integrator;
  bool uniform = false;  // force eps = 0
};

inline CommandResult run_nued_fit(const LoadedSystem& sys, const FitCommandOptions& opt) {
  const odeint::LinearSystem lin = detail::linear_of(sys);
  const dichotomy::NormSampleGrid grid =
      dichotomy::collect_norm_samples(lin, opt.grid, opt.integrator);
  const dichotomy::FitResult fit = opt.uniform
                                       ? dichotomy::check_uniform_fit(grid, opt.fit)
                                       : dichotomy::fit_stability_certificate(grid, opt.fit);
  CommandResult res;
  res.payload = detail::to_json(fit);
  res.payload["grid"] = {{"horizon", grid.horizon},
                         {"s_step", grid.s_step},
                         {"tau_step", grid.tau_step},
                         {"samples", grid.entries.size()}};
  res.payload["uniform"] = opt.uniform;
  res.exit_code = fit.feasible ? 0 : 1;
  return res;
}

inline CommandResult run_spectrum(const LoadedSystem& sys, const dichotomy::SpectrumOptions& opt) {
  const odeint::LinearSystem lin = detail::linear_of(sys);
  const dichotomy::SpectrumEstimate est = dichotomy::estimate_spectrum(lin, opt);
  CommandResult res;
  json intervals = json::array();
  for (const auto& iv : est.intervals) intervals.push_back({{"lo", iv.lo}, {"hi", iv.hi}});
  res.payload["intervals"] = std::move(intervals);
  res.payload["left_unbounded"] = est.left_unbounded;
  res.payload["right_unbounded"] = est.right_unbounded;
  res.payload["low_confidence"] = est.low_confidence;
  res.payload["detail"] = est.detail;
  res.payload["growth"] = {{"feasible", est.growth.feasible},
                           {"M", est.growth.M},
                           {"nu", est.growth.nu},
                           {"delta", est.growth.delta}};
  res.payload["scan"] = {{"lambda_min", est.lambda_min},
                         {"lambda_max", est.lambda_max},
                         {"coarse_step", est.coarse_step},
                         {"bisect_tol", est.bisect_tol}};
  return res;
}

inline CommandResult run_invert(const LoadedSystem& sys) {
  const polyalg::ParamPolyMap& map = detail::map_of(sys);
  CommandResult res;
  polyalg::InverseResult inv;
  try {
    inv = polyalg::formal_inverse(map);
  } catch (const std::exception& ex) {
    throw ParseError(std::string("invert: ") + ex.what());
  }
  switch (inv.status) {
    case polyalg::InverseResult::Status::ok: res.payload["status"] = "ok"; break;
    case polyalg::InverseResult::Status::no_stabilization:
      res.payload["status"] = "no_stabilization";
      break;
    case polyalg::InverseResult::Status::not_invertible:
      res.payload["status"] = "not_invertible";
      break;
  }
  res.payload["iterations"] = inv.iterations;
  if (inv.inverse) {
    const bool left = mycheck::detail::is_identity(polyalg::compose(*inv.inverse, map));
    const bool right = mycheck::detail::is_identity(polyalg::compose(map, *inv.inverse));
    res.payload["inverse"] = system_json(*inv.inverse, sys.id + "_inverse");
    res.payload["composition"] = {{"inverse_after_map_is_identity", left},
                                  {"map_after_inverse_is_identity", right},
                                  {"exact", true}};
    res.exit_code = (left && right) ? 0 : 1;
  } else {
    res.exit_code = 1;
  }
  return res;
}

inline CommandResult run_nilpotency(const LoadedSystem& sys) {
  const polyalg::ParamPolyMap& map = detail::map_of(sys);
  if (!map.linear_coefficient)
    throw ParseError("nilpotency: the map must declare the form lambda*X + H (set \"lambda\")");
  const polyalg::ParamPolyMap h = mycheck::detail::nonlinear_map(map);
  const polyalg::NilpotencyResult r = polyalg::is_nilpotent(polyalg::jacobian(h));
  CommandResult res;
  res.payload["nilpotent"] = r.nilpotent;
  res.payload["index"] = r.index;
  res.payload["matrix_dimension"] = map.dim;
  res.exit_code = r.nilpotent ? 0 : 1;
  return res;
}

inline CommandResult run_injectivity(const LoadedSystem& sys, injectivity::Notion notion,
                                     const injectivity::SearchConfig& cfg) {
  const injectivity::ParamFamily fam = detail::family_of(sys);
  const injectivity::InjectivityVerdict v = injectivity::test_injectivity(fam, notion, cfg);
  CommandResult res;
  res.payload = detail::to_json(v);
  res.exit_code = (v.outcome == injectivity::Outcome::Holds ||
                   v.outcome == injectivity::Outcome::SupportedBySearch)
                      ? 0
                      : 1;
  return res;
}

inline CommandResult run_check_bnnmyc(const LoadedSystem& sys,
                                      const mycheck::HypothesisConfig& cfg) {
  const polyalg::ParamPolyMap& map = detail::map_of(sys);
  const mycheck::HypothesisReport report =
      mycheck::check_hypotheses(map, mycheck::default_omega_suite(map.dim), cfg);
  CommandResult res;
  res.payload = detail::to_json(report);
  res.exit_code = report.hypotheses_hold ? 0 : 1;
  return res;
}

inline CommandResult run_reproduce(const std::string& example, const mycheck::ReproduceOptions& opt) {
  const mycheck::ReproduceReport report = mycheck::reproduce_example(example, opt);
  CommandResult res;
  res.payload = detail::to_json(report);
  res.exit_code = report.all_checks_pass ? 0 : 1;
  return res;
}

}  // namespace nued::cli
