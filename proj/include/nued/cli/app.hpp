#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nued/cli/commands.hpp"
#include "nued/cli/manifest.hpp"
#include "nued/cli/system_io.hpp"

namespace nued::cli {

namespace detail {

inline std::vector<double> parse_vector(const std::string& text, const std::string& where) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double x = std::stod(item, &used);
      while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
      if (used != item.size()) throw std::invalid_argument(item);
      v.push_back(x);
    } catch (const std::exception&) {
      throw ParseError(where + ": cannot parse \"" + item + "\" as a number");
    }
  }
  if (v.empty()) throw ParseError(where + ": empty vector");
  return v;
}

inline std::string input_fingerprint(const std::string& system_spec) {
  if (system_spec.rfind("builtin:", 0) == 0) return hex64(fnv1a64(system_spec));
  std::ifstream in(system_spec, std::ios::binary);
  if (!in) throw ParseError(system_spec + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return hex64(fnv1a64(buf.str()));
}

/// Defaults file named by NUED_CONFIG (all keys optional):
/// {"seed": N, "grid": {"horizon", "s_step", "tau_step"},
///  "integrator": {"rtol", "atol"}}
struct ConfigDefaults {
  std::uint64_t seed = 20250819;
  dichotomy::GridSpec grid;
  double rtol = odeint::IntegratorConfig{}.rtol;
  double atol = odeint::IntegratorConfig{}.atol;
};

inline ConfigDefaults load_env_defaults() {
  ConfigDefaults d;
  const char* path = std::getenv("NUED_CONFIG");
  if (!path || !*path) return d;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(std::string("NUED_CONFIG=") + path + ": cannot open file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& ex) {
    throw ParseError(std::string("NUED_CONFIG=") + path + ": parse error at byte " +
                     std::to_string(ex.byte) + ": " + ex.what());
  }
  if (j.contains("seed")) d.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("grid")) {
    const json& g = j["grid"];
    if (g.contains("horizon")) d.grid.horizon = g["horizon"].get<double>();
    if (g.contains("s_step")) d.grid.s_step = g["s_step"].get<double>();
    if (g.contains("tau_step")) d.grid.tau_step = g["tau_step"].get<double>();
  }
  if (j.contains("integrator")) {
    const json& g = j["integrator"];
    if (g.contains("rtol")) d.rtol = g["rtol"].get<double>();
    if (g.contains("atol")) d.atol = g["atol"].get<double>();
  }
  return d;
}

/// Write the finished result: JSON reports embed the manifest next to the
/// payload; CSV bodies go to the output file with the manifest as a
/// "<output>.manifest.json" sidecar (timestamps never enter payloads).
inline void emit(const CommandResult& res, const RunManifest& manifest, const std::string& output) {
  if (res.is_csv) {
    if (output.empty())
      throw ParseError("this command writes CSV: pass -o/--output <file> (a "
                       "<file>.manifest.json sidecar is written alongside)");
    std::ofstream out(output, std::ios::binary);
    if (!out) throw ParseError(output + ": cannot open for writing");
    out << res.csv;
    std::ofstream mout(output + ".manifest.json", std::ios::binary);
    if (!mout) throw ParseError(output + ".manifest.json: cannot open for writing");
    mout << manifest.to_json().dump(2) << "\n";
    return;
  }
  json report;
  report["manifest"] = manifest.to_json();
  report["payload"] = res.payload;
  const std::string text = report.dump(2) + "\n";
  if (output.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(output, std::ios::binary);
    if (!out) throw ParseError(output + ": cannot open for writing");
    out << text;
  }
}

}  // namespace detail

/// Build and run the command-line tool. Exit codes: 0 success/pass, 1 a check
/// failed (infeasible fit, falsified notion, failed hypothesis, non-nilpotent,
/// blowup), 2 usage or input errors.
inline int run_cli(int argc, const char* const* argv) {
  using detail::parse_vector;

  detail::ConfigDefaults defaults;
  try {
    defaults = detail::load_env_defaults();
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }

  CLI::App app{"Stability and injectivity toolkit for parametrized polynomial systems"};
  app.require_subcommand(1);

  int exit_code = 0;
  auto guard = [&exit_code](auto&& fn) {
    return [&exit_code, fn]() {
      try {
        exit_code = fn();
      } catch (const ParseError& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        exit_code = 2;
      } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        exit_code = 2;
      }
    };
  };

  // ---- simulate ----
  struct {
    std::string system, x0, output;
    double t0 = 0.0, tf = 40.0;
    std::size_t samples = 161;
    double rtol, atol;
  } sim;
  sim.rtol = defaults.rtol;
  sim.atol = defaults.atol;
  auto* c_sim = app.add_subcommand("simulate", "Integrate x' = F(t, x); write a trajectory CSV (t,x1..xn)");
  c_sim->add_option("--system", sim.system, "description file or builtin:<id>")->required();
  c_sim->add_option("--x0", sim.x0, "initial state, comma-separated")->required();
  c_sim->add_option("--t0", sim.t0, "start time");
  c_sim->add_option("--tf", sim.tf, "final time");
  c_sim->add_option("--samples", sim.samples, "uniform output rows incl. endpoints");
  c_sim->add_option("--rtol", sim.rtol, "relative tolerance");
  c_sim->add_option("--atol", sim.atol, "absolute tolerance");
  c_sim->add_option("-o,--output", sim.output, "CSV path (required)");
  c_sim->callback(guard([&]() {
    const LoadedSystem sys = load_system_spec(sim.system);
    SimulateOptions opt;
    opt.x0 = parse_vector(sim.x0, "--x0");
    opt.t0 = sim.t0;
    opt.tf = sim.tf;
    opt.samples = sim.samples;
    opt.integrator.rtol = sim.rtol;
    opt.integrator.atol = sim.atol;
    const CommandResult res = run_simulate(sys, opt);
    RunManifest m;
    m.command = "simulate";
    m.config = {{"system", sim.system}, {"x0", opt.x0},       {"t0", opt.t0},
                {"tf", opt.tf},         {"samples", opt.samples}, {"rtol", opt.integrator.rtol},
                {"atol", opt.integrator.atol}};
    m.seed = defaults.seed;
    m.input_hash = detail::input_fingerprint(sim.system);
    m.timestamp = iso8601_utc_now();
    detail::emit(res, m, sim.output);
    if (!res.note.empty()) std::cerr << res.note << "\n";
    return res.exit_code;
  }));

  // ---- transition ----
  struct {
    std::string system, output;
    dichotomy::GridSpec grid;
  } tr;
  tr.grid = defaults.grid;
  auto* c_tr = app.add_subcommand("transition", "Sample transition norms ||Phi(t,s)||; write CSV (t,s,norm)");
  c_tr->add_option("--system", tr.system, "description file or builtin:<id>")->required();
  c_tr->add_option("--horizon", tr.grid.horizon, "largest time");
  c_tr->add_option("--s-step", tr.grid.s_step, "base-point step");
  c_tr->add_option("--tau-step", tr.grid.tau_step, "elapsed-time step");
  c_tr->add_option("-o,--output", tr.output, "CSV path (required)");
  c_tr->callback(guard([&]() {
    const LoadedSystem sys = load_system_spec(tr.system);
    TransitionOptions opt;
    opt.grid = tr.grid;
    const CommandResult res = run_transition(sys, opt);
    RunManifest m;
    m.command = "transition";
    m.config = {{"system", tr.system},
                {"horizon", tr.grid.horizon},
                {"s_step", tr.grid.s_step},
                {"tau_step", tr.grid.tau_step}};
    m.seed = defaults.seed;
    m.input_hash = detail::input_fingerprint(tr.system);
    m.timestamp = iso8601_utc_now();
    detail::emit(res, m, tr.output);
    return res.exit_code;
  }));

  // ---- nued-fit ----
  struct {
    std::string system, output;
    dichotomy::GridSpec grid;
    bool uniform = false;
    double alpha_min;
  } fit;
  fit.grid = defaults.grid;
  fit.alpha_min = dichotomy::FitOptions{}.alpha_min;
  auto* c_fit = app.add_subcommand("nued-fit", "Fit a stability certificate K e^{-alpha(t-s)+eps s} to sampled norms");
  c_fit->add_option("--system", fit.system, "description file or builtin:<id>")->required();
  c_fit->add_option("--horizon", fit.grid.horizon, "largest time");
  c_fit->add_option("--s-step", fit.grid.s_step, "base-point step");
  c_fit->add_option("--tau-step", fit.grid.tau_step, "elapsed-time step");
  c_fit->add_flag("--uniform", fit.uniform, "force eps = 0 (uniform bound)");
  c_fit->add_option("--alpha-min", fit.alpha_min, "smallest admissible decay rate");
  c_fit->add_option("-o,--output", fit.output, "report path (default stdout)");
  c_fit->callback(guard([&]() {
    const LoadedSystem sys = load_system_spec(fit.system);
    FitCommandOptions opt;
    opt.grid = fit.grid;
    opt.uniform = fit.uniform;
    opt.fit.alpha_min = fit.alpha_min;
    const CommandResult res = run_nued_fit(sys, opt);
    RunManifest m;
    m.command = "nued-fit";
    m.config = {{"system", fit.system},   {"horizon", fit.grid.horizon},
                {"s_step", fit.grid.s_step}, {"tau_step", fit.grid.tau_step},
                {"uniform", fit.uniform}, {"alpha_min", fit.alpha_min}};
    m.seed = defaults.seed;
    m.input_hash = detail::input_fingerprint(fit.system);
    m.timestamp = iso8601_utc_now();
    detail::emit(res, m, fit.output);
    return res.exit_code;
  }));

  // ---- spectrum ----
  struct {
    std::string system, output;
    dichotomy::SpectrumOptions opts;
  } sp;
  sp.opts.grid = defaults.grid;
  auto* c_sp = app.add_subcommand("spectrum", "Estimate the dichotomy spectrum as closed intervals");
  c_sp->add_option("--system", sp.system, "description file or builtin:<id>")->required();
  c_sp->add_option("--lambda-min", sp.opts.lambda_min, "scan lower edge");
  c_sp->add_option("--lambda-max", sp.opts.lambda_max, "scan upper edge");
  c_sp->add_option("--coarse-step", sp.opts.coarse_step, "coarse scan step");
  c_sp->add_option("--bisect-tol", sp.opts.bisect_tol, "endpoint bisection tolerance");
  c_sp->add_option("--horizon", sp.opts.grid.horizon, "norm-sampling horizon");
  c_sp->add_option("-o,--output", sp.output, "report path (default stdout)");
  c_sp->callback(guard([&]() {
    const LoadedSystem sys = load_system_spec(sp.system);
    const CommandResult res = run_spectrum(sys, sp.opts);
    RunManifest m;
    m.command = "spectrum";
    m.config = {{"system", sp.system},
                {"lambda_min", sp.opts.lambda_min},
                {"lambda_max", sp.opts.lambda_max},
                {"coarse_step", sp.opts.coarse_step},
                {"bisect_tol", sp.opts.bisect_tol},
                {"horizon", sp.opts.grid.horizon}};
    m.seed = defaults.seed;
    m.input_hash = detail::input_fingerprint(sp.system);
    m.timestamp = iso8601_utc_now();
    detail::emit(res, m, sp.output);
    return res.exit_code;
  }));

  // ---- invert ----
  struct {
    std::string system, output;
  } inv;
  auto* c_inv = app.add_subcommand("invert", "Formal polynomial inverse with exact composition check");
  c_inv->add_option("--system", inv.system, "description file or builtin:<id>")->required();
  c_inv->add_option("-o,--output", inv.output, "report path (default stdout)");
  c_inv->callback(guard([&]() {
    const LoadedSystem sys = load_system_spec(inv.system);
    const CommandResult res = run_invert(sys);
    RunManifest m;
    m.command = "invert";
    m.config = {{"system", inv.system}};
    m.seed = defaults.seed;
    m.input_hash = detail::input_fingerprint(inv.system);
    m.timestamp = iso8601_utc_now();
    detail::emit(res, m, inv.output);
    return res.exit_code;
  }));

  // ---- nilpotency ----
  struct {
    std::string system, output;
  } nil;
  auto* c_nil = app.add_subcommand("nilpotency", "Exact nilpotency of the cubic part's Jacobian (bool + index)");
  c_nil->add_option("--system", nil.system, "description file or builtin:<id>")->required();
  c_nil->add_option("-o,--output", nil.output, "report path (default stdout)");
  c_nil->callback(guard([&]() {
    const LoadedSystem sys = load_system_spec(nil.system);
    const CommandResult res = run_nilpotency(sys);
    RunManifest m;
    m.command = "nilpotency";
    m.config = {{"system", nil.system}};
    m.seed = defaults.seed;
    m.input_hash = detail::input_fingerprint(nil.system);
    m.timestamp = iso8601_utc_now();
    detail::emit(res, m, nil.output);
    return res.exit_code;
  }));

  // ---- injectivity ----
  struct {
    std::string system, notion, output, mode = "exact";
    std::uint64_t seed;
    double t_horizon;
    std::size_t pairs;
  } inj;
  {
    injectivity::SearchConfig d;
    inj.seed = defaults.seed;
    inj.t_horizon = d.t_horizon;
    inj.pairs = d.pair_count;
  }
  auto* c_inj = app.add_subcommand("injectivity", "Decide one parametrized-injectivity notion");
  c_inj->add_option("--system", inj.system, "description file or builtin:<id>")->required();
  c_inj->add_option("--notion", inj.notion,
                    "partial | pseudo_partial | eventual | pseudo_eventual")
      ->required();
  c_inj->add_option("--seed", inj.seed, "search seed");
  c_inj->add_option("--t-horizon", inj.t_horizon, "largest parameter value searched");
  c_inj->add_option("--pairs", inj.pairs, "sampled point pairs");
  c_inj->add_option("--mode", inj.mode, "exact | floating")
      ->check(CLI::IsMember({"exact", "floating"}));
  c_inj->add_option("-o,--output", inj.output, "report path (default stdout)");
  c_inj->callback(guard([&]() {
    const LoadedSystem sys = load_system_spec(inj.system);
    const auto notion = injectivity::notion_from_string(inj.notion);
    if (!notion)
      throw ParseError("--notion: expected partial, pseudo_partial, eventual, or pseudo_eventual");
    injectivity::SearchConfig cfg;
    cfg.seed = inj.seed;
    cfg.t_horizon = inj.t_horizon;
    cfg.pair_count = inj.pairs;
    cfg.mode = inj.mode == "floating" ? injectivity::SearchConfig::Mode::floating
                                      : injectivity::SearchConfig::Mode::exact_rational;
    const CommandResult res = run_injectivity(sys, *notion, cfg);
    RunManifest m;
    m.command = "injectivity";
    m.config = {{"system", inj.system}, {"notion", inj.notion},     {"seed", inj.seed},
                {"t_horizon", inj.t_horizon}, {"pairs", inj.pairs}, {"mode", inj.mode}};
    m.seed = inj.seed;
    m.input_hash = detail::input_fingerprint(inj.system);
    m.timestamp = iso8601_utc_now();
    detail::emit(res, m, inj.output);
    return res.exit_code;
  }));

  // ---- check-bnnmyc ----
  struct {
    std::string system, output;
    double delta = -1.0;  // < 0: library default (-lambda/2)
    double eps = 0.0;
    double iv_horizon;
    std::uint64_t seed;
  } chk;
  {
    mycheck::HypothesisConfig d;
    chk.iv_horizon = d.iv.horizon;
    chk.seed = defaults.seed;
  }
  auto* c_chk = app.add_subcommand(
      "check-bnnmyc", "Run the bounded nonuniform hypothesis battery on a map lambda*X + H");
  c_chk->add_option("--system", chk.system, "description file or builtin:<id>")->required();
  c_chk->add_option("--delta", chk.delta, "perturbation budget (default -lambda/2)");
  c_chk->add_option("--eps", chk.eps, "decay exponent for the per-signal bounds");
  c_chk->add_option("--iv-horizon", chk.iv_horizon, "validation horizon for the bounds");
  c_chk->add_option("--seed", chk.seed, "seed for sampled probes");
  c_chk->add_option("-o,--output", chk.output, "report path (default stdout)");
  c_chk->callback(guard([&]() {
    const LoadedSystem sys = load_system_spec(chk.system);
    mycheck::HypothesisConfig cfg;
    if (chk.delta > 0.0) cfg.delta = chk.delta;
    cfg.eps_iv = chk.eps;
    cfg.iv.horizon = chk.iv_horizon;
    cfg.seed = chk.seed;
    cfg.grid = defaults.grid;
    const CommandResult res = run_check_bnnmyc(sys, cfg);
    RunManifest m;
    m.command = "check-bnnmyc";
    m.config = {{"system", chk.system},
                {"delta", chk.delta > 0.0 ? json(chk.delta) : json("default")},
                {"eps", chk.eps},
                {"iv_horizon", chk.iv_horizon},
                {"grid_horizon", defaults.grid.horizon},
                {"seed", chk.seed}};
    m.seed = chk.seed;
    m.input_hash = detail::input_fingerprint(chk.system);
    m.timestamp = iso8601_utc_now();
    detail::emit(res, m, chk.output);
    return res.exit_code;
  }));

  // ---- reproduce ----
  struct {
    std::string example, output;
    std::uint64_t seed;
  } rep;
  rep.seed = defaults.seed;
  auto* c_rep = app.add_subcommand("reproduce", "Re-derive one worked example end to end");
  c_rep->add_option("--example", rep.example, "3.2 | 3.3 | 3.4 | 4.2")
      ->required()
      ->check(CLI::IsMember({"3.2", "3.3", "3.4", "4.2"}));
  c_rep->add_option("--seed", rep.seed, "seed for sampled probes");
  c_rep->add_option("-o,--output", rep.output, "report path (default stdout)");
  c_rep->callback(guard([&]() {
    mycheck::ReproduceOptions opt;
    opt.seed = rep.seed;
    opt.search.seed = rep.seed;
    const CommandResult res = run_reproduce(rep.example, opt);
    RunManifest m;
    m.command = "reproduce";
    m.config = {{"example", rep.example}, {"seed", rep.seed}};
    m.seed = rep.seed;
    m.input_hash = hex64(fnv1a64("reproduce:" + rep.example));
    m.timestamp = iso8601_utc_now();
    detail::emit(res, m, rep.output);
    return res.exit_code;
  }));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return exit_code;
}

}  // namespace nued::cli
