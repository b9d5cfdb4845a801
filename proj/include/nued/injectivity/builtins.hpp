#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nued/injectivity/family.hpp"
#include "nued/polyalg/families.hpp"

namespace nued::injectivity {

namespace detail {

inline ParamFamily wrap_poly_family(std::string id, polyalg::ParamPolyMap map,
                                    std::string domain) {
  ParamFamily fam;
  fam.id = std::move(id);
  fam.dimension = map.dim;
  fam.domain = std::move(domain);
  fam.exact_map = std::move(map);
  fam.evaluator = [m = *fam.exact_map](double t, std::span<const double> x) {
    return m.evaluate_real(t, x);
  };
  return fam;
}

}  // namespace detail

/// Scalar two-branch family: F_t(x) = 0 for t < x, tx for t >= x. Every t
/// collapses the tail x > t to 0, so no single map is injective, yet any
/// fixed pair is separated once t passes max(x, y, 1).
inline ParamFamily example_3_2_family() {
  ParamFamily fam;
  fam.id = "example_3_2";
  fam.dimension = 1;
  fam.domain = "R, parameter t >= 0";
  fam.evaluator = [](double t, std::span<const double> x) {
    return std::vector<double>{t < x[0] ? 0.0 : t * x[0]};
  };
  fam.analytic_injective_at_fn = [](double) { return std::optional<bool>(false); };
  fam.collision_at = [](double t) {
    CollisionWitness w;
    w.t = t;
    w.x = {t + 1.0};
    w.y = {t + 2.0};
    w.residual = 0.0;
    w.exact = true;
    w.note = "both points exceed t, so both map to 0";
    return w;
  };

  auto never_injective_witness = [](const SearchConfig& cfg) {
    FalsificationWitness w;
    w.x = {cfg.t_horizon + 1.0};
    w.y = {cfg.t_horizon + 2.0};
    w.tau = cfg.tau_grid.front();
    w.t_set = cfg.tau_grid;
    w.residual = 0.0;
    w.exact = true;
    w.note = "the pair exceeds every parameter in the window, so both points map to 0";
    return w;
  };
  fam.claims[Notion::partial] = {
      Outcome::Falsified,
      "for every t the tail x > t maps to 0, so no parameter gives an injective map",
      never_injective_witness};
  fam.claims[Notion::eventual] = {
      Outcome::Falsified,
      "no parameter gives an injective map, so no tau can start an injective tail",
      never_injective_witness};
  fam.claims[Notion::pseudo_partial] = {
      Outcome::Holds,
      "for any pair and tau, every t >= max(x, y, tau, 1) acts linearly with slope t > 0 "
      "and separates the pair",
      nullptr};
  fam.claims[Notion::pseudo_eventual] = {
      Outcome::Holds,
      "tau = max(x, y, 1) separates the pair at every later parameter",
      nullptr};
  return fam;
}

/// Coupled cubic three-variable family with a shared exponential decay
/// weight; a symbolic polynomial inverse exists, so every notion holds.
inline ParamFamily example_3_3_family() {
  return detail::wrap_poly_family("example_3_3", polyalg::sum_coupled_cubic_map(),
                                  "R^3, parameter t >= 0");
}

/// Scalar linear family F_t(x) = [lambda0 + a t sin(t)] x with
/// lambda0 < a < 0. Injective exactly where the coefficient is nonzero; the
/// root set is unbounded with isolated points, so the family is partially but
/// not eventually injective.
inline ParamFamily example_3_4_family(double lambda0 = -4.0, double a = -1.0) {
  if (!(lambda0 < a && a < 0.0))
    throw std::invalid_argument("example_3_4_family: parameters must satisfy lambda0 < a < 0");

  ParamFamily fam;
  fam.id = "example_3_4";
  fam.dimension = 1;
  fam.domain = "R, parameter t >= 0";
  auto coefficient = [lambda0, a](double t) { return lambda0 + a * t * std::sin(t); };
  fam.evaluator = [coefficient](double t, std::span<const double> x) {
    return std::vector<double>{coefficient(t) * x[0]};
  };
  // A scalar linear map is injective iff its coefficient is nonzero. Numeric
  // root refinement cannot represent exact roots, so magnitudes within
  // rounding range of the coefficient scale count as zero.
  auto zero_tol = [lambda0, a](double t) {
    return 1e-12 * (std::abs(lambda0) + std::abs(a) * std::max(t, 1.0));
  };
  fam.analytic_injective_at_fn = [coefficient, zero_tol](double t) {
    return std::optional<bool>(std::abs(coefficient(t)) > zero_tol(t));
  };
  fam.collision_at = [coefficient](double t) {
    CollisionWitness w;
    w.t = t;
    w.x = {0.0};
    w.y = {1.0};
    w.residual = std::abs(coefficient(t));
    w.exact = false;
    w.note = "the coefficient vanishes at this parameter, collapsing the map";
    return w;
  };

  // First coefficient root past tau, refined by bisection. The coefficient
  // dips below zero on every period once a t sin(t) reaches lambda0, so roots
  // exist beyond any tau.
  auto first_root_after = [coefficient](double tau, double step, double limit) {
    double prev_t = tau;
    double prev_v = coefficient(prev_t);
    for (double t = tau + step; t <= limit; t += step) {
      const double v = coefficient(t);
      if (prev_v == 0.0) return std::optional<double>(prev_t);
      if ((prev_v < 0.0) != (v < 0.0)) {
        double lo = prev_t, hi = t;
        for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
          const double mid = 0.5 * (lo + hi);
          if (mid <= lo || mid >= hi) break;
          ((coefficient(mid) < 0.0) == (prev_v < 0.0) ? lo : hi) = mid;
        }
        return std::optional<double>(std::abs(coefficient(lo)) < std::abs(coefficient(hi))
                                         ? lo
                                         : hi);
      }
      prev_t = t;
      prev_v = v;
    }
    return std::optional<double>();
  };
  auto root_witness = [first_root_after](const SearchConfig& cfg) {
    FalsificationWitness w;
    w.x = {0.0};
    w.y = {1.0};
    w.exact = false;
    w.note = "coefficient roots past every tau collapse the map to zero";
    for (double tau : cfg.tau_grid) {
      const auto root = first_root_after(tau, cfg.t_step, cfg.t_horizon);
      if (!root)
        throw std::logic_error("example_3_4_family: no coefficient root in the window");
      w.tau = std::max(w.tau, tau);
      if (w.t_set.empty() || std::abs(w.t_set.back() - *root) > 1e-9)
        w.t_set.push_back(*root);
    }
    return w;
  };
  fam.claims[Notion::partial] = {
      Outcome::Holds,
      "the coefficient's zero set is unbounded but made of isolated points, so injective "
      "parameters exist beyond every tau",
      nullptr};
  fam.claims[Notion::pseudo_partial] = {
      Outcome::Holds,
      "any t >= tau off the coefficient's zero set separates a fixed pair",
      nullptr};
  fam.claims[Notion::eventual] = {
      Outcome::Falsified,
      "the coefficient vanishes somewhere past every tau, collapsing the whole map there",
      root_witness};
  fam.claims[Notion::pseudo_eventual] = {
      Outcome::Falsified,
      "for any fixed pair, coefficient roots past every tau collide the pair",
      root_witness};
  return fam;
}

/// Cubic triangular family with decay-weighted nonlinearity and linear
/// coefficient lambda < 0; symbolically invertible for every t.
inline ParamFamily example_4_2_family(polyalg::Rational lambda = polyalg::Rational(-1)) {
  if (sgn(lambda) >= 0)
    throw std::invalid_argument("example_4_2_family: lambda must be negative");
  return detail::wrap_poly_family("example_4_2",
                                  polyalg::nilpotent_cubic_map(std::move(lambda)),
                                  "R^3, parameter t >= 0");
}

/// Autonomous scalar fold x - x^3: never injective (0 and 1 share image 0),
/// independent of t.
inline ParamFamily noninjective_demo_family() {
  ParamFamily fam = detail::wrap_poly_family("noninjective_demo",
                                             polyalg::scalar_cubic_fold_map(), "R");
  fam.analytic_injective_at_fn = [](double) { return std::optional<bool>(false); };
  fam.collision_at = [](double t) {
    CollisionWitness w;
    w.t = t;
    w.x = {0.0};
    w.y = {1.0};
    w.residual = 0.0;
    w.exact = true;
    w.note = "0 and 1 share the image 0";
    return w;
  };
  auto pair_witness = [](const SearchConfig& cfg) {
    FalsificationWitness w;
    w.x = {0.0};
    w.y = {1.0};
    w.tau = cfg.tau_grid.front();
    w.t_set = cfg.tau_grid;
    w.residual = 0.0;
    w.exact = true;
    w.note = "the map does not depend on t and sends both 0 and 1 to 0";
    return w;
  };
  const char* rationale = "x - x^3 identifies 0 and 1 at every parameter";
  fam.claims[Notion::partial] = {Outcome::Falsified, rationale, pair_witness};
  fam.claims[Notion::pseudo_partial] = {Outcome::Falsified, rationale, pair_witness};
  fam.claims[Notion::eventual] = {Outcome::Falsified, rationale, pair_witness};
  fam.claims[Notion::pseudo_eventual] = {Outcome::Falsified, rationale, pair_witness};
  return fam;
}

inline std::vector<std::string> builtin_family_ids() {
  return {"example_3_2", "example_3_3", "example_3_4", "example_4_2", "noninjective_demo"};
}

/// Registry entry point with default parameters per id.
inline ParamFamily builtin_family(const std::string& id) {
  if (id == "example_3_2") return example_3_2_family();
  if (id == "example_3_3") return example_3_3_family();
  if (id == "example_3_4") return example_3_4_family();
  if (id == "example_4_2") return example_4_2_family();
  if (id == "noninjective_demo") return noninjective_demo_family();
  throw std::invalid_argument("builtin_family: unknown id: " + id);
}

}  // namespace nued::injectivity
