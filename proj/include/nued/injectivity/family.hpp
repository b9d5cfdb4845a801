#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nued/polyalg/poly_map.hpp"

namespace nued::injectivity {

/// The four quantifier arrangements over the parameter t and point pairs.
///   partial:          forall tau, exists t >= tau, F_t injective
///   pseudo_partial:   forall (x,y,tau), exists t >= tau, F_t(x)=F_t(y) => x=y
///   eventual:         exists tau, forall t >= tau, F_t injective
///   pseudo_eventual:  forall (x,y), exists tau, forall t >= tau, F_t(x)=F_t(y) => x=y
enum class Notion { partial, pseudo_partial, eventual, pseudo_eventual };

/// Holds and Falsified are reserved for analytic certificates (symbolic
/// inverses, decidable structure, curated claims); bounded search can only
/// support or fail to resolve a notion, since every quantifier above ranges
/// over an unbounded domain.
enum class Outcome { Holds, Falsified, SupportedBySearch, Inconclusive };

inline const char* to_string(Notion n) {
  switch (n) {
    case Notion::partial: return "partial";
    case Notion::pseudo_partial: return "pseudo_partial";
    case Notion::eventual: return "eventual";
    case Notion::pseudo_eventual: return "pseudo_eventual";
  }
  return "?";
}

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Holds: return "Holds";
    case Outcome::Falsified: return "Falsified";
    case Outcome::SupportedBySearch: return "SupportedBySearch";
    case Outcome::Inconclusive: return "Inconclusive";
  }
  return "?";
}

inline std::optional<Notion> notion_from_string(const std::string& s) {
  if (s == "partial") return Notion::partial;
  if (s == "pseudo_partial") return Notion::pseudo_partial;
  if (s == "eventual") return Notion::eventual;
  if (s == "pseudo_eventual") return Notion::pseudo_eventual;
  return std::nullopt;
}

/// A verified pair x != y with F_t(x) = F_t(y) at one parameter value.
struct CollisionWitness {
  double t = 0.0;
  std::vector<double> x, y;
  double residual = 0.0;  // max-norm of F_t(x) - F_t(y); 0 when exact
  bool exact = false;     // established by exact arithmetic or map structure
  std::string note;
};

/// Evidence defeating one notion: a colliding pair together with the
/// parameter values at which the collision was re-verified and the quantifier
/// threshold it defeats.
struct FalsificationWitness {
  std::vector<double> x, y;
  double tau = 0.0;
  std::vector<double> t_set;  // parameters with verified collisions
  double residual = 0.0;      // worst verified residual over t_set
  bool exact = false;
  std::string note;
};

struct SearchStats {
  std::size_t pairs_sampled = 0;
  std::size_t t_points_checked = 0;
  std::size_t taus_covered = 0;
  std::size_t separations_verified = 0;
  std::size_t injective_points = 0;
};

struct InjectivityVerdict {
  Notion notion = Notion::partial;
  Outcome outcome = Outcome::Inconclusive;
  std::optional<FalsificationWitness> witness;  // present iff Falsified
  std::optional<SearchStats> stats;             // present for searched outcomes
  std::uint64_t seed = 0;                       // reproduction seed
  std::string method;                           // analytic | polynomial_inverse | search
  std::string detail;
};

inline std::vector<double> default_tau_grid() {
  std::vector<double> g;
  for (int k = 0; k <= 10; ++k) g.push_back(static_cast<double>(k));
  return g;
}

/// Bounded stand-in for the unbounded quantifiers: tau ranges over tau_grid,
/// t over [tau, t_horizon] in steps of t_step, and point pairs are sampled.
struct SearchConfig {
  enum class Mode { exact_rational, floating };

  std::vector<double> tau_grid = default_tau_grid();
  double t_horizon = 100.0;
  double t_step = 0.1;
  std::size_t pair_count = 200;
  double pair_scale = 4.0;              // samples drawn uniform on [-scale, scale]^n
  std::uint32_t snap_denominator = 64;  // snap samples to k/den; 0 = exact dyadic
  Mode mode = Mode::exact_rational;
  double float_tol = 1e-10;  // relative equality tolerance in floating mode
  std::uint64_t seed = 20250819;

  void validate() const {
    if (tau_grid.empty()) throw std::invalid_argument("SearchConfig: empty tau grid");
    double tau_max = tau_grid.front();
    for (double tau : tau_grid) {
      if (!(tau >= 0.0)) throw std::invalid_argument("SearchConfig: tau must be >= 0");
      tau_max = std::max(tau_max, tau);
    }
    if (!(t_horizon > tau_max))
      throw std::invalid_argument("SearchConfig: horizon must exceed the largest tau");
    if (!(t_step > 0.0)) throw std::invalid_argument("SearchConfig: t_step must be positive");
    if (pair_count < 1) throw std::invalid_argument("SearchConfig: pair_count must be >= 1");
    if (!(pair_scale > 0.0)) throw std::invalid_argument("SearchConfig: pair_scale must be positive");
    if (!(float_tol > 0.0)) throw std::invalid_argument("SearchConfig: float_tol must be positive");
  }
};

/// Ground-truth statement about one notion, curated with the family
/// definition. Falsified claims must be able to construct a witness that
/// re-verifies by evaluation for any valid config.
struct AnalyticClaim {
  Outcome outcome = Outcome::Holds;  // Holds or Falsified only
  std::string rationale;
  std::function<FalsificationWitness(const SearchConfig&)> make_witness;
};

/// A family of self-maps of R^n parametrized by t >= 0. The evaluator is the
/// authority; the optional exact map and analytic hooks unlock exact and
/// certified decision routes.
struct ParamFamily {
  std::string id;
  std::uint32_t dimension = 0;
  std::string domain;  // human-readable domain descriptor

  std::function<std::vector<double>(double, std::span<const double>)> evaluator;

  /// Symbolic polynomial form, when the family is polynomial with time
  /// entering only through bound parameter symbols.
  std::optional<polyalg::ParamPolyMap> exact_map;

  /// Per-parameter ground truth for injectivity of F_t, when decidable.
  std::function<std::optional<bool>(double)> analytic_injective_at_fn;

  /// Collision constructor for parameters where the decider answers false.
  std::function<CollisionWitness(double)> collision_at;

  std::map<Notion, AnalyticClaim> claims;

  /// Time enters only through bound parameter symbols, so one symbolic map
  /// serves every t.
  std::optional<polyalg::ParamPolyMap> exact_map_at(double) const { return exact_map; }

  std::optional<bool> analytic_injective_at(double t) const {
    if (!analytic_injective_at_fn) return std::nullopt;
    return analytic_injective_at_fn(t);
  }

  void validate() const {
    if (dimension == 0) throw std::invalid_argument("ParamFamily: dimension must be >= 1");
    if (!evaluator) throw std::invalid_argument("ParamFamily: evaluator is required");
    if (exact_map) {
      exact_map->validate();
      if (exact_map->dim != dimension)
        throw std::invalid_argument("ParamFamily: exact map dimension mismatch");
    }
    for (const auto& [notion, claim] : claims) {
      if (claim.outcome != Outcome::Holds && claim.outcome != Outcome::Falsified)
        throw std::invalid_argument("ParamFamily: claims must be Holds or Falsified");
      if (claim.outcome == Outcome::Falsified && !claim.make_witness)
        throw std::invalid_argument("ParamFamily: Falsified claim needs a witness constructor");
    }
  }
};

}  // namespace nued::injectivity
