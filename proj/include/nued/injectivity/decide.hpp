#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nued/injectivity/family.hpp"
#include "nued/polyalg/operations.hpp"
#include "nued/rng.hpp"

namespace nued::injectivity {

namespace detail {

inline polyalg::Rational snap_to_rational(double v, std::uint32_t den) {
  if (den == 0) return polyalg::Rational(v);  // exact dyadic conversion
  const double scaled = std::round(v * static_cast<double>(den));
  return polyalg::make_rational(static_cast<long>(scaled), static_cast<long>(den));
}

struct SampledPair {
  std::vector<double> x, y;             // float view (of the snapped values)
  std::vector<polyalg::Rational> xr, yr;
};

inline std::vector<SampledPair> sample_pairs(std::uint32_t dim, const SearchConfig& cfg,
                                             Rng& rng) {
  std::vector<SampledPair> pairs;
  pairs.reserve(cfg.pair_count);
  while (pairs.size() < cfg.pair_count) {
    SampledPair p;
    p.xr.reserve(dim);
    p.yr.reserve(dim);
    for (std::uint32_t j = 0; j < dim; ++j) {
      p.xr.push_back(snap_to_rational(rng.uniform(-cfg.pair_scale, cfg.pair_scale),
                                      cfg.snap_denominator));
      p.yr.push_back(snap_to_rational(rng.uniform(-cfg.pair_scale, cfg.pair_scale),
                                      cfg.snap_denominator));
    }
    if (p.xr == p.yr) continue;  // need x != y; redraw
    for (std::uint32_t j = 0; j < dim; ++j) {
      p.x.push_back(p.xr[j].get_d());
      p.y.push_back(p.yr[j].get_d());
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

/// Exact fate of one pair under a polynomial map whose parameters are all
/// exponential decays: the coordinatewise image difference is a finite sum
/// sum_r C_r e^{-r t} with rational rates and Gaussian-rational coefficients,
/// which vanishes at some t > 0 only if it vanishes identically (exponentials
/// with distinct rational rates admit no nontrivial rational vanishing
/// combination at a rational point, and every double is rational).
struct PairResolution {
  bool exact = false;                   // exact route applied
  bool separated_for_positive_t = false;
  bool collides_at_zero = false;        // exact collision at t = 0
  bool collides_for_all_t = false;
};

inline PairResolution resolve_pair_exact(const polyalg::ParamPolyMap& map,
                                         std::span<const polyalg::Rational> x,
                                         std::span<const polyalg::Rational> y) {
  PairResolution res;
  for (const auto& b : map.bindings)
    if (b.kind != polyalg::BindingKind::exp_decay) return res;  // float fallback

  std::vector<polyalg::GaussianRational> xg(x.begin(), x.end()), yg(y.begin(), y.end());
  const auto fx = map.evaluate_exact(xg);
  const auto fy = map.evaluate_exact(yg);

  res.exact = true;
  bool any_rate_group = false;       // some coordinate difference is a nonzero sum
  bool zero_value_nonzero = false;   // the t = 0 value separates
  for (std::uint32_t j = 0; j < map.dim; ++j) {
    const polyalg::Poly diff = fx[j] - fy[j];
    // Group the parameter monomials by total decay rate; merged groups are
    // the true coefficients C_r of the time function.
    std::map<double, polyalg::GaussianRational> groups;
    for (const auto& [mono, coeff] : diff.terms) {
      double rate = 0.0;
      for (const auto& [sym, e] : mono.params) rate += map.find_binding(sym)->rate * e;
      groups[rate] += coeff;
    }
    polyalg::GaussianRational at_zero;  // sum of all C_r
    for (const auto& [rate, c] : groups) {
      if (!c.is_zero()) any_rate_group = true;
      at_zero += c;
    }
    if (!at_zero.is_zero()) zero_value_nonzero = true;
  }
  if (!any_rate_group) {
    res.collides_for_all_t = true;
    return res;
  }
  res.separated_for_positive_t = true;
  res.collides_at_zero = !zero_value_nonzero;
  return res;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

/// Relative equality test used in floating mode.
inline bool float_collides(const ParamFamily& fam, double t, std::span<const double> x,
                           std::span<const double> y, double tol, double* residual = nullptr) {
  const auto fx = fam.evaluator(t, x);
  const auto fy = fam.evaluator(t, y);
  const double diff = max_abs_diff(fx, fy);
  if (residual) *residual = diff;
  const double scale = std::max({1.0, max_abs(fx), max_abs(fy)});
  return diff <= tol * scale;
}

}  // namespace detail

/// Outcome of deciding injectivity of the single map F_t.
struct PointInjectivity {
  enum class Status { injective, collision, inconclusive };
  Status status = Status::inconclusive;
  std::optional<CollisionWitness> witness;  // present for collision
  std::string method;                       // analytic | polynomial_inverse | search
};

/// Re-evaluate a falsification witness against the family. True when the pair
/// is distinct and collides (within mode tolerance) at every listed parameter.
inline bool verify_witness(const ParamFamily& fam, const FalsificationWitness& w,
                           const SearchConfig& cfg) {
  if (w.t_set.empty()) return false;
  if (w.x.size() != fam.dimension || w.y.size() != fam.dimension) return false;
  if (detail::max_abs_diff(w.x, w.y) == 0.0) return false;
  for (double t : w.t_set)
    if (!detail::float_collides(fam, t, w.x, w.y, cfg.float_tol)) return false;
  return true;
}

/// Injectivity of the single map F_t. Precedence: analytic decider, then a
/// symbolic polynomial inverse (which certifies injectivity for every t),
/// then randomized collision search. Search cannot certify injectivity, so
/// its non-collision outcome is inconclusive.
inline PointInjectivity injective_at(const ParamFamily& fam, double t,
                                     const SearchConfig& cfg = {}) {
  fam.validate();
  cfg.validate();
  PointInjectivity res;

  if (auto verdict = fam.analytic_injective_at(t)) {
    res.method = "analytic";
    if (*verdict) {
      res.status = PointInjectivity::Status::injective;
      return res;
    }
    if (fam.collision_at) {
      CollisionWitness w = fam.collision_at(t);
      double residual = 0.0;
      if (!detail::float_collides(fam, t, w.x, w.y, cfg.float_tol, &residual))
        throw std::logic_error("injective_at: curated collision failed to re-verify");
      w.residual = residual;
      res.status = PointInjectivity::Status::collision;
      res.witness = std::move(w);
      return res;
    }
    // Decider says non-injective but offers no pair; fall through to search.
  }

  if (fam.exact_map && fam.exact_map->linear_coefficient &&
      sgn(*fam.exact_map->linear_coefficient) != 0) {
    const auto inv = polyalg::formal_inverse(*fam.exact_map);
    if (inv.status == polyalg::InverseResult::Status::ok) {
      res.status = PointInjectivity::Status::injective;
      res.method = "polynomial_inverse";
      return res;
    }
  }

  Rng rng(cfg.seed);
  const auto pairs = detail::sample_pairs(fam.dimension, cfg, rng);
  for (const auto& p : pairs) {
    if (fam.exact_map && cfg.mode == SearchConfig::Mode::exact_rational) {
      const auto fate = detail::resolve_pair_exact(*fam.exact_map, p.xr, p.yr);
      if (fate.exact) {
        const bool collides = fate.collides_for_all_t || (t == 0.0 && fate.collides_at_zero);
        if (collides) {
          res.status = PointInjectivity::Status::collision;
          res.method = "search";
          res.witness = CollisionWitness{t, p.x, p.y, 0.0, true,
                                         fate.collides_for_all_t
                                             ? "images coincide identically in t"
                                             : "images coincide exactly at t = 0"};
          return res;
        }
        continue;
      }
    }
    double residual = 0.0;
    if (detail::float_collides(fam, t, p.x, p.y, cfg.float_tol, &residual)) {
      res.status = PointInjectivity::Status::collision;
      res.method = "search";
      res.witness =
          CollisionWitness{t, p.x, p.y, residual, false, "collision within float tolerance"};
      return res;
    }
  }
  res.status = PointInjectivity::Status::inconclusive;
  res.method = "search";
  return res;
}

namespace detail {

inline InjectivityVerdict claim_verdict(const ParamFamily& fam, Notion notion,
                                        const AnalyticClaim& claim, const SearchConfig& cfg) {
  InjectivityVerdict v;
  v.notion = notion;
  v.outcome = claim.outcome;
  v.seed = cfg.seed;
  v.method = "analytic";
  v.detail = claim.rationale;
  if (claim.outcome == Outcome::Falsified) {
    FalsificationWitness w = claim.make_witness(cfg);
    if (!verify_witness(fam, w, cfg))
      throw std::logic_error("test_injectivity: analytic witness failed to re-verify for " +
                             fam.id);
    v.witness = std::move(w);
  }
  return v;
}

/// Scan [tau, horizon] for a t the analytic decider marks injective.
inline std::optional<double> first_injective_t(const ParamFamily& fam, double tau,
                                               const SearchConfig& cfg, SearchStats& stats) {
  for (double t = tau; t <= cfg.t_horizon + 1e-12; t += cfg.t_step) {
    ++stats.t_points_checked;
    const auto verdict = fam.analytic_injective_at(t);
    if (!verdict) return std::nullopt;  // no decider: nothing certifies a point
    if (*verdict) {
      ++stats.injective_points;
      return t;
    }
  }
  return std::nullopt;
}

inline FalsificationWitness all_t_collision_witness(const SampledPair& p,
                                                    const SearchConfig& cfg) {
  FalsificationWitness w;
  w.x = p.x;
  w.y = p.y;
  w.tau = cfg.tau_grid.front();
  w.t_set = cfg.tau_grid;
  w.residual = 0.0;
  w.exact = true;
  w.note = "images of the pair coincide identically in t";
  return w;
}

inline InjectivityVerdict search_verdict(const ParamFamily& fam, Notion notion,
                                         const SearchConfig& cfg) {
  InjectivityVerdict v;
  v.notion = notion;
  v.seed = cfg.seed;
  v.method = "search";
  SearchStats stats;

  const bool point_notion = notion == Notion::partial || notion == Notion::eventual;
  if (point_notion) {
    // partial: every tau needs some injective t >= tau.
    // eventual: some tau needs every sampled t >= tau injective.
    if (!fam.analytic_injective_at_fn) {
      // A pair colliding identically in t proves no parameter is injective,
      // which decisively falsifies both point notions.
      if (fam.exact_map && cfg.mode == SearchConfig::Mode::exact_rational) {
        Rng rng(cfg.seed);
        const auto pairs = sample_pairs(fam.dimension, cfg, rng);
        stats.pairs_sampled = pairs.size();
        for (const auto& p : pairs) {
          const auto fate = resolve_pair_exact(*fam.exact_map, p.xr, p.yr);
          if (!fate.exact) break;
          if (fate.collides_for_all_t) {
            v.outcome = Outcome::Falsified;
            v.witness = all_t_collision_witness(p, cfg);
            if (!verify_witness(fam, *v.witness, cfg))
              throw std::logic_error("test_injectivity: exact collision failed to re-verify");
            v.detail = "no parameter is injective: a sampled pair collides identically in t";
            v.stats = stats;
            return v;
          }
        }
      }
      v.outcome = Outcome::Inconclusive;
      v.detail = "bounded search cannot certify pointwise injectivity without a decider";
      v.stats = stats;
      return v;
    }
    if (notion == Notion::partial) {
      for (double tau : cfg.tau_grid) {
        if (!first_injective_t(fam, tau, cfg, stats)) {
          v.outcome = Outcome::Inconclusive;
          v.detail = "no injective parameter found in the window above tau = " +
                     std::to_string(tau);
          v.stats = stats;
          return v;
        }
        ++stats.taus_covered;
      }
      v.outcome = Outcome::SupportedBySearch;
      v.detail = "every tau in the grid admits an injective parameter in the window";
    } else {
      for (double tau : cfg.tau_grid) {
        bool all_injective = true;
        for (double t = tau; t <= cfg.t_horizon + 1e-12; t += cfg.t_step) {
          ++stats.t_points_checked;
          const auto verdict = fam.analytic_injective_at(t);
          if (!verdict || !*verdict) {
            all_injective = false;
            break;
          }
          ++stats.injective_points;
        }
        if (all_injective) {
          v.outcome = Outcome::SupportedBySearch;
          v.detail = "all sampled parameters above tau = " + std::to_string(tau) +
                     " are injective";
          v.stats = stats;
          return v;
        }
        ++stats.taus_covered;
      }
      v.outcome = Outcome::Inconclusive;
      v.detail = "non-injective parameters found beyond every tau in the grid; "
                 "the unbounded quantifier cannot be refuted by bounded search";
    }
    v.stats = stats;
    return v;
  }

  // Pseudo notions quantify over sampled pairs.
  Rng rng(cfg.seed);
  const auto pairs = sample_pairs(fam.dimension, cfg, rng);
  stats.pairs_sampled = pairs.size();
  const bool exact_route =
      fam.exact_map && cfg.mode == SearchConfig::Mode::exact_rational;

  for (const auto& p : pairs) {
    if (exact_route) {
      const auto fate = resolve_pair_exact(*fam.exact_map, p.xr, p.yr);
      if (fate.exact) {
        if (fate.collides_for_all_t) {
          // Decisive for both pseudo notions: this pair is never separated.
          v.outcome = Outcome::Falsified;
          v.witness = all_t_collision_witness(p, cfg);
          if (!verify_witness(fam, *v.witness, cfg))
            throw std::logic_error("test_injectivity: exact collision failed to re-verify");
          v.detail = "sampled pair collides identically in t";
          v.stats = stats;
          return v;
        }
        // Separated at every t > 0: any tau is served by t = max(tau, step).
        if (notion == Notion::pseudo_partial) {
          stats.separations_verified += cfg.tau_grid.size();
        } else {
          const bool needs_positive_tau = fate.collides_at_zero;
          const bool tau_available =
              !needs_positive_tau ||
              std::any_of(cfg.tau_grid.begin(), cfg.tau_grid.end(),
                          [](double tau) { return tau > 0.0; });
          if (!tau_available) {
            v.outcome = Outcome::Inconclusive;
            v.detail = "a pair collides exactly at t = 0 and the grid has no positive tau";
            v.stats = stats;
            return v;
          }
          ++stats.separations_verified;
        }
        continue;
      }
    }
    if (notion == Notion::pseudo_partial) {
      for (double tau : cfg.tau_grid) {
        bool separated = false;
        for (double t = tau; t <= cfg.t_horizon + 1e-12; t += cfg.t_step) {
          ++stats.t_points_checked;
          if (!float_collides(fam, t, p.x, p.y, cfg.float_tol)) {
            separated = true;
            ++stats.separations_verified;
            break;
          }
        }
        if (!separated) {
          v.outcome = Outcome::Inconclusive;
          v.detail = "a sampled pair stayed within tolerance of collision over the whole "
                     "window above tau = " + std::to_string(tau);
          v.stats = stats;
          return v;
        }
      }
    } else {  // pseudo_eventual
      bool served = false;
      for (double tau : cfg.tau_grid) {
        bool all_separated = true;
        for (double t = tau; t <= cfg.t_horizon + 1e-12; t += cfg.t_step) {
          ++stats.t_points_checked;
          if (float_collides(fam, t, p.x, p.y, cfg.float_tol)) {
            all_separated = false;
            break;
          }
        }
        if (all_separated) {
          served = true;
          ++stats.separations_verified;
          break;
        }
      }
      if (!served) {
        v.outcome = Outcome::Inconclusive;
        v.detail = "no tau in the grid separated a sampled pair at every later parameter";
        v.stats = stats;
        return v;
      }
    }
  }
  v.outcome = Outcome::SupportedBySearch;
  v.detail = notion == Notion::pseudo_partial
                 ? "every sampled (pair, tau) was separated at some later parameter"
                 : "every sampled pair was separated beyond some tau in the grid";
  v.stats = stats;
  return v;
}

}  // namespace detail

/// Decide one notion for the family. Precedence: curated analytic claim, then
/// a symbolic polynomial inverse (injective for every t, so every notion
/// holds), then bounded search. Deterministic given (family, cfg, seed).
inline InjectivityVerdict test_injectivity(const ParamFamily& fam, Notion notion,
                                           const SearchConfig& cfg = {}) {
  fam.validate();
  cfg.validate();

  if (auto it = fam.claims.find(notion); it != fam.claims.end())
    return detail::claim_verdict(fam, notion, it->second, cfg);

  if (fam.exact_map && fam.exact_map->linear_coefficient &&
      sgn(*fam.exact_map->linear_coefficient) != 0) {
    const auto inv = polyalg::formal_inverse(*fam.exact_map);
    if (inv.status == polyalg::InverseResult::Status::ok) {
      InjectivityVerdict v;
      v.notion = notion;
      v.outcome = Outcome::Holds;
      v.seed = cfg.seed;
      v.method = "polynomial_inverse";
      v.detail = "a symbolic polynomial inverse certifies injectivity of F_t for every t";
      return v;
    }
  }

  return detail::search_verdict(fam, notion, cfg);
}

struct ImplicationIssue {
  Notion antecedent = Notion::partial;
  Notion consequent = Notion::partial;
  std::string message;
};

struct AuditReport {
  bool consistent = true;
  std::vector<ImplicationIssue> issues;
};

/// Check a verdict set against the implication lattice
///   partial => pseudo_partial, eventual => pseudo_eventual,
///   eventual => partial (and its composition eventual => pseudo_partial).
/// Holds may never coexist with Falsified of an implied notion; searched and
/// inconclusive outcomes are compatible with anything.
inline AuditReport implication_audit(const std::vector<InjectivityVerdict>& verdicts) {
  std::map<Notion, std::vector<const InjectivityVerdict*>> by_notion;
  for (const auto& v : verdicts) by_notion[v.notion].push_back(&v);
  if (by_notion.size() < 2)
    throw std::invalid_argument("implication_audit: need verdicts for at least two notions");

  AuditReport report;
  auto flag = [&](Notion from, Notion to, const std::string& msg) {
    report.consistent = false;
    report.issues.push_back({from, to, msg});
  };

  for (const auto& [notion, list] : by_notion) {
    bool holds = false, falsified = false;
    for (const auto* v : list) {
      holds = holds || v->outcome == Outcome::Holds;
      falsified = falsified || v->outcome == Outcome::Falsified;
    }
    if (holds && falsified)
      flag(notion, notion, std::string("conflicting outcomes for ") + to_string(notion));
  }

  constexpr std::pair<Notion, Notion> edges[] = {
      {Notion::partial, Notion::pseudo_partial},
      {Notion::eventual, Notion::pseudo_eventual},
      {Notion::eventual, Notion::partial},
      {Notion::eventual, Notion::pseudo_partial},
  };
  auto has_outcome = [&](Notion n, Outcome o) {
    auto it = by_notion.find(n);
    if (it == by_notion.end()) return false;
    for (const auto* v : it->second)
      if (v->outcome == o) return true;
    return false;
  };
  for (const auto& [from, to] : edges)
    if (has_outcome(from, Outcome::Holds) && has_outcome(to, Outcome::Falsified))
      flag(from, to,
           std::string(to_string(from)) + " Holds but implied " + to_string(to) +
               " is Falsified");
  return report;
}

}  // namespace nued::injectivity
