#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nued/polyalg/poly_map.hpp"
#include "nued/rng.hpp"

namespace nued::polyalg {

struct Homogeneity {
  enum class Kind { zero, homogeneous, mixed };
  Kind kind = Kind::zero;
  std::uint32_t degree = 0;  // meaningful only when homogeneous
};

/// State-degree homogeneity of one polynomial (parameter parts are ignored).
inline Homogeneity homogeneity_degree(const Poly& p) {
  if (p.is_zero()) return {Homogeneity::Kind::zero, 0};
  std::optional<std::uint32_t> deg;
  for (const auto& [m, c] : p.terms) {
    const std::uint32_t d = m.state_degree();
    if (!deg) {
      deg = d;
    } else if (*deg != d) {
      return {Homogeneity::Kind::mixed, 0};
    }
  }
  return {Homogeneity::Kind::homogeneous, *deg};
}

struct CubicBound {
  double coefficient_bound = 0.0;  // C with ||H(t,x)|| <= C * a(t) * ||x||^3
  double empirical_bound = 0.0;    // sup over sampled unit sphere at the probe time
  bool contract_ok = false;        // empirical <= coefficient bound
  std::map<int, std::uint32_t> shared_params;  // the a(t) symbol powers (empty: a = 1)
  std::uint64_t samples = 0;
};

struct CubicBoundOptions {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  double probe_time = 1.0;
};

/// Coefficient-level bound for a zero-or-homogeneous-cubic map H, with every
/// term carrying one shared parameter power a(t). Each coordinate square is
/// dominated through |x^e| <= sum_i (e_i/6) x_i^6 for degree-6 power products
/// (the pairwise Young inequalities are the two-variable instances of this),
/// then sum_i x_i^6 <= ||x||^6. All bookkeeping is exact rational; the final
/// square root is the only rounding step.
inline CubicBound cubic_bound_constant(const ParamPolyMap& h, CubicBoundOptions opts = {}) {
  h.validate();
  std::optional<std::map<int, std::uint32_t>> shared;
  for (const auto& p : h.coords) {
    const Homogeneity hom = homogeneity_degree(p);
    if (hom.kind == Homogeneity::Kind::zero) continue;
    if (hom.kind == Homogeneity::Kind::mixed || hom.degree != 3)
      throw std::invalid_argument("cubic_bound_constant: coordinate not zero or cubic-homogeneous");
    for (const auto& [m, c] : p.terms) {
      if (!shared) {
        shared = m.params;
      } else if (*shared != m.params) {
        throw std::invalid_argument(
            "cubic_bound_constant: terms do not share a single parameter factor");
      }
    }
  }

  CubicBound out;
  out.shared_params = shared.value_or(std::map<int, std::uint32_t>{});

  Rational total(0);
  for (const auto& p : h.coords) {
    if (p.is_zero()) continue;
    std::map<std::uint32_t, Rational> sixth;  // var -> accumulated x_i^6 coefficient
    for (const auto& [m1, c1] : p.terms) {
      for (const auto& [m2, c2] : p.terms) {
        const Rational b = c1.abs_bound() * c2.abs_bound();
        for (std::uint32_t i = 0; i < h.dim; ++i) {
          const std::uint32_t e = m1.state[i] + m2.state[i];
          if (e > 0) sixth[i] += b * Rational(e) / Rational(6);
        }
      }
    }
    Rational dmax(0);
    for (const auto& [i, d] : sixth)
      if (d > dmax) dmax = d;
    total += dmax;
  }
  out.coefficient_bound = std::sqrt(total.get_d()) * (1.0 + 1e-12);

  // Empirical sup of ||H(t,x)|| / a(t) over the sampled unit sphere.
  double a_probe = 1.0;
  for (const auto& [sym, e] : out.shared_params)
    a_probe *= std::pow(h.param_value(sym, opts.probe_time), static_cast<int>(e));
  if (a_probe == 0.0) throw std::domain_error("cubic_bound_constant: parameter factor vanishes at probe time");

  const bool real = h.is_real();
  Rng rng(opts.seed);
  double best = 0.0;
  for (std::uint64_t k = 0; k < opts.samples; ++k) {
    std::vector<std::complex<double>> x(h.dim);
    double norm2 = 0.0;
    for (auto& xi : x) {
      const double re = rng.normal();
      const double im = real ? 0.0 : rng.normal();
      xi = {re, im};
      norm2 += re * re + im * im;
    }
    if (norm2 < 1e-12) continue;
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& xi : x) xi *= inv;
    const auto y = h.evaluate(opts.probe_time, x);
    double img2 = 0.0;
    for (const auto& yi : y) img2 += std::norm(yi);
    best = std::max(best, std::sqrt(img2) / std::abs(a_probe));
  }
  out.empirical_bound = best;
  out.samples = opts.samples;
  out.contract_ok = out.empirical_bound <= out.coefficient_bound;
  return out;
}

}  // namespace nued::polyalg
