#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nued/polyalg/poly_map.hpp"

namespace nued::polyalg {

inline std::vector<ParamBinding> merge_bindings(const std::vector<ParamBinding>& a,
                                                const std::vector<ParamBinding>& b) {
  std::vector<ParamBinding> merged = a;
  for (const auto& bb : b) {
    bool found = false;
    for (const auto& ba : merged) {
      if (ba.symbol == bb.symbol) {
        if (!same_binding(ba, bb))
          throw std::invalid_argument("compose: conflicting bindings for shared symbol");
        found = true;
        break;
      }
    }
    if (!found) merged.push_back(bb);
  }
  return merged;
}

/// (outer . inner)(x) = outer(inner(x)), exact. Parameter symbols of both maps
/// pass through; shared symbols must carry identical bindings.
inline ParamPolyMap compose(const ParamPolyMap& outer, const ParamPolyMap& inner) {
  if (outer.dim != inner.dim) throw std::invalid_argument("compose: dimension mismatch");
  ParamPolyMap r;
  r.dim = inner.dim;
  r.bindings = merge_bindings(outer.bindings, inner.bindings);
  r.coords.reserve(outer.dim);
  for (const auto& p : outer.coords) r.coords.push_back(p.substitute(inner.coords));
  if (outer.linear_coefficient && inner.linear_coefficient) {
    Rational lam = *outer.linear_coefficient * *inner.linear_coefficient;
    // Keep the declaration only when the composition still has the
    // lambda*X + (degree >= 2) shape.
    bool shape_ok = true;
    for (std::uint32_t j = 0; j < r.dim && shape_ok; ++j) {
      Poly rem = r.coords[j] - Poly::variable(r.dim, j, GaussianRational(lam));
      if (!rem.is_zero() && rem.min_state_degree() < 2) shape_ok = false;
    }
    if (shape_ok) r.linear_coefficient = lam;
  }
  return r;
}

/// Matrix of partial derivatives with respect to the state variables.
inline PolyMatrix jacobian(const ParamPolyMap& map) {
  PolyMatrix j(map.dim, map.dim, map.dim);
  for (std::uint32_t i = 0; i < map.dim; ++i)
    for (std::uint32_t k = 0; k < map.dim; ++k) j.at(i, k) = map.coords[i].derivative(k);
  return j;
}

struct NilpotencyResult {
  bool nilpotent = false;
  std::uint32_t index = 0;  // smallest k with M^k = 0 when nilpotent
};

/// Exact symbolic nilpotency over the polynomial ring. For an n x n matrix it
/// is enough to examine powers up to n.
inline NilpotencyResult is_nilpotent(const PolyMatrix& m) {
  if (m.rows != m.cols) throw std::invalid_argument("is_nilpotent: matrix not square");
  if (m.is_zero()) return {true, 1};
  PolyMatrix p = m;
  for (std::uint32_t k = 2; k <= m.rows; ++k) {
    p = p * m;
    if (p.is_zero()) return {true, k};
  }
  return {false, 0};
}

struct InverseResult {
  enum class Status { ok, no_stabilization, not_invertible };
  Status status = Status::no_stabilization;
  std::optional<ParamPolyMap> inverse;
  std::uint32_t iterations = 0;
};

inline std::uint32_t default_degree_cap(std::uint32_t n) {
  std::uint32_t cap = 1;
  for (std::uint32_t i = 1; i < n; ++i) cap *= 3;
  return cap;
}

/// Formal inversion of maps lambda*X + H with H of state degree >= 2:
/// iterate G <- (Y - H(G)) / lambda, truncating above `degree_cap`, until the
/// iterate stabilizes. The candidate counts only if exact two-sided
/// composition against the original map gives the identity; that check runs
/// without truncation before anything is returned.
inline InverseResult formal_inverse(const ParamPolyMap& map, std::uint32_t degree_cap = 0) {
  if (!map.linear_coefficient || sgn(*map.linear_coefficient) == 0)
    throw std::invalid_argument("formal_inverse: nonzero linear coefficient required");
  map.validate();
  if (degree_cap == 0) degree_cap = default_degree_cap(map.dim);

  const GaussianRational inv_lambda =
      GaussianRational(1) / GaussianRational(*map.linear_coefficient);
  const std::vector<Poly> h = map.nonlinear_part();
  const std::uint32_t n = map.dim;

  ParamPolyMap g;
  g.dim = n;
  g.bindings = map.bindings;
  g.coords.reserve(n);
  for (std::uint32_t j = 0; j < n; ++j) g.coords.push_back(Poly::variable(n, j, inv_lambda));

  InverseResult res;
  const std::uint32_t budget = degree_cap + 3;
  for (std::uint32_t it = 1; it <= budget; ++it) {
    std::vector<Poly> next;
    next.reserve(n);
    for (std::uint32_t j = 0; j < n; ++j) {
      Poly hj = h[j].substitute(g.coords, degree_cap);
      next.push_back((Poly::variable(n, j) - hj).scaled(inv_lambda)
                         .truncate_above_state_degree(degree_cap));
    }
    res.iterations = it;
    if (next == g.coords) {
      g.coords = std::move(next);
      // Exact two-sided verification, no truncation.
      const ParamPolyMap id = ParamPolyMap::identity(n);
      if (compose(map, g).coords == id.coords && compose(g, map).coords == id.coords) {
        g.linear_coefficient = inv_lambda.re;
        res.status = InverseResult::Status::ok;
        res.inverse = std::move(g);
      } else {
        res.status = InverseResult::Status::not_invertible;
      }
      return res;
    }
    g.coords = std::move(next);
  }
  res.status = InverseResult::Status::no_stabilization;
  return res;
}

struct ShiftConjugateResult {
  ParamPolyMap map;                             // G(t, z) = F(t, z + x) - F(t, x)
  std::vector<GaussianRational> constant_solution;  // z0 = y - x
};

/// Conjugation by the shift taking x to the origin. G(t, 0) = 0 holds exactly
/// by construction (the subtracted image cancels all state-constant terms).
inline ShiftConjugateResult shift_conjugate(const ParamPolyMap& f,
                                            const std::vector<GaussianRational>& x,
                                            const std::vector<GaussianRational>& y) {
  if (x.size() != f.dim || y.size() != f.dim)
    throw std::invalid_argument("shift_conjugate: point dimension mismatch");
  ShiftConjugateResult out;
  out.map.dim = f.dim;
  out.map.bindings = f.bindings;

  std::vector<Poly> shift;
  shift.reserve(f.dim);
  for (std::uint32_t j = 0; j < f.dim; ++j)
    shift.push_back(Poly::variable(f.dim, j) + Poly::constant(f.dim, x[j]));

  for (std::uint32_t j = 0; j < f.dim; ++j) {
    Poly moved = f.coords[j].substitute(shift);
    Poly at_x = f.coords[j].evaluate_exact(x);  // parameters only
    for (const auto& [m, c] : at_x.terms)
      moved.add_term(Monomial{std::vector<std::uint32_t>(f.dim, 0), m.params}, -c);
    out.map.coords.push_back(std::move(moved));
  }

  if (f.linear_coefficient) {
    bool shape_ok = true;
    for (std::uint32_t j = 0; j < f.dim && shape_ok; ++j) {
      Poly rem = out.map.coords[j] -
                 Poly::variable(f.dim, j, GaussianRational(*f.linear_coefficient));
      if (!rem.is_zero() && rem.min_state_degree() < 2) shape_ok = false;
    }
    if (shape_ok) out.map.linear_coefficient = f.linear_coefficient;
  }

  out.constant_solution.reserve(f.dim);
  for (std::uint32_t j = 0; j < f.dim; ++j)
    out.constant_solution.push_back(GaussianRational(y[j]) - GaussianRational(x[j]));
  return out;
}

/// Realification of a complex map: substitute x_k = u_k + i*v_k and split
/// every coordinate into real and imaginary parts. Output dimension 2n with
/// coordinates interleaved as (Re_1, Im_1, ..., Re_n, Im_n).
inline ParamPolyMap realify(const ParamPolyMap& map) {
  const std::uint32_t n = map.dim;
  const std::uint32_t m = 2 * n;
  std::vector<Poly> subs;
  subs.reserve(n);
  for (std::uint32_t k = 0; k < n; ++k)
    subs.push_back(Poly::variable(m, 2 * k) +
                   Poly::variable(m, 2 * k + 1, GaussianRational::unit_imaginary()));

  ParamPolyMap r;
  r.dim = m;
  r.bindings = map.bindings;
  r.coords.resize(m, Poly::zero(m));
  for (std::uint32_t k = 0; k < n; ++k) {
    Poly q = map.coords[k].substitute(subs);
    Poly re(m), im(m);
    for (const auto& [mon, c] : q.terms) {
      if (sgn(c.re) != 0) re.add_term(mon, GaussianRational(c.re));
      if (sgn(c.im) != 0) im.add_term(mon, GaussianRational(c.im));
    }
    r.coords[2 * k] = std::move(re);
    r.coords[2 * k + 1] = std::move(im);
  }
  if (map.linear_coefficient) {
    bool shape_ok = true;
    for (std::uint32_t j = 0; j < m && shape_ok; ++j) {
      Poly rem = r.coords[j] - Poly::variable(m, j, GaussianRational(*map.linear_coefficient));
      if (!rem.is_zero() && rem.min_state_degree() < 2) shape_ok = false;
    }
    if (shape_ok) r.linear_coefficient = map.linear_coefficient;
  }
  return r;
}

}  // namespace nued::polyalg
