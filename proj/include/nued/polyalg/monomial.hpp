#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

namespace nued::polyalg {

/// Power product over state variables and parameter symbols.
/// State exponents are positional; parameter exponents are keyed by symbol id.
struct Monomial {
  std::vector<std::uint32_t> state;
  std::map<int, std::uint32_t> params;

  std::uint32_t state_degree() const {
    return std::accumulate(state.begin(), state.end(), std::uint32_t{0});
  }
  std::uint32_t param_degree() const {
    std::uint32_t d = 0;
    for (const auto& [sym, e] : params) d += e;
    return d;
  }

  bool is_state_constant() const { return state_degree() == 0; }

  Monomial operator*(const Monomial& o) const {
    Monomial r = *this;
    for (std::size_t j = 0; j < r.state.size(); ++j) r.state[j] += o.state[j];
    for (const auto& [sym, e] : o.params) r.params[sym] += e;
    return r;
  }

  friend bool operator==(const Monomial&, const Monomial&) = default;

  // Graded order: total state degree, then state exponents, then parameter part.
  // Any fixed total order works; this one keeps term maps canonical and stable.
  friend bool operator<(const Monomial& a, const Monomial& b) {
    const auto da = a.state_degree(), db = b.state_degree();
    if (da != db) return da < db;
    if (a.state != b.state) return a.state < b.state;
    return a.params < b.params;
  }
};

}  // namespace nued::polyalg
