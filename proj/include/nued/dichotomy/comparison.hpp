#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nued::dichotomy {

enum class ComparisonClass { K, Kinf, N, KL };

inline std::string to_string(ComparisonClass c) {
  switch (c) {
    case ComparisonClass::K: return "K";
    case ComparisonClass::Kinf: return "Kinf";
    case ComparisonClass::N: return "N";
    case ComparisonClass::KL: return "KL";
  }
  return "?";
}

/// Sampled comparison-function candidate. One-argument classes (K, Kinf, N)
/// use `grid` / `values`; the two-argument class KL uses `grid` (first
/// argument) x `second_grid` with surface[i][j] = f(grid[i], second_grid[j]).
struct ComparisonFunctionSample {
  ComparisonClass claim = ComparisonClass::K;
  std::vector<double> grid;
  std::vector<double> values;
  std::vector<double> second_grid;
  std::vector<std::vector<double>> surface;
  // Finite-sample proxies: Kinf divergence demands the last value exceed
  // divergence_threshold; KL decay demands each nonzero first-argument slice
  // fall below decay_threshold relative to its own initial value.
  double divergence_threshold = 1e3;
  double decay_threshold = 1e-3;
};

struct ComparisonViolation {
  double x = 0.0;  // first argument at the violation
  double y = std::numeric_limits<double>::quiet_NaN();  // second argument (KL only)
  double value = 0.0;
  std::string requirement;
};

struct ComparisonVerdict {
  bool pass = false;
  std::optional<ComparisonViolation> violation;  // first one in scan order
};

namespace detail {

inline void require_increasing_grid(const std::vector<double>& g, const char* name) {
  if (g.empty()) throw std::invalid_argument(std::string(name) + " grid is empty");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i]) || g[i] < 0.0)
      throw std::invalid_argument(std::string(name) + " grid must be finite and nonnegative");
    if (i > 0 && g[i] <= g[i - 1])
      throw std::invalid_argument(std::string(name) + " grid must be strictly increasing");
  }
}

}  // namespace detail

/// Check the defining properties of the claimed class on the sample. The
/// verdict carries the first violating grid point. Asymptotic requirements
/// (Kinf divergence, KL decay to zero) are checked through the finite-sample
/// proxies declared on the sample.
inline ComparisonVerdict validate_comparison_function(const ComparisonFunctionSample& s) {
  ComparisonVerdict v;
  auto fail = [&](double x, double y, double value, std::string req) {
    v.pass = false;
    v.violation = ComparisonViolation{x, y, value, std::move(req)};
    return v;
  };

  if (s.claim == ComparisonClass::KL) {
    detail::require_increasing_grid(s.grid, "first-argument");
    detail::require_increasing_grid(s.second_grid, "second-argument");
    if (s.surface.size() != s.grid.size())
      throw std::invalid_argument("surface row count must match first-argument grid");
    for (const auto& row : s.surface)
      if (row.size() != s.second_grid.size())
        throw std::invalid_argument("surface column count must match second-argument grid");

    // class-K in the first argument on each second-argument slice
    for (std::size_t j = 0; j < s.second_grid.size(); ++j) {
      const double y = s.second_grid[j];
      if (s.grid.front() == 0.0 && s.surface.front()[j] != 0.0)
        return fail(0.0, y, s.surface.front()[j], "KL: slice must vanish at first argument 0");
      for (std::size_t i = 0; i < s.grid.size(); ++i) {
        const double val = s.surface[i][j];
        if (!std::isfinite(val) || val < 0.0)
          return fail(s.grid[i], y, val, "KL: values must be finite and nonnegative");
        if (i > 0 && val < s.surface[i - 1][j])
          return fail(s.grid[i], y, val, "KL: slice must be nondecreasing in the first argument");
      }
    }
    // decreasing to 0 in the second argument on each first-argument slice;
    // identically-zero slices satisfy this vacuously
    for (std::size_t i = 0; i < s.grid.size(); ++i) {
      const double x = s.grid[i];
      const double first = s.surface[i].front();
      bool all_zero = true;
      for (double val : s.surface[i]) all_zero = all_zero && val == 0.0;
      if (all_zero) continue;
      for (std::size_t j = 1; j < s.second_grid.size(); ++j) {
        if (s.surface[i][j] >= s.surface[i][j - 1])
          return fail(x, s.second_grid[j], s.surface[i][j],
                      "KL: slice must be strictly decreasing in the second argument");
      }
      if (first > 0.0 && s.surface[i].back() > s.decay_threshold * first)
        return fail(x, s.second_grid.back(), s.surface[i].back(),
                    "KL: slice must decay to 0 (last value above decay threshold)");
    }
    v.pass = true;
    return v;
  }

  detail::require_increasing_grid(s.grid, "argument");
  if (s.values.size() != s.grid.size())
    throw std::invalid_argument("values length must match grid");

  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const double x = s.grid[i], val = s.values[i];
    if (!std::isfinite(val))
      return fail(x, std::numeric_limits<double>::quiet_NaN(), val, "values must be finite");
    switch (s.claim) {
      case ComparisonClass::K:
      case ComparisonClass::Kinf:
        if (val < 0.0)
          return fail(x, std::numeric_limits<double>::quiet_NaN(), val,
                      "class K: values must be nonnegative");
        if (x == 0.0 && val != 0.0)
          return fail(x, std::numeric_limits<double>::quiet_NaN(), val,
                      "class K: value at 0 must be 0");
        if (i > 0) {
          if (s.claim == ComparisonClass::Kinf && s.values[i] <= s.values[i - 1])
            return fail(x, std::numeric_limits<double>::quiet_NaN(), val,
                        "class Kinf: values must be strictly increasing");
          if (s.claim == ComparisonClass::K && s.values[i] < s.values[i - 1])
            return fail(x, std::numeric_limits<double>::quiet_NaN(), val,
                        "class K: values must be nondecreasing");
        }
        break;
      case ComparisonClass::N:
        if (val <= 0.0)
          return fail(x, std::numeric_limits<double>::quiet_NaN(), val,
                      "class N: values must be positive");
        if (i > 0 && val < s.values[i - 1])
          return fail(x, std::numeric_limits<double>::quiet_NaN(), val,
                      "class N: values must be nondecreasing");
        break;
      case ComparisonClass::KL: break;  // handled above
    }
  }
  if (s.claim == ComparisonClass::Kinf && s.values.back() <= s.divergence_threshold)
    return fail(s.grid.back(), std::numeric_limits<double>::quiet_NaN(), s.values.back(),
                "class Kinf: last sampled value must exceed the divergence threshold");
  v.pass = true;
  return v;
}

}  // namespace nued::dichotomy
