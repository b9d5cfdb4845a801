#pragma once

#include <cctype>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "nued/polyalg/gaussian_rational.hpp"

namespace nued::cli {

/// Thrown by the loaders with a location-prefixed message ("where: what").
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

inline bool all_digits(const std::string& s, std::size_t from, std::size_t to) {
  if (from >= to) return false;
  for (std::size_t i = from; i < to; ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

/// Exact ratio for a decimal literal like "0.5" or "-1.25e-2", used to phrase
/// rejection messages ("write 1/2"). Returns nothing for non-decimal text.
inline std::optional<std::string> decimal_as_ratio(const std::string& text) {
  std::size_t i = 0;
  bool neg = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) neg = text[i++] == '-';
  std::string digits;
  long frac_digits = 0;
  bool saw_dot = false, saw_digit = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits += c;
      saw_digit = true;
      if (saw_dot) ++frac_digits;
    } else if (c == '.' && !saw_dot) {
      saw_dot = true;
    } else {
      break;
    }
  }
  long exp10 = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool eneg = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) eneg = text[i++] == '-';
    if (!all_digits(text, i, text.size())) return std::nullopt;
    exp10 = std::stol(text.substr(i));
    if (eneg) exp10 = -exp10;
    i = text.size();
  }
  if (!saw_digit || i != text.size()) return std::nullopt;
  if (digits.empty()) return std::nullopt;

  polyalg::Rational num(digits);  // integer string
  polyalg::Rational den(1);
  long down = frac_digits - exp10;
  for (long k = 0; k < down; ++k) den *= 10;
  for (long k = 0; k < -down; ++k) num *= 10;
  if (neg) num = -num;
  polyalg::Rational r = num / den;
  r.canonicalize();
  return r.get_str();
}

}  // namespace detail

/// Parse an exact rational from "p", "-p", or "p/q" (base 10). Decimal or
/// exponent notation is rejected with a message that names the exact ratio to
/// write instead, preserving exactness through I/O.
inline polyalg::Rational parse_rational(const std::string& text, const std::string& where) {
  auto fail = [&](const std::string& what) -> polyalg::Rational {
    throw ParseError(where + ": " + what);
  };
  if (text.empty()) return fail("empty rational literal");

  std::size_t i = 0;
  if (text[i] == '+' || text[i] == '-') ++i;
  const std::size_t slash = text.find('/');
  const bool shaped =
      slash == std::string::npos
          ? detail::all_digits(text, i, text.size())
          : detail::all_digits(text, i, slash) && detail::all_digits(text, slash + 1, text.size());
  if (!shaped) {
    if (const auto ratio = detail::decimal_as_ratio(text))
      return fail("non-rational coefficient \"" + text + "\": write it as an exact ratio like \"" +
                  *ratio + "\"");
    return fail("malformed rational \"" + text + "\": expected \"p\" or \"p/q\" with integer p, q");
  }
  if (slash != std::string::npos && text.find('/', slash + 1) != std::string::npos)
    return fail("malformed rational \"" + text + "\": more than one '/'");

  polyalg::Rational r;
  if (r.set_str(text, 10) != 0)
    return fail("malformed rational \"" + text + "\"");
  if (slash != std::string::npos && sgn(r.get_den()) == 0)
    return fail("zero denominator in \"" + text + "\"");
  r.canonicalize();
  return r;
}

/// Canonical text form "p" or "p/q"; inverse of parse_rational.
inline std::string rational_text(const polyalg::Rational& r) { return r.get_str(); }

}  // namespace nued::cli
