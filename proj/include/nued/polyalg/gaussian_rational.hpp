#pragma once

#include <gmpxx.h>

#include <complex>
#include <stdexcept>
#include <string>

namespace nued::polyalg {

using Rational = mpq_class;

/// mpq_class(p, q) does not reduce; every ratio construction goes through
/// here so stored values stay canonical (exact comparisons depend on it).
inline Rational make_rational(long num, long den) {
  if (den == 0) throw std::domain_error("make_rational: zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

/// Complex number with exact rational real and imaginary parts.
/// Stored values are always in canonical (reduced) form.
struct GaussianRational {
  Rational re{0};
  Rational im{0};

  GaussianRational() = default;
  GaussianRational(long r) : re(r) {}
  GaussianRational(Rational r) : re(std::move(r)) {}
  GaussianRational(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
  GaussianRational(long r, long i) : re(r), im(i) {}

  static GaussianRational unit_imaginary() { return {Rational(0), Rational(1)}; }

  bool is_zero() const { return sgn(re) == 0 && sgn(im) == 0; }
  bool is_real() const { return sgn(im) == 0; }

  GaussianRational conjugate() const { return {re, Rational(-im)}; }

  /// |re| + |im|; exact rational upper bound on the modulus.
  Rational abs_bound() const { return Rational(abs(re) + abs(im)); }

  std::complex<double> to_complex() const { return {re.get_d(), im.get_d()}; }

  GaussianRational& operator+=(const GaussianRational& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  GaussianRational& operator-=(const GaussianRational& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  GaussianRational& operator*=(const GaussianRational& o) {
    Rational r = re * o.re - im * o.im;
    Rational i = re * o.im + im * o.re;
    re = std::move(r);
    im = std::move(i);
    return *this;
  }

  friend GaussianRational operator+(GaussianRational a, const GaussianRational& b) { return a += b; }
  friend GaussianRational operator-(GaussianRational a, const GaussianRational& b) { return a -= b; }
  friend GaussianRational operator*(GaussianRational a, const GaussianRational& b) { return a *= b; }
  friend GaussianRational operator-(const GaussianRational& a) {
    return {Rational(-a.re), Rational(-a.im)};
  }

  friend GaussianRational operator/(const GaussianRational& a, const GaussianRational& b) {
    if (b.is_zero()) throw std::domain_error("GaussianRational: division by zero");
    Rational n = b.re * b.re + b.im * b.im;
    return {Rational((a.re * b.re + a.im * b.im) / n), Rational((a.im * b.re - a.re * b.im) / n)};
  }

  friend bool operator==(const GaussianRational& a, const GaussianRational& b) {
    return a.re == b.re && a.im == b.im;
  }

  /// "p/q" for real values, "p/q+r/s*i" otherwise.
  std::string str() const {
    if (is_real()) return re.get_str();
    std::string s = re.get_str();
    if (sgn(im) >= 0) s += "+";
    s += im.get_str() + "*i";
    return s;
  }
};

}  // namespace nued::polyalg
