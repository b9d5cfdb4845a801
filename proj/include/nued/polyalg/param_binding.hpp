#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace nued::polyalg {

enum class BindingKind { exp_decay, constant, bounded_generic };

/// Interpretation of one parameter symbol as a scalar function of time.
/// exp_decay(kappa): t -> exp(-kappa*t), kappa > 0, sup 1 on t >= 0.
/// constant(c): t -> c.
/// bounded_generic: arbitrary evaluator with a declared finite sup.
struct ParamBinding {
  int symbol = 0;
  std::string name;
  BindingKind kind = BindingKind::constant;
  double rate = 0.0;
  double value = 0.0;
  std::shared_ptr<const std::function<double(double)>> evaluator;
  double declared_sup = 0.0;

  static ParamBinding exp_decay(int symbol, std::string name, double kappa) {
    if (!(kappa > 0)) throw std::invalid_argument("exp_decay binding requires rate > 0");
    ParamBinding b;
    b.symbol = symbol;
    b.name = std::move(name);
    b.kind = BindingKind::exp_decay;
    b.rate = kappa;
    b.declared_sup = 1.0;
    return b;
  }

  static ParamBinding constant(int symbol, std::string name, double c) {
    ParamBinding b;
    b.symbol = symbol;
    b.name = std::move(name);
    b.kind = BindingKind::constant;
    b.value = c;
    b.declared_sup = std::abs(c);
    return b;
  }

  static ParamBinding bounded_generic(int symbol, std::string name,
                                      std::function<double(double)> f, double sup) {
    if (!std::isfinite(sup)) throw std::invalid_argument("bounded_generic binding requires a finite declared sup");
    ParamBinding b;
    b.symbol = symbol;
    b.name = std::move(name);
    b.kind = BindingKind::bounded_generic;
    b.evaluator = std::make_shared<const std::function<double(double)>>(std::move(f));
    b.declared_sup = sup;
    return b;
  }

  double at(double t) const {
    switch (kind) {
      case BindingKind::exp_decay: return std::exp(-rate * t);
      case BindingKind::constant: return value;
      case BindingKind::bounded_generic: return (*evaluator)(t);
    }
    return 0.0;
  }

  double sup() const { return declared_sup; }

  /// Exact rational value at t = 0, when one exists (exp_decay -> 1).
  std::optional<long> exact_at_zero() const {
    if (kind == BindingKind::exp_decay) return 1;
    return std::nullopt;
  }

  /// Compatibility for binding merges during composition.
  friend bool same_binding(const ParamBinding& a, const ParamBinding& b) {
    if (a.symbol != b.symbol || a.kind != b.kind) return false;
    switch (a.kind) {
      case BindingKind::exp_decay: return a.rate == b.rate;
      case BindingKind::constant: return a.value == b.value;
      case BindingKind::bounded_generic: return a.evaluator == b.evaluator && a.declared_sup == b.declared_sup;
    }
    return false;
  }
};

}  // namespace nued::polyalg
