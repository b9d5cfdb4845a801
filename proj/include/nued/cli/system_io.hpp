#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nued/cli/rational_text.hpp"
#include "nued/injectivity/builtins.hpp"
#include "nued/odeint/transition.hpp"
#include "nued/polyalg/poly_map.hpp"

namespace nued::cli {

using nlohmann::json;

/// A system loaded from a description file or a builtin id. Exactly one kind
/// is populated; the optional polynomial map is also filled for builtins that
/// carry an exact polynomial form.
struct LoadedSystem {
  std::string kind;  // poly_map | linear_closed_form | builtin
  std::string id;    // label for reports: file path stem or builtin id
  std::optional<polyalg::ParamPolyMap> map;
  std::optional<odeint::LinearSystem> linear;
  std::optional<injectivity::ParamFamily> family;
};

namespace detail {

inline const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing required field \"" + key + "\"");
  return *it;
}

inline double need_number(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number()) throw ParseError(where + "." + key + ": expected a number");
  return v.get<double>();
}

/// Exact coefficient: rational string "p/q", exact integer, or a two-element
/// array [re, im] of those. Floating-point literals are rejected by name.
inline polyalg::GaussianRational parse_coefficient(const json& v, const std::string& where) {
  auto scalar = [&](const json& s, const std::string& swhere) -> polyalg::Rational {
    if (s.is_string()) return parse_rational(s.get<std::string>(), swhere);
    if (s.is_number_integer()) return polyalg::Rational(s.get<long>());
    if (s.is_number_float()) {
      std::ostringstream os;
      os << s.get<double>();
      return parse_rational(os.str(), swhere);  // rejects with the exact-ratio hint
    }
    throw ParseError(swhere + ": expected a rational string like \"1/2\" or an integer");
  };
  if (v.is_array()) {
    if (v.size() != 2)
      throw ParseError(where + ": complex coefficient must be a [re, im] pair");
    return {scalar(v[0], where + "[0]"), scalar(v[1], where + "[1]")};
  }
  return {scalar(v, where)};
}

inline std::vector<polyalg::ParamBinding> parse_bindings(const json& j, const std::string& where,
                                                         std::map<std::string, int>& symbol_of) {
  std::vector<polyalg::ParamBinding> bindings;
  if (!j.is_array()) throw ParseError(where + ": expected an array of bindings");
  int next_symbol = 0;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string bw = where + "[" + std::to_string(i) + "]";
    const json& b = j[i];
    if (!b.is_object()) throw ParseError(bw + ": expected a binding object");
    const json& sym = need(b, "symbol", bw);
    if (!sym.is_string()) throw ParseError(bw + ".symbol: expected a string name");
    const std::string name = sym.get<std::string>();
    if (symbol_of.count(name)) throw ParseError(bw + ": duplicate binding for symbol \"" + name + "\"");
    const json& kind = need(b, "kind", bw);
    if (!kind.is_string()) throw ParseError(bw + ".kind: expected a string");
    const std::string k = kind.get<std::string>();
    const int id = next_symbol++;
    if (k == "exp_decay") {
      bindings.push_back(polyalg::ParamBinding::exp_decay(id, name, need_number(b, "rate", bw)));
    } else if (k == "constant") {
      bindings.push_back(polyalg::ParamBinding::constant(id, name, need_number(b, "value", bw)));
    } else if (k == "bounded_generic") {
      throw ParseError(bw + ": bounded_generic bindings carry an arbitrary evaluator and cannot "
                            "be described in JSON; construct them in code");
    } else {
      throw ParseError(bw + ".kind: unknown kind \"" + k + "\" (expected exp_decay or constant)");
    }
    symbol_of[name] = id;
  }
  return bindings;
}

inline polyalg::ParamPolyMap parse_poly_map(const json& j, const std::string& where) {
  const json& dimj = need(j, "dimension", where);
  if (!dimj.is_number_unsigned() || dimj.get<std::uint64_t>() == 0)
    throw ParseError(where + ".dimension: expected a positive integer");
  const auto dim = dimj.get<std::uint32_t>();

  polyalg::ParamPolyMap map;
  map.dim = dim;
  std::map<std::string, int> symbol_of;
  if (j.contains("bindings"))
    map.bindings = parse_bindings(j["bindings"], where + ".bindings", symbol_of);
  if (j.contains("lambda")) {
    const json& l = j["lambda"];
    const std::string lw = where + ".lambda";
    if (l.is_string())
      map.linear_coefficient = parse_rational(l.get<std::string>(), lw);
    else if (l.is_number_integer())
      map.linear_coefficient = polyalg::Rational(l.get<long>());
    else
      throw ParseError(lw + ": expected a rational string or integer");
  }

  const json& coords = need(j, "coordinates", where);
  if (!coords.is_array() || coords.size() != dim)
    throw ParseError(where + ".coordinates: expected an array of exactly " + std::to_string(dim) +
                     " coordinates");
  for (std::size_t c = 0; c < coords.size(); ++c) {
    const std::string cw = where + ".coordinates[" + std::to_string(c) + "]";
    const json& mons = need(coords[c], "monomials", cw);
    if (!mons.is_array()) throw ParseError(cw + ".monomials: expected an array");
    polyalg::Poly p(dim);
    for (std::size_t m = 0; m < mons.size(); ++m) {
      const std::string mw = cw + ".monomials[" + std::to_string(m) + "]";
      const json& mon = mons[m];
      const polyalg::GaussianRational coeff =
          parse_coefficient(need(mon, "coefficient", mw), mw + ".coefficient");
      const json& se = need(mon, "state_exponents", mw);
      if (!se.is_array() || se.size() != dim)
        throw ParseError(mw + ".state_exponents: expected an array of " + std::to_string(dim) +
                         " nonnegative integers");
      polyalg::Monomial mono{std::vector<std::uint32_t>(dim, 0), {}};
      for (std::size_t v = 0; v < dim; ++v) {
        if (!se[v].is_number_unsigned())
          throw ParseError(mw + ".state_exponents[" + std::to_string(v) +
                           "]: expected a nonnegative integer");
        mono.state[v] = se[v].get<std::uint32_t>();
      }
      if (mon.contains("param_exponents")) {
        const json& pe = mon["param_exponents"];
        if (!pe.is_object())
          throw ParseError(mw + ".param_exponents: expected an object {symbol: exponent}");
        for (const auto& [name, ej] : pe.items()) {
          auto it = symbol_of.find(name);
          if (it == symbol_of.end())
            throw ParseError(mw + ".param_exponents: unbound parameter symbol \"" + name +
                             "\" (declare it under \"bindings\")");
          if (!ej.is_number_unsigned())
            throw ParseError(mw + ".param_exponents." + name + ": expected a nonnegative integer");
          const auto e = ej.get<std::uint32_t>();
          if (e > 0) mono.params[it->second] = e;
        }
      }
      p.add_term(mono, coeff);
    }
    map.coords.push_back(std::move(p));
  }

  try {
    map.validate();
  } catch (const std::exception& ex) {
    throw ParseError(where + ": " + ex.what());
  }
  return map;
}

/// Diagonal closed-form entries: x_i' = c_i(t) x_i with an exact
/// antiderivative per entry, so transition matrices need no integration.
inline odeint::LinearSystem parse_linear_closed_form(const json& j, const std::string& where) {
  const json& dimj = need(j, "dimension", where);
  if (!dimj.is_number_unsigned() || dimj.get<std::uint64_t>() == 0)
    throw ParseError(where + ".dimension: expected a positive integer");
  const int dim = dimj.get<int>();
  const json& diag = need(j, "diagonal", where);
  if (!diag.is_array() || static_cast<int>(diag.size()) != dim)
    throw ParseError(where + ".diagonal: expected an array of exactly " + std::to_string(dim) +
                     " entries");

  std::vector<std::function<double(double)>> coeffs, antis;
  for (int i = 0; i < dim; ++i) {
    const std::string ew = where + ".diagonal[" + std::to_string(i) + "]";
    const json& e = diag[i];
    const json& form = need(e, "form", ew);
    if (!form.is_string()) throw ParseError(ew + ".form: expected a string");
    const std::string f = form.get<std::string>();
    if (f == "constant") {
      const double v = need_number(e, "value", ew);
      coeffs.emplace_back([v](double) { return v; });
      antis.emplace_back([v](double t) { return v * t; });
    } else if (f == "oscillating") {
      // c(t) = lambda0 + a t sin t, antiderivative lambda0 t + a (sin t - t cos t)
      const double l0 = need_number(e, "lambda0", ew);
      const double a = need_number(e, "a", ew);
      coeffs.emplace_back([l0, a](double t) { return l0 + a * t * std::sin(t); });
      antis.emplace_back(
          [l0, a](double t) { return l0 * t + a * (std::sin(t) - t * std::cos(t)); });
    } else {
      throw ParseError(ew + ".form: unknown form \"" + f + "\" (expected constant or oscillating)");
    }
  }

  odeint::LinearSystem sys;
  sys.dim = dim;
  sys.diagonal = true;
  sys.label = "linear_closed_form";
  auto cs = std::make_shared<std::vector<std::function<double(double)>>>(std::move(coeffs));
  auto as = std::make_shared<std::vector<std::function<double(double)>>>(std::move(antis));
  sys.coeff = [cs](double t) {
    const int n = static_cast<int>(cs->size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = (*cs)[i](t);
    return m;
  };
  for (std::size_t i = 0; i < cs->size(); ++i)
    sys.diag_coeff.push_back([cs, i](double t) { return (*cs)[i](t); });
  sys.closed_phi = [as](double t, double s) {
    const int n = static_cast<int>(as->size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = std::exp((*as)[i](t) - (*as)[i](s));
    return m;
  };
  return sys;
}

inline injectivity::ParamFamily parse_builtin(const json& j, const std::string& where) {
  const json& idj = need(j, "id", where);
  if (!idj.is_string()) throw ParseError(where + ".id: expected a builtin id string");
  const std::string id = idj.get<std::string>();
  json params = j.value("parameters", json::object());
  if (!params.is_object()) throw ParseError(where + ".parameters: expected an object");
  auto reject_unknown = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : params.items()) {
      bool ok = false;
      for (const char* a : allowed)
        if (k == a) ok = true;
      if (!ok)
        throw ParseError(where + ".parameters: unknown parameter \"" + k + "\" for builtin " + id);
    }
  };
  try {
    if (id == "example_3_4") {
      reject_unknown({"lambda0", "a"});
      const double l0 = params.contains("lambda0") ? need_number(params, "lambda0", where) : -4.0;
      const double a = params.contains("a") ? need_number(params, "a", where) : -1.0;
      return injectivity::example_3_4_family(l0, a);
    }
    if (id == "example_4_2") {
      reject_unknown({"lambda"});
      polyalg::Rational lambda(-1);
      if (params.contains("lambda")) {
        const json& l = params["lambda"];
        if (l.is_string())
          lambda = parse_rational(l.get<std::string>(), where + ".parameters.lambda");
        else if (l.is_number_integer())
          lambda = polyalg::Rational(l.get<long>());
        else
          throw ParseError(where + ".parameters.lambda: expected a rational string or integer");
      }
      return injectivity::example_4_2_family(lambda);
    }
    reject_unknown({});
    return injectivity::builtin_family(id);
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ParseError(where + ": " + ex.what());
  }
}

}  // namespace detail

/// Parse a SystemDescription JSON object. `where` prefixes every error.
inline LoadedSystem parse_system_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected a JSON object");
  const json& kind = detail::need(j, "kind", where);
  if (!kind.is_string()) throw ParseError(where + ".kind: expected a string");
  LoadedSystem sys;
  sys.kind = kind.get<std::string>();
  if (sys.kind == "poly_map") {
    sys.map = detail::parse_poly_map(j, where);
    sys.id = j.value("name", std::string("poly_map"));
  } else if (sys.kind == "linear_closed_form") {
    sys.linear = detail::parse_linear_closed_form(j, where);
    sys.id = j.value("name", std::string("linear_closed_form"));
  } else if (sys.kind == "builtin") {
    sys.family = detail::parse_builtin(j, where);
    sys.map = sys.family->exact_map;
    sys.id = sys.family->id;
  } else {
    throw ParseError(where + ".kind: unknown kind \"" + sys.kind +
                     "\" (expected poly_map, linear_closed_form, or builtin)");
  }
  return sys;
}

/// Load a SystemDescription file. Errors carry the path and, for JSON syntax
/// errors, the byte position reported by the parser.
inline LoadedSystem load_system_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& ex) {
    throw ParseError(path + ": parse error at byte " + std::to_string(ex.byte) + ": " + ex.what());
  }
  return parse_system_json(j, path);
}

/// Resolve "--system" values: "builtin:<id>" or a description file path.
inline LoadedSystem load_system_spec(const std::string& spec) {
  if (spec.rfind("builtin:", 0) == 0) {
    json j;
    j["kind"] = "builtin";
    j["id"] = spec.substr(8);
    return parse_system_json(j, spec);
  }
  return load_system_file(spec);
}

/// Round-trippable description of a polynomial map (inverse-map reports reload
/// through load_system_file). bounded_generic bindings serialize with their
/// declared sup but cannot be loaded back, since the evaluator is code.
inline json system_json(const polyalg::ParamPolyMap& map, const std::string& name = "") {
  json j;
  j["kind"] = "poly_map";
  if (!name.empty()) j["name"] = name;
  j["dimension"] = map.dim;
  if (map.linear_coefficient) j["lambda"] = rational_text(*map.linear_coefficient);
  json bindings = json::array();
  for (const auto& b : map.bindings) {
    json bj;
    bj["symbol"] = b.name;
    switch (b.kind) {
      case polyalg::BindingKind::exp_decay:
        bj["kind"] = "exp_decay";
        bj["rate"] = b.rate;
        break;
      case polyalg::BindingKind::constant:
        bj["kind"] = "constant";
        bj["value"] = b.value;
        break;
      case polyalg::BindingKind::bounded_generic:
        bj["kind"] = "bounded_generic";
        bj["sup"] = b.declared_sup;
        break;
    }
    bindings.push_back(std::move(bj));
  }
  j["bindings"] = std::move(bindings);
  json coords = json::array();
  for (const auto& p : map.coords) {
    json mons = json::array();
    for (const auto& [m, c] : p.terms) {
      json mj;
      if (c.is_real())
        mj["coefficient"] = rational_text(c.re);
      else
        mj["coefficient"] = json::array({rational_text(c.re), rational_text(c.im)});
      mj["state_exponents"] = m.state;
      if (!m.params.empty()) {
        json pe = json::object();
        for (const auto& [sym, e] : m.params) {
          const polyalg::ParamBinding* b = map.find_binding(sym);
          pe[b ? b->name : std::to_string(sym)] = e;
        }
        mj["param_exponents"] = std::move(pe);
      }
      mons.push_back(std::move(mj));
    }
    json cj;
    cj["monomials"] = std::move(mons);
    coords.push_back(std::move(cj));
  }
  j["coordinates"] = std::move(coords);
  return j;
}

}  // namespace nued::cli
