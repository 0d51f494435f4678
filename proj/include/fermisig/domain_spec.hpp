#pragma once

// JSON domain spec files. Schema (version 1):
//   {"schema_version": 1, "kind": "simple",
//    "breakpoints": [0, ...], "incidence": [[true, ...], ...]}
//   {"schema_version": 1, "kind": "graph", "b": 1.0,
//    "t_plus": {"points": [[x, t], ...]} or {"expr": "...", "segments": 64},
//    "t_minus": {...}}
//   {"schema_version": 1, "kind": "conformal", "base": {...},
//    "f": {"expr": "..."} or {"grid": {"t0":..., "t1":..., "x0":..., "x1":...,
//          "nt":..., "nx":..., "values": [...]}}}
// Boundary expressions are sampled into polylines; the factor expression is
// kept symbolic.

#include <json.hpp>
#include <string>

#include "fermisig/geometry.hpp"

namespace fermisig {

struct DomainSpecFile {
  int schema_version = 1;
  std::string kind;  // simple | graph | conformal
  Domain domain;
  nlohmann::ordered_json echo;  // normalized document, reprintable
};

namespace detail {

inline Polyline parse_boundary(const nlohmann::json& j, double b, const char* field) {
  Polyline p;
  if (j.contains("points")) {
    for (const auto& pt : j.at("points")) {
      if (!pt.is_array() || pt.size() != 2) throw SchemaError(std::string(field) + ".points");
      p.xs.push_back(pt[0].get<double>());
      p.ts.push_back(pt[1].get<double>());
    }
    return p;
  }
  if (j.contains("expr")) {
    const int segments = j.value("segments", 64);
    if (segments < 1) throw SchemaError(std::string(field) + ".segments");
    const ExprPtr e = parse_expression(j.at("expr").get<std::string>());
    for (int i = 0; i <= segments; ++i) {
      const double x = b * i / segments;
      p.xs.push_back(x);
      p.ts.push_back(eval(e, 0.0, x));
    }
    return p;
  }
  throw SchemaError(std::string(field) + ": need points or expr");
}

inline nlohmann::ordered_json boundary_echo(const Polyline& p) {
  nlohmann::ordered_json pts = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < p.xs.size(); ++i) pts.push_back({p.xs[i], p.ts[i]});
  return nlohmann::ordered_json{{"points", pts}};
}

inline FlatDomain parse_flat(const nlohmann::json& j, nlohmann::ordered_json& echo) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "simple") {
    SimpleDomain d;
    d.breakpoints = j.at("breakpoints").get<std::vector<double>>();
    for (const auto& row : j.at("incidence")) d.incidence.push_back(row.get<std::vector<bool>>());
    echo["kind"] = "simple";
    echo["breakpoints"] = d.breakpoints;
    echo["incidence"] = j.at("incidence");
    return d;
  }
  if (kind == "graph") {
    GraphDomain d;
    d.b = j.at("b").get<double>();
    d.t_plus = parse_boundary(j.at("t_plus"), d.b, "t_plus");
    d.t_minus = parse_boundary(j.at("t_minus"), d.b, "t_minus");
    echo["kind"] = "graph";
    echo["b"] = d.b;
    echo["t_plus"] = boundary_echo(d.t_plus);
    echo["t_minus"] = boundary_echo(d.t_minus);
    return d;
  }
  throw SchemaError("kind must be simple, graph or conformal");
}

}  // namespace detail

inline DomainSpecFile parse_domain_spec(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& err) {
    throw SyntaxError(err.byte, err.what());
  }
  DomainSpecFile out;
  try {
    out.schema_version = j.at("schema_version").get<int>();
    if (out.schema_version != 1) throw SchemaError("unsupported schema_version");
    out.kind = j.at("kind").get<std::string>();
    out.echo["schema_version"] = 1;
    if (out.kind == "conformal") {
      out.echo["kind"] = "conformal";
      nlohmann::ordered_json base_echo;
      base_echo["schema_version"] = 1;
      const FlatDomain base = detail::parse_flat(j.at("base"), base_echo);
      const auto& fj = j.at("f");
      ConformalDomain cd;
      cd.base = base;
      if (fj.contains("expr")) {
        const std::string src = fj.at("expr").get<std::string>();
        cd.f = ConformalFactor(parse_expression(src));
        out.echo["base"] = base_echo;
        out.echo["f"] = {{"expr", src}};
      } else if (fj.contains("grid")) {
        const auto& g = fj.at("grid");
        GridField field;
        field.t0 = g.at("t0").get<double>();
        field.t1 = g.at("t1").get<double>();
        field.x0 = g.at("x0").get<double>();
        field.x1 = g.at("x1").get<double>();
        field.nt = g.at("nt").get<int>();
        field.nx = g.at("nx").get<int>();
        field.values = g.at("values").get<std::vector<double>>();
        if (static_cast<int>(field.values.size()) != field.nt * field.nx)
          throw SchemaError("f.grid.values must have nt*nx entries");
        cd.f = ConformalFactor(field);
        out.echo["base"] = base_echo;
        out.echo["f"] = {{"grid", g}};
      } else {
        throw SchemaError("f: need expr or grid");
      }
      out.domain = cd;
    } else {
      nlohmann::ordered_json flat_echo;
      flat_echo["schema_version"] = 1;
      out.domain = std::visit([](auto&& d) -> Domain { return d; }, detail::parse_flat(j, flat_echo));
      flat_echo.erase("schema_version");
      for (auto& [key, val] : flat_echo.items()) out.echo[key] = val;
    }
  } catch (const nlohmann::json::exception& err) {
    throw SchemaError(err.what());
  }
  validate_domain(out.domain);
  return out;
}

inline std::string print_domain_spec(const DomainSpecFile& spec) { return spec.echo.dump(2); }

}  // namespace fermisig
