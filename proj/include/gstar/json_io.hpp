#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gstar/crossed_product.hpp"
#include "gstar/groupoid.hpp"
#include "gstar/groupoid_build.hpp"

namespace gstar {

using nlohmann::json;

/// Parse or schema failure, carrying a JSON pointer to the offending node.
struct SpecError : std::runtime_error {
  std::string pointer;
  SpecError(const std::string& msg, std::string ptr)
      : std::runtime_error(msg + " (at " + (ptr.empty() ? "/" : ptr) + ")"), pointer(std::move(ptr)) {}
};

/// A validated ingestion document.  kind selects which payload is active.
struct SpecDocument {
  enum class Kind { GroupoidTable, Constructor, DynamicalSystem, BundleDemo };
  Kind kind = Kind::Constructor;
  json canonical;  // normalized form; serialize() returns exactly this

  std::optional<FiniteGroupoid> groupoid;  // table + constructor + the base of systems
  std::optional<CrossedSystem> system;     // dynamical-system

  // bundle-demo parameters
  std::string demo;
  int n_max = 10;
  int order = 2;
  double epsilon = 1e-6;
  double limit_angle = 0.0;
  std::string character = "k=1";
};

namespace detail_json {

inline const json& need(const json& j, const char* key, const std::string& ptr) {
  if (!j.is_object() || !j.contains(key)) throw SpecError(std::string("missing key '") + key + "'", ptr);
  return j.at(key);
}

inline int need_int(const json& j, const char* key, const std::string& ptr) {
  const json& v = need(j, key, ptr);
  if (!v.is_number_integer()) throw SpecError(std::string("'") + key + "' must be an integer", ptr + "/" + key);
  return v.get<int>();
}

inline GroupTable parse_table(const json& j, const std::string& ptr) {
  if (!j.is_array()) throw SpecError("group table must be an array of rows", ptr);
  GroupTable t;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& row = j[i];
    if (!row.is_array()) throw SpecError("table row must be an array", ptr + "/" + std::to_string(i));
    std::vector<int> r;
    for (const auto& v : row) {
      if (!v.is_number_integer()) throw SpecError("table entries must be integers", ptr + "/" + std::to_string(i));
      r.push_back(v.get<int>());
    }
    t.push_back(std::move(r));
  }
  std::string why;
  if (!is_group_table(t, &why)) throw SpecError("not a group table: " + why, ptr);
  return t;
}

/// A group described either by {"order": m} (cyclic), {"table": [...]},
/// or {"name": "symmetric"|"dihedral", "n": k}.
inline GroupTable parse_group(const json& j, const std::string& ptr) {
  if (j.contains("order")) return cyclic_table(need_int(j, "order", ptr));
  if (j.contains("table")) return parse_table(j.at("table"), ptr + "/table");
  if (j.contains("name")) {
    std::string name = j.at("name").get<std::string>();
    int n = need_int(j, "n", ptr);
    if (name == "symmetric") return symmetric_table(n);
    if (name == "dihedral") return dihedral_table(n);
    throw SpecError("unknown group name '" + name + "'", ptr + "/name");
  }
  throw SpecError("group spec needs 'order', 'table' or 'name'", ptr);
}

inline FiniteGroupoid parse_groupoid(const json& j, const std::string& ptr);

inline FiniteGroupoid parse_constructor(const json& j, const std::string& ptr) {
  std::string name = need(j, "name", ptr).get<std::string>();
  if (name == "cyclic") return from_group(cyclic_table(need_int(j, "order", ptr)));
  if (name == "group") return from_group(parse_group(j, ptr));
  if (name == "symmetric") return from_group(symmetric_table(need_int(j, "n", ptr)));
  if (name == "dihedral") return from_group(dihedral_table(need_int(j, "n", ptr)));
  if (name == "pair") return pair_groupoid(need_int(j, "n", ptr));
  if (name == "cotrivial") return cotrivial_groupoid(need_int(j, "n", ptr));
  if (name == "group-bundle") {
    const json& fibers = need(j, "fibers", ptr);
    if (!fibers.is_array() || fibers.empty()) throw SpecError("'fibers' must be a nonempty array", ptr + "/fibers");
    std::vector<GroupTable> tables;
    for (std::size_t i = 0; i < fibers.size(); ++i)
      tables.push_back(parse_group(fibers[i], ptr + "/fibers/" + std::to_string(i)));
    return group_bundle(tables);
  }
  if (name == "transformation") {
    GroupTable g = parse_group(need(j, "group", ptr), ptr + "/group");
    int space = need_int(j, "space", ptr);
    const json& action = need(j, "action", ptr);
    if (!action.is_array() || action.size() != g.size())
      throw SpecError("'action' must list one permutation per group element", ptr + "/action");
    std::vector<std::vector<int>> perms;
    for (std::size_t i = 0; i < action.size(); ++i) {
      const json& p = action[i];
      if (!p.is_array() || static_cast<int>(p.size()) != space)
        throw SpecError("permutation has wrong length", ptr + "/action/" + std::to_string(i));
      std::vector<int> perm;
      for (const auto& v : p) perm.push_back(v.get<int>());
      perms.push_back(std::move(perm));
    }
    auto act = group_action(from_group(g), perms);
    auto chk = validate_set_action(act);
    if (!chk.ok) throw SpecError("invalid action: " + chk.detail, ptr + "/action");
    return transformation_groupoid(act).groupoid;
  }
  if (name == "disjoint-union") {
    const json& parts = need(j, "parts", ptr);
    if (!parts.is_array() || parts.empty()) throw SpecError("'parts' must be a nonempty array", ptr + "/parts");
    FiniteGroupoid acc = parse_groupoid(parts[0], ptr + "/parts/0");
    for (std::size_t i = 1; i < parts.size(); ++i)
      acc = disjoint_union(acc, parse_groupoid(parts[i], ptr + "/parts/" + std::to_string(i)));
    return acc;
  }
  throw SpecError("unknown constructor '" + name + "'", ptr + "/name");
}

inline FiniteGroupoid parse_groupoid_table(const json& j, const std::string& ptr) {
  int n = need_int(j, "elements", ptr);
  if (n <= 0) throw SpecError("'elements' must be positive", ptr + "/elements");
  FiniteGroupoid G;
  G.n = n;
  G.unit_flag.assign(n, false);
  for (const auto& u : need(j, "units", ptr)) {
    int id = u.get<int>();
    if (id < 0 || id >= n) throw SpecError("unit id out of range", ptr + "/units");
    G.unit_flag[id] = true;
  }
  auto read_map = [&](const char* key) {
    const json& arr = need(j, key, ptr);
    if (!arr.is_array() || static_cast<int>(arr.size()) != n)
      throw SpecError(std::string("'") + key + "' must list one id per element", ptr + "/" + key);
    std::vector<int> out;
    for (const auto& v : arr) out.push_back(v.get<int>());
    return out;
  };
  G.range_map = read_map("range");
  G.source_map = read_map("source");
  G.inverse_map = read_map("inverse");
  G.mult_table.assign(static_cast<std::size_t>(n) * n, -1);
  const json& mult = need(j, "mult", ptr);
  for (std::size_t i = 0; i < mult.size(); ++i) {
    const json& triple = mult[i];
    if (!triple.is_array() || triple.size() != 3)
      throw SpecError("mult entries are [g,h,gh] triples", ptr + "/mult/" + std::to_string(i));
    int g = triple[0].get<int>(), h = triple[1].get<int>(), gh = triple[2].get<int>();
    if (g < 0 || g >= n || h < 0 || h >= n || gh < 0 || gh >= n)
      throw SpecError("mult id out of range", ptr + "/mult/" + std::to_string(i));
    G.mult_table[static_cast<std::size_t>(g) * n + h] = gh;
  }
  G.weights = HaarWeights::ones(n);
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    if (!w.is_array() || static_cast<int>(w.size()) != n)
      throw SpecError("'weights' must list one rational per element", ptr + "/weights");
    for (int i = 0; i < n; ++i) {
      if (w[i].is_string()) G.weights.weight[i] = Rational::parse(w[i].get<std::string>());
      else if (w[i].is_number_integer()) G.weights.weight[i] = Rational(w[i].get<long long>());
      else throw SpecError("weights are strings like \"1/2\" or integers", ptr + "/weights");
    }
  }
  G.finalize();
  return G;
}

inline FiniteGroupoid parse_groupoid(const json& j, const std::string& ptr) {
  std::string kind = need(j, "kind", ptr).get<std::string>();
  if (kind == "constructor") return parse_constructor(j, ptr);
  if (kind == "groupoid-table") return parse_groupoid_table(j, ptr);
  throw SpecError("expected a groupoid spec here", ptr + "/kind");
}

inline Complex parse_complex(const json& j, const std::string& ptr) {
  if (!j.is_array() || j.size() != 2) throw SpecError("complex numbers are [re, im] pairs", ptr);
  return {j[0].get<double>(), j[1].get<double>()};
}

inline ComplexMatrix parse_matrix(const json& j, const std::string& ptr) {
  if (!j.is_array() || j.empty()) throw SpecError("matrix must be a nonempty array of rows", ptr);
  int rows = static_cast<int>(j.size());
  int cols = static_cast<int>(j[0].size());
  ComplexMatrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    if (static_cast<int>(j[r].size()) != cols) throw SpecError("ragged matrix", ptr + "/" + std::to_string(r));
    for (int c = 0; c < cols; ++c)
      m(r, c) = parse_complex(j[r][c], ptr + "/" + std::to_string(r) + "/" + std::to_string(c));
  }
  return m;
}

inline json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

inline json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (int r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (int c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail_json

inline SpecDocument parse_spec_json(const json& j) {
  using detail_json::need;
  SpecDocument doc;
  doc.canonical = j;
  std::string kind = need(j, "kind", "").get<std::string>();
  if (kind == "constructor" || kind == "groupoid-table") {
    doc.kind = kind == "constructor" ? SpecDocument::Kind::Constructor : SpecDocument::Kind::GroupoidTable;
    doc.groupoid = detail_json::parse_groupoid(j, "");
    return doc;
  }
  if (kind == "dynamical-system") {
    doc.kind = SpecDocument::Kind::DynamicalSystem;
    FiniteGroupoid G = detail_json::parse_groupoid(need(j, "groupoid", ""), "/groupoid");
    auto grep = validate(G);
    if (!grep.ok()) throw SpecError("underlying groupoid is invalid:\n" + grep.to_string(), "/groupoid");
    FiberedAlgebra A;
    A.dims.assign(G.n, 1);
    const json& dims = need(j, "dims", "");
    if (dims.is_array()) {
      auto units = G.units();
      if (dims.size() != units.size())
        throw SpecError("'dims' must list one dimension per unit", "/dims");
      for (std::size_t i = 0; i < units.size(); ++i) A.dims[units[i]] = dims[i].get<int>();
    } else if (dims.is_object()) {
      for (auto it = dims.begin(); it != dims.end(); ++it) {
        int unit = std::stoi(it.key());
        if (unit < 0 || unit >= G.n || !G.is_unit(unit))
          throw SpecError("dims key '" + it.key() + "' is not a unit id", "/dims");
        A.dims[unit] = it.value().get<int>();
      }
    } else {
      throw SpecError("'dims' must be an array or an object", "/dims");
    }
    // dims only matter on units, but orbit-constancy needs them propagated
    for (int g = 0; g < G.n; ++g) A.dims[g] = A.dims[G.r(g)];
    for (int u : G.units()) A.dims[u] = A.dims[G.r(u)];

    std::vector<ComplexMatrix> unitaries(G.n);
    for (int g = 0; g < G.n; ++g)
      unitaries[g] = ComplexMatrix::Identity(A.dims[G.r(g)], A.dims[G.r(g)]);
    if (j.contains("unitaries")) {
      const json& us = j.at("unitaries");
      if (!us.is_array()) throw SpecError("'unitaries' must be an array", "/unitaries");
      for (std::size_t i = 0; i < us.size(); ++i) {
        std::string ptr = "/unitaries/" + std::to_string(i);
        int arrow = detail_json::need_int(us[i], "arrow", ptr);
        if (arrow < 0 || arrow >= G.n) throw SpecError("arrow id out of range", ptr + "/arrow");
        unitaries[arrow] = detail_json::parse_matrix(need(us[i], "matrix", ptr), ptr + "/matrix");
      }
    }
    doc.groupoid = G;
    doc.system = system_from_unitaries(G, A, unitaries);
    auto rep = validate_action(*doc.system);
    if (!rep.ok()) throw SpecError("invalid dynamical system:\n" + rep.to_string(), "/unitaries");
    return doc;
  }
  if (kind == "bundle-demo") {
    doc.kind = SpecDocument::Kind::BundleDemo;
    doc.demo = need(j, "demo", "").get<std::string>();
    if (j.contains("n_max")) doc.n_max = j.at("n_max").get<int>();
    if (j.contains("order")) doc.order = j.at("order").get<int>();
    if (j.contains("epsilon")) doc.epsilon = j.at("epsilon").get<double>();
    if (j.contains("limit_angle")) doc.limit_angle = j.at("limit_angle").get<double>();
    if (j.contains("character")) doc.character = j.at("character").get<std::string>();
    if (doc.demo != "counterexample" && doc.demo != "dual-convergence" && doc.demo != "double-dual")
      throw SpecError("unknown demo '" + doc.demo + "'", "/demo");
    return doc;
  }
  throw SpecError("unknown kind '" + kind + "'", "/kind");
}

inline SpecDocument parse_spec_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("JSON parse error: ") + e.what(), "");
  }
  return parse_spec_json(j);
}

inline SpecDocument parse_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open file '" + path + "'", "");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec_text(ss.str());
}

/// Canonical serialization: explicit tables for groupoids, the normalized
/// document otherwise.  serialize(parse(x)) is idempotent.
inline json serialize_groupoid(const FiniteGroupoid& G) {
  json j;
  j["kind"] = "groupoid-table";
  j["elements"] = G.n;
  json units = json::array();
  for (int u : G.units()) units.push_back(u);
  j["units"] = std::move(units);
  j["range"] = G.range_map;
  j["source"] = G.source_map;
  j["inverse"] = G.inverse_map;
  json mult = json::array();
  for (int g = 0; g < G.n; ++g)
    for (int h = 0; h < G.n; ++h)
      if (G.mult(g, h) >= 0) mult.push_back(json::array({g, h, G.mult(g, h)}));
  j["mult"] = std::move(mult);
  json weights = json::array();
  for (int g = 0; g < G.n; ++g) weights.push_back(G.weights.weight[g].str());
  j["weights"] = std::move(weights);
  return j;
}

inline json serialize_spec(const SpecDocument& doc) {
  switch (doc.kind) {
    case SpecDocument::Kind::GroupoidTable:
      return serialize_groupoid(*doc.groupoid);
    case SpecDocument::Kind::Constructor:
      return doc.canonical;
    case SpecDocument::Kind::DynamicalSystem: {
      json j;
      j["kind"] = "dynamical-system";
      j["groupoid"] = serialize_groupoid(doc.system->G);
      json dims = json::array();
      for (int u : doc.system->G.units()) dims.push_back(doc.system->A.dims[u]);
      j["dims"] = std::move(dims);
      json us = json::array();
      for (int g = 0; g < doc.system->G.n; ++g) {
        if (!doc.system->alpha[g].witness) continue;
        json entry;
        entry["arrow"] = g;
        entry["matrix"] = detail_json::matrix_to_json(*doc.system->alpha[g].witness);
        us.push_back(std::move(entry));
      }
      j["unitaries"] = std::move(us);
      return j;
    }
    case SpecDocument::Kind::BundleDemo:
      return doc.canonical;
  }
  return {};
}

}  // namespace gstar
