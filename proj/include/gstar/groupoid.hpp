#pragma once

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gstar/rational.hpp"

namespace gstar {

/// Scalar multiples of counting measure per unit, the only Haar systems a
/// finite groupoid admits.  Default weight is 1 everywhere.
struct HaarWeights {
  std::vector<Rational> weight;  // indexed by element id, meaningful on units

  static HaarWeights ones(int n) {
    HaarWeights w;
    w.weight.assign(n, Rational(1));
    return w;
  }
};

/// Finite groupoid on dense integer element ids 0..n-1.  Units are a flagged
/// subset; multiplication is a partial table with -1 for "undefined".
/// Instances are immutable once finalized and all operations on them are
/// pure functions.
class FiniteGroupoid {
 public:
  int n = 0;
  std::vector<bool> unit_flag;       // houses G^(0)
  std::vector<int> range_map;        // r : element -> unit
  std::vector<int> source_map;       // s : element -> unit
  std::vector<int> inverse_map;      // element -> element
  std::vector<int> mult_table;       // flat n*n, -1 where undefined
  HaarWeights weights;

  int size() const { return n; }
  bool is_unit(int g) const { return unit_flag[g]; }
  int r(int g) const { return range_map[g]; }
  int s(int g) const { return source_map[g]; }
  int inv(int g) const { return inverse_map[g]; }
  int mult(int g, int h) const { return mult_table[static_cast<std::size_t>(g) * n + h]; }
  bool composable(int g, int h) const { return mult(g, h) >= 0; }
  double w(int u) const { return weights.weight[u].to_double(); }

  std::vector<int> units() const {
    std::vector<int> out;
    for (int g = 0; g < n; ++g)
      if (unit_flag[g]) out.push_back(g);
    return out;
  }

  /// G^u = r^{-1}(u), in ascending element id order.
  const std::vector<int>& r_fiber(int u) const { return r_fibers_[u]; }
  /// G_u = s^{-1}(u), in ascending element id order.
  const std::vector<int>& s_fiber(int u) const { return s_fibers_[u]; }

  /// Elements with r = s = u, as a group fragment S_u.
  std::vector<int> isotropy(int u) const {
    std::vector<int> out;
    for (int g : r_fiber(u))
      if (source_map[g] == u) out.push_back(g);
    return out;
  }

  /// Must be called after the tables are filled in; caches fibers.
  void finalize() {
    if (weights.weight.empty()) weights = HaarWeights::ones(n);
    r_fibers_.assign(n, {});
    s_fibers_.assign(n, {});
    for (int g = 0; g < n; ++g) {
      if (range_map[g] >= 0 && range_map[g] < n) r_fibers_[range_map[g]].push_back(g);
      if (source_map[g] >= 0 && source_map[g] < n) s_fibers_[source_map[g]].push_back(g);
    }
  }

 private:
  std::vector<std::vector<int>> r_fibers_, s_fibers_;
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class ViolationKind {
  StructuralRange,   // id out of range in some table
  CompDomain,        // mult defined on a non-composable pair, or missing
  Associativity,
  Involution,
  CancelLeft,        // inv(g)(gh) != h
  CancelRight,       // (gh)inv(h) != g
  RangeConsistency,  // range(g) != g * inv(g)
  SourceConsistency, // source(g) != inv(g) * g
  UnitBehavior,      // flagged unit not idempotent/self-inverse, or vice versa
  WeightPositive,
  WeightInvariance,  // weight not constant along an arrow
};

struct Violation {
  ViolationKind kind;
  std::array<int, 3> where{-1, -1, -1};
  std::string detail;

  bool touches(int g) const { return where[0] == g || where[1] == g || where[2] == g; }
};

inline const char* violation_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::StructuralRange: return "structural-range";
    case ViolationKind::CompDomain: return "composability-domain";
    case ViolationKind::Associativity: return "associativity";
    case ViolationKind::Involution: return "involution";
    case ViolationKind::CancelLeft: return "cancellation-left";
    case ViolationKind::CancelRight: return "cancellation-right";
    case ViolationKind::RangeConsistency: return "range-consistency";
    case ViolationKind::SourceConsistency: return "source-consistency";
    case ViolationKind::UnitBehavior: return "unit-behavior";
    case ViolationKind::WeightPositive: return "weight-positive";
    case ViolationKind::WeightInvariance: return "weight-invariance";
  }
  return "?";
}

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }

  std::string to_string() const {
    std::ostringstream os;
    for (const auto& v : violations) {
      os << violation_name(v.kind) << " @(" << v.where[0] << "," << v.where[1] << ","
         << v.where[2] << ") " << v.detail << "\n";
    }
    return os.str();
  }
};

/// Exhaustive axiom scan.  Cubic in |G| in the worst case; fine up to a few
/// hundred elements, which is the documented limit of this workbench.
inline ValidationReport validate(const FiniteGroupoid& G) {
  ValidationReport rep;
  auto add = [&](ViolationKind k, int a, int b, int c, std::string d = "") {
    rep.violations.push_back({k, {a, b, c}, std::move(d)});
  };
  const int n = G.n;
  auto in_range = [&](int x) { return x >= 0 && x < n; };

  // Structural pass: every table entry must be a legal id.
  bool structural_ok = true;
  if (static_cast<int>(G.range_map.size()) != n || static_cast<int>(G.source_map.size()) != n ||
      static_cast<int>(G.inverse_map.size()) != n ||
      G.mult_table.size() != static_cast<std::size_t>(n) * n ||
      static_cast<int>(G.unit_flag.size()) != n) {
    add(ViolationKind::StructuralRange, -1, -1, -1, "table sizes do not match element count");
    return rep;
  }
  for (int g = 0; g < n; ++g) {
    if (!in_range(G.range_map[g])) { add(ViolationKind::StructuralRange, g, -1, -1, "range id"); structural_ok = false; }
    if (!in_range(G.source_map[g])) { add(ViolationKind::StructuralRange, g, -1, -1, "source id"); structural_ok = false; }
    if (!in_range(G.inverse_map[g])) { add(ViolationKind::StructuralRange, g, -1, -1, "inverse id"); structural_ok = false; }
  }
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h) {
      int p = G.mult_table[static_cast<std::size_t>(g) * n + h];
      if (p != -1 && !in_range(p)) { add(ViolationKind::StructuralRange, g, h, -1, "product id"); structural_ok = false; }
    }
  if (!structural_ok) return rep;  // axiom checks would chase garbage ids

  auto mult = [&](int g, int h) { return G.mult_table[static_cast<std::size_t>(g) * n + h]; };

  // Composability domain: defined iff s(g) = r(h).
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h) {
      bool should = G.source_map[g] == G.range_map[h];
      bool is = mult(g, h) != -1;
      if (should != is)
        add(ViolationKind::CompDomain, g, h, -1, should ? "missing product" : "product on non-composable pair");
    }

  // Involution.
  for (int g = 0; g < n; ++g)
    if (G.inverse_map[G.inverse_map[g]] != g) add(ViolationKind::Involution, g, -1, -1);

  // Cancellation on every defined pair.
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h) {
      int gh = mult(g, h);
      if (gh == -1) continue;
      int left = mult(G.inverse_map[g], gh);
      if (left != h) add(ViolationKind::CancelLeft, g, h, gh);
      int right = mult(gh, G.inverse_map[h]);
      if (right != g) add(ViolationKind::CancelRight, g, h, gh);
    }

  // Associativity over composable triples.
  std::vector<std::pair<int, int>> pairs;
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h)
      if (mult(g, h) != -1) pairs.emplace_back(g, h);
  for (auto [g, h] : pairs) {
    int gh = mult(g, h);
    for (int k = 0; k < n; ++k) {
      int hk = mult(h, k);
      if (hk == -1) continue;
      int a = mult(gh, k), b = mult(g, hk);
      if (a == -1 || b == -1 || a != b) add(ViolationKind::Associativity, g, h, k);
    }
  }

  // Range/source consistency with the operations.
  for (int g = 0; g < n; ++g) {
    if (mult(g, G.inverse_map[g]) != G.range_map[g]) add(ViolationKind::RangeConsistency, g, -1, -1);
    if (mult(G.inverse_map[g], g) != G.source_map[g]) add(ViolationKind::SourceConsistency, g, -1, -1);
  }

  // Unit flags agree with g^2 = g = g^{-1}.
  for (int g = 0; g < n; ++g) {
    bool behaves = G.inverse_map[g] == g && mult(g, g) == g;
    if (behaves != G.unit_flag[g])
      add(ViolationKind::UnitBehavior, g, -1, -1, behaves ? "unit not flagged" : "flagged unit misbehaves");
  }

  // Haar weights: positive, constant along every arrow.
  for (int g = 0; g < n; ++g)
    if (G.unit_flag[g] && !G.weights.weight[g].positive())
      add(ViolationKind::WeightPositive, g, -1, -1);
  for (int g = 0; g < n; ++g) {
    int rg = G.range_map[g], sg = G.source_map[g];
    if (in_range(rg) && in_range(sg) && !(G.weights.weight[rg] == G.weights.weight[sg]))
      add(ViolationKind::WeightInvariance, g, -1, -1, "weight differs between r(g) and s(g)");
  }

  return rep;
}

inline void require_valid(const FiniteGroupoid& G, const char* who) {
  auto rep = validate(G);
  if (!rep.ok())
    throw std::invalid_argument(std::string(who) + ": invalid groupoid\n" + rep.to_string());
}

// ---------------------------------------------------------------------------
// Structural queries
// ---------------------------------------------------------------------------

struct OrbitPartition {
  std::vector<int> orbit_of_unit;        // indexed by element id, -1 for non-units
  std::vector<std::vector<int>> orbits;  // lists of unit ids
};

inline OrbitPartition orbit_partition(const FiniteGroupoid& G) {
  OrbitPartition p;
  p.orbit_of_unit.assign(G.n, -1);
  std::vector<int> parent(G.n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (int g = 0; g < G.n; ++g) {
    int a = find(G.r(g)), b = find(G.s(g));
    if (a != b) parent[a] = b;
  }
  std::map<int, int> root_to_orbit;
  for (int u : G.units()) {
    int root = find(u);
    auto [it, fresh] = root_to_orbit.emplace(root, static_cast<int>(p.orbits.size()));
    if (fresh) p.orbits.emplace_back();
    p.orbit_of_unit[u] = it->second;
    p.orbits[it->second].push_back(u);
  }
  return p;
}

struct StructuralQueries {
  bool is_transitive;
  bool is_principal;
  bool has_abelian_isotropy;
  bool is_group_bundle;
};

inline bool fiber_is_abelian(const FiniteGroupoid& G, const std::vector<int>& su) {
  for (int a : su)
    for (int b : su)
      if (G.mult(a, b) != G.mult(b, a)) return false;
  return true;
}

inline StructuralQueries structural_queries(const FiniteGroupoid& G) {
  StructuralQueries q{};
  q.is_transitive = orbit_partition(G).orbits.size() == 1;
  q.is_principal = true;
  q.has_abelian_isotropy = true;
  q.is_group_bundle = true;
  for (int g = 0; g < G.n; ++g) {
    if (G.r(g) == G.s(g) && !G.is_unit(g)) q.is_principal = false;
    if (G.r(g) != G.s(g)) q.is_group_bundle = false;
  }
  for (int u : G.units())
    if (!fiber_is_abelian(G, G.isotropy(u))) { q.has_abelian_isotropy = false; break; }
  return q;
}

// ---------------------------------------------------------------------------
// Derived groupoids
// ---------------------------------------------------------------------------

/// A groupoid assembled from a subset of another's elements, keeping a map
/// back to the parent's ids.
struct SubGroupoid {
  FiniteGroupoid groupoid;
  std::vector<int> to_parent;  // new id -> parent id
  std::vector<int> from_parent;  // parent id -> new id or -1
};

inline SubGroupoid subgroupoid_from_elements(const FiniteGroupoid& G, std::vector<int> elems) {
  std::sort(elems.begin(), elems.end());
  elems.erase(std::unique(elems.begin(), elems.end()), elems.end());
  SubGroupoid out;
  out.to_parent = elems;
  out.from_parent.assign(G.n, -1);
  for (int i = 0; i < static_cast<int>(elems.size()); ++i) out.from_parent[elems[i]] = i;
  FiniteGroupoid& H = out.groupoid;
  H.n = static_cast<int>(elems.size());
  H.unit_flag.resize(H.n);
  H.range_map.resize(H.n);
  H.source_map.resize(H.n);
  H.inverse_map.resize(H.n);
  H.mult_table.assign(static_cast<std::size_t>(H.n) * H.n, -1);
  H.weights.weight.resize(H.n);
  for (int i = 0; i < H.n; ++i) {
    int g = elems[i];
    H.unit_flag[i] = G.is_unit(g);
    H.range_map[i] = out.from_parent[G.r(g)];
    H.source_map[i] = out.from_parent[G.s(g)];
    H.inverse_map[i] = out.from_parent[G.inv(g)];
    H.weights.weight[i] = G.weights.weight[g];
    if (H.range_map[i] < 0 || H.source_map[i] < 0 || H.inverse_map[i] < 0)
      throw std::invalid_argument("subgroupoid: element set not closed under r/s/inv");
  }
  for (int i = 0; i < H.n; ++i)
    for (int j = 0; j < H.n; ++j) {
      int p = G.mult(elems[i], elems[j]);
      if (p >= 0) {
        int q = out.from_parent[p];
        if (q < 0) throw std::invalid_argument("subgroupoid: element set not closed under products");
        H.mult_table[static_cast<std::size_t>(i) * H.n + j] = q;
      }
    }
  H.finalize();
  return out;
}

/// Checks that a subset of G's elements forms a subgroupoid (closed under
/// inverse and all defined products, and contains r/s of its members).
inline bool is_subgroupoid(const FiniteGroupoid& G, const std::vector<int>& elems) {
  std::set<int> in(elems.begin(), elems.end());
  for (int g : elems) {
    if (!in.count(G.inv(g))) return false;
    if (!in.count(G.r(g)) || !in.count(G.s(g))) return false;
  }
  for (int g : elems)
    for (int h : elems) {
      int p = G.mult(g, h);
      if (p >= 0 && !in.count(p)) return false;
    }
  return true;
}

/// Stabilizer subgroupoid S = { g : r(g) = s(g) }, a group bundle over the
/// units, returned with the inclusion into G.
struct StabilizerBundle {
  FiniteGroupoid bundle;
  std::vector<int> to_parent;
  std::vector<int> from_parent;
  std::vector<std::vector<int>> fiber_of_unit;  // parent unit id -> bundle element ids
};

inline StabilizerBundle stabilizer_subgroupoid(const FiniteGroupoid& G) {
  std::vector<int> elems;
  for (int g = 0; g < G.n; ++g)
    if (G.r(g) == G.s(g)) elems.push_back(g);
  auto sub = subgroupoid_from_elements(G, elems);
  StabilizerBundle out;
  out.bundle = std::move(sub.groupoid);
  out.to_parent = std::move(sub.to_parent);
  out.from_parent = std::move(sub.from_parent);
  out.fiber_of_unit.assign(G.n, {});
  for (int i = 0; i < out.bundle.n; ++i) {
    int parent_unit = G.r(out.to_parent[i]);
    out.fiber_of_unit[parent_unit].push_back(i);
  }
  return out;
}

/// Orbit groupoid R together with the canonical homomorphism pi = (r,s).
struct OrbitStructure {
  OrbitPartition partition;
  FiniteGroupoid orbit_groupoid;       // pair groupoid of each orbit
  std::vector<int> pi;                 // G element -> R element
  std::vector<int> unit_of_r_element;  // unused helper: r of each R element in G unit ids
};

inline OrbitStructure orbit_structure(const FiniteGroupoid& G) {
  OrbitStructure out;
  out.partition = orbit_partition(G);
  auto& P = out.partition;
  // R elements: pairs (u,v) of units in the same orbit; index them.
  std::vector<std::pair<int, int>> pairs;
  std::map<std::pair<int, int>, int> index;
  for (const auto& orbit : P.orbits)
    for (int u : orbit)
      for (int v : orbit) {
        index[{u, v}] = static_cast<int>(pairs.size());
        pairs.emplace_back(u, v);
      }
  FiniteGroupoid& R = out.orbit_groupoid;
  R.n = static_cast<int>(pairs.size());
  R.unit_flag.resize(R.n);
  R.range_map.resize(R.n);
  R.source_map.resize(R.n);
  R.inverse_map.resize(R.n);
  R.mult_table.assign(static_cast<std::size_t>(R.n) * R.n, -1);
  R.weights.weight.assign(R.n, Rational(1));
  for (int i = 0; i < R.n; ++i) {
    auto [u, v] = pairs[i];
    R.unit_flag[i] = u == v;
    R.range_map[i] = index[{u, u}];
    R.source_map[i] = index[{v, v}];
    R.inverse_map[i] = index[{v, u}];
  }
  for (int i = 0; i < R.n; ++i)
    for (int j = 0; j < R.n; ++j) {
      auto [u, v] = pairs[i];
      auto [w, z] = pairs[j];
      if (v == w) R.mult_table[static_cast<std::size_t>(i) * R.n + j] = index[{u, z}];
    }
  R.finalize();
  out.pi.resize(G.n);
  for (int g = 0; g < G.n; ++g) out.pi[g] = index[{G.r(g), G.s(g)}];
  out.unit_of_r_element.resize(R.n);
  for (int i = 0; i < R.n; ++i) out.unit_of_r_element[i] = pairs[i].first;
  return out;
}

/// Restriction G|_Y to an invariant set of units.  Throws, naming a violating
/// element, when Y is not invariant under the orbit relation.
inline SubGroupoid restriction(const FiniteGroupoid& G, const std::vector<int>& Y) {
  std::set<int> y(Y.begin(), Y.end());
  for (int u : y)
    if (u < 0 || u >= G.n || !G.is_unit(u))
      throw std::invalid_argument("restriction: id " + std::to_string(u) + " is not a unit");
  for (int g = 0; g < G.n; ++g) {
    bool rin = y.count(G.r(g)), sin = y.count(G.s(g));
    if (rin != sin)
      throw std::invalid_argument("restriction: subset not invariant, element " + std::to_string(g) +
                                  " crosses the boundary");
  }
  std::vector<int> elems;
  for (int g = 0; g < G.n; ++g)
    if (y.count(G.r(g))) elems.push_back(g);
  return subgroupoid_from_elements(G, elems);
}

// ---------------------------------------------------------------------------
// Homomorphisms and isomorphisms
// ---------------------------------------------------------------------------

struct HomomorphismCheck {
  bool ok;
  std::vector<std::array<int, 2>> violations;  // composable pairs that fail
};

/// Definition-level check: phi preserves composability and products.
inline HomomorphismCheck check_homomorphism(const FiniteGroupoid& G, const FiniteGroupoid& H,
                                            const std::vector<int>& phi) {
  HomomorphismCheck out{true, {}};
  if (static_cast<int>(phi.size()) != G.n) throw std::invalid_argument("check_homomorphism: map not total");
  for (int g : phi)
    if (g < 0 || g >= H.n) throw std::invalid_argument("check_homomorphism: image id out of range");
  for (int g = 0; g < G.n; ++g)
    for (int h = 0; h < G.n; ++h) {
      int p = G.mult(g, h);
      if (p == -1) continue;
      int q = H.mult(phi[g], phi[h]);
      if (q == -1 || q != phi[p]) {
        out.ok = false;
        out.violations.push_back({g, h});
      }
    }
  return out;
}

inline bool is_bijective(const std::vector<int>& phi, int target_size) {
  if (static_cast<int>(phi.size()) != target_size) return false;
  std::vector<bool> hit(target_size, false);
  for (int x : phi) {
    if (x < 0 || x >= target_size || hit[x]) return false;
    hit[x] = true;
  }
  return true;
}

namespace detail {

struct IsoInvariant {
  bool unit;
  int rfiber, sfiber, iso_size, order;  // order = smallest k with g^k idempotent loop, 0 if n/a
  bool operator==(const IsoInvariant&) const = default;
};

inline IsoInvariant iso_invariant(const FiniteGroupoid& G, int g) {
  IsoInvariant v{};
  v.unit = G.is_unit(g);
  v.rfiber = static_cast<int>(G.r_fiber(G.r(g)).size());
  v.sfiber = static_cast<int>(G.s_fiber(G.s(g)).size());
  v.iso_size = static_cast<int>(G.isotropy(G.r(g)).size());
  v.order = 0;
  if (G.r(g) == G.s(g)) {  // group element: its order is an invariant
    int x = g, k = 1;
    while (!G.is_unit(x) && k <= G.n) { x = G.mult(x, g); ++k; }
    v.order = k;
  }
  return v;
}

inline bool iso_backtrack(const FiniteGroupoid& G, const FiniteGroupoid& H, std::vector<int>& phi,
                          std::vector<bool>& used, int g,
                          const std::vector<IsoInvariant>& gi, const std::vector<IsoInvariant>& hi) {
  if (g == G.n) {
    auto chk = check_homomorphism(G, H, phi);
    return chk.ok;
  }
  for (int cand = 0; cand < H.n; ++cand) {
    if (used[cand] || !(gi[g] == hi[cand])) continue;
    // local consistency with already assigned structure
    if (phi[G.r(g)] >= 0 && phi[G.r(g)] != H.r(cand)) continue;
    if (phi[G.s(g)] >= 0 && phi[G.s(g)] != H.s(cand)) continue;
    if (phi[G.inv(g)] >= 0 && phi[G.inv(g)] != H.inv(cand)) continue;
    bool consistent = true;
    for (int h = 0; h < g && consistent; ++h) {
      if (phi[h] < 0) continue;
      int p = G.mult(g, h);
      if (p >= 0 && phi[p] >= 0 && H.mult(cand, phi[h]) != phi[p]) consistent = false;
      if (p >= 0 && H.mult(cand, phi[h]) == -1) consistent = false;
      int q = G.mult(h, g);
      if (q >= 0 && phi[q] >= 0 && H.mult(phi[h], cand) != phi[q]) consistent = false;
      if (q >= 0 && H.mult(phi[h], cand) == -1) consistent = false;
    }
    if (!consistent) continue;
    phi[g] = cand;
    used[cand] = true;
    if (iso_backtrack(G, H, phi, used, g + 1, gi, hi)) return true;
    phi[g] = -1;
    used[cand] = false;
  }
  return false;
}

}  // namespace detail

/// Backtracking isomorphism search with degree invariants as pruning.
/// No canonical-form claim; exponential worst case, fine at workbench scale.
inline std::optional<std::vector<int>> find_isomorphism(const FiniteGroupoid& G, const FiniteGroupoid& H) {
  if (G.n != H.n) return std::nullopt;
  std::vector<detail::IsoInvariant> gi(G.n), hi(H.n);
  for (int g = 0; g < G.n; ++g) gi[g] = detail::iso_invariant(G, g);
  for (int h = 0; h < H.n; ++h) hi[h] = detail::iso_invariant(H, h);
  {
    auto a = gi;
    auto b = hi;
    auto key = [](const detail::IsoInvariant& v) {
      return std::tuple(v.unit, v.rfiber, v.sfiber, v.iso_size, v.order);
    };
    auto lt = [&](const detail::IsoInvariant& x, const detail::IsoInvariant& y) { return key(x) < key(y); };
    std::sort(a.begin(), a.end(), lt);
    std::sort(b.begin(), b.end(), lt);
    for (int i = 0; i < G.n; ++i)
      if (!(a[i] == b[i])) return std::nullopt;
  }
  std::vector<int> phi(G.n, -1);
  std::vector<bool> used(H.n, false);
  if (detail::iso_backtrack(G, H, phi, used, 0, gi, hi)) return phi;
  return std::nullopt;
}

inline bool are_isomorphic(const FiniteGroupoid& G, const FiniteGroupoid& H) {
  return find_isomorphism(G, H).has_value();
}

}  // namespace gstar
