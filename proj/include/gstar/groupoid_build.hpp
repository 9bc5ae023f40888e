#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "gstar/groupoid.hpp"

namespace gstar {

// ---------------------------------------------------------------------------
// Group tables (square multiplication tables on ids 0..m-1)
// ---------------------------------------------------------------------------

using GroupTable = std::vector<std::vector<int>>;

inline GroupTable cyclic_table(int m) {
  if (m < 1) throw std::invalid_argument("cyclic_table: order must be positive");
  GroupTable t(m, std::vector<int>(m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) t[i][j] = (i + j) % m;
  return t;
}

inline GroupTable product_table(const GroupTable& a, const GroupTable& b) {
  int na = static_cast<int>(a.size()), nb = static_cast<int>(b.size());
  GroupTable t(na * nb, std::vector<int>(na * nb));
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j)
      for (int k = 0; k < na; ++k)
        for (int l = 0; l < nb; ++l) t[i * nb + j][k * nb + l] = a[i][k] * nb + b[j][l];
  return t;
}

/// Symmetric group S_n as permutations in lexicographic order.  Composition
/// convention: (p*q)(x) = p(q(x)).
inline GroupTable symmetric_table(int n) {
  std::vector<std::vector<int>> perms;
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  do { perms.push_back(p); } while (std::next_permutation(p.begin(), p.end()));
  int m = static_cast<int>(perms.size());
  std::map<std::vector<int>, int> index;
  for (int i = 0; i < m; ++i) index[perms[i]] = i;
  GroupTable t(m, std::vector<int>(m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      std::vector<int> comp(n);
      for (int x = 0; x < n; ++x) comp[x] = perms[i][perms[j][x]];
      t[i][j] = index[comp];
    }
  return t;
}

/// Dihedral group of order 2n: elements r^i s^j, j in {0,1}, encoded i + n*j.
inline GroupTable dihedral_table(int n) {
  GroupTable t(2 * n, std::vector<int>(2 * n));
  auto enc = [&](int i, int j) { return ((i % n + n) % n) + n * j; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < 2; ++l) {
          // (r^i s^j)(r^k s^l) = r^(i + k or i - k) s^(j xor l)
          int exp = j == 0 ? i + k : i - k;
          t[enc(i, j)][enc(k, l)] = enc(exp, j ^ l);
        }
  return t;
}

/// Identity element of a group table, or -1 if there is none.
inline int table_identity(const GroupTable& t) {
  int m = static_cast<int>(t.size());
  for (int e = 0; e < m; ++e) {
    bool ok = true;
    for (int g = 0; g < m && ok; ++g) ok = t[e][g] == g && t[g][e] == g;
    if (ok) return e;
  }
  return -1;
}

inline bool is_group_table(const GroupTable& t, std::string* why = nullptr) {
  int m = static_cast<int>(t.size());
  if (m == 0) { if (why) *why = "empty table"; return false; }
  for (const auto& row : t) {
    if (static_cast<int>(row.size()) != m) { if (why) *why = "table not square"; return false; }
    for (int x : row)
      if (x < 0 || x >= m) { if (why) *why = "entry out of range"; return false; }
  }
  int e = table_identity(t);
  if (e < 0) { if (why) *why = "no identity"; return false; }
  for (int g = 0; g < m; ++g) {
    bool has_inv = false;
    for (int h = 0; h < m; ++h) has_inv = has_inv || (t[g][h] == e && t[h][g] == e);
    if (!has_inv) { if (why) *why = "element " + std::to_string(g) + " has no inverse"; return false; }
  }
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        if (t[t[a][b]][c] != t[a][t[b][c]]) { if (why) *why = "not associative"; return false; }
  return true;
}

// ---------------------------------------------------------------------------
// Groupoid constructors
// ---------------------------------------------------------------------------

namespace detail {
inline FiniteGroupoid alloc_groupoid(int n) {
  FiniteGroupoid G;
  G.n = n;
  G.unit_flag.assign(n, false);
  G.range_map.assign(n, -1);
  G.source_map.assign(n, -1);
  G.inverse_map.assign(n, -1);
  G.mult_table.assign(static_cast<std::size_t>(n) * n, -1);
  G.weights = HaarWeights::ones(n);
  return G;
}
}  // namespace detail

/// A group viewed as a groupoid with a single unit.
inline FiniteGroupoid from_group(const GroupTable& table) {
  std::string why;
  if (!is_group_table(table, &why)) throw std::invalid_argument("from_group: " + why);
  int m = static_cast<int>(table.size());
  int e = table_identity(table);
  FiniteGroupoid G = detail::alloc_groupoid(m);
  for (int g = 0; g < m; ++g) {
    G.unit_flag[g] = g == e;
    G.range_map[g] = e;
    G.source_map[g] = e;
    for (int h = 0; h < m; ++h) {
      G.mult_table[static_cast<std::size_t>(g) * m + h] = table[g][h];
      if (table[g][h] == e && table[h][g] == e) G.inverse_map[g] = h;
    }
  }
  G.finalize();
  return G;
}

/// Trivial (pair) groupoid on {1..n}: elements (x,y), (x,y)(y,z) = (x,z).
/// Element id of (x,y) is x*n + y; units are the diagonal.
inline FiniteGroupoid pair_groupoid(int n) {
  if (n < 1) throw std::invalid_argument("pair_groupoid: n must be >= 1");
  FiniteGroupoid G = detail::alloc_groupoid(n * n);
  auto id = [n](int x, int y) { return x * n + y; };
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) {
      int g = id(x, y);
      G.unit_flag[g] = x == y;
      G.range_map[g] = id(x, x);
      G.source_map[g] = id(y, y);
      G.inverse_map[g] = id(y, x);
      for (int z = 0; z < n; ++z)
        G.mult_table[static_cast<std::size_t>(g) * G.n + id(y, z)] = id(x, z);
    }
  G.finalize();
  return G;
}

/// Cotrivial groupoid: n isolated units.
inline FiniteGroupoid cotrivial_groupoid(int n) {
  if (n < 1) throw std::invalid_argument("cotrivial_groupoid: n must be >= 1");
  FiniteGroupoid G = detail::alloc_groupoid(n);
  for (int x = 0; x < n; ++x) {
    G.unit_flag[x] = true;
    G.range_map[x] = x;
    G.source_map[x] = x;
    G.inverse_map[x] = x;
    G.mult_table[static_cast<std::size_t>(x) * n + x] = x;
  }
  G.finalize();
  return G;
}

/// Disjoint union of fiber groups over a base set; range = source = fiber
/// projection.  Element ids: fibers laid out in base order.
inline FiniteGroupoid group_bundle(const std::vector<GroupTable>& fibers) {
  if (fibers.empty()) throw std::invalid_argument("group_bundle: no fibers");
  int total = 0;
  std::vector<int> offset;
  for (const auto& f : fibers) {
    std::string why;
    if (!is_group_table(f, &why)) throw std::invalid_argument("group_bundle: fiber invalid: " + why);
    offset.push_back(total);
    total += static_cast<int>(f.size());
  }
  FiniteGroupoid G = detail::alloc_groupoid(total);
  for (std::size_t b = 0; b < fibers.size(); ++b) {
    const auto& t = fibers[b];
    int m = static_cast<int>(t.size());
    int e = table_identity(t);
    int base = offset[b];
    for (int g = 0; g < m; ++g) {
      G.unit_flag[base + g] = g == e;
      G.range_map[base + g] = base + e;
      G.source_map[base + g] = base + e;
      for (int h = 0; h < m; ++h) {
        G.mult_table[static_cast<std::size_t>(base + g) * total + (base + h)] = base + t[g][h];
        if (t[g][h] == e && t[h][g] == e) G.inverse_map[base + g] = base + h;
      }
    }
  }
  G.finalize();
  return G;
}

/// Disjoint union of two groupoids; ids of H shifted by |G|.
inline FiniteGroupoid disjoint_union(const FiniteGroupoid& A, const FiniteGroupoid& B) {
  FiniteGroupoid G = detail::alloc_groupoid(A.n + B.n);
  for (int g = 0; g < A.n; ++g) {
    G.unit_flag[g] = A.unit_flag[g];
    G.range_map[g] = A.range_map[g];
    G.source_map[g] = A.source_map[g];
    G.inverse_map[g] = A.inverse_map[g];
    G.weights.weight[g] = A.weights.weight[g];
    for (int h = 0; h < A.n; ++h)
      G.mult_table[static_cast<std::size_t>(g) * G.n + h] = A.mult(g, h);
  }
  for (int g = 0; g < B.n; ++g) {
    G.unit_flag[A.n + g] = B.unit_flag[g];
    G.range_map[A.n + g] = A.n + B.range_map[g];
    G.source_map[A.n + g] = A.n + B.source_map[g];
    G.inverse_map[A.n + g] = A.n + B.inverse_map[g];
    G.weights.weight[A.n + g] = B.weights.weight[g];
    for (int h = 0; h < B.n; ++h) {
      int p = B.mult(g, h);
      if (p >= 0) G.mult_table[static_cast<std::size_t>(A.n + g) * G.n + (A.n + h)] = A.n + p;
    }
  }
  G.finalize();
  return G;
}

// ---------------------------------------------------------------------------
// Groupoid actions on finite sets and transformation groupoids
// ---------------------------------------------------------------------------

/// Left action of a groupoid (or group, as the one-unit case) on a finite
/// set X.  act(g, x) is defined exactly when s(g) = anchor(x).
struct GroupoidActionOnSet {
  FiniteGroupoid groupoid;
  int space_size = 0;
  std::vector<int> anchor;  // X -> unit ids of groupoid
  std::vector<int> act;     // flat |G| x |X|, -1 where undefined

  int apply(int g, int x) const { return act[static_cast<std::size_t>(g) * space_size + x]; }
};

struct ActionCheck {
  bool ok = true;
  std::string detail;
};

inline ActionCheck validate_set_action(const GroupoidActionOnSet& A) {
  const auto& G = A.groupoid;
  auto fail = [&](std::string d) { return ActionCheck{false, std::move(d)}; };
  if (static_cast<int>(A.anchor.size()) != A.space_size) return fail("anchor not total");
  for (int x = 0; x < A.space_size; ++x) {
    int u = A.anchor[x];
    if (u < 0 || u >= G.n || !G.is_unit(u)) return fail("anchor image not a unit");
  }
  if (A.act.size() != static_cast<std::size_t>(G.n) * A.space_size) return fail("action table size");
  for (int g = 0; g < G.n; ++g)
    for (int x = 0; x < A.space_size; ++x) {
      bool should = G.s(g) == A.anchor[x];
      int y = A.apply(g, x);
      if (should != (y >= 0))
        return fail("action domain mismatch at (" + std::to_string(g) + "," + std::to_string(x) + ")");
      if (y >= 0) {
        if (y >= A.space_size) return fail("action image out of range");
        if (A.anchor[y] != G.r(g)) return fail("anchor(g.x) != r(g)");
      }
    }
  for (int x = 0; x < A.space_size; ++x)
    if (A.apply(A.anchor[x], x) != x) return fail("unit does not act as identity");
  for (int g = 0; g < G.n; ++g)
    for (int h = 0; h < G.n; ++h) {
      int gh = G.mult(g, h);
      if (gh == -1) continue;
      for (int x = 0; x < A.space_size; ++x) {
        int hx = A.apply(h, x);
        if (hx == -1) continue;
        if (A.apply(g, hx) != A.apply(gh, x)) return fail("composition law fails");
      }
    }
  return {};
}

/// Convenience: a group (one-unit groupoid) acting through permutations.
/// perms[g] is the permutation of X by which g acts.
inline GroupoidActionOnSet group_action(const FiniteGroupoid& group, const std::vector<std::vector<int>>& perms) {
  if (group.units().size() != 1) throw std::invalid_argument("group_action: groupoid is not a group");
  int unit = group.units()[0];
  GroupoidActionOnSet A;
  A.groupoid = group;
  A.space_size = perms.empty() ? 0 : static_cast<int>(perms[0].size());
  A.anchor.assign(A.space_size, unit);
  A.act.assign(static_cast<std::size_t>(group.n) * A.space_size, -1);
  if (static_cast<int>(perms.size()) != group.n) throw std::invalid_argument("group_action: need one permutation per element");
  for (int g = 0; g < group.n; ++g)
    for (int x = 0; x < A.space_size; ++x) A.act[static_cast<std::size_t>(g) * A.space_size + x] = perms[g][x];
  return A;
}

/// Left translation action of G on itself: anchor = r, g.x = gx.
inline GroupoidActionOnSet left_translation_action(const FiniteGroupoid& G) {
  GroupoidActionOnSet A;
  A.groupoid = G;
  A.space_size = G.n;
  A.anchor.resize(G.n);
  for (int x = 0; x < G.n; ++x) A.anchor[x] = G.r(x);
  A.act.assign(static_cast<std::size_t>(G.n) * G.n, -1);
  for (int g = 0; g < G.n; ++g)
    for (int x = 0; x < G.n; ++x) {
      int p = G.mult(g, x);
      if (p >= 0) A.act[static_cast<std::size_t>(g) * G.n + x] = p;
    }
  return A;
}

/// Transformation groupoid G x| X.  Elements are pairs (g, x) with
/// r(g) = anchor(x); r(g,x) = x, s(g,x) = g^{-1}.x, and
/// (g,x)(h,g^{-1}.x) = (gh,x).  Units are identified with X.
struct TransformationGroupoid {
  FiniteGroupoid groupoid;
  std::vector<std::pair<int, int>> element_pairs;  // new id -> (g, x)
  std::vector<int> unit_of_point;                  // X -> unit element id
  int pair_id(int g, int x) const {
    auto it = index.find({g, x});
    return it == index.end() ? -1 : it->second;
  }
  std::map<std::pair<int, int>, int> index;
};

inline TransformationGroupoid transformation_groupoid(const GroupoidActionOnSet& A) {
  auto chk = validate_set_action(A);
  if (!chk.ok) throw std::invalid_argument("transformation_groupoid: invalid action: " + chk.detail);
  const auto& H = A.groupoid;
  TransformationGroupoid out;
  for (int g = 0; g < H.n; ++g)
    for (int x = 0; x < A.space_size; ++x)
      if (H.r(g) == A.anchor[x]) {
        out.index[{g, x}] = static_cast<int>(out.element_pairs.size());
        out.element_pairs.emplace_back(g, x);
      }
  int n = static_cast<int>(out.element_pairs.size());
  FiniteGroupoid& G = out.groupoid;
  G = detail::alloc_groupoid(n);
  auto inv_act = [&](int g, int x) { return A.apply(H.inv(g), x); };  // g^{-1}.x
  out.unit_of_point.assign(A.space_size, -1);
  for (int i = 0; i < n; ++i) {
    auto [g, x] = out.element_pairs[i];
    bool unit = H.is_unit(g);
    G.unit_flag[i] = unit;
    if (unit) out.unit_of_point[x] = i;
  }
  for (int i = 0; i < n; ++i) {
    auto [g, x] = out.element_pairs[i];
    int gx = inv_act(g, x);
    G.range_map[i] = out.unit_of_point[x];
    G.source_map[i] = out.unit_of_point[gx];
    G.inverse_map[i] = out.index.at({H.inv(g), gx});
    // weights inherit counting from the acting groupoid's units
    G.weights.weight[i] = H.weights.weight[H.r(g)];
  }
  for (int i = 0; i < n; ++i) {
    auto [g, x] = out.element_pairs[i];
    int y = inv_act(g, x);
    for (int h = 0; h < H.n; ++h) {
      if (H.mult(g, h) == -1) continue;
      auto it = out.index.find({h, y});
      if (it == out.index.end()) continue;
      G.mult_table[static_cast<std::size_t>(i) * n + it->second] = out.index.at({H.mult(g, h), x});
    }
  }
  G.finalize();
  return out;
}

// ---------------------------------------------------------------------------
// Imprimitivity groupoid
// ---------------------------------------------------------------------------

/// Imprimitivity groupoid G^H for a subgroupoid H (given by its parent
/// element ids): classes [x,y] of X*X, X = s^{-1}(H^(0)), under the diagonal
/// right H-action, with [x,y][y,z] = [x,z].
struct ImprimitivityGroupoid {
  FiniteGroupoid groupoid;
  std::vector<std::pair<int, int>> class_rep;  // class id -> representative (x, y), parent ids
  std::vector<int> class_of;                   // flat index over X*X pairs (see pair_index)
  std::vector<int> X;                          // parent ids of X, ascending
  int x_pos(int parent_id) const {
    auto it = std::lower_bound(X.begin(), X.end(), parent_id);
    return it != X.end() && *it == parent_id ? static_cast<int>(it - X.begin()) : -1;
  }
};

inline ImprimitivityGroupoid imprimitivity_groupoid(const FiniteGroupoid& G, const std::vector<int>& H_elems) {
  if (!is_subgroupoid(G, H_elems))
    throw std::invalid_argument("imprimitivity_groupoid: H is not a subgroupoid");
  std::set<int> H(H_elems.begin(), H_elems.end());
  std::set<int> H_units;
  for (int h : H_elems)
    if (G.is_unit(h)) H_units.insert(h);

  ImprimitivityGroupoid out;
  for (int g = 0; g < G.n; ++g)
    if (H_units.count(G.s(g))) out.X.push_back(g);
  int nx = static_cast<int>(out.X.size());
  auto pos = [&](int parent) { return out.x_pos(parent); };

  // Pairs (x,y) with s(x) = s(y); union-find under (x,y) ~ (xh, yh).
  std::vector<int> pair_ids;  // flat nx*nx with -1 for non-pairs
  pair_ids.assign(static_cast<std::size_t>(nx) * nx, -1);
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nx; ++j)
      if (G.s(out.X[i]) == G.s(out.X[j])) {
        pair_ids[static_cast<std::size_t>(i) * nx + j] = static_cast<int>(pairs.size());
        pairs.emplace_back(out.X[i], out.X[j]);
      }
  int np = static_cast<int>(pairs.size());
  std::vector<int> parent(np);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); };
  for (int p = 0; p < np; ++p) {
    auto [x, y] = pairs[p];
    for (int h : H_elems) {
      int xh = G.mult(x, h);
      int yh = G.mult(y, h);
      if (xh == -1 || yh == -1) continue;
      int q = pair_ids[static_cast<std::size_t>(pos(xh)) * nx + pos(yh)];
      int a = find(p), b = find(q);
      if (a != b) parent[a] = b;
    }
  }
  std::map<int, int> root_to_class;
  std::vector<int> class_of_pair(np);
  for (int p = 0; p < np; ++p) {
    int root = find(p);
    auto [it, fresh] = root_to_class.emplace(root, static_cast<int>(out.class_rep.size()));
    if (fresh) out.class_rep.push_back(pairs[p]);  // first pair in scan order is the representative
    class_of_pair[p] = it->second;
  }
  out.class_of = std::move(class_of_pair);

  int nc = static_cast<int>(out.class_rep.size());
  FiniteGroupoid& K = out.groupoid;
  K = detail::alloc_groupoid(nc);
  auto class_of = [&](int xp, int yp) {
    return out.class_of[pair_ids[static_cast<std::size_t>(pos(xp)) * nx + pos(yp)]];
  };
  for (int c = 0; c < nc; ++c) {
    auto [x, y] = out.class_rep[c];
    K.unit_flag[c] = class_of(x, x) == c;  // diagonal classes are the units
    K.range_map[c] = class_of(x, x);
    K.source_map[c] = class_of(y, y);
    K.inverse_map[c] = class_of(y, x);
  }
  // Multiplication: [x,y][w,z] defined iff [y] = [w] in X/H; translate the
  // second pair by the unique h with wh = y, then [x,y][y,zh] = [x,zh].
  for (int c1 = 0; c1 < nc; ++c1) {
    auto [x, y] = out.class_rep[c1];
    for (int c2 = 0; c2 < nc; ++c2) {
      if (K.source_map[c1] != K.range_map[c2]) continue;
      auto [w, z] = out.class_rep[c2];
      int found = -1;
      for (int h : H_elems) {
        if (G.mult(w, h) == y) { found = h; break; }
      }
      if (found == -1)
        throw std::logic_error("imprimitivity_groupoid: matching translation not found");
      int zh = G.mult(z, found);
      K.mult_table[static_cast<std::size_t>(c1) * nc + c2] = class_of(x, zh);
    }
  }
  K.finalize();
  return out;
}

/// The natural map G^{S_u} -> G for transitive G (or G^G -> G): [x,y] -> x y^{-1},
/// the unique gamma with x = gamma.y.
inline std::vector<int> imprimitivity_canonical_map(const FiniteGroupoid& G, const ImprimitivityGroupoid& imp) {
  std::vector<int> phi(imp.groupoid.n, -1);
  for (int c = 0; c < imp.groupoid.n; ++c) {
    auto [x, y] = imp.class_rep[c];
    int p = G.mult(x, G.inv(y));
    if (p == -1) throw std::logic_error("imprimitivity_canonical_map: x y^{-1} undefined");
    phi[c] = p;
  }
  return phi;
}

}  // namespace gstar
