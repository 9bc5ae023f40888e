#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gstar/groupoid.hpp"
#include "gstar/groupoid_build.hpp"
#include "gstar/matrix.hpp"
#include "gstar/rational.hpp"

namespace gstar {

// ---------------------------------------------------------------------------
// Characters of finite abelian groups, kept exact as rational "turns":
// omega(s) = exp(2 pi i turn(s)).
// ---------------------------------------------------------------------------

inline bool table_is_abelian(const GroupTable& t) {
  int m = static_cast<int>(t.size());
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      if (t[a][b] != t[b][a]) return false;
  return true;
}

/// All |H| characters of an abelian group table, as turn vectors aligned with
/// the element ids.  Built by extending characters one cyclic step at a time
/// (the invariant-factor picture realized greedily); the result is sorted
/// lexicographically, so the order is deterministic.
inline std::vector<std::vector<Rational>> character_turns(const GroupTable& t) {
  int m = static_cast<int>(t.size());
  std::string why;
  if (!is_group_table(t, &why)) throw std::invalid_argument("character_turns: " + why);
  if (!table_is_abelian(t)) throw std::invalid_argument("character_turns: group is not abelian");
  int e = table_identity(t);

  std::vector<int> sub = {e};            // current subgroup as element ids
  std::vector<int> pos(m, -1);           // element id -> index in sub
  pos[e] = 0;
  std::vector<std::vector<Rational>> chars = {{Rational(0)}};  // aligned with sub

  for (int g = 0; g < m; ++g) {
    if (pos[g] >= 0) continue;
    // least k >= 1 with g^k in the current subgroup
    int k = 1, gk = g;
    while (pos[gk] < 0) {
      gk = t[gk][g];
      ++k;
    }
    int base = static_cast<int>(sub.size());
    // new subgroup tiles as sub, sub.g, ..., sub.g^{k-1}
    std::vector<int> new_sub = sub;
    {
      int p = g;
      for (int j = 1; j < k; ++j) {
        for (int i = 0; i < base; ++i) new_sub.push_back(t[sub[i]][p]);
        p = t[p][g];
      }
    }
    std::vector<std::vector<Rational>> next;
    next.reserve(chars.size() * k);
    for (const auto& chi : chars) {
      Rational anchor = chi[pos[gk]];  // chi(g^k)
      for (int root = 0; root < k; ++root) {
        // zeta with k*zeta = anchor (mod 1)
        Rational zeta = Rational(anchor.num + static_cast<std::int64_t>(root) * anchor.den,
                                 anchor.den * k);
        std::vector<Rational> ext(new_sub.size());
        for (int j = 0; j < k; ++j) {
          Rational shift = Rational(zeta.num * j, zeta.den);
          for (int i = 0; i < base; ++i) ext[j * base + i] = (chi[i] + shift).mod1();
        }
        next.push_back(std::move(ext));
      }
    }
    chars = std::move(next);
    sub = std::move(new_sub);
    for (int i = 0; i < static_cast<int>(sub.size()); ++i) pos[sub[i]] = i;
  }

  // realign from subgroup order to element-id order and sort
  std::vector<std::vector<Rational>> out;
  out.reserve(chars.size());
  for (const auto& chi : chars) {
    std::vector<Rational> row(m);
    for (int id = 0; id < m; ++id) row[id] = chi[pos[id]];
    out.push_back(std::move(row));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] < b[i]) return true;
      if (b[i] < a[i]) return false;
    }
    return false;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Characters over the isotropy fibers of a groupoid
// ---------------------------------------------------------------------------

/// A character of the isotropy group S_u, carried with its fiber unit.
/// elements lists the parent ids of S_u in ascending order and turns is
/// aligned with it.
struct Character {
  int unit = -1;
  std::vector<int> elements;
  std::vector<Rational> turns;

  Complex value_at_pos(int pos) const { return std::polar(1.0, 2 * M_PI * turns[pos].to_double()); }
  int pos_of(int parent_id) const {
    auto it = std::lower_bound(elements.begin(), elements.end(), parent_id);
    if (it == elements.end() || *it != parent_id)
      throw std::invalid_argument("Character: element not in the fiber");
    return static_cast<int>(it - elements.begin());
  }
  Complex value(int parent_id) const { return value_at_pos(pos_of(parent_id)); }

  bool operator==(const Character& o) const {
    return unit == o.unit && elements == o.elements && turns == o.turns;
  }
};

/// Local multiplication table of the isotropy group at u.
inline GroupTable isotropy_table(const FiniteGroupoid& G, int u, std::vector<int>* elements = nullptr) {
  auto iso = G.isotropy(u);
  int m = static_cast<int>(iso.size());
  std::map<int, int> pos;
  for (int i = 0; i < m; ++i) pos[iso[i]] = i;
  GroupTable t(m, std::vector<int>(m));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) t[a][b] = pos.at(G.mult(iso[a], iso[b]));
  if (elements) *elements = iso;
  return t;
}

/// All characters of S_u (abelian required), deterministic order.
inline std::vector<Character> characters(const FiniteGroupoid& G, int u) {
  std::vector<int> elems;
  auto t = isotropy_table(G, u, &elems);
  auto turns = character_turns(t);
  std::vector<Character> out;
  for (auto& row : turns) out.push_back({u, elems, std::move(row)});
  return out;
}

/// The dual bundle of the isotropy (or of a group bundle): fiberwise
/// characters grouped over the unit space.
struct DualBundle {
  std::vector<Character> all;                 // flat, grouped by unit in unit order
  std::vector<std::vector<int>> of_unit;      // parent unit id -> indices into all

  int index_of(const Character& c) const {
    for (int i : of_unit[c.unit])
      if (all[i] == c) return i;
    return -1;
  }
};

inline DualBundle dual_bundle(const FiniteGroupoid& G) {
  DualBundle out;
  out.of_unit.assign(G.n, {});
  for (int u : G.units()) {
    auto iso = G.isotropy(u);
    if (!fiber_is_abelian(G, iso))
      throw std::invalid_argument("dual_bundle: isotropy at unit " + std::to_string(u) +
                                  " is not abelian");
    for (auto& c : characters(G, u)) {
      out.of_unit[u].push_back(static_cast<int>(out.all.size()));
      out.all.push_back(std::move(c));
    }
  }
  return out;
}

/// (gamma . omega)(s) = omega(gamma^{-1} s gamma), transporting a character at
/// s(gamma) to one at r(gamma).  Exact on turns.
inline Character g_action_on_dual(const FiniteGroupoid& G, const Character& omega, int gamma) {
  if (G.s(gamma) != omega.unit)
    throw std::invalid_argument("g_action_on_dual: s(gamma) is not the character's unit");
  int v = G.r(gamma);
  Character out;
  out.unit = v;
  out.elements = G.isotropy(v);
  out.turns.resize(out.elements.size());
  for (std::size_t i = 0; i < out.elements.size(); ++i) {
    int s = out.elements[i];
    int conj = G.mult(G.inv(gamma), G.mult(s, gamma));
    if (conj < 0 || G.r(conj) != omega.unit || G.s(conj) != omega.unit)
      throw std::logic_error("g_action_on_dual: conjugation left the fiber");
    out.turns[i] = omega.turns[omega.pos_of(conj)];
  }
  return out;
}

/// Orbit partition of the dual bundle under the conjugation action.
struct DualOrbits {
  DualBundle bundle;
  std::vector<int> orbit_of;                 // index into orbits per character
  std::vector<std::vector<int>> orbits;      // character indices
};

inline DualOrbits dual_orbits(const FiniteGroupoid& G, DualBundle bundle) {
  DualOrbits out;
  out.bundle = std::move(bundle);
  int n = static_cast<int>(out.bundle.all.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); };
  for (int gamma = 0; gamma < G.n; ++gamma) {
    int u = G.s(gamma);
    for (int ci : out.bundle.of_unit[u]) {
      Character moved = g_action_on_dual(G, out.bundle.all[ci], gamma);
      int target = out.bundle.index_of(moved);
      if (target < 0) throw std::logic_error("dual_orbits: transported character not found");
      int a = find(ci), b = find(target);
      if (a != b) parent[a] = b;
    }
  }
  out.orbit_of.assign(n, -1);
  std::map<int, int> root_to_orbit;
  for (int i = 0; i < n; ++i) {
    int root = find(i);
    auto [it, fresh] = root_to_orbit.emplace(root, static_cast<int>(out.orbits.size()));
    if (fresh) out.orbits.emplace_back();
    out.orbit_of[i] = it->second;
    out.orbits[it->second].push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Double duality for finite abelian groups (fiberwise form of the bundle
// duality statement) and character orthogonality
// ---------------------------------------------------------------------------

struct DoubleDualReport {
  bool abelian = false;
  bool dual_is_group = false;          // pointwise product closes with |H^| = |H|
  bool evaluation_bijective = false;   // s -> s^ hits every double-dual character once
  bool evaluation_homomorphism = false;
  double orthogonality_residual = 0;   // max | <omega,chi> - |H| delta |
  bool ok() const {
    return abelian && dual_is_group && evaluation_bijective && evaluation_homomorphism;
  }
};

inline DoubleDualReport finite_double_dual_check(const GroupTable& t) {
  DoubleDualReport rep;
  if (!table_is_abelian(t)) return rep;
  rep.abelian = true;
  int m = static_cast<int>(t.size());
  auto chars = character_turns(t);

  // character orthogonality, evaluated numerically
  for (std::size_t a = 0; a < chars.size(); ++a)
    for (std::size_t b = 0; b < chars.size(); ++b) {
      Complex acc = 0;
      for (int s = 0; s < m; ++s)
        acc += std::polar(1.0, 2 * M_PI * (chars[a][s] - chars[b][s]).to_double());
      Complex expect = a == b ? Complex(m, 0) : Complex(0, 0);
      rep.orthogonality_residual = std::max(rep.orthogonality_residual, std::abs(acc - expect));
    }

  // the dual as a group: pointwise product = turn addition
  std::map<std::vector<Rational>, int> index;
  for (int i = 0; i < static_cast<int>(chars.size()); ++i) {
    std::vector<Rational> key = chars[i];
    index[key] = i;
  }
  rep.dual_is_group = static_cast<int>(chars.size()) == m;
  GroupTable dual_table(m, std::vector<int>(m, -1));
  for (int i = 0; i < m && rep.dual_is_group; ++i)
    for (int j = 0; j < m; ++j) {
      std::vector<Rational> prod(m);
      for (int s = 0; s < m; ++s) prod[s] = (chars[i][s] + chars[j][s]).mod1();
      auto it = index.find(prod);
      if (it == index.end()) {
        rep.dual_is_group = false;
        break;
      }
      dual_table[i][j] = it->second;
    }
  if (!rep.dual_is_group) return rep;

  // evaluation map into the double dual: s^(omega) = omega(s)
  auto double_chars = character_turns(dual_table);
  std::map<std::vector<Rational>, int> dd_index;
  for (int i = 0; i < static_cast<int>(double_chars.size()); ++i) dd_index[double_chars[i]] = i;
  std::vector<int> eval_image(m, -1);
  rep.evaluation_bijective = true;
  for (int s = 0; s < m; ++s) {
    std::vector<Rational> ev(m);
    for (int i = 0; i < m; ++i) ev[i] = chars[i][s];
    auto it = dd_index.find(ev);
    if (it == dd_index.end()) {
      rep.evaluation_bijective = false;
      break;
    }
    eval_image[s] = it->second;
  }
  if (rep.evaluation_bijective) {
    std::set<int> hit(eval_image.begin(), eval_image.end());
    rep.evaluation_bijective = static_cast<int>(hit.size()) == m;
  }
  rep.evaluation_homomorphism = rep.evaluation_bijective;
  if (rep.evaluation_bijective) {
    // multiplicativity inside the double dual: products are pointwise
    auto dd_product = [&](int a, int b) {
      std::vector<Rational> prod(m);
      for (int i = 0; i < m; ++i) prod[i] = (double_chars[a][i] + double_chars[b][i]).mod1();
      auto it = dd_index.find(prod);
      return it == dd_index.end() ? -1 : it->second;
    };
    for (int s = 0; s < m; ++s)
      for (int r = 0; r < m; ++r)
        if (eval_image[t[s][r]] != dd_product(eval_image[s], eval_image[r]))
          rep.evaluation_homomorphism = false;
  }
  return rep;
}

/// All abelian group tables of a given order, one per isomorphism class
/// (products of cyclic groups of prime-power order).
inline std::vector<GroupTable> abelian_groups_of_order(int n) {
  // factor n and enumerate partitions of each prime exponent
  std::vector<std::pair<int, int>> factors;
  int x = n;
  for (int p = 2; p * p <= x; ++p)
    if (x % p == 0) {
      int e = 0;
      while (x % p == 0) { x /= p; ++e; }
      factors.emplace_back(p, e);
    }
  if (x > 1) factors.emplace_back(x, 1);

  std::function<std::vector<std::vector<int>>(int)> partitions = [&](int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    std::function<void(int, int)> rec = [&](int remaining, int maxpart) {
      if (remaining == 0) {
        out.push_back(cur);
        return;
      }
      for (int part = std::min(remaining, maxpart); part >= 1; --part) {
        cur.push_back(part);
        rec(remaining - part, part);
        cur.pop_back();
      }
    };
    rec(k, k);
    return out;
  };

  std::vector<GroupTable> tables = {cyclic_table(1)};
  for (auto [p, e] : factors) {
    std::vector<GroupTable> primary;
    for (const auto& part : partitions(e)) {
      GroupTable t = cyclic_table(1);
      for (int exp : part) {
        int q = 1;
        for (int i = 0; i < exp; ++i) q *= p;
        t = product_table(t, cyclic_table(q));
      }
      primary.push_back(std::move(t));
    }
    std::vector<GroupTable> next;
    for (const auto& base : tables)
      for (const auto& pr : primary) next.push_back(product_table(base, pr));
    tables = std::move(next);
  }
  return tables;
}

}  // namespace gstar
