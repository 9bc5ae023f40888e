#pragma once

#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "gstar/groupoid.hpp"
#include "gstar/groupoid_algebra.hpp"
#include "gstar/star_algebra.hpp"

namespace gstar {

// ---------------------------------------------------------------------------
// Finite (G,H)-equivalences
// ---------------------------------------------------------------------------

/// A finite space X with commuting free left G- and right H-actions whose
/// anchors factor to bijections X/H -> G^(0) and G\X -> H^(0).
struct GroupoidEquivalence {
  FiniteGroupoid G;  // acts on the left
  FiniteGroupoid H;  // acts on the right
  int space_size = 0;
  std::vector<int> left_anchor;   // X -> units of G (the range anchor)
  std::vector<int> right_anchor;  // X -> units of H (the source anchor)
  std::vector<int> left_act;      // |G| x |X|, gamma . x, -1 undefined
  std::vector<int> right_act;     // |X| x |H|, x . eta, -1 undefined

  int lact(int gamma, int x) const { return left_act[static_cast<std::size_t>(gamma) * space_size + x]; }
  int ract(int x, int eta) const { return right_act[static_cast<std::size_t>(x) * H.n + eta]; }
};

/// X = G_u with G acting by left translation and S_u (as a one-unit
/// subgroupoid, re-indexed) acting by right translation.
struct TransitiveEquivalence {
  GroupoidEquivalence equiv;
  std::vector<int> x_elements;   // X positions -> parent ids (G_u ascending)
  std::vector<int> h_elements;   // H ids -> parent ids (S_u ascending)
};

inline TransitiveEquivalence equivalence_from_transitive(const FiniteGroupoid& G, int u) {
  TransitiveEquivalence out;
  auto iso = G.isotropy(u);
  auto sub = subgroupoid_from_elements(G, iso);
  out.h_elements = sub.to_parent;
  out.x_elements = G.s_fiber(u);
  GroupoidEquivalence& E = out.equiv;
  E.G = G;
  E.H = sub.groupoid;
  E.space_size = static_cast<int>(out.x_elements.size());
  std::map<int, int> xpos;
  for (int i = 0; i < E.space_size; ++i) xpos[out.x_elements[i]] = i;
  E.left_anchor.resize(E.space_size);
  E.right_anchor.assign(E.space_size, sub.from_parent[u]);
  for (int i = 0; i < E.space_size; ++i) E.left_anchor[i] = G.r(out.x_elements[i]);
  E.left_act.assign(static_cast<std::size_t>(G.n) * E.space_size, -1);
  for (int g = 0; g < G.n; ++g)
    for (int i = 0; i < E.space_size; ++i) {
      int p = G.mult(g, out.x_elements[i]);
      if (p >= 0) E.left_act[static_cast<std::size_t>(g) * E.space_size + i] = xpos.at(p);
    }
  E.right_act.assign(static_cast<std::size_t>(E.space_size) * E.H.n, -1);
  for (int i = 0; i < E.space_size; ++i)
    for (int h = 0; h < E.H.n; ++h) {
      int p = G.mult(out.x_elements[i], out.h_elements[h]);
      if (p >= 0) E.right_act[static_cast<std::size_t>(i) * E.H.n + h] = xpos.at(p);
    }
  return out;
}

/// G as a (G,G)-equivalence under left and right translation.
inline GroupoidEquivalence self_equivalence(const FiniteGroupoid& G) {
  GroupoidEquivalence E;
  E.G = G;
  E.H = G;
  E.space_size = G.n;
  E.left_anchor.resize(G.n);
  E.right_anchor.resize(G.n);
  for (int x = 0; x < G.n; ++x) {
    E.left_anchor[x] = G.r(x);
    E.right_anchor[x] = G.s(x);
  }
  E.left_act.assign(static_cast<std::size_t>(G.n) * G.n, -1);
  E.right_act.assign(static_cast<std::size_t>(G.n) * G.n, -1);
  for (int g = 0; g < G.n; ++g)
    for (int x = 0; x < G.n; ++x) {
      int p = G.mult(g, x);
      if (p >= 0) E.left_act[static_cast<std::size_t>(g) * G.n + x] = p;
      int q = G.mult(x, g);
      if (q >= 0) E.right_act[static_cast<std::size_t>(x) * G.n + g] = q;
    }
  return E;
}

struct EquivalenceCheck {
  std::vector<std::string> failures;  // named axioms
  bool ok() const { return failures.empty(); }
};

inline EquivalenceCheck validate_equivalence(const GroupoidEquivalence& E) {
  EquivalenceCheck out;
  auto fail = [&](std::string s) { out.failures.push_back(std::move(s)); };
  const FiniteGroupoid& G = E.G;
  const FiniteGroupoid& H = E.H;
  // left action axioms
  for (int x = 0; x < E.space_size; ++x)
    if (!G.is_unit(E.left_anchor[x])) fail("left anchor not a unit");
  for (int g = 0; g < G.n; ++g)
    for (int x = 0; x < E.space_size; ++x) {
      bool should = G.s(g) == E.left_anchor[x];
      int y = E.lact(g, x);
      if (should != (y >= 0)) { fail("left action domain"); goto left_done; }
      if (y >= 0 && E.left_anchor[y] != G.r(g)) { fail("left anchor equivariance"); goto left_done; }
    }
  for (int x = 0; x < E.space_size; ++x)
    if (E.lact(E.left_anchor[x], x) != x) { fail("left unit law"); break; }
  for (int g = 0; g < G.n; ++g)
    for (int h = 0; h < G.n; ++h) {
      int gh = G.mult(g, h);
      if (gh < 0) continue;
      for (int x = 0; x < E.space_size; ++x) {
        int hx = E.lact(h, x);
        if (hx < 0) continue;
        if (E.lact(g, hx) != E.lact(gh, x)) { fail("left composition law"); goto left_done; }
      }
    }
left_done:;
  // right action axioms
  for (int x = 0; x < E.space_size; ++x)
    if (!H.is_unit(E.right_anchor[x])) fail("right anchor not a unit");
  for (int x = 0; x < E.space_size; ++x)
    for (int h = 0; h < H.n; ++h) {
      bool should = E.right_anchor[x] == H.r(h);
      int y = E.ract(x, h);
      if (should != (y >= 0)) { fail("right action domain"); goto right_done; }
      if (y >= 0 && E.right_anchor[y] != H.s(h)) { fail("right anchor equivariance"); goto right_done; }
    }
  for (int x = 0; x < E.space_size; ++x)
    if (E.ract(x, E.right_anchor[x]) != x) { fail("right unit law"); break; }
  for (int x = 0; x < E.space_size; ++x)
    for (int h1 = 0; h1 < H.n; ++h1) {
      int y = E.ract(x, h1);
      if (y < 0) continue;
      for (int h2 = 0; h2 < H.n; ++h2) {
        int h12 = H.mult(h1, h2);
        if (h12 < 0) continue;
        if (E.ract(y, h2) != E.ract(x, h12)) { fail("right composition law"); goto right_done; }
      }
    }
right_done:;
  // commuting
  for (int g = 0; g < G.n; ++g)
    for (int x = 0; x < E.space_size; ++x) {
      int gx = E.lact(g, x);
      if (gx < 0) continue;
      for (int h = 0; h < H.n; ++h) {
        int xh = E.ract(x, h);
        if (xh < 0) continue;
        if (E.lact(g, xh) != E.ract(gx, h)) { fail("actions do not commute"); goto comm_done; }
      }
    }
comm_done:;
  // freeness
  for (int g = 0; g < G.n; ++g)
    for (int x = 0; x < E.space_size; ++x)
      if (E.lact(g, x) == x && !G.is_unit(g)) { fail("left action not free"); goto free_done; }
free_done:;
  for (int x = 0; x < E.space_size; ++x)
    for (int h = 0; h < H.n; ++h)
      if (E.ract(x, h) == x && !H.is_unit(h)) { fail("right action not free"); goto free2_done; }
free2_done:;
  // the anchors factor to bijections X/H -> G^(0) and G\X -> H^(0)
  {
    std::vector<int> parent(E.space_size);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); };
    for (int x = 0; x < E.space_size; ++x)
      for (int h = 0; h < H.n; ++h) {
        int y = E.ract(x, h);
        if (y >= 0 && find(x) != find(y)) parent[find(x)] = find(y);
      }
    std::map<int, int> root_anchor;
    bool good = true;
    std::set<int> anchors;
    for (int x = 0; x < E.space_size; ++x) {
      int rt = find(x);
      auto [it, fresh] = root_anchor.emplace(rt, E.left_anchor[x]);
      if (!fresh && it->second != E.left_anchor[x]) good = false;
    }
    for (auto& [rt, a] : root_anchor)
      if (!anchors.insert(a).second) good = false;
    if (!good || anchors.size() != E.G.units().size()) fail("range anchor does not factor to a bijection X/H -> G units");
  }
  {
    std::vector<int> parent(E.space_size);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); };
    for (int g = 0; g < E.G.n; ++g)
      for (int x = 0; x < E.space_size; ++x) {
        int y = E.lact(g, x);
        if (y >= 0 && find(x) != find(y)) parent[find(x)] = find(y);
      }
    std::map<int, int> root_anchor;
    bool good = true;
    std::set<int> anchors;
    for (int x = 0; x < E.space_size; ++x) {
      int rt = find(x);
      auto [it, fresh] = root_anchor.emplace(rt, E.right_anchor[x]);
      if (!fresh && it->second != E.right_anchor[x]) good = false;
    }
    for (auto& [rt, a] : root_anchor)
      if (!anchors.insert(a).second) good = false;
    if (!good || anchors.size() != E.H.units().size()) fail("source anchor does not factor to a bijection G\\X -> H units");
  }
  return out;
}

// ---------------------------------------------------------------------------
// The pre-imprimitivity bimodule C_c(X) and its verification
// ---------------------------------------------------------------------------

/// Bimodule operations with counting sums:
///   (f . phi)(x)      = sum over gamma in G^{r(x)} of f(gamma) phi(gamma^{-1} x)
///   (phi . g)(x)      = sum over eta in H^{s(x)} of phi(x eta) g(eta^{-1})
///   <phi,psi>_H(eta)  = sum over gamma in G^{r(x)} of conj(phi(gamma^{-1} x)) psi(gamma^{-1} x eta)
///   _G<phi,psi>(gamma)= sum over eta in H^{s(x)} of phi(gamma x eta) conj(psi(x eta))
/// where the base point x is any element with the compatible anchor
/// (s(x) = r(eta) on the right, r(x) = s(gamma) on the left).
struct Bimodule {
  const GroupoidEquivalence* E;

  ComplexVector left_action(const ComplexVector& f, const ComplexVector& phi) const {
    const auto& e = *E;
    ComplexVector out = ComplexVector::Zero(e.space_size);
    for (int x = 0; x < e.space_size; ++x) {
      Complex acc = 0;
      for (int gamma : e.G.r_fiber(e.left_anchor[x])) {
        int y = e.lact(e.G.inv(gamma), x);
        if (y >= 0) acc += f[gamma] * phi[y];
      }
      out[x] = e.G.w(e.left_anchor[x]) * acc;
    }
    return out;
  }

  ComplexVector right_action(const ComplexVector& phi, const ComplexVector& g) const {
    const auto& e = *E;
    ComplexVector out = ComplexVector::Zero(e.space_size);
    for (int x = 0; x < e.space_size; ++x) {
      Complex acc = 0;
      for (int eta : e.H.r_fiber(e.right_anchor[x])) {
        int y = e.ract(x, eta);
        if (y >= 0) acc += phi[y] * g[e.H.inv(eta)];
      }
      out[x] = e.H.w(e.right_anchor[x]) * acc;
    }
    return out;
  }

  /// Right inner product; returns the function on H and verifies the base
  /// point independence when check_independence is set.
  ComplexVector right_inner(const ComplexVector& phi, const ComplexVector& psi,
                            bool* independent = nullptr, double tol = 1e-9) const {
    const auto& e = *E;
    ComplexVector out = ComplexVector::Zero(e.H.n);
    if (independent) *independent = true;
    for (int eta = 0; eta < e.H.n; ++eta) {
      int want = e.H.r(eta);
      bool first = true;
      for (int x = 0; x < e.space_size; ++x) {
        if (e.right_anchor[x] != want) continue;
        Complex acc = 0;
        for (int gamma : e.G.r_fiber(e.left_anchor[x])) {
          int y = e.lact(e.G.inv(gamma), x);
          if (y < 0) continue;
          int yeta = e.ract(y, eta);
          if (yeta >= 0) acc += std::conj(phi[y]) * psi[yeta];
        }
        acc *= e.G.w(e.left_anchor[x]);
        if (first) {
          out[eta] = acc;
          first = false;
          if (!independent) break;
        } else if (std::abs(acc - out[eta]) > tol) {
          *independent = false;
        }
      }
    }
    return out;
  }

  ComplexVector left_inner(const ComplexVector& phi, const ComplexVector& psi,
                           bool* independent = nullptr, double tol = 1e-9) const {
    const auto& e = *E;
    ComplexVector out = ComplexVector::Zero(e.G.n);
    if (independent) *independent = true;
    for (int gamma = 0; gamma < e.G.n; ++gamma) {
      int want = e.G.s(gamma);  // base point with r(x) = s(gamma), so gamma.x is defined
      bool first = true;
      for (int x = 0; x < e.space_size; ++x) {
        if (e.left_anchor[x] != want) continue;
        Complex acc = 0;
        for (int eta : e.H.r_fiber(e.right_anchor[x])) {
          int xeta = e.ract(x, eta);
          if (xeta < 0) continue;
          int gxeta = e.lact(gamma, xeta);
          if (gxeta >= 0) acc += phi[gxeta] * std::conj(psi[xeta]);
        }
        acc *= e.H.w(e.right_anchor[x]);
        if (first) {
          out[gamma] = acc;
          first = false;
          if (!independent) break;
        } else if (std::abs(acc - out[gamma]) > tol) {
          *independent = false;
        }
      }
    }
    return out;
  }
};

struct MoritaReport {
  bool equivalence_valid = false;
  bool base_point_independent = false;
  bool module_axioms = false;       // associativity/compatibility of the actions
  bool inner_product_axioms = false;
  bool imprimitivity_relation = false;
  bool positive = false;
  bool full_left = false, full_right = false;
  bool blocks_correspond = false;   // perfect matching via the bimodule
  std::vector<std::pair<int, int>> matched_dims;  // (d in C*(G), d in C*(H))
  std::vector<std::string> witnesses;
  bool ok() const {
    return equivalence_valid && base_point_independent && module_axioms && inner_product_axioms &&
           imprimitivity_relation && positive && full_left && full_right && blocks_correspond;
  }
};

inline MoritaReport morita_bimodule_check(const GroupoidEquivalence& E, Rng& rng, Tolerances tol = {}) {
  MoritaReport rep;
  auto chk = validate_equivalence(E);
  if (!chk.ok()) {
    rep.witnesses = chk.failures;
    return rep;
  }
  rep.equivalence_valid = true;
  Bimodule Z{&E};

  auto rand_vec = [&](int n) {
    ComplexVector v(n);
    for (int i = 0; i < n; ++i) v[i] = rng.complex_unit_ball();
    return v;
  };
  auto conv_g = [&](const ComplexVector& a, const ComplexVector& b) {
    GroupoidFunction fa{&E.G, a}, fb{&E.G, b};
    return convolve(fa, fb).values;
  };
  auto conv_h = [&](const ComplexVector& a, const ComplexVector& b) {
    GroupoidFunction fa{&E.H, a}, fb{&E.H, b};
    return convolve(fa, fb).values;
  };
  auto inv_g = [&](const ComplexVector& a) {
    GroupoidFunction fa{&E.G, a};
    return involute(fa).values;
  };
  auto inv_h = [&](const ComplexVector& a) {
    GroupoidFunction fa{&E.H, a};
    return involute(fa).values;
  };
  auto close = [&](const ComplexVector& a, const ComplexVector& b) {
    return (a - b).norm() <= 1e-9 * std::max(1.0, b.norm());
  };

  rep.base_point_independent = true;
  rep.module_axioms = true;
  rep.inner_product_axioms = true;
  rep.imprimitivity_relation = true;
  rep.positive = true;
  auto gmodel = regular_model(E.G);
  auto hmodel = regular_model(E.H);
  for (int trial = 0; trial < 8; ++trial) {
    ComplexVector f1 = rand_vec(E.G.n), f2 = rand_vec(E.G.n);
    ComplexVector g1 = rand_vec(E.H.n), g2 = rand_vec(E.H.n);
    ComplexVector p = rand_vec(E.space_size), s = rand_vec(E.space_size), v = rand_vec(E.space_size);

    // module axioms
    if (!close(Z.left_action(conv_g(f1, f2), p), Z.left_action(f1, Z.left_action(f2, p))))
      rep.module_axioms = false;
    if (!close(Z.right_action(p, conv_h(g1, g2)), Z.right_action(Z.right_action(p, g1), g2)))
      rep.module_axioms = false;
    if (!close(Z.right_action(Z.left_action(f1, p), g1), Z.left_action(f1, Z.right_action(p, g1))))
      rep.module_axioms = false;

    // inner product axioms
    bool ind1 = true, ind2 = true;
    ComplexVector rp = Z.right_inner(p, s, &ind1);
    ComplexVector lp = Z.left_inner(p, s, &ind2);
    if (!ind1 || !ind2) rep.base_point_independent = false;
    if (!close(inv_h(rp), Z.right_inner(s, p))) rep.inner_product_axioms = false;
    if (!close(inv_g(lp), Z.left_inner(s, p))) rep.inner_product_axioms = false;
    if (!close(Z.right_inner(p, Z.right_action(s, g1)), conv_h(rp, g1)))
      rep.inner_product_axioms = false;
    if (!close(Z.left_inner(Z.left_action(f1, p), s), conv_g(f1, lp)))
      rep.inner_product_axioms = false;

    // the imprimitivity relation <<p,s>>_G . v = p . <<s,v>>_H
    if (!close(Z.left_action(Z.left_inner(p, s), v), Z.right_action(p, Z.right_inner(s, v))))
      rep.imprimitivity_relation = false;

    // positivity of <z,z> in both models
    if (!positivity_check(gmodel.embed({&E.G, Z.left_inner(p, p)}), tol.invariant))
      rep.positive = false;
    if (!positivity_check(hmodel.embed({&E.H, Z.right_inner(p, p)}), tol.invariant))
      rep.positive = false;
  }

  // fullness: inner products of basis pairs span the full algebras
  {
    ComplexMatrix span_l(E.space_size * E.space_size, E.G.n);
    ComplexMatrix span_r(E.space_size * E.space_size, E.H.n);
    int row = 0;
    for (int x = 0; x < E.space_size; ++x)
      for (int y = 0; y < E.space_size; ++y) {
        ComplexVector dx = ComplexVector::Zero(E.space_size), dy = ComplexVector::Zero(E.space_size);
        dx[x] = 1;
        dy[y] = 1;
        span_l.row(row) = Z.left_inner(dx, dy).transpose();
        span_r.row(row) = Z.right_inner(dx, dy).transpose();
        ++row;
      }
    Eigen::ColPivHouseholderQR<ComplexMatrix> ql(span_l);
    ql.setThreshold(1e-9);
    rep.full_left = ql.rank() == E.G.n;
    Eigen::ColPivHouseholderQR<ComplexMatrix> qr(span_r);
    qr.setThreshold(1e-9);
    rep.full_right = qr.rank() == E.H.n;
  }

  // block correspondence through the bimodule: the left action of a central
  // projection of C*(G) and the right action of one of C*(H) overlap exactly
  // when the blocks are paired by the equivalence.
  {
    auto bg = wedderburn(gmodel.algebra, rng, tol);
    auto bh = wedderburn(hmodel.algebra, rng, tol);
    auto left_op = [&](const ComplexVector& coeffs) {
      ComplexMatrix M = ComplexMatrix::Zero(E.space_size, E.space_size);
      for (int x = 0; x < E.space_size; ++x) {
        ComplexVector dx = ComplexVector::Zero(E.space_size);
        dx[x] = 1;
        M.col(x) = Z.left_action(coeffs, dx);
      }
      return M;
    };
    auto right_op = [&](const ComplexVector& coeffs) {
      ComplexMatrix M = ComplexMatrix::Zero(E.space_size, E.space_size);
      for (int x = 0; x < E.space_size; ++x) {
        ComplexVector dx = ComplexVector::Zero(E.space_size);
        dx[x] = 1;
        M.col(x) = Z.right_action(dx, coeffs);
      }
      return M;
    };
    std::vector<ComplexMatrix> P, Q;
    for (const auto& b : bg.blocks) P.push_back(left_op(b.projection_coeffs));
    for (const auto& b : bh.blocks) Q.push_back(right_op(b.projection_coeffs));
    rep.blocks_correspond = bg.blocks.size() == bh.blocks.size();
    std::vector<bool> used(Q.size(), false);
    for (std::size_t i = 0; i < P.size(); ++i) {
      int match = -1;
      for (std::size_t j = 0; j < Q.size(); ++j) {
        if ((P[i] * Q[j]).norm() > 1e-6) {
          if (match >= 0) match = -2;
          else match = static_cast<int>(j);
        }
      }
      if (match < 0 || used[match]) {
        rep.blocks_correspond = false;
        rep.witnesses.push_back("block " + std::to_string(i) + " of C*(G) has no unique partner");
      } else {
        used[match] = true;
        rep.matched_dims.emplace_back(bg.blocks[i].d, bh.blocks[match].d);
      }
    }
  }
  return rep;
}

}  // namespace gstar
