#pragma once

#include <stdexcept>
#include <vector>

#include "gstar/groupoid.hpp"
#include "gstar/matrix.hpp"
#include "gstar/star_algebra.hpp"

namespace gstar {

/// f in C_c(G): one complex value per element.  Point masses delta_gamma are
/// the canonical basis.
struct GroupoidFunction {
  const FiniteGroupoid* groupoid = nullptr;
  ComplexVector values;

  static GroupoidFunction zero(const FiniteGroupoid& G) {
    return {&G, ComplexVector::Zero(G.n)};
  }
  static GroupoidFunction delta(const FiniteGroupoid& G, int gamma) {
    auto f = zero(G);
    f.values[gamma] = 1.0;
    return f;
  }
};

inline void require_same_groupoid(const GroupoidFunction& f, const GroupoidFunction& g) {
  if (f.groupoid != g.groupoid)
    throw std::invalid_argument("groupoid functions live on different groupoids");
}

/// (f*g)(gamma) = int f(eta) g(eta^{-1} gamma) dlambda^{r(gamma)}(eta).
inline GroupoidFunction convolve(const GroupoidFunction& f, const GroupoidFunction& g) {
  require_same_groupoid(f, g);
  const FiniteGroupoid& G = *f.groupoid;
  GroupoidFunction out = GroupoidFunction::zero(G);
  for (int gamma = 0; gamma < G.n; ++gamma) {
    Complex acc = 0;
    for (int eta : G.r_fiber(G.r(gamma))) {
      int rest = G.mult(G.inv(eta), gamma);
      if (rest >= 0) acc += f.values[eta] * g.values[rest];
    }
    out.values[gamma] = G.w(G.r(gamma)) * acc;
  }
  return out;
}

/// f^*(gamma) = conj(f(gamma^{-1})).
inline GroupoidFunction involute(const GroupoidFunction& f) {
  const FiniteGroupoid& G = *f.groupoid;
  GroupoidFunction out = GroupoidFunction::zero(G);
  for (int gamma = 0; gamma < G.n; ++gamma) out.values[gamma] = std::conj(f.values[G.inv(gamma)]);
  return out;
}

/// max of the two one-sided fiber sums of |f|.
inline double i_norm(const GroupoidFunction& f) {
  const FiniteGroupoid& G = *f.groupoid;
  double best = 0;
  for (int u : G.units()) {
    double up = 0, down = 0;
    for (int g : G.r_fiber(u)) up += std::abs(f.values[g]);
    for (int g : G.s_fiber(u)) down += std::abs(f.values[g]);
    best = std::max({best, G.w(u) * up, G.w(u) * down});
  }
  return best;
}

/// The integrated left regular representation of C_c(G) on the direct sum of
/// l^2(G_u) over units, with basis coordinates ordered unit-by-unit and then
/// by element id.  Faithful for finite G, so the span of the images is a
/// matrix model of C*(G).
struct RegularModel {
  const FiniteGroupoid* groupoid = nullptr;
  std::vector<int> coord_elements;   // model coordinate -> groupoid element
  std::vector<int> coord_of;         // groupoid element -> model coordinate
  MatrixStarAlgebra algebra;         // basis = L(delta_gamma), labels = gamma

  ComplexMatrix embed(const GroupoidFunction& f) const {
    ComplexMatrix m = ComplexMatrix::Zero(algebra.ambient_dim, algebra.ambient_dim);
    for (int gamma = 0; gamma < groupoid->n; ++gamma)
      if (f.values[gamma] != Complex(0))
        for (const auto& t : algebra.basis[gamma].entries) m(t.row, t.col) += f.values[gamma] * t.value;
    return m;
  }
};

inline RegularModel regular_model(const FiniteGroupoid& G) {
  RegularModel model;
  model.groupoid = &G;
  model.coord_of.assign(G.n, -1);
  std::vector<std::pair<int, int>> blocks;
  for (int u = 0; u < G.n; ++u) {
    if (!G.is_unit(u)) continue;
    int offset = static_cast<int>(model.coord_elements.size());
    for (int gamma : G.s_fiber(u)) {
      model.coord_of[gamma] = static_cast<int>(model.coord_elements.size());
      model.coord_elements.push_back(gamma);
    }
    blocks.emplace_back(offset, static_cast<int>(model.coord_elements.size()) - offset);
  }
  int n = static_cast<int>(model.coord_elements.size());

  MatrixStarAlgebra& A = model.algebra;
  A.ambient_dim = n;
  A.block_layout = blocks;
  A.basis.resize(G.n);
  A.labels.resize(G.n);
  for (int gamma = 0; gamma < G.n; ++gamma) {
    A.labels[gamma] = gamma;
    SparseMat& s = A.basis[gamma];
    s.rows = s.cols = n;
    // L(delta_gamma) e_{gamma'} = w(r(gamma)) e_{gamma gamma'}
    double w = G.w(G.r(gamma));
    for (int gp : G.r_fiber(G.s(gamma))) {
      int prod = G.mult(gamma, gp);
      s.entries.push_back({model.coord_of[prod], model.coord_of[gp], Complex(w, 0)});
    }
  }

  StructureConstantsBuilder b(G.n);
  for (int j = 0; j < G.n; ++j) {
    double w = G.w(G.r(j));
    for (int k = 0; k < G.n; ++k) {
      b.begin_pair(j, k);
      int p = G.mult(j, k);
      if (p >= 0) b.add_term(p, Complex(w, 0));
    }
  }
  A.sc = b.finish();

  A.adjoint_rows.resize(G.n);
  for (int gamma = 0; gamma < G.n; ++gamma) A.adjoint_rows[gamma] = {{G.inv(gamma), Complex(1, 0)}};

  A.unit_coeffs = ComplexVector::Zero(G.n);
  for (int u : G.units()) A.unit_coeffs[u] = 1.0 / G.w(u);

  return model;
}

/// Spectrum of C*(G): Wedderburn data of the regular model.
inline BlockDecomposition c_star_spectrum(const FiniteGroupoid& G, Rng& rng, Tolerances tol = {}) {
  auto model = regular_model(G);
  return wedderburn(model.algebra, rng, tol);
}

struct PullbackReport {
  bool homomorphism_ok = false;
  bool bijective = false;
  bool weights_match = false;
  bool intertwines = false;        // Phi(f * g) = Phi(f) * Phi(g), Phi(f^*) = Phi(f)^*
  bool block_data_equal = false;
  bool ok() const { return homomorphism_ok && bijective && weights_match && intertwines && block_data_equal; }
};

/// Prop-style pullback: for an isomorphism phi : G -> H matching Haar
/// weights, Phi(f) = f o phi intertwines the algebra structure and the block
/// data of C*(H) and C*(G) agree.
inline PullbackReport pullback_isomorphism(const FiniteGroupoid& G, const FiniteGroupoid& H,
                                           const std::vector<int>& phi, Rng& rng, Tolerances tol = {}) {
  PullbackReport rep;
  rep.homomorphism_ok = check_homomorphism(G, H, phi).ok;
  rep.bijective = is_bijective(phi, H.n);
  rep.weights_match = true;
  for (int u : G.units())
    if (!(G.weights.weight[u] == H.weights.weight[phi[u]])) rep.weights_match = false;
  if (!rep.homomorphism_ok || !rep.bijective || !rep.weights_match) return rep;

  // Phi : C_c(H) -> C_c(G), Phi(f) = f o phi; checked on random functions.
  auto pull = [&](const GroupoidFunction& f) {
    GroupoidFunction out = GroupoidFunction::zero(G);
    for (int g = 0; g < G.n; ++g) out.values[g] = f.values[phi[g]];
    return out;
  };
  rep.intertwines = true;
  for (int trial = 0; trial < 8; ++trial) {
    GroupoidFunction f = GroupoidFunction::zero(H), g = GroupoidFunction::zero(H);
    for (int i = 0; i < H.n; ++i) {
      f.values[i] = rng.complex_unit_ball();
      g.values[i] = rng.complex_unit_ball();
    }
    GroupoidFunction lhs = pull(convolve(f, g));
    GroupoidFunction rhs = convolve(pull(f), pull(g));
    if ((lhs.values - rhs.values).norm() > 1e-10 * std::max(1.0, rhs.values.norm()))
      rep.intertwines = false;
    GroupoidFunction li = pull(involute(f));
    GroupoidFunction ri = involute(pull(f));
    if ((li.values - ri.values).norm() > 1e-12 * std::max(1.0, ri.values.norm()))
      rep.intertwines = false;
  }

  auto bg = c_star_spectrum(G, rng, tol);
  auto bh = c_star_spectrum(H, rng, tol);
  rep.block_data_equal = bg.dm_multiset() == bh.dm_multiset();
  return rep;
}

}  // namespace gstar
