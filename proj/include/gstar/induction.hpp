#pragma once

#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "gstar/crossed_product.hpp"
#include "gstar/duality.hpp"
#include "gstar/groupoid.hpp"
#include "gstar/groupoid_algebra.hpp"
#include "gstar/star_algebra.hpp"

namespace gstar {

// ---------------------------------------------------------------------------
// Quotient sections c : G_u/S_u -> G_u and delta : G_u -> S_u
// ---------------------------------------------------------------------------

/// Chosen representatives for G_u/S_u with the residual map delta satisfying
/// gamma = c([gamma]) delta(gamma).  The canonical choice picks the minimal
/// element id per class; any section yields an equivalent induced
/// representation.
struct QuotientSection {
  int unit = -1;
  std::vector<int> Gu;         // ascending parent ids of G_u
  std::vector<int> class_of;   // per position in Gu
  std::vector<int> class_rep;  // class -> parent id of the representative
  std::vector<int> delta;      // per position in Gu: parent id of delta(gamma) in S_u

  int pos_of(int parent_id) const {
    auto it = std::lower_bound(Gu.begin(), Gu.end(), parent_id);
    if (it == Gu.end() || *it != parent_id)
      throw std::invalid_argument("QuotientSection: element not in G_u");
    return static_cast<int>(it - Gu.begin());
  }
  int num_classes() const { return static_cast<int>(class_rep.size()); }
};

inline QuotientSection quotient_section(const FiniteGroupoid& G, int u, bool maximal_reps = false) {
  QuotientSection q;
  q.unit = u;
  q.Gu = G.s_fiber(u);
  auto iso = G.isotropy(u);
  int n = static_cast<int>(q.Gu.size());
  q.class_of.assign(n, -1);
  std::vector<int> scan(q.Gu);
  if (maximal_reps) std::reverse(scan.begin(), scan.end());
  for (int rep : scan) {
    int pos = q.pos_of(rep);
    if (q.class_of[pos] >= 0) continue;
    int cls = static_cast<int>(q.class_rep.size());
    q.class_rep.push_back(rep);
    for (int s : iso) {
      int member = G.mult(rep, s);
      if (member < 0) throw std::logic_error("quotient_section: rep*s undefined");
      q.class_of[q.pos_of(member)] = cls;
    }
  }
  q.delta.resize(n);
  for (int i = 0; i < n; ++i) {
    int gamma = q.Gu[i];
    int rep = q.class_rep[q.class_of[i]];
    int d = G.mult(G.inv(rep), gamma);
    if (d < 0 || G.r(d) != u || G.s(d) != u)
      throw std::logic_error("quotient_section: delta left the isotropy");
    q.delta[i] = d;
  }
  return q;
}

// ---------------------------------------------------------------------------
// Induced representations from characters (scalar case)
// ---------------------------------------------------------------------------

/// N^omega on l^2(G_u/S_u):
///   (N(f) phi)([gamma]) = sum over eta in G^{r(gamma)} of
///     conj(omega(delta(eta^{-1} gamma) delta(gamma)^{-1}))  f(eta) phi([eta^{-1} gamma]).
/// Labels align with the regular model (basis indexed by element ids).
inline MatrixRep induce_character(const FiniteGroupoid& G, const Character& omega,
                                  const QuotientSection& q) {
  if (q.unit != omega.unit) throw std::invalid_argument("induce_character: section/character mismatch");
  int u = omega.unit;
  int dim = q.num_classes();
  MatrixRep rep;
  rep.dim = dim;
  rep.labels.resize(G.n);
  std::iota(rep.labels.begin(), rep.labels.end(), 0);
  rep.images.assign(G.n, ComplexMatrix::Zero(dim, dim));
  for (int g = 0; g < G.n; ++g) {
    ComplexMatrix& M = rep.images[g];
    for (int row = 0; row < dim; ++row) {
      int x = q.class_rep[row];
      if (G.r(g) != G.r(x)) continue;
      int y = G.mult(G.inv(g), x);
      if (y < 0) continue;  // cannot happen when r matches
      int col = q.class_of[q.pos_of(y)];
      int dy = q.delta[q.pos_of(y)];
      int dx = q.delta[q.pos_of(x)];
      int s = G.mult(dy, G.inv(dx));
      M(row, col) += G.w(u) * std::conj(omega.value(s));
    }
  }
  rep.trace_vector = ComplexVector::Zero(G.n);
  for (int g = 0; g < G.n; ++g) rep.trace_vector[g] = rep.images[g].trace();
  return rep;
}

inline MatrixRep induce_character(const FiniteGroupoid& G, const Character& omega) {
  return induce_character(G, omega, quotient_section(G, omega.unit));
}

// ---------------------------------------------------------------------------
// Covariant representations of the fibers and their induction
// ---------------------------------------------------------------------------

/// R = pi x| U at a unit u: pi an irrep of the fiber A(u) (stored on matrix
/// units) and U a unitary representation of S_u, satisfying the covariance
/// rule U_s pi(a) = pi(alpha_s(a)) U_s.
struct FiberCovariantRep {
  int unit = -1;
  int pi_dim = 0;
  int fiber_dim = 0;
  std::vector<ComplexMatrix> pi;  // images of e_kl, index k*fiber_dim + l
  std::vector<int> s_elements;    // ascending parent ids of S_u
  std::vector<ComplexMatrix> U;   // aligned with s_elements

  ComplexMatrix apply_pi(const ComplexMatrix& a) const {
    ComplexMatrix out = ComplexMatrix::Zero(pi_dim, pi_dim);
    for (int k = 0; k < fiber_dim; ++k)
      for (int l = 0; l < fiber_dim; ++l)
        if (a(k, l) != Complex(0)) out += a(k, l) * pi[k * fiber_dim + l];
    return out;
  }
  const ComplexMatrix& u_of(const FiniteGroupoid& G, int s_parent) const {
    auto it = std::lower_bound(s_elements.begin(), s_elements.end(), s_parent);
    if (it == s_elements.end() || *it != s_parent)
      throw std::invalid_argument("FiberCovariantRep: element not in S_u");
    (void)G;
    return U[it - s_elements.begin()];
  }
};

/// Scalar fibers: a character is exactly a covariant rep with pi = 1.
inline FiberCovariantRep covariant_from_character(const Character& omega) {
  FiberCovariantRep R;
  R.unit = omega.unit;
  R.pi_dim = 1;
  R.fiber_dim = 1;
  R.pi = {ComplexMatrix::Identity(1, 1)};
  R.s_elements = omega.elements;
  for (std::size_t i = 0; i < omega.elements.size(); ++i) {
    ComplexMatrix m(1, 1);
    m(0, 0) = omega.value_at_pos(static_cast<int>(i));
    R.U.push_back(m);
  }
  return R;
}

struct CovariantCheck {
  bool pi_is_star_rep = false;
  bool u_is_unitary_rep = false;
  bool covariance = false;
  bool ok() const { return pi_is_star_rep && u_is_unitary_rep && covariance; }
};

inline CovariantCheck validate_covariant(const CrossedSystem& sys, const FiberCovariantRep& R,
                                         Tolerances tol = {}) {
  CovariantCheck out;
  const FiniteGroupoid& G = sys.G;
  int d = R.fiber_dim;
  out.pi_is_star_rep = true;
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) {
      if ((R.pi[k * d + l].adjoint() - R.pi[l * d + k]).norm() > tol.invariant)
        out.pi_is_star_rep = false;
      for (int p = 0; p < d; ++p)
        for (int qq = 0; qq < d; ++qq) {
          ComplexMatrix lhs = R.pi[k * d + l] * R.pi[p * d + qq];
          ComplexMatrix rhs = l == p ? R.pi[k * d + qq] : ComplexMatrix::Zero(R.pi_dim, R.pi_dim);
          if ((lhs - rhs).norm() > tol.invariant) out.pi_is_star_rep = false;
        }
    }
  out.u_is_unitary_rep = true;
  for (std::size_t i = 0; i < R.s_elements.size(); ++i) {
    const ComplexMatrix& Us = R.U[i];
    if ((Us * Us.adjoint() - ComplexMatrix::Identity(R.pi_dim, R.pi_dim)).norm() > tol.invariant)
      out.u_is_unitary_rep = false;
    for (std::size_t j = 0; j < R.s_elements.size(); ++j) {
      int st = G.mult(R.s_elements[i], R.s_elements[j]);
      if ((R.u_of(G, st) - R.U[i] * R.U[j]).norm() > tol.invariant) out.u_is_unitary_rep = false;
    }
  }
  out.covariance = true;
  for (std::size_t i = 0; i < R.s_elements.size(); ++i) {
    int s = R.s_elements[i];
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) {
        ComplexMatrix lhs = R.U[i] * R.pi[k * d + l];
        ComplexMatrix rhs = R.apply_pi(sys.act(s, matrix_unit(d, k, l))) * R.U[i];
        if ((lhs - rhs).norm() > tol.invariant) out.covariance = false;
      }
  }
  return out;
}

/// Recovers the covariant pair from an irrep of the fiber crossed product
/// A(u) x| S_u: pi(a) = rho(delta_u (x) a), U_s = rho(delta_s (x) 1).
inline FiberCovariantRep covariant_from_fiber_irrep(const CrossedSystem& parent, int unit,
                                                    const RestrictedSystem& fiber,
                                                    const CrossedModel& fiber_model,
                                                    const MatrixRep& rho) {
  FiberCovariantRep R;
  R.unit = unit;
  R.pi_dim = rho.dim;
  R.fiber_dim = parent.A.dims[unit];
  int d = R.fiber_dim;
  int u_local = fiber.from_parent[unit];
  double w = parent.G.w(unit);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      R.pi.push_back(rho.images[fiber_model.basis_index(u_local, k, l)] / w);
  for (int s : parent.G.isotropy(unit)) {
    R.s_elements.push_back(s);
    int s_local = fiber.from_parent[s];
    ComplexMatrix Us = ComplexMatrix::Zero(rho.dim, rho.dim);
    for (int k = 0; k < d; ++k) Us += rho.images[fiber_model.basis_index(s_local, k, k)];
    R.U.push_back(Us / w);
  }
  return R;
}

/// gamma . R: the rep at r(gamma) with pi' = pi o alpha_gamma^{-1} and
/// V_s = U_{gamma^{-1} s gamma}.
inline FiberCovariantRep conjugate_fiber_rep(const CrossedSystem& sys, int gamma,
                                             const FiberCovariantRep& R) {
  const FiniteGroupoid& G = sys.G;
  if (G.s(gamma) != R.unit)
    throw std::invalid_argument("conjugate_fiber_rep: rep does not live at s(gamma)");
  int v = G.r(gamma);
  FiberCovariantRep out;
  out.unit = v;
  out.pi_dim = R.pi_dim;
  out.fiber_dim = sys.A.dims[v];
  int d = out.fiber_dim;
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l)
      out.pi.push_back(R.apply_pi(sys.act_inv(gamma, matrix_unit(d, k, l))));
  for (int s : G.isotropy(v)) {
    out.s_elements.push_back(s);
    int conj = G.mult(G.inv(gamma), G.mult(s, gamma));
    out.U.push_back(R.u_of(G, conj));
  }
  return out;
}

/// Trace vector of the integrated form of R over the basis of the fiber
/// crossed product model at R.unit: tr(w pi(e_kl) U_s).
inline ComplexVector covariant_trace_vector(const CrossedSystem& parent,
                                            const RestrictedSystem& fiber,
                                            const CrossedModel& fiber_model,
                                            const FiberCovariantRep& R) {
  ComplexVector tau = ComplexVector::Zero(fiber_model.algebra.dim());
  int d = R.fiber_dim;
  double w = parent.G.w(R.unit);
  for (std::size_t i = 0; i < R.s_elements.size(); ++i) {
    int s_local = fiber.from_parent[R.s_elements[i]];
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l)
        tau[fiber_model.basis_index(s_local, k, l)] = w * (R.pi[k * d + l] * R.U[i]).trace();
  }
  return tau;
}

/// N^R of the crossed product on l^2(G_u/S_u) (x) H_pi:
///   N^R(f) phi([gamma]) = sum over eta in G^{r(gamma)} of
///     U_{delta(gamma)} pi(alpha_gamma^{-1}(f(eta))) U_{delta(eta^{-1} gamma)}^* phi([eta^{-1} gamma]).
/// Coordinates are class-major; labels align with the crossed model basis.
inline MatrixRep induce_covariant(const CrossedSystem& sys, const CrossedModel& model,
                                  const FiberCovariantRep& R, const QuotientSection& q) {
  const FiniteGroupoid& G = sys.G;
  int u = R.unit;
  int classes = q.num_classes();
  int dim = classes * R.pi_dim;
  MatrixRep rep;
  rep.dim = dim;
  rep.labels = model.algebra.labels;
  rep.images.assign(model.algebra.dim(), ComplexMatrix::Zero(dim, dim));
  double w = G.w(u);
  for (int gamma = 0; gamma < G.n; ++gamma) {
    int dg = sys.A.dims[G.r(gamma)];
    for (int row = 0; row < classes; ++row) {
      int x = q.class_rep[row];
      if (G.r(gamma) != G.r(x)) continue;
      int y = G.mult(G.inv(gamma), x);
      int col = q.class_of[q.pos_of(y)];
      const ComplexMatrix& Ux = R.u_of(G, q.delta[q.pos_of(x)]);
      const ComplexMatrix& Uy = R.u_of(G, q.delta[q.pos_of(y)]);
      for (int k = 0; k < dg; ++k)
        for (int l = 0; l < dg; ++l) {
          ComplexMatrix blockval =
              w * Ux * R.apply_pi(sys.act_inv(x, matrix_unit(dg, k, l))) * Uy.adjoint();
          rep.images[model.basis_index(gamma, k, l)].block(row * R.pi_dim, col * R.pi_dim,
                                                           R.pi_dim, R.pi_dim) += blockval;
        }
    }
  }
  rep.trace_vector = ComplexVector::Zero(model.algebra.dim());
  for (int j = 0; j < model.algebra.dim(); ++j) rep.trace_vector[j] = rep.images[j].trace();
  return rep;
}

inline MatrixRep induce_covariant(const CrossedSystem& sys, const CrossedModel& model,
                                  const FiberCovariantRep& R) {
  return induce_covariant(sys, model, R, quotient_section(sys.G, R.unit));
}

// ---------------------------------------------------------------------------
// Main theorem verifiers
// ---------------------------------------------------------------------------

struct ScalarMainTheoremReport {
  bool applicable = false;          // abelian isotropy
  bool all_irreducible = false;     // every N^omega has trivial commutant
  bool orbit_invariant = false;     // N^omega ~ N^{gamma . omega}
  bool orbits_inequivalent = false; // distinct dual orbits induce inequivalent reps
  bool bijection_with_blocks = false;
  bool dims_match_orbits = false;   // dim N^omega = orbit size of the base unit
  int dual_orbit_count = 0;
  int block_count = 0;
  std::vector<std::string> witnesses;
  bool ok() const {
    return applicable && all_irreducible && orbit_invariant && orbits_inequivalent &&
           bijection_with_blocks && dims_match_orbits;
  }
};

inline ScalarMainTheoremReport verify_scalar_main_theorem(const FiniteGroupoid& G, Rng& rng,
                                                          Tolerances tol = {}) {
  ScalarMainTheoremReport rep;
  if (!structural_queries(G).has_abelian_isotropy) {
    rep.witnesses.push_back("isotropy not abelian");
    return rep;
  }
  rep.applicable = true;

  auto orbits_units = orbit_partition(G);
  auto dual = dual_orbits(G, dual_bundle(G));
  rep.dual_orbit_count = static_cast<int>(dual.orbits.size());

  std::map<int, QuotientSection> sections;
  for (int u : G.units()) sections.emplace(u, quotient_section(G, u));
  std::vector<MatrixRep> induced(dual.bundle.all.size());
  for (std::size_t i = 0; i < dual.bundle.all.size(); ++i)
    induced[i] = induce_character(G, dual.bundle.all[i], sections.at(dual.bundle.all[i].unit));

  // (v) dimension = orbit size of the base unit
  rep.dims_match_orbits = true;
  for (std::size_t i = 0; i < induced.size(); ++i) {
    int u = dual.bundle.all[i].unit;
    int orbit_size = static_cast<int>(orbits_units.orbits[orbits_units.orbit_of_unit[u]].size());
    if (induced[i].dim != orbit_size) {
      rep.dims_match_orbits = false;
      rep.witnesses.push_back("dim N^omega != orbit size at unit " + std::to_string(u));
    }
  }

  // (i) irreducibility
  rep.all_irreducible = true;
  for (std::size_t i = 0; i < induced.size(); ++i)
    if (!is_irreducible(induced[i], tol)) {
      rep.all_irreducible = false;
      rep.witnesses.push_back("N^omega reducible for character " + std::to_string(i));
    }

  // (ii) N^omega ~ N^{gamma . omega} for every applicable gamma
  rep.orbit_invariant = true;
  for (int gamma = 0; gamma < G.n; ++gamma) {
    for (int ci : dual.bundle.of_unit[G.s(gamma)]) {
      Character moved = g_action_on_dual(G, dual.bundle.all[ci], gamma);
      int target = dual.bundle.index_of(moved);
      if (!are_equivalent(induced[ci], induced[target], tol)) {
        rep.orbit_invariant = false;
        rep.witnesses.push_back("N^omega not equivalent along arrow " + std::to_string(gamma));
      }
    }
  }

  // (iii) one representative per orbit, pairwise inequivalent
  std::vector<int> reps_per_orbit;
  for (const auto& orbit : dual.orbits) reps_per_orbit.push_back(orbit.front());
  rep.orbits_inequivalent = true;
  for (std::size_t a = 0; a < reps_per_orbit.size(); ++a)
    for (std::size_t b = 0; b < a; ++b)
      if (are_equivalent(induced[reps_per_orbit[a]], induced[reps_per_orbit[b]], tol)) {
        rep.orbits_inequivalent = false;
        rep.witnesses.push_back("distinct dual orbits induce equivalent reps");
      }

  // (iv) bijection with the Wedderburn blocks via trace vectors
  auto blocks = c_star_spectrum(G, rng, tol);
  rep.block_count = static_cast<int>(blocks.blocks.size());
  rep.bijection_with_blocks = rep.block_count == rep.dual_orbit_count;
  std::vector<bool> used(blocks.blocks.size(), false);
  for (int ci : reps_per_orbit) {
    bool matched = false;
    for (std::size_t b = 0; b < blocks.blocks.size() && !matched; ++b) {
      if (used[b]) continue;
      if ((induced[ci].trace_vector - blocks.blocks[b].trace_vector).lpNorm<Eigen::Infinity>() <=
          tol.invariant * 10) {
        used[b] = true;
        matched = true;
      }
    }
    if (!matched) {
      rep.bijection_with_blocks = false;
      rep.witnesses.push_back("induced rep of orbit has no matching block");
    }
  }
  return rep;
}

struct CrossedMainTheoremReport {
  bool applicable = false;
  bool fiber_reps_covariant = false;
  bool conjugation_closes = false;   // transported reps land on a unique fiber rep
  bool bijection_with_blocks = false;
  bool dims_match = false;
  int orbit_count = 0;
  int block_count = 0;
  std::vector<std::string> witnesses;
  bool ok() const {
    return applicable && fiber_reps_covariant && conjugation_closes && bijection_with_blocks &&
           dims_match;
  }
};

inline CrossedMainTheoremReport verify_crossed_main_theorem(const CrossedSystem& sys, Rng& rng,
                                                            Tolerances tol = {}) {
  CrossedMainTheoremReport rep;
  const FiniteGroupoid& G = sys.G;
  if (!structural_queries(G).has_abelian_isotropy) {
    rep.witnesses.push_back("isotropy not abelian");
    return rep;
  }
  rep.applicable = true;

  // Fiber crossed products and their irreps as covariant pairs.
  struct FiberData {
    RestrictedSystem fiber;
    CrossedModel model;
    std::vector<FiberCovariantRep> reps;
    std::vector<ComplexVector> traces;
  };
  std::map<int, FiberData> fibers;
  rep.fiber_reps_covariant = true;
  for (int u : G.units()) {
    // built in place: the model keeps a pointer into fd.fiber, so the
    // FiberData must never move after construction
    FiberData& fd = fibers[u];
    fd.fiber = fiber_system(sys, u);
    fd.model = crossed_product_model(fd.fiber.sys, tol);
    auto blocks = wedderburn(fd.model.algebra, rng, tol);
    auto rhos = irreps(fd.model.algebra, blocks, rng, tol);
    for (const auto& rho : rhos) {
      auto R = covariant_from_fiber_irrep(sys, u, fd.fiber, fd.model, rho);
      auto chk = validate_covariant(sys, R, tol);
      if (!chk.ok()) {
        rep.fiber_reps_covariant = false;
        rep.witnesses.push_back("extracted fiber rep fails covariance at unit " + std::to_string(u));
      }
      fd.traces.push_back(covariant_trace_vector(sys, fd.fiber, fd.model, R));
      fd.reps.push_back(std::move(R));
    }
  }

  // Orbits of fiber reps under conjugation.
  std::vector<std::pair<int, int>> states;  // (unit, rep index)
  std::map<std::pair<int, int>, int> state_index;
  for (auto& [u, fd] : fibers)
    for (std::size_t i = 0; i < fd.reps.size(); ++i) {
      state_index[{u, static_cast<int>(i)}] = static_cast<int>(states.size());
      states.emplace_back(u, static_cast<int>(i));
    }
  std::vector<int> parent(states.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) { return parent[a] == a ? a : parent[a] = find(parent[a]); };
  rep.conjugation_closes = true;
  for (int gamma = 0; gamma < G.n; ++gamma) {
    int u = G.s(gamma), v = G.r(gamma);
    auto& src = fibers.at(u);
    auto& dst = fibers.at(v);
    for (std::size_t i = 0; i < src.reps.size(); ++i) {
      auto moved = conjugate_fiber_rep(sys, gamma, src.reps[i]);
      ComplexVector tau = covariant_trace_vector(sys, dst.fiber, dst.model, moved);
      int match = -1;
      for (std::size_t j = 0; j < dst.traces.size(); ++j)
        if ((tau - dst.traces[j]).lpNorm<Eigen::Infinity>() <= tol.invariant * 10) {
          if (match >= 0) match = -2;
          else match = static_cast<int>(j);
        }
      if (match < 0) {
        rep.conjugation_closes = false;
        rep.witnesses.push_back("conjugated rep has no unique match along arrow " +
                                std::to_string(gamma));
        continue;
      }
      int a = find(state_index.at({u, static_cast<int>(i)}));
      int b = find(state_index.at({v, match}));
      if (a != b) parent[a] = b;
    }
  }
  std::set<int> roots;
  for (std::size_t i = 0; i < states.size(); ++i) roots.insert(find(static_cast<int>(i)));
  rep.orbit_count = static_cast<int>(roots.size());

  // Induce one representative per orbit and compare with the blocks.
  auto model = crossed_product_model(sys, tol);
  auto blocks = wedderburn(model.algebra, rng, tol);
  rep.block_count = static_cast<int>(blocks.blocks.size());
  std::map<int, std::pair<int, int>> orbit_rep;  // root -> state
  for (std::size_t i = 0; i < states.size(); ++i) {
    int root = find(static_cast<int>(i));
    if (!orbit_rep.count(root)) orbit_rep[root] = states[i];
  }
  rep.bijection_with_blocks = rep.block_count == rep.orbit_count;
  rep.dims_match = true;
  std::vector<bool> used(blocks.blocks.size(), false);
  for (const auto& [root, state] : orbit_rep) {
    const auto& fd = fibers.at(state.first);
    auto induced = induce_covariant(sys, model, fd.reps[state.second]);
    bool matched = false;
    for (std::size_t b = 0; b < blocks.blocks.size() && !matched; ++b) {
      if (used[b]) continue;
      if ((induced.trace_vector - blocks.blocks[b].trace_vector).lpNorm<Eigen::Infinity>() <=
          tol.invariant * 10) {
        used[b] = true;
        matched = true;
        if (blocks.blocks[b].d != induced.dim) {
          rep.dims_match = false;
          rep.witnesses.push_back("induced dimension differs from the matched block");
        }
      }
    }
    if (!matched) {
      rep.bijection_with_blocks = false;
      rep.witnesses.push_back("induced rep has no matching block");
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Stone-von Neumann at finite scale
// ---------------------------------------------------------------------------

struct StoneVonNeumannReport {
  bool blocks_per_unit = false;   // one block per unit of G
  bool dims_exact = false;        // block dim and multiplicity both |G_u|
  int unit_count = 0;
  int block_count = 0;
  std::vector<std::string> witnesses;
  bool ok() const { return blocks_per_unit && dims_exact; }
};

inline StoneVonNeumannReport stone_von_neumann_check(const FiniteGroupoid& G, Rng& rng,
                                                     Tolerances tol = {}) {
  StoneVonNeumannReport rep;
  auto T = transformation_groupoid(left_translation_action(G));
  auto blocks = c_star_spectrum(T.groupoid, rng, tol);
  rep.unit_count = static_cast<int>(G.units().size());
  rep.block_count = static_cast<int>(blocks.blocks.size());
  rep.blocks_per_unit = rep.unit_count == rep.block_count;
  std::multiset<std::pair<int, int>> expected;
  for (int u : G.units()) {
    int k = static_cast<int>(G.s_fiber(u).size());
    expected.insert({k, k});
  }
  rep.dims_exact = blocks.dm_multiset() == expected;
  if (!rep.blocks_per_unit)
    rep.witnesses.push_back("block count " + std::to_string(rep.block_count) + " vs units " +
                            std::to_string(rep.unit_count));
  if (!rep.dims_exact) rep.witnesses.push_back("block (d,m) multiset differs from {(|G_u|,|G_u|)}");
  return rep;
}

}  // namespace gstar
