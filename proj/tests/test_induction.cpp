#include <catch2/catch_amalgamated.hpp>

#include "gstar/duality.hpp"
#include "gstar/induction.hpp"
#include "gstar/morita.hpp"
#include "test_helpers.hpp"

using namespace gstar;
using namespace gstar::testing;

namespace {

FiniteGroupoid parity_groupoid() {
  auto z4 = from_group(cyclic_table(4));
  std::vector<std::vector<int>> perms = {{0, 1}, {1, 0}, {0, 1}, {1, 0}};
  return transformation_groupoid(group_action(z4, perms)).groupoid;
}

FiniteGroupoid swap_groupoid() {
  auto z2 = from_group(cyclic_table(2));
  return transformation_groupoid(group_action(z2, {{0, 1}, {1, 0}})).groupoid;
}

}  // namespace

TEST_CASE("characters of small abelian groups") {
  SECTION("Z2: trivial and sign") {
    auto turns = character_turns(cyclic_table(2));
    REQUIRE(turns.size() == 2);
    CHECK(turns[0] == std::vector<Rational>{Rational(0), Rational(0)});
    CHECK(turns[1] == std::vector<Rational>{Rational(0), Rational(1, 2)});
  }
  SECTION("Z4: omega_k(j) = i^(kj)") {
    auto turns = character_turns(cyclic_table(4));
    REQUIRE(turns.size() == 4);
    for (int k = 0; k < 4; ++k) {
      bool found = false;
      for (const auto& row : turns) {
        bool all = true;
        for (int j = 0; j < 4; ++j) all = all && row[j] == Rational(k * j, 4).mod1();
        found = found || all;
      }
      CHECK(found);
    }
  }
  SECTION("Klein group: all characters real, against a brute-force oracle") {
    auto t = product_table(cyclic_table(2), cyclic_table(2));
    auto turns = character_turns(t);
    REQUIRE(turns.size() == 4);
    // oracle: enumerate all +-1 valued maps and keep the homomorphisms
    int m = 4, found = 0;
    for (int mask = 0; mask < 16; ++mask) {
      std::vector<double> val(m);
      for (int i = 0; i < m; ++i) val[i] = (mask >> i) & 1 ? -1.0 : 1.0;
      bool hom = true;
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) hom = hom && val[t[a][b]] == val[a] * val[b];
      if (!hom) continue;
      ++found;
      bool matched = false;
      for (const auto& row : turns) {
        bool all = true;
        for (int i = 0; i < m; ++i)
          all = all && std::abs(std::polar(1.0, 2 * M_PI * row[i].to_double()) - val[i]) < 1e-12;
        matched = matched || all;
      }
      CHECK(matched);
    }
    CHECK(found == 4);
  }
  SECTION("nonabelian input rejected") {
    CHECK_THROWS_AS(character_turns(symmetric_table(3)), std::invalid_argument);
  }
  SECTION("orthogonality and counting on random abelian groups") {
    Rng rng(3);
    for (int t = 0; t < 6; ++t) {
      auto table = random_abelian_table(rng, 24);
      auto rep = finite_double_dual_check(table);
      CHECK(rep.ok());
      CHECK(rep.orthogonality_residual < 1e-10);
    }
  }
}

TEST_CASE("dual bundle") {
  SECTION("Z2 bundle over two points: four characters") {
    auto S = group_bundle({cyclic_table(2), cyclic_table(2)});
    auto dual = dual_bundle(S);
    CHECK(dual.all.size() == 4);
  }
  SECTION("trivial bundle: units only") {
    auto S = cotrivial_groupoid(3);
    auto dual = dual_bundle(S);
    CHECK(dual.all.size() == 3);
    for (const auto& c : dual.all) CHECK(c.elements.size() == 1);
  }
  SECTION("mixed fibers Z2, Z3: 2 + 3 characters") {
    auto S = group_bundle({cyclic_table(2), cyclic_table(3)});
    auto dual = dual_bundle(S);
    CHECK(dual.all.size() == 5);
    CHECK(dual.of_unit[S.units()[0]].size() == 2);
    CHECK(dual.of_unit[S.units()[1]].size() == 3);
  }
  SECTION("|S_u^| = |S_u| on random abelian-isotropy groupoids") {
    Rng rng(7);
    int done = 0;
    for (int t = 0; t < 20 && done < 8; ++t) {
      auto G = random_groupoid(rng, 30);
      if (!structural_queries(G).has_abelian_isotropy) continue;
      auto dual = dual_bundle(G);
      for (int u : G.units()) CHECK(dual.of_unit[u].size() == G.isotropy(u).size());
      ++done;
    }
  }
}

TEST_CASE("action on the dual") {
  SECTION("isotropy elements fix their own characters") {
    auto G = parity_groupoid();
    auto dual = dual_bundle(G);
    for (int gamma = 0; gamma < G.n; ++gamma) {
      if (G.r(gamma) != G.s(gamma)) continue;
      for (int ci : dual.of_unit[G.s(gamma)]) {
        auto moved = g_action_on_dual(G, dual.all[ci], gamma);
        CHECK(moved == dual.all[ci]);
      }
    }
  }
  SECTION("arrows transport characters between fibers") {
    auto G = parity_groupoid();
    auto dual = dual_bundle(G);
    for (int gamma = 0; gamma < G.n; ++gamma) {
      for (int ci : dual.of_unit[G.s(gamma)]) {
        auto moved = g_action_on_dual(G, dual.all[ci], gamma);
        CHECK(moved.unit == G.r(gamma));
        CHECK(dual.index_of(moved) >= 0);
      }
    }
  }
  SECTION("dual orbit counts") {
    Rng rng(11);
    auto d1 = dual_orbits(pair_groupoid(3), dual_bundle(pair_groupoid(3)));
    CHECK(d1.orbits.size() == 1);
    auto z4 = from_group(cyclic_table(4));
    auto d2 = dual_orbits(z4, dual_bundle(z4));
    CHECK(d2.orbits.size() == 4);
    auto G = parity_groupoid();
    auto d3 = dual_orbits(G, dual_bundle(G));
    CHECK(d3.orbits.size() == 2);
    for (const auto& orbit : d3.orbits) CHECK(orbit.size() == 2);
  }
}

TEST_CASE("quotient sections") {
  Rng rng(13);
  for (int t = 0; t < 8; ++t) {
    auto G = random_groupoid(rng, 30);
    for (int u : G.units()) {
      auto q = quotient_section(G, u);
      auto iso = G.isotropy(u);
      // c([gamma]) lies in the class, the class partitions G_u
      CHECK(q.num_classes() * static_cast<int>(iso.size()) == static_cast<int>(q.Gu.size()));
      for (int rep : q.class_rep) CHECK(q.class_of[q.pos_of(rep)] >= 0);
      // delta(gamma s) = delta(gamma) s
      for (int i = 0; i < static_cast<int>(q.Gu.size()); ++i) {
        int gamma = q.Gu[i];
        CHECK(G.mult(q.class_rep[q.class_of[i]], q.delta[i]) == gamma);
        for (int s : iso) {
          int gs = G.mult(gamma, s);
          int j = q.pos_of(gs);
          CHECK(q.class_of[j] == q.class_of[i]);
          CHECK(q.delta[j] == G.mult(q.delta[i], s));
        }
      }
      // sigma trivialization: sum over G_u = sum over classes of sums over S_u
      GroupoidFunction f = GroupoidFunction::zero(G);
      for (int i = 0; i < G.n; ++i) f.values[i] = rng.complex_unit_ball();
      Complex direct = 0;
      for (int gamma : q.Gu) direct += f.values[gamma];
      Complex nested = 0;
      for (int rep : q.class_rep)
        for (int s : iso) nested += f.values[G.mult(rep, s)];
      CHECK(std::abs(direct - nested) < 1e-12);
    }
  }
}

TEST_CASE("induced characters") {
  Rng rng(17);
  SECTION("pair(2), trivial character: the defining irrep of M2") {
    auto G = pair_groupoid(2);
    auto chars = characters(G, 0);
    REQUIRE(chars.size() == 1);
    auto N = induce_character(G, chars[0]);
    CHECK(N.dim == 2);
    CHECK(is_irreducible(N));
    auto blocks = c_star_spectrum(G, rng);
    REQUIRE(blocks.blocks.size() == 1);
    CHECK((N.trace_vector - blocks.blocks[0].trace_vector).norm() < 1e-8);
  }
  SECTION("group Z4: inducing a character gives the character back") {
    auto G = from_group(cyclic_table(4));
    auto chars = characters(G, 0);
    REQUIRE(chars.size() == 4);
    for (const auto& omega : chars) {
      auto N = induce_character(G, omega);
      CHECK(N.dim == 1);
      for (int g = 0; g < G.n; ++g)
        CHECK(std::abs(N.images[g](0, 0) - omega.value(g)) < 1e-12);
    }
  }
  SECTION("parity groupoid: stabilizer characters induce 2-dim irreps") {
    auto G = parity_groupoid();
    auto dual = dual_bundle(G);
    auto blocks = c_star_spectrum(G, rng);
    REQUIRE(blocks.blocks.size() == 2);
    for (const auto& omega : dual.all) {
      auto N = induce_character(G, omega);
      CHECK(N.dim == 2);
      CHECK(is_irreducible(N));
      bool matched = false;
      for (const auto& blk : blocks.blocks)
        matched = matched || (N.trace_vector - blk.trace_vector).norm() < 1e-8;
      CHECK(matched);
    }
  }
  SECTION("any section gives an equivalent induced representation") {
    Rng r2(19);
    int done = 0;
    for (int t = 0; t < 15 && done < 5; ++t) {
      auto G = random_groupoid(r2, 24);
      if (!structural_queries(G).has_abelian_isotropy) continue;
      int u = G.units()[rng.uniform_int(0, static_cast<int>(G.units().size()) - 1)];
      auto chars = characters(G, u);
      const auto& omega = chars[rng.uniform_int(0, static_cast<int>(chars.size()) - 1)];
      auto n1 = induce_character(G, omega, quotient_section(G, u, false));
      auto n2 = induce_character(G, omega, quotient_section(G, u, true));
      CHECK(are_equivalent(n1, n2));
      ++done;
    }
    CHECK(done >= 3);
  }
  SECTION("induced reps are *-representations of the convolution algebra") {
    auto G = parity_groupoid();
    auto dual = dual_bundle(G);
    auto rm = regular_model(G);
    for (const auto& omega : dual.all) {
      auto N = induce_character(G, omega);
      for (int a = 0; a < G.n; ++a) {
        for (int b = 0; b < G.n; ++b) {
          ComplexMatrix lhs = N.images[a] * N.images[b];
          ComplexMatrix rhs = ComplexMatrix::Zero(N.dim, N.dim);
          auto [it, end] = rm.algebra.sc.product(a, b);
          for (; it != end; ++it) rhs += it->second * N.images[it->first];
          CHECK((lhs - rhs).norm() < 1e-10);
        }
        CHECK((N.images[a].adjoint() - N.images[G.inv(a)]).norm() < 1e-10);
      }
    }
  }
}

TEST_CASE("covariant fiber representations") {
  Rng rng(23);
  SECTION("scalar conjugation reduces to the dual action") {
    auto G = parity_groupoid();
    auto dual = dual_bundle(G);
    auto sys = trivial_system(G, 1);
    for (int gamma = 0; gamma < G.n; ++gamma)
      for (int ci : dual.of_unit[G.s(gamma)]) {
        auto R = covariant_from_character(dual.all[ci]);
        auto moved = conjugate_fiber_rep(sys, gamma, R);
        auto expect = covariant_from_character(g_action_on_dual(G, dual.all[ci], gamma));
        REQUIRE(moved.s_elements == expect.s_elements);
        for (std::size_t i = 0; i < moved.U.size(); ++i)
          CHECK((moved.U[i] - expect.U[i]).norm() < 1e-12);
      }
  }
  SECTION("extraction from fiber crossed product irreps is covariant") {
    auto G = swap_groupoid();
    auto sys = random_crossed_system(rng, G, 2);
    for (int u : G.units()) {
      auto fiber = fiber_system(sys, u);
      auto model = crossed_product_model(fiber.sys);
      auto blocks = wedderburn(model.algebra, rng);
      auto rhos = irreps(model.algebra, blocks, rng);
      for (const auto& rho : rhos) {
        auto R = covariant_from_fiber_irrep(sys, u, fiber, model, rho);
        CHECK(validate_covariant(sys, R).ok());
      }
    }
  }
  SECTION("conjugating by isotropy elements preserves the trace vector") {
    auto G = parity_groupoid();
    auto sys = random_crossed_system(rng, G, 2);
    for (int u : G.units()) {
      auto fiber = fiber_system(sys, u);
      auto model = crossed_product_model(fiber.sys);
      auto blocks = wedderburn(model.algebra, rng);
      auto rhos = irreps(model.algebra, blocks, rng);
      for (const auto& rho : rhos) {
        auto R = covariant_from_fiber_irrep(sys, u, fiber, model, rho);
        auto tau = covariant_trace_vector(sys, fiber, model, R);
        for (int s : G.isotropy(u)) {
          auto moved = conjugate_fiber_rep(sys, s, R);
          CHECK(validate_covariant(sys, moved).ok());
          auto tau2 = covariant_trace_vector(sys, fiber, model, moved);
          CHECK((tau - tau2).norm() < 1e-8);
        }
      }
    }
  }
  SECTION("transport between units keeps covariance") {
    auto G = swap_groupoid();
    auto sys = random_crossed_system(rng, G, 2);
    int u = G.units()[0];
    auto fiber = fiber_system(sys, u);
    auto model = crossed_product_model(fiber.sys);
    auto blocks = wedderburn(model.algebra, rng);
    auto rhos = irreps(model.algebra, blocks, rng);
    for (int gamma = 0; gamma < G.n; ++gamma) {
      if (G.s(gamma) != u) continue;
      for (const auto& rho : rhos) {
        auto R = covariant_from_fiber_irrep(sys, u, fiber, model, rho);
        auto moved = conjugate_fiber_rep(sys, gamma, R);
        CHECK(moved.unit == G.r(gamma));
        CHECK(validate_covariant(sys, moved).ok());
      }
    }
  }
}

TEST_CASE("induced covariant representations") {
  Rng rng(29);
  SECTION("scalar fibers coincide with induce_character") {
    auto G = parity_groupoid();
    auto sys = trivial_system(G, 1);
    auto model = crossed_product_model(sys);
    auto dual = dual_bundle(G);
    for (const auto& omega : dual.all) {
      auto N1 = induce_character(G, omega);
      auto N2 = induce_covariant(sys, model, covariant_from_character(omega));
      REQUIRE(N1.dim == N2.dim);
      for (int g = 0; g < G.n; ++g) {
        // crossed basis (g,0,0) corresponds to delta_g
        CHECK((N1.images[g] - N2.images[model.basis_index(g, 0, 0)]).norm() < 1e-12);
      }
    }
  }
  SECTION("swap groupoid with M2 fibers: the 4-dim irrep of the 16-dim product") {
    auto G = swap_groupoid();
    auto sys = random_crossed_system(rng, G, 2);
    auto model = crossed_product_model(sys);
    REQUIRE(model.algebra.dim() == 16);
    int u = G.units()[0];
    auto fiber = fiber_system(sys, u);
    auto fmodel = crossed_product_model(fiber.sys);
    auto fblocks = wedderburn(fmodel.algebra, rng);
    auto rhos = irreps(fmodel.algebra, fblocks, rng);
    REQUIRE(rhos.size() == 1);  // trivial stabilizer: A(u) x| S_u = M2
    auto R = covariant_from_fiber_irrep(sys, u, fiber, fmodel, rhos[0]);
    auto N = induce_covariant(sys, model, R);
    CHECK(N.dim == 4);
    auto blocks = wedderburn(model.algebra, rng);
    REQUIRE(blocks.blocks.size() == 1);
    CHECK((N.trace_vector - blocks.blocks[0].trace_vector).norm() < 1e-7);
  }
  SECTION("for a group, inducing from S_u = G gives the representation back") {
    auto G = from_group(cyclic_table(4));
    Rng r2(31);
    auto sys = random_crossed_system(r2, G, 2);
    auto model = crossed_product_model(sys);
    auto fiber = fiber_system(sys, G.units()[0]);
    auto fmodel = crossed_product_model(fiber.sys);
    auto fblocks = wedderburn(fmodel.algebra, r2);
    auto rhos = irreps(fmodel.algebra, fblocks, r2);
    for (const auto& rho : rhos) {
      auto R = covariant_from_fiber_irrep(sys, G.units()[0], fiber, fmodel, rho);
      auto N = induce_covariant(sys, model, R);
      CHECK(N.dim == R.pi_dim);  // G_u/S_u is a point
      // the fiber model and the full model coincide for a group
      CHECK((N.trace_vector - covariant_trace_vector(sys, fiber, fmodel, R)).norm() < 1e-8);
    }
  }
}

TEST_CASE("scalar main theorem verifier") {
  Rng rng(37);
  SECTION("pair groupoids: one orbit, one block") {
    for (int n : {2, 3, 4}) {
      auto rep = verify_scalar_main_theorem(pair_groupoid(n), rng);
      INFO([&] { std::string s; for (auto& w : rep.witnesses) s += w + "\n"; return s; }());
      CHECK(rep.ok());
      CHECK(rep.dual_orbit_count == 1);
      CHECK(rep.block_count == 1);
    }
  }
  SECTION("a group bundle acting on nothing: orbits are the characters") {
    auto S = group_bundle({cyclic_table(2), cyclic_table(2)});
    auto rep = verify_scalar_main_theorem(S, rng);
    CHECK(rep.ok());
    CHECK(rep.dual_orbit_count == 4);
  }
  SECTION("parity groupoid: two orbits, blocks {2,2}") {
    auto rep = verify_scalar_main_theorem(parity_groupoid(), rng);
    CHECK(rep.ok());
    CHECK(rep.dual_orbit_count == 2);
    CHECK(rep.block_count == 2);
  }
  SECTION("random corpus instances pass all clauses") {
    int done = 0;
    for (int t = 0; t < 20 && done < 6; ++t) {
      auto G = random_groupoid(rng, 28);
      if (!structural_queries(G).has_abelian_isotropy) continue;
      auto rep = verify_scalar_main_theorem(G, rng);
      INFO([&] { std::string s; for (auto& w : rep.witnesses) s += w + "\n"; return s; }());
      CHECK(rep.ok());
      ++done;
    }
    CHECK(done >= 4);
  }
  SECTION("nonabelian isotropy is refused") {
    auto rep = verify_scalar_main_theorem(from_group(symmetric_table(3)), rng);
    CHECK_FALSE(rep.applicable);
  }
}

TEST_CASE("crossed main theorem verifier") {
  Rng rng(41);
  SECTION("scalar systems give the same verdict as the scalar verifier") {
    int done = 0;
    for (int t = 0; t < 15 && done < 4; ++t) {
      auto G = random_groupoid(rng, 20);
      if (!structural_queries(G).has_abelian_isotropy) continue;
      auto scalar = verify_scalar_main_theorem(G, rng);
      auto crossed = verify_crossed_main_theorem(trivial_system(G, 1), rng);
      CHECK(scalar.ok() == crossed.ok());
      CHECK(crossed.orbit_count == scalar.dual_orbit_count);
      ++done;
    }
    CHECK(done >= 2);
  }
  SECTION("swap groupoid with M2 fibers: one orbit, one block of dim 4") {
    auto sys = random_crossed_system(rng, swap_groupoid(), 2);
    auto rep = verify_crossed_main_theorem(sys, rng);
    INFO([&] { std::string s; for (auto& w : rep.witnesses) s += w + "\n"; return s; }());
    CHECK(rep.ok());
    CHECK(rep.orbit_count == 1);
    CHECK(rep.block_count == 1);
  }
  SECTION("group bundle with inner action: fibering re-derived") {
    auto S = group_bundle({cyclic_table(2), cyclic_table(3)});
    auto sys = random_crossed_system(rng, S, 2);
    auto rep = verify_crossed_main_theorem(sys, rng);
    CHECK(rep.ok());
    // group bundle: every orbit is a single fiber rep
    int total_fiber_irreps = 0;
    for (int u : S.units()) {
      auto fiber = fiber_system(sys, u);
      auto model = crossed_product_model(fiber.sys);
      auto blocks = wedderburn(model.algebra, rng);
      total_fiber_irreps += static_cast<int>(blocks.blocks.size());
    }
    CHECK(rep.orbit_count == total_fiber_irreps);
  }
  SECTION("random dynamical systems with abelian isotropy") {
    int done = 0;
    for (int t = 0; t < 15 && done < 5; ++t) {
      auto G = random_groupoid(rng, 18);
      if (!structural_queries(G).has_abelian_isotropy) continue;
      auto sys = random_crossed_system(rng, G, rng.uniform_int(1, 3));
      auto rep = verify_crossed_main_theorem(sys, rng);
      INFO([&] { std::string s; for (auto& w : rep.witnesses) s += w + "\n"; return s; }());
      CHECK(rep.ok());
      ++done;
    }
    CHECK(done >= 3);
  }
}

TEST_CASE("stone von neumann") {
  Rng rng(43);
  SECTION("Z2: one block of dimension 2") {
    auto rep = stone_von_neumann_check(from_group(cyclic_table(2)), rng);
    CHECK(rep.ok());
    CHECK(rep.block_count == 1);
  }
  SECTION("pair(2): two units, blocks of dimension 2 each") {
    auto rep = stone_von_neumann_check(pair_groupoid(2), rng);
    CHECK(rep.ok());
    CHECK(rep.block_count == 2);
  }
  SECTION("cotrivial(3): three one-dimensional blocks") {
    auto rep = stone_von_neumann_check(cotrivial_groupoid(3), rng);
    CHECK(rep.ok());
    CHECK(rep.block_count == 3);
  }
  SECTION("random groupoids") {
    for (int t = 0; t < 5; ++t) {
      auto G = random_groupoid(rng, 14);
      auto rep = stone_von_neumann_check(G, rng);
      INFO([&] { std::string s; for (auto& w : rep.witnesses) s += w + "\n"; return s; }());
      CHECK(rep.ok());
    }
  }
}

TEST_CASE("morita bimodule checks") {
  Rng rng(47);
  SECTION("G as a (G,G)-equivalence") {
    for (int t = 0; t < 4; ++t) {
      auto G = random_groupoid(rng, 16);
      auto E = self_equivalence(G);
      auto rep = morita_bimodule_check(E, rng);
      INFO([&] { std::string s; for (auto& w : rep.witnesses) s += w + "\n"; return s; }());
      CHECK(rep.ok());
      for (auto [dg, dh] : rep.matched_dims) CHECK(dg == dh);
    }
  }
  SECTION("transitive groupoid against its isotropy group") {
    int done = 0;
    for (int t = 0; t < 25 && done < 5; ++t) {
      auto G = random_groupoid(rng, 26);
      if (!structural_queries(G).is_transitive) continue;
      int u = G.units()[0];
      auto te = equivalence_from_transitive(G, u);
      auto rep = morita_bimodule_check(te.equiv, rng);
      INFO([&] { std::string s; for (auto& w : rep.witnesses) s += w + "\n"; return s; }());
      CHECK(rep.ok());
      int scale = static_cast<int>(G.units().size());  // |G_u / S_u|
      for (auto [dg, dh] : rep.matched_dims) CHECK(dg == dh * scale);
      ++done;
    }
    CHECK(done >= 3);
  }
  SECTION("pair groupoid against a point: M_n vs C") {
    for (int n : {2, 3}) {
      auto G = pair_groupoid(n);
      auto te = equivalence_from_transitive(G, 0);
      auto rep = morita_bimodule_check(te.equiv, rng);
      CHECK(rep.ok());
      REQUIRE(rep.matched_dims.size() == 1);
      CHECK(rep.matched_dims[0].first == n);
      CHECK(rep.matched_dims[0].second == 1);
    }
  }
  SECTION("broken equivalence names the failing axiom") {
    auto G = disjoint_union(pair_groupoid(2), from_group(cyclic_table(2)));
    // X = G_u for a unit of the first component is not a (G, S_u)-equivalence
    // because G is not transitive: the anchor cannot biject onto the units.
    auto te = equivalence_from_transitive(G, 0);
    auto rep = morita_bimodule_check(te.equiv, rng);
    CHECK_FALSE(rep.ok());
    CHECK_FALSE(rep.witnesses.empty());
  }
}
