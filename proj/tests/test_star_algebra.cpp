#include <catch2/catch_amalgamated.hpp>

#include "gstar/groupoid_build.hpp"
#include "gstar/star_algebra.hpp"

using namespace gstar;

namespace {

// Independent fixpoint oracle: dimension of the smallest *-closed,
// multiplicatively closed span, via rank of stacked vectorized matrices.
int span_dim_oracle(std::vector<ComplexMatrix> gens) {
  int n = static_cast<int>(gens[0].rows());
  auto rank_of = [&](const std::vector<ComplexMatrix>& mats) {
    ComplexMatrix stack(static_cast<int>(mats.size()), n * n);
    for (int i = 0; i < static_cast<int>(mats.size()); ++i)
      stack.row(i) = Eigen::Map<const ComplexVector>(mats[i].data(), n * n).transpose();
    Eigen::ColPivHouseholderQR<ComplexMatrix> qr(stack);
    qr.setThreshold(1e-9);
    return static_cast<int>(qr.rank());
  };
  std::vector<ComplexMatrix> cur = gens;
  int r = rank_of(cur);
  for (;;) {
    std::vector<ComplexMatrix> next = cur;
    for (const auto& a : cur) next.push_back(a.adjoint());
    for (const auto& a : cur)
      for (const auto& b : cur) next.push_back(a * b);
    int r2 = rank_of(next);
    if (r2 == r) return r;
    r = r2;
    cur = std::move(next);
    if (cur.size() > 4000) FAIL("span oracle blew up");
  }
}

// Labeled model of a group C*-algebra: the left regular permutation
// matrices with exact structure constants.  Built by hand so this suite
// exercises the algebra engine without the groupoid-algebra module.
MatrixStarAlgebra group_model(const GroupTable& t) {
  int m = static_cast<int>(t.size());
  int e = table_identity(t);
  MatrixStarAlgebra A;
  A.ambient_dim = m;
  for (int g = 0; g < m; ++g) {
    SparseMat s;
    s.rows = s.cols = m;
    for (int h = 0; h < m; ++h) s.entries.push_back({t[g][h], h, Complex(1, 0)});
    A.basis.push_back(std::move(s));
    A.labels.push_back(g);
  }
  StructureConstantsBuilder b(m);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) {
      b.begin_pair(j, k);
      b.add_term(t[j][k], Complex(1, 0));
    }
  A.sc = b.finish();
  A.adjoint_rows.resize(m);
  std::vector<int> inv(m);
  for (int g = 0; g < m; ++g)
    for (int h = 0; h < m; ++h)
      if (t[g][h] == e && t[h][g] == e) inv[g] = h;
  for (int g = 0; g < m; ++g) A.adjoint_rows[g] = {{inv[g], Complex(1, 0)}};
  A.unit_coeffs = ComplexVector::Zero(m);
  A.unit_coeffs[e] = 1.0;
  return A;
}

int conjugacy_class_count(const GroupTable& t) {
  int m = static_cast<int>(t.size());
  std::vector<int> inv(m);
  int e = table_identity(t);
  for (int g = 0; g < m; ++g)
    for (int h = 0; h < m; ++h)
      if (t[g][h] == e && t[h][g] == e) inv[g] = h;
  std::set<std::set<int>> classes;
  for (int g = 0; g < m; ++g) {
    std::set<int> cls;
    for (int h = 0; h < m; ++h) cls.insert(t[t[h][g]][inv[h]]);
    classes.insert(cls);
  }
  return static_cast<int>(classes.size());
}

}  // namespace

TEST_CASE("span_closure dimensions against the fixpoint oracle") {
  SECTION("identity alone") {
    auto A = span_closure({ComplexMatrix::Identity(2, 2)});
    CHECK(A.dim() == 1);
  }
  SECTION("single matrix unit generates full M2") {
    ComplexMatrix e12 = matrix_unit(2, 0, 1);
    CHECK(span_dim_oracle({e12}) == 4);
    auto A = span_closure({e12});
    CHECK(A.dim() == 4);
    CHECK(A.ambient_dim == 2);
    // unit of the span is the ambient identity here
    CHECK((A.assemble(A.unit_coeffs) - ComplexMatrix::Identity(2, 2)).norm() < 1e-8);
  }
  SECTION("corner projection spans a one-dimensional corner algebra") {
    auto A = span_closure({matrix_unit(2, 0, 0)});
    CHECK(A.dim() == 1);
    CHECK((A.assemble(A.unit_coeffs) - matrix_unit(2, 0, 0)).norm() < 1e-8);
  }
  SECTION("pair-groupoid style matrix units: all E_xy of M3") {
    std::vector<ComplexMatrix> gens;
    for (int x = 0; x < 3; ++x)
      for (int y = 0; y < 3; ++y) gens.push_back(matrix_unit(3, x, y));
    CHECK(span_dim_oracle(gens) == 9);
    auto A = span_closure(gens);
    CHECK(A.dim() == 9);
  }
  SECTION("random generators agree with the oracle") {
    Rng rng(5);
    for (int t = 0; t < 6; ++t) {
      int n = rng.uniform_int(2, 4);
      std::vector<ComplexMatrix> gens = {rng.matrix(n, n)};
      if (t % 2) gens.push_back(rng.matrix(n, n));
      auto A = span_closure(gens);
      CHECK(A.dim() == span_dim_oracle(gens));
    }
  }
  SECTION("mismatched sizes rejected") {
    CHECK_THROWS_AS(span_closure({ComplexMatrix::Identity(2, 2), ComplexMatrix::Identity(3, 3)}),
                    std::invalid_argument);
  }
}

TEST_CASE("center dimensions") {
  SECTION("full M3 has a one-dimensional center") {
    auto A = span_closure({matrix_unit(3, 0, 1), matrix_unit(3, 1, 2)});
    REQUIRE(A.dim() == 9);
    CHECK(center(A).size() == 1);
  }
  SECTION("diagonal algebra is its own center") {
    auto A = span_closure({matrix_unit(3, 0, 0), matrix_unit(3, 1, 1), matrix_unit(3, 2, 2)});
    REQUIRE(A.dim() == 3);
    CHECK(center(A).size() == 3);
  }
  SECTION("group algebra center counts conjugacy classes") {
    for (auto table : {symmetric_table(3), dihedral_table(4), cyclic_table(6)}) {
      auto A = group_model(table);
      CHECK(static_cast<int>(center(A).size()) == conjugacy_class_count(table));
    }
  }
}

TEST_CASE("wedderburn block data") {
  Rng rng(42);
  SECTION("full M2") {
    auto A = span_closure({matrix_unit(2, 0, 1)});
    auto B = wedderburn(A, rng);
    REQUIRE(B.blocks.size() == 1);
    CHECK(B.blocks[0].d == 2);
    CHECK(B.blocks[0].m == 1);
  }
  SECTION("diagonal dim-3 algebra in M3") {
    auto A = span_closure({matrix_unit(3, 0, 0), matrix_unit(3, 1, 1), matrix_unit(3, 2, 2)});
    auto B = wedderburn(A, rng);
    REQUIRE(B.blocks.size() == 3);
    for (const auto& b : B.blocks) {
      CHECK(b.d == 1);
      CHECK(b.m == 1);
    }
  }
  SECTION("regular model of S3: dims 1,1,2 as in the character table") {
    auto A = group_model(symmetric_table(3));
    auto B = wedderburn(A, rng);
    auto dims = B.dims_multiset();
    CHECK(dims == std::multiset<int>{1, 1, 2});
    // multiplicity in the regular representation equals the dimension
    for (const auto& b : B.blocks) CHECK(b.m == b.d);
    long long sum = 0;
    for (const auto& b : B.blocks) sum += static_cast<long long>(b.d) * b.d;
    CHECK(sum == A.dim());
  }
  SECTION("central projection identities at tolerance") {
    auto A = group_model(dihedral_table(4));
    auto B = wedderburn(A, rng);
    ComplexMatrix unit = A.assemble(A.unit_coeffs);
    ComplexMatrix sum = ComplexMatrix::Zero(A.ambient_dim, A.ambient_dim);
    for (std::size_t i = 0; i < B.blocks.size(); ++i) {
      ComplexMatrix p = A.assemble(B.blocks[i].projection_coeffs);
      CHECK((p * p - p).norm() < 1e-8);
      CHECK((p - p.adjoint()).norm() < 1e-8);
      for (std::size_t j = 0; j < i; ++j) {
        ComplexMatrix q = A.assemble(B.blocks[j].projection_coeffs);
        CHECK((p * q).norm() < 1e-8);
      }
      sum += p;
    }
    CHECK((sum - unit).norm() < 1e-8);
  }
  SECTION("wedderburn is invariant under a fixed unitary conjugation") {
    auto A = group_model(symmetric_table(3));
    Rng r2(7);
    ComplexMatrix U = r2.unitary(A.ambient_dim);
    MatrixStarAlgebra Ac = A;
    for (auto& b : Ac.basis) {
      ComplexMatrix dense = U * b.dense() * U.adjoint();
      b.entries.clear();
      for (int i = 0; i < dense.rows(); ++i)
        for (int j = 0; j < dense.cols(); ++j)
          if (std::abs(dense(i, j)) > 1e-14) b.entries.push_back({i, j, dense(i, j)});
    }
    Ac.block_layout.clear();  // conjugation destroys the block structure
    auto B1 = wedderburn(A, rng);
    auto B2 = wedderburn(Ac, rng);
    CHECK(B1.dm_multiset() == B2.dm_multiset());
  }
}

TEST_CASE("irreps extraction") {
  Rng rng(99);
  SECTION("full M2 gives the identity representation") {
    auto A = span_closure({matrix_unit(2, 0, 1)});
    auto B = wedderburn(A, rng);
    auto reps = irreps(A, B, rng);
    REQUIRE(reps.size() == 1);
    CHECK(reps[0].dim == 2);
    CHECK(is_irreducible(reps[0]));
  }
  SECTION("commutative dim-3 algebra gives three characters") {
    auto A = span_closure({matrix_unit(3, 0, 0), matrix_unit(3, 1, 1), matrix_unit(3, 2, 2)});
    auto B = wedderburn(A, rng);
    auto reps = irreps(A, B, rng);
    REQUIRE(reps.size() == 3);
    for (const auto& r : reps) {
      CHECK(r.dim == 1);
      CHECK(is_irreducible(r));
    }
  }
  SECTION("C*(Z4): trace vectors are the DFT rows") {
    auto A = group_model(cyclic_table(4));
    auto B = wedderburn(A, rng);
    REQUIRE(B.blocks.size() == 4);
    auto reps = irreps(A, B, rng);
    // DFT oracle: characters chi_k(j) = i^{kj}
    std::vector<ComplexVector> dft;
    for (int k = 0; k < 4; ++k) {
      ComplexVector row(4);
      for (int j = 0; j < 4; ++j) row[j] = std::polar(1.0, 2 * M_PI * k * j / 4.0);
      dft.push_back(row);
    }
    for (const auto& r : reps) {
      bool matched = false;
      for (const auto& row : dft) matched = matched || (r.trace_vector - row).norm() < 1e-8;
      CHECK(matched);
    }
    // and all four characters are distinct
    for (std::size_t i = 0; i < reps.size(); ++i)
      for (std::size_t j = 0; j < i; ++j) CHECK_FALSE(are_equivalent(reps[i], reps[j]));
  }
  SECTION("irrep images form a *-representation") {
    auto A = group_model(symmetric_table(3));
    auto B = wedderburn(A, rng);
    auto reps = irreps(A, B, rng);
    for (const auto& rep : reps) {
      for (int j = 0; j < A.dim(); ++j)
        for (int k = 0; k < A.dim(); ++k) {
          ComplexMatrix lhs = rep.images[j] * rep.images[k];
          ComplexMatrix rhs = ComplexMatrix::Zero(rep.dim, rep.dim);
          auto [it, end] = A.sc.product(j, k);
          for (; it != end; ++it) rhs += it->second * rep.images[it->first];
          CHECK((lhs - rhs).norm() < 1e-8);
        }
      for (int j = 0; j < A.dim(); ++j) {
        ComplexMatrix adj = ComplexMatrix::Zero(rep.dim, rep.dim);
        for (const auto& [l, a] : A.adjoint_rows[j]) adj += a * rep.images[l];
        CHECK((rep.images[j].adjoint() - adj).norm() < 1e-8);
      }
    }
  }
}

TEST_CASE("are_equivalent") {
  Rng rng(3);
  auto A = group_model(cyclic_table(4));
  auto B = wedderburn(A, rng);
  auto reps = irreps(A, B, rng);
  SECTION("unitary conjugate of a rep is equivalent") {
    auto As = group_model(symmetric_table(3));
    auto Bs = wedderburn(As, rng);
    auto rs = irreps(As, Bs, rng);
    for (auto& r : rs) {
      ComplexMatrix U = rng.unitary(r.dim);
      MatrixRep c = r;
      for (auto& img : c.images) img = U * img * U.adjoint();
      c.trace_vector = ComplexVector::Zero(As.dim());
      for (int j = 0; j < As.dim(); ++j) c.trace_vector[j] = c.images[j].trace();
      CHECK(are_equivalent(r, c));
    }
  }
  SECTION("distinct characters are not equivalent") {
    REQUIRE(reps.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < i; ++j) CHECK_FALSE(are_equivalent(reps[i], reps[j]));
  }
  SECTION("equivalence is reflexive and symmetric on sampled reps") {
    for (const auto& r : reps) CHECK(are_equivalent(r, r));
    for (const auto& a : reps)
      for (const auto& b : reps) CHECK(are_equivalent(a, b) == are_equivalent(b, a));
  }
}

TEST_CASE("is_irreducible") {
  Rng rng(8);
  SECTION("one-dimensional rep") {
    MatrixRep r;
    r.dim = 1;
    r.labels = {0};
    r.images = {ComplexMatrix::Identity(1, 1)};
    r.trace_vector = ComplexVector::Ones(1);
    CHECK(is_irreducible(r));
  }
  SECTION("direct sum of two distinct characters is reducible") {
    auto A = group_model(cyclic_table(4));
    auto B = wedderburn(A, rng);
    auto reps = irreps(A, B, rng);
    MatrixRep sum;
    sum.dim = 2;
    sum.labels = A.labels;
    for (int j = 0; j < A.dim(); ++j) {
      ComplexMatrix m = ComplexMatrix::Zero(2, 2);
      m(0, 0) = reps[0].images[j](0, 0);
      m(1, 1) = reps[1].images[j](0, 0);
      sum.images.push_back(m);
    }
    CHECK_FALSE(is_irreducible(sum));
  }
}

TEST_CASE("positivity_check") {
  CHECK(positivity_check(ComplexMatrix::Identity(2, 2)));
  CHECK_FALSE(positivity_check(-ComplexMatrix::Identity(2, 2)));
  Rng rng(12);
  for (int t = 0; t < 5; ++t) {
    ComplexMatrix a = rng.matrix(4, 4);
    CHECK(positivity_check((a.adjoint() * a).eval()));
  }
  // non-self-adjoint input fails
  ComplexMatrix n = matrix_unit(2, 0, 1);
  CHECK_FALSE(positivity_check(n));
}
