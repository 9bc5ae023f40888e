#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gstar/matrix.hpp"

namespace gstar {

/// Sparse structure constants c_{jk}^l with b_j b_k = sum_l c_{jk}^l b_l,
/// stored CSR-style over the flattened pair index j*dim + k.
struct StructureConstants {
  int dim = 0;
  std::vector<std::uint64_t> offsets;            // dim*dim + 1
  std::vector<std::pair<int, Complex>> terms;

  using TermSpan = std::pair<const std::pair<int, Complex>*, const std::pair<int, Complex>*>;
  TermSpan product(int j, int k) const {
    std::uint64_t p = static_cast<std::uint64_t>(j) * dim + k;
    return {terms.data() + offsets[p], terms.data() + offsets[p + 1]};
  }
};

/// Builder that expects (j,k) pairs in j-major, k-minor order.
struct StructureConstantsBuilder {
  StructureConstants sc;
  std::uint64_t next_pair = 0;

  explicit StructureConstantsBuilder(int dim) {
    sc.dim = dim;
    sc.offsets.assign(static_cast<std::uint64_t>(dim) * dim + 1, 0);
  }
  void begin_pair(int j, int k) {
    std::uint64_t p = static_cast<std::uint64_t>(j) * sc.dim + k;
    while (next_pair <= p) sc.offsets[next_pair++] = sc.terms.size();
  }
  void add_term(int l, Complex c) { sc.terms.emplace_back(l, c); }
  StructureConstants finish() {
    while (next_pair <= static_cast<std::uint64_t>(sc.dim) * sc.dim) sc.offsets[next_pair++] = sc.terms.size();
    return std::move(sc);
  }
};

/// Adjoints of basis elements in basis coordinates: b_j^* = sum_l a_{jl} b_l.
using AdjointRows = std::vector<std::vector<std::pair<int, Complex>>>;

/// A *-closed, multiplicatively closed span of n x n complex matrices with a
/// distinguished basis.  This is the faithful model of every algebra built
/// by the workbench.  Big instances keep their basis sparse and carry the
/// per-unit block structure of the underlying model, which all algorithms
/// exploit.
class MatrixStarAlgebra {
 public:
  int ambient_dim = 0;
  std::vector<SparseMat> basis;
  std::vector<long long> labels;                      // stable ids for basis elements
  std::vector<std::pair<int, int>> block_layout;      // (offset, size); empty = one block
  StructureConstants sc;
  AdjointRows adjoint_rows;
  ComplexVector unit_coeffs;                          // algebra unit in basis coords

  int dim() const { return static_cast<int>(basis.size()); }

  std::vector<std::pair<int, int>> blocks() const {
    if (!block_layout.empty()) return block_layout;
    return {{0, ambient_dim}};
  }

  ComplexMatrix assemble(const ComplexVector& coeffs) const {
    ComplexMatrix m = ComplexMatrix::Zero(ambient_dim, ambient_dim);
    for (int j = 0; j < dim(); ++j) {
      if (coeffs[j] == Complex(0)) continue;
      for (const auto& t : basis[j].entries) m(t.row, t.col) += coeffs[j] * t.value;
    }
    return m;
  }

  ComplexVector multiply_coeffs(const ComplexVector& x, const ComplexVector& y) const {
    ComplexVector out = ComplexVector::Zero(dim());
    for (int j = 0; j < dim(); ++j) {
      if (x[j] == Complex(0)) continue;
      for (int k = 0; k < dim(); ++k) {
        if (y[k] == Complex(0)) continue;
        auto [it, end] = sc.product(j, k);
        for (; it != end; ++it) out[it->first] += x[j] * y[k] * it->second;
      }
    }
    return out;
  }

  ComplexVector adjoint_coeffs(const ComplexVector& x) const {
    ComplexVector out = ComplexVector::Zero(dim());
    for (int j = 0; j < dim(); ++j) {
      if (x[j] == Complex(0)) continue;
      for (const auto& [l, a] : adjoint_rows[j]) out[l] += std::conj(x[j]) * a;
    }
    return out;
  }

  /// Gram matrix of the basis in the Frobenius inner product, cached.
  const ComplexMatrix& gram() const {
    if (gram_.rows() == 0) {
      gram_ = ComplexMatrix::Zero(dim(), dim());
      // group sparse entries by position for an O(nnz^2 / positions) pass
      std::map<std::pair<int, int>, std::vector<std::pair<int, Complex>>> by_pos;
      for (int j = 0; j < dim(); ++j)
        for (const auto& t : basis[j].entries) by_pos[{t.row, t.col}].emplace_back(j, t.value);
      for (const auto& [pos, lst] : by_pos)
        for (const auto& [j, vj] : lst)
          for (const auto& [k, vk] : lst) gram_(j, k) += std::conj(vj) * vk;
    }
    return gram_;
  }

  /// Coordinates of the orthogonal projection of a dense matrix onto the
  /// span, plus the residual norm of the projection error.
  std::pair<ComplexVector, double> project(const ComplexMatrix& x) const {
    ComplexVector rhs(dim());
    for (int j = 0; j < dim(); ++j) rhs[j] = sparse_frobenius_inner(basis[j], x);
    if (!llt_computed_) {
      llt_.compute(gram());
      llt_computed_ = true;
    }
    ComplexVector c = llt_.solve(rhs);
    double residual = (assemble(c) - x).norm();
    return {c, residual};
  }

 private:
  mutable ComplexMatrix gram_;
  mutable Eigen::LDLT<ComplexMatrix> llt_;
  mutable bool llt_computed_ = false;
};

// ---------------------------------------------------------------------------
// span_closure: smallest *-closed multiplicatively closed span
// ---------------------------------------------------------------------------

inline MatrixStarAlgebra span_closure(const std::vector<ComplexMatrix>& generators,
                                      Tolerances tol = {}) {
  if (generators.empty()) throw std::invalid_argument("span_closure: no generators");
  int n = static_cast<int>(generators[0].rows());
  for (const auto& g : generators)
    if (g.rows() != n || g.cols() != n)
      throw std::invalid_argument("span_closure: generators must be square and of equal size");

  // Modified Gram-Schmidt over iterated products; deterministic in input order.
  std::vector<ComplexMatrix> ortho;
  auto try_add = [&](const ComplexMatrix& w0) {
    ComplexMatrix w = w0;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : ortho) w -= frobenius_inner(q, w) * q;
    double scale = std::max(1.0, w0.norm());
    if (w.norm() > std::max(tol.rank * scale, 1e-12 * scale)) {
      ortho.push_back(w / w.norm());
      return true;
    }
    return false;
  };
  for (const auto& g : generators) {
    try_add(g);
    try_add(g.adjoint());
  }
  bool grew = true;
  while (grew) {
    grew = false;
    std::size_t sz = ortho.size();
    for (std::size_t i = 0; i < sz && ortho.size() < static_cast<std::size_t>(n) * n; ++i) {
      if (try_add(ortho[i].adjoint())) grew = true;
      for (std::size_t j = 0; j < sz && ortho.size() < static_cast<std::size_t>(n) * n; ++j)
        if (try_add(ortho[i] * ortho[j])) grew = true;
    }
  }

  MatrixStarAlgebra A;
  A.ambient_dim = n;
  int dim = static_cast<int>(ortho.size());
  for (int j = 0; j < dim; ++j) {
    SparseMat s;
    s.rows = s.cols = n;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c)
        if (std::abs(ortho[j](r, c)) > 0) s.entries.push_back({r, c, ortho[j](r, c)});
    A.basis.push_back(std::move(s));
    A.labels.push_back(j);
  }

  // Numerical structure constants; the closure guarantees tiny residuals.
  StructureConstantsBuilder b(dim);
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) {
      b.begin_pair(j, k);
      ComplexMatrix p = ortho[j] * ortho[k];
      for (int l = 0; l < dim; ++l) {
        Complex c = frobenius_inner(ortho[l], p);
        if (std::abs(c) > 1e-12) {
          b.add_term(l, c);
          p -= c * ortho[l];
        }
      }
      if (p.norm() > tol.invariant)
        throw std::runtime_error("span_closure: product escapes span, closure failed");
    }
  A.sc = b.finish();

  A.adjoint_rows.resize(dim);
  for (int j = 0; j < dim; ++j) {
    ComplexMatrix adj = ortho[j].adjoint();
    for (int l = 0; l < dim; ++l) {
      Complex c = frobenius_inner(ortho[l], adj);
      if (std::abs(c) > 1e-12) {
        A.adjoint_rows[j].emplace_back(l, c);
        adj -= c * ortho[l];
      }
    }
    if (adj.norm() > tol.invariant)
      throw std::runtime_error("span_closure: adjoint escapes span");
  }

  // Unit of the span (possibly a proper projection in M_n): least squares on
  // e * b_k = b_k over all k, via normal equations sum_k M_k^H M_k e =
  // sum_k M_k^H delta_k with (M_k)_{lj} = c_{jk}^l.
  ComplexMatrix lhs = ComplexMatrix::Zero(dim, dim);
  ComplexVector rhs = ComplexVector::Zero(dim);
  for (int k = 0; k < dim; ++k) {
    std::vector<std::vector<std::pair<int, Complex>>> rows(dim);
    for (int j = 0; j < dim; ++j) {
      auto [it, end] = A.sc.product(j, k);
      for (; it != end; ++it) rows[it->first].emplace_back(j, it->second);
    }
    for (int l = 0; l < dim; ++l) {
      for (const auto& [j1, v1] : rows[l]) {
        for (const auto& [j2, v2] : rows[l]) lhs(j1, j2) += std::conj(v1) * v2;
        if (l == k) rhs[j1] += std::conj(v1);
      }
    }
  }
  ComplexVector e = lhs.ldlt().solve(rhs);
  // verify two-sided within tolerance
  ComplexMatrix e_mat = A.assemble(e);
  for (int k = 0; k < dim; ++k) {
    if ((e_mat * ortho[k] - ortho[k]).norm() > 1e-6 || (ortho[k] * e_mat - ortho[k]).norm() > 1e-6)
      throw std::runtime_error("span_closure: no algebra unit found in span");
  }
  A.unit_coeffs = e;
  return A;
}

// ---------------------------------------------------------------------------
// Center
// ---------------------------------------------------------------------------

/// Basis of the center in coefficient space: kernel of the stacked
/// commutation constraints, computed through the structure constants.
inline std::vector<ComplexVector> center(const MatrixStarAlgebra& A, Tolerances tol = {}) {
  int dim = A.dim();
  ComplexMatrix N = ComplexMatrix::Zero(dim, dim);
  std::vector<std::vector<std::pair<int, Complex>>> rows(dim);
  for (int k = 0; k < dim; ++k) {
    for (auto& r : rows) r.clear();
    for (int j = 0; j < dim; ++j) {
      auto [it, end] = A.sc.product(j, k);
      for (; it != end; ++it) rows[it->first].emplace_back(j, it->second);
      auto [it2, end2] = A.sc.product(k, j);
      for (; it2 != end2; ++it2) rows[it2->first].emplace_back(j, -it2->second);
    }
    for (int l = 0; l < dim; ++l)
      for (const auto& [j1, v1] : rows[l])
        for (const auto& [j2, v2] : rows[l]) N(j1, j2) += std::conj(v1) * v2;
  }
  N = ((N + N.adjoint()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(N);
  double scale = std::max(1.0, es.eigenvalues().maxCoeff());
  std::vector<ComplexVector> out;
  for (int i = 0; i < dim; ++i)
    if (es.eigenvalues()[i] <= tol.rank * scale) out.push_back(es.eigenvectors().col(i));
  return out;
}

// ---------------------------------------------------------------------------
// Wedderburn block decomposition
// ---------------------------------------------------------------------------

struct WedderburnBlock {
  int d = 0;                      // irrep dimension
  int m = 0;                      // multiplicity in the model
  ComplexMatrix isometry;         // ambient_dim x (d*m), orthonormal columns
  ComplexVector projection_coeffs;
  ComplexVector trace_vector;     // tr(rho_i(b_j)) over the basis
};

struct BlockDecomposition {
  int ambient_dim = 0;
  int algebra_dim = 0;
  std::vector<WedderburnBlock> blocks;
  ComplexMatrix change_of_basis;  // unitary; block isometries then kernel complement

  std::multiset<std::pair<int, int>> dm_multiset() const {
    std::multiset<std::pair<int, int>> out;
    for (const auto& b : blocks) out.insert({b.d, b.m});
    return out;
  }
  std::multiset<int> dims_multiset() const {
    std::multiset<int> out;
    for (const auto& b : blocks) out.insert(b.d);
    return out;
  }
};

namespace detail {

struct EigPiece {
  double value;
  int block;  // index into A.blocks()
  ComplexVector vector;  // within-block coordinates
};

/// Clusters sorted values with the given gap threshold.  Returns cluster
/// boundaries, or nullopt when some gap falls inside the ambiguity band.
inline std::optional<std::vector<int>> cluster_boundaries(const std::vector<double>& sorted_vals,
                                                          double gap, double ambiguity_factor = 50.0) {
  std::vector<int> cuts;
  for (std::size_t i = 1; i < sorted_vals.size(); ++i) {
    double g = sorted_vals[i] - sorted_vals[i - 1];
    if (g > gap) {
      if (g < gap * ambiguity_factor) return std::nullopt;  // too close to call
      cuts.push_back(static_cast<int>(i));
    } else if (g > gap / ambiguity_factor) {
      return std::nullopt;
    }
  }
  cuts.push_back(static_cast<int>(sorted_vals.size()));
  return cuts;
}

/// Generic self-adjoint element of the algebra (random complex coefficients,
/// then the self-adjoint part), assembled densely.
inline ComplexMatrix generic_self_adjoint(const MatrixStarAlgebra& A, Rng& rng) {
  ComplexVector c(A.dim());
  for (int j = 0; j < A.dim(); ++j) c[j] = rng.complex_unit_ball();
  ComplexMatrix z = A.assemble(c);
  return ((z + z.adjoint()) / 2.0).eval();
}

inline ComplexVector embed_block_vector(const ComplexVector& v, int offset, int n) {
  ComplexVector out = ComplexVector::Zero(n);
  out.segment(offset, v.size()) = v;
  return out;
}

}  // namespace detail

/// Wedderburn decomposition by spectral projections of a generic self-adjoint
/// central element.  Randomized with bounded retries; deterministic given the
/// RNG state.  Throws with a diagnostic when clustering stays ambiguous.
inline BlockDecomposition wedderburn(const MatrixStarAlgebra& A, Rng& rng, Tolerances tol = {},
                                     int max_retries = 5) {
  const int n = A.ambient_dim;
  const int dim = A.dim();
  auto center_basis = center(A, tol);
  if (center_basis.empty()) throw std::runtime_error("wedderburn: empty center (no unit in span?)");
  auto blocks = A.blocks();

  ComplexMatrix e_mat = A.assemble(A.unit_coeffs);
  int rank_e = static_cast<int>(std::lround(std::real(e_mat.trace())));

  std::string diagnostic;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    // Generic self-adjoint central element, shifted away from zero so the
    // ambient kernel (when the algebra unit is a proper projection) is the
    // unique cluster at zero.
    ComplexVector zc = ComplexVector::Zero(dim);
    for (const auto& c : center_basis) zc += Complex(rng.uniform(), rng.uniform()) * c;
    ComplexMatrix z = A.assemble(zc);
    ComplexMatrix z_sa = ((z + z.adjoint()) / 2.0).eval();
    double spread = std::max(1.0, z_sa.norm());
    z_sa += (3.0 * spread) * e_mat;

    std::vector<detail::EigPiece> pieces;
    for (int bi = 0; bi < static_cast<int>(blocks.size()); ++bi) {
      auto [off, sz] = blocks[bi];
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(z_sa.block(off, off, sz, sz));
      for (int i = 0; i < sz; ++i)
        pieces.push_back({es.eigenvalues()[i], bi, es.eigenvectors().col(i)});
    }
    std::sort(pieces.begin(), pieces.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
    std::vector<double> vals;
    for (const auto& p : pieces) vals.push_back(p.value);
    double scale = std::max(1.0, std::abs(vals.back() - vals.front()));
    auto cuts = detail::cluster_boundaries(vals, 1e-7 * scale);
    if (!cuts) { diagnostic = "central eigenvalue clustering ambiguous"; continue; }

    // Second generic element for multiplicity detection.
    ComplexMatrix h = detail::generic_self_adjoint(A, rng);

    BlockDecomposition out;
    out.ambient_dim = n;
    out.algebra_dim = dim;
    bool good = true;
    int start = 0;
    int used_rank = 0;
    std::vector<ComplexMatrix> isometries;
    for (int cut : *cuts) {
      // Assemble the isometry for this eigenvalue cluster.
      int r = cut - start;
      double lambda = (vals[start] + vals[cut - 1]) / 2.0;
      ComplexMatrix V(n, r);
      for (int i = 0; i < r; ++i) {
        auto [off, sz] = blocks[pieces[start + i].block];
        V.col(i) = detail::embed_block_vector(pieces[start + i].vector, off, n);
      }
      start = cut;
      if (std::abs(lambda) <= 1e-6 * scale && rank_e < n) continue;  // ambient kernel, not a block

      // d and m from the eigenvalue multiplicities of a generic compressed
      // self-adjoint algebra element; cross-checked below.
      ComplexMatrix h_c = V.adjoint() * h * V;
      h_c = ((h_c + h_c.adjoint()) / 2.0).eval();
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h_c);
      std::vector<double> hv(es.eigenvalues().data(), es.eigenvalues().data() + r);
      double hscale = std::max(1.0, std::abs(hv.back() - hv.front()));
      auto hcuts = detail::cluster_boundaries(hv, 1e-7 * hscale);
      if (!hcuts) { good = false; diagnostic = "block multiplicity clustering ambiguous"; break; }
      int m = (*hcuts)[0];
      for (std::size_t ci = 1; ci < hcuts->size(); ++ci)
        if ((*hcuts)[ci] - (*hcuts)[ci - 1] != m) { m = -1; break; }
      if (m <= 0 || r % m != 0) { good = false; diagnostic = "block multiplicities uneven"; break; }
      int d = r / m;

      WedderburnBlock blk;
      blk.d = d;
      blk.m = m;
      blk.isometry = std::move(V);
      out.blocks.push_back(std::move(blk));
      used_rank += r;
    }
    if (!good) continue;

    // Integer cross-checks: sum d_i^2 must equal the linear dimension and the
    // clusters must exactly exhaust the algebra unit's range.
    long long sum_d2 = 0;
    for (const auto& b : out.blocks) sum_d2 += static_cast<long long>(b.d) * b.d;
    if (used_rank != rank_e || sum_d2 != dim) {
      diagnostic = "block data inconsistent: sum d^2 = " + std::to_string(sum_d2) +
                   " vs dim " + std::to_string(dim);
      continue;
    }

    // Projections: verify p_i lies in the span and behaves like a central
    // projection.
    bool proj_ok = true;
    for (auto& b : out.blocks) {
      ComplexMatrix p = b.isometry * b.isometry.adjoint();
      auto [coeffs, resid] = A.project(p);
      if (resid > tol.invariant * std::max(1.0, p.norm())) { proj_ok = false; break; }
      b.projection_coeffs = coeffs;
      // trace vector of the block irrep: tr(p b_j) / m
      b.trace_vector = ComplexVector::Zero(dim);
      for (int j = 0; j < dim; ++j) {
        Complex t = 0;
        // tr(p b_j) = sum over entries v at (row,col) of v * (V V^H)(col,row)
        for (const auto& entry : A.basis[j].entries)
          t += entry.value * b.isometry.row(entry.row).dot(b.isometry.row(entry.col));
        b.trace_vector[j] = t / static_cast<double>(b.m);
      }
    }
    if (!proj_ok) { diagnostic = "spectral projection escapes the span"; continue; }

    // Canonical order: by irrep dimension, then by quantized trace vector.
    std::sort(out.blocks.begin(), out.blocks.end(), [](const WedderburnBlock& x, const WedderburnBlock& y) {
      if (x.d != y.d) return x.d < y.d;
      if (x.m != y.m) return x.m < y.m;
      for (int j = 0; j < x.trace_vector.size(); ++j) {
        auto qx = std::llround(std::real(x.trace_vector[j]) * 1e6);
        auto qy = std::llround(std::real(y.trace_vector[j]) * 1e6);
        if (qx != qy) return qx < qy;
        qx = std::llround(std::imag(x.trace_vector[j]) * 1e6);
        qy = std::llround(std::imag(y.trace_vector[j]) * 1e6);
        if (qx != qy) return qx < qy;
      }
      return false;
    });

    // Change-of-basis unitary: block isometries, then a complement of the
    // algebra's support when the unit is a proper projection.
    ComplexMatrix U(n, n);
    int col = 0;
    for (const auto& b : out.blocks) {
      U.block(0, col, n, b.isometry.cols()) = b.isometry;
      col += static_cast<int>(b.isometry.cols());
    }
    if (col < n) {
      // complete with an orthonormal basis of the orthogonal complement
      ComplexMatrix proj = ComplexMatrix::Identity(n, n) - U.leftCols(col) * U.leftCols(col).adjoint();
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(proj);
      int k = 0;
      for (int i = n - 1; i >= 0 && k < n - col; --i)
        if (es.eigenvalues()[i] > 0.5) U.col(col + k++) = es.eigenvectors().col(i);
    }
    out.change_of_basis = std::move(U);
    return out;
  }
  throw std::runtime_error("wedderburn: retries exhausted: " + diagnostic);
}

// ---------------------------------------------------------------------------
// Irreducible representations
// ---------------------------------------------------------------------------

struct MatrixRep {
  int dim = 0;
  std::vector<long long> labels;
  std::vector<ComplexMatrix> images;  // indexed like the algebra basis
  ComplexVector trace_vector;

  ComplexMatrix apply(const ComplexVector& coeffs) const {
    ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
    for (int j = 0; j < static_cast<int>(images.size()); ++j)
      if (coeffs[j] != Complex(0)) out += coeffs[j] * images[j];
    return out;
  }
};

/// Extracts one d_i-dimensional copy per block: compresses to the cyclic
/// subspace of an eigenvector of a generic compressed self-adjoint element,
/// which is invariant and carries the irrep exactly once.
inline std::vector<MatrixRep> irreps(const MatrixStarAlgebra& A, const BlockDecomposition& B,
                                     Rng& rng, Tolerances tol = {}) {
  std::vector<MatrixRep> out;
  for (const auto& blk : B.blocks) {
    const ComplexMatrix& V = blk.isometry;
    int r = static_cast<int>(V.cols());
    MatrixRep rep;
    rep.dim = blk.d;
    rep.labels = A.labels;
    bool done = false;
    for (int attempt = 0; attempt < 5 && !done; ++attempt) {
      ComplexMatrix h = detail::generic_self_adjoint(A, rng);
      ComplexMatrix h_c = V.adjoint() * h * V;
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(((h_c + h_c.adjoint()) / 2.0).eval());
      ComplexVector v = V * es.eigenvectors().col(0);  // ambient coordinates
      // cyclic subspace basis
      ComplexMatrix raw(r, A.dim());
      for (int j = 0; j < A.dim(); ++j) {
        ComplexVector bj_v = ComplexVector::Zero(A.ambient_dim);
        A.basis[j].apply_add(v, bj_v);
        raw.col(j) = V.adjoint() * bj_v;
      }
      Eigen::ColPivHouseholderQR<ComplexMatrix> qr(raw);
      qr.setThreshold(1e-9);
      if (qr.rank() != blk.d) continue;  // unlucky vector, retry
      ComplexMatrix Q = qr.householderQ() * ComplexMatrix::Identity(r, blk.d);
      ComplexMatrix W = V * Q;  // ambient isometry onto the irreducible copy
      rep.images.assign(A.dim(), ComplexMatrix());
      rep.trace_vector = ComplexVector::Zero(A.dim());
      for (int j = 0; j < A.dim(); ++j) {
        ComplexMatrix bw(A.ambient_dim, blk.d);
        bw.setZero();
        for (const auto& t : A.basis[j].entries) bw.row(t.row) += t.value * W.row(t.col);
        rep.images[j] = W.adjoint() * bw;
        rep.trace_vector[j] = rep.images[j].trace();
      }
      // sanity: the compression must reproduce the block trace vector
      if ((rep.trace_vector - blk.trace_vector).norm() >
          tol.invariant * std::max<double>(1.0, blk.trace_vector.norm()) * 10)
        continue;
      done = true;
    }
    if (!done) throw std::runtime_error("irreps: failed to cut out an irreducible copy");
    out.push_back(std::move(rep));
  }
  return out;
}

/// Trace-vector equivalence, sound and complete for finite-dimensional
/// semisimple *-algebras.
inline bool are_equivalent(const MatrixRep& a, const MatrixRep& b, Tolerances tol = {}) {
  if (a.labels != b.labels) throw std::invalid_argument("are_equivalent: label sets differ");
  if (a.trace_vector.size() != b.trace_vector.size()) return false;
  return (a.trace_vector - b.trace_vector).lpNorm<Eigen::Infinity>() <= tol.invariant;
}

/// Commutant of the image has linear dimension 1.
inline bool is_irreducible(const MatrixRep& rep, Tolerances tol = {}) {
  int d = rep.dim;
  ComplexMatrix N = ComplexMatrix::Zero(d * d, d * d);
  ComplexMatrix I = ComplexMatrix::Identity(d, d);
  for (const auto& img : rep.images) {
    if (img.rows() == 0) continue;
    ComplexMatrix K = kron(img.transpose(), I) - kron(I, img);
    N += K.adjoint() * K;
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(((N + N.adjoint()) / 2.0).eval(), Eigen::EigenvaluesOnly);
  double scale = std::max(1.0, es.eigenvalues().maxCoeff());
  int null_dim = 0;
  for (int i = 0; i < d * d; ++i)
    if (es.eigenvalues()[i] <= tol.rank * scale * 10) ++null_dim;
  return null_dim == 1;
}

}  // namespace gstar
