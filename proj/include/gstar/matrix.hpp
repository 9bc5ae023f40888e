#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <vector>

namespace gstar {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Numerical tolerances used throughout the algebra engine.  The paper-side
/// mathematics is exact; these are pure engineering knobs.
struct Tolerances {
  double rank = 1e-9;       // rank decisions / eigenvalue clustering
  double invariant = 1e-8;  // residuals of structural assertions
};

/// Explicit RNG state.  Never shared implicitly; every randomized routine
/// takes one of these so runs are reproducible from a seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }
  Complex complex_unit_ball() { return {uniform(), uniform()}; }

  ComplexMatrix matrix(int rows, int cols) {
    ComplexMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = complex_unit_ball();
    return m;
  }

  /// Haar-ish random unitary via QR of a Gaussian matrix.
  ComplexMatrix unitary(int n) {
    std::normal_distribution<double> g;
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = Complex(g(engine_), g(engine_));
    Eigen::HouseholderQR<ComplexMatrix> qr(m);
    ComplexMatrix q = qr.householderQ();
    ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
      Complex d = r(j, j);
      double a = std::abs(d);
      if (a > 0) q.col(j) *= d / a;
    }
    return q;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline Complex frobenius_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.adjoint() * b).trace();
}

inline double frobenius_norm(const ComplexMatrix& a) { return a.norm(); }

inline bool is_self_adjoint(const ComplexMatrix& x, double tol) {
  return x.rows() == x.cols() && (x - x.adjoint()).norm() <= tol * std::max(1.0, x.norm());
}

/// Self-adjoint within tolerance and spectrum bounded below by -tol.
inline bool positivity_check(const ComplexMatrix& x, double tol = 1e-8) {
  if (x.rows() != x.cols()) return false;
  if (!is_self_adjoint(x, tol)) return false;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(((x + x.adjoint()) / 2.0).eval(),
                                                  Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol * std::max(1.0, x.norm());
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline ComplexMatrix matrix_unit(int n, int row, int col) {
  ComplexMatrix m = ComplexMatrix::Zero(n, n);
  m(row, col) = 1.0;
  return m;
}

/// Largest singular value, used for operator norms of model matrices.
inline double operator_norm(const ComplexMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es((a.adjoint() * a).eval(), Eigen::EigenvaluesOnly);
  double top = es.eigenvalues().maxCoeff();
  return top > 0 ? std::sqrt(top) : 0.0;
}

/// One sparse entry of a basis matrix.
struct Triplet {
  int row, col;
  Complex value;
};

/// Lightweight sparse matrix: unordered triplets over a fixed shape.
struct SparseMat {
  int rows = 0, cols = 0;
  std::vector<Triplet> entries;

  ComplexMatrix dense() const {
    ComplexMatrix m = ComplexMatrix::Zero(rows, cols);
    for (const auto& t : entries) m(t.row, t.col) += t.value;
    return m;
  }

  // y += coeff * (this * x)
  void apply_add(const ComplexVector& x, ComplexVector& y, Complex coeff = 1.0) const {
    for (const auto& t : entries) y[t.row] += coeff * t.value * x[t.col];
  }

  double norm() const {
    double s = 0;
    for (const auto& t : entries) s += std::norm(t.value);
    return std::sqrt(s);
  }
};

inline Complex sparse_frobenius_inner(const SparseMat& a, const ComplexMatrix& b) {
  Complex s = 0;
  for (const auto& t : a.entries) s += std::conj(t.value) * b(t.row, t.col);
  return s;
}

}  // namespace gstar
