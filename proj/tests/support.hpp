#pragma once

// Shared fixtures and independent reference implementations for the tests.

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Eigenvalues>

#include "phif/factorization.hpp"
#include "phif/grid.hpp"
#include "phif/hierarchy.hpp"
#include "phif/sparse.hpp"

namespace phif::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal;
  Matrix M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = normal(rng);
  return M;
}

inline Matrix random_spd(std::mt19937_64& rng, Index n, double shift = 1.0) {
  const Matrix B = random_matrix(rng, n, n);
  return B * B.transpose() / n + shift * Matrix::Identity(n, n);
}

/// Exact-rank matrix with the given singular values and random orthogonal
/// factors.
inline Matrix with_singular_values(std::mt19937_64& rng, Index rows, Index cols, const Vector& sigma) {
  Eigen::HouseholderQR<Matrix> qu(random_matrix(rng, rows, rows));
  Eigen::HouseholderQR<Matrix> qv(random_matrix(rng, cols, cols));
  const Matrix U = qu.householderQ();
  const Matrix V = qv.householderQ();
  const Index k = static_cast<Index>(sigma.size());
  return U.leftCols(k) * sigma.asDiagonal() * V.leftCols(k).transpose();
}

inline Matrix A3() {
  Matrix A(3, 3);
  A << 4, 2, 0, 2, 3, 1, 0, 1, 2;
  return A;
}

struct GridProblem {
  GridSpec spec;
  CoefficientField field;
  SymSparseMatrix A;
};

inline GridProblem grid_problem(int dim, int n, int m, std::uint64_t seed, double contrast = 1e4) {
  GridSpec spec = GridSpec::make(dim, n, m);
  FieldOptions fo;
  fo.seed = seed;
  fo.contrast = contrast;
  CoefficientField field = generate_field(spec, fo);
  SymSparseMatrix A = assemble_operator(field);
  return {spec, std::move(field), std::move(A)};
}

inline Vector random_vector(std::mt19937_64& rng, Index n) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

// Dense implementation of the textbook formulas with explicit N x N
// operator matrices: M^T A M for elimination, Z^T A Z followed by
// elimination of the redundant set for skeletonization. The complement of
// the group plays the role of the boundary set.

inline std::vector<Index> complement(Index N, const std::vector<Index>& I) {
  std::set<Index> in(I.begin(), I.end());
  std::vector<Index> out;
  for (Index i = 0; i < N; ++i)
    if (!in.count(i)) out.push_back(i);
  return out;
}

inline Matrix dense_eliminate(const Matrix& A, const std::vector<Index>& I) {
  const Index N = static_cast<Index>(A.rows());
  const std::vector<Index> B = complement(N, I);
  const Matrix AII = A(I, I);
  const Matrix ABI = A(B, I);
  Eigen::LLT<Matrix> llt(AII);
  const Matrix Linv_t = Matrix(llt.matrixL()).inverse().transpose();
  Matrix M = Matrix::Identity(N, N);
  M(I, I) = Linv_t;
  M(I, B) = -llt.solve(Matrix(ABI.transpose()));
  return M.transpose() * A * M;
}

inline Matrix dense_zeroing(const Matrix& A, const std::vector<Index>& redundant, const std::vector<Index>& skeleton,
                            const Matrix& T) {
  const Index N = static_cast<Index>(A.rows());
  Matrix Z = Matrix::Identity(N, N);
  Z(skeleton, redundant) = -T;
  return Z.transpose() * A * Z;
}

/// Zeroing, then the residual coupling between the redundant set and
/// everything outside the group is dropped and the redundant set is
/// eliminated against the skeleton alone.
inline Matrix dense_skeletonize(const Matrix& A, const std::vector<Index>& redundant,
                                const std::vector<Index>& skeleton, const Matrix& T) {
  Matrix Z = dense_zeroing(A, redundant, skeleton, T);
  std::vector<Index> group = redundant;
  group.insert(group.end(), skeleton.begin(), skeleton.end());
  const std::vector<Index> far = complement(static_cast<Index>(A.rows()), group);
  Z(far, redundant).setZero();
  Z(redundant, far).setZero();
  return dense_eliminate(Z, redundant);
}

inline double max_abs(const Matrix& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace phif::testing
