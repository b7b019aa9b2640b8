#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include <Eigen/SVD>

#include "phif/dense.hpp"
#include "support.hpp"

using namespace phif;

TEST_CASE("cholesky examples") {
  Matrix S(1, 1);
  S << 4;
  CHECK(cholesky(S).factor(0, 0) == 2.0);

  Matrix S2(2, 2);
  S2 << 4, 2, 2, 3;
  const Matrix L = cholesky(S2).factor;
  CHECK(L(0, 0) == doctest::Approx(2));
  CHECK(L(0, 1) == 0.0);
  CHECK(L(1, 0) == doctest::Approx(1));
  CHECK(L(1, 1) == doctest::Approx(std::sqrt(2.0)));

  Matrix bad(2, 2);
  bad << 1, 2, 2, 1;
  try {
    cholesky(bad);
    FAIL("expected NotSpdError");
  } catch (const NotSpdError& e) {
    CHECK(e.pivot == 1);
    CHECK(std::string(e.what()).find("pivot 2") != std::string::npos);
  }
  CHECK(cholesky(Matrix(0, 0)).order() == 0);
}

TEST_CASE("cholesky reproduces well-conditioned matrices") {
  std::mt19937_64 rng(1);
  for (Index n : {1, 2, 5, 40, 97, 200, 300}) {
    const Matrix S = testing::random_spd(rng, n, 0.1);
    const Matrix L = cholesky(S).factor;
    CHECK((L * L.transpose() - S).norm() <= 1e-12 * S.norm());
    CHECK(L.isLowerTriangular());
    CHECK(L.diagonal().minCoeff() > 0);
  }
}

TEST_CASE("cholesky flags exactly the indefinite inputs") {
  // Spectrum fixed by construction: positive ones factor, anything with a
  // non-positive eigenvalue must fail.
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> size(1, 60);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int trial = 0; trial < 300; ++trial) {
    const Index n = size(rng);
    Eigen::HouseholderQR<Matrix> qr(testing::random_matrix(rng, n, n));
    const Matrix Q = qr.householderQ();
    Vector lambda(n);
    for (Index i = 0; i < n; ++i) lambda[i] = u(rng);
    const bool indefinite = trial % 2 == 1;
    if (indefinite) lambda[std::uniform_int_distribution<Index>(0, n - 1)(rng)] = -u(rng);
    Matrix S = Q * lambda.asDiagonal() * Q.transpose();
    S = 0.5 * (S + S.transpose()).eval();
    bool threw = false;
    try {
      cholesky(S);
    } catch (const NotSpdError&) {
      threw = true;
    }
    CHECK(threw == indefinite);
  }
  Matrix nan = Matrix::Identity(3, 3);
  nan(1, 1) = std::nan("");
  CHECK_THROWS_AS(cholesky(nan), NotSpdError);
  Matrix singular = Matrix::Zero(2, 2);
  singular(0, 0) = 1;
  CHECK_THROWS_AS(cholesky(singular), NotSpdError);
}

TEST_CASE("triangular solves") {
  LowerTriangular I{Matrix::Identity(3, 3)};
  std::mt19937_64 rng(3);
  const Matrix B = testing::random_matrix(rng, 3, 4);
  CHECK(tri_solve(I, B) == B);

  LowerTriangular L{Matrix(2, 2)};
  L.factor << 2, 0, 1, 1;
  Matrix b(2, 1);
  b << 2, 3;
  const Matrix x = tri_solve(L, b);
  CHECK(x(0, 0) == doctest::Approx(1));
  CHECK(x(1, 0) == doctest::Approx(2));

  for (Index n : {1, 7, 50}) {
    LowerTriangular F = cholesky(testing::random_spd(rng, n));
    const Matrix R = testing::random_matrix(rng, n, 5);
    const Matrix Rt = R.transpose();
    CHECK((F.factor * tri_solve(F, R, Side::Left, Trans::No) - R).norm() <= 1e-12 * R.norm());
    CHECK((F.factor.transpose() * tri_solve(F, R, Side::Left, Trans::Yes) - R).norm() <= 1e-12 * R.norm());
    CHECK((tri_solve(F, Rt, Side::Right, Trans::No) * F.factor - Rt).norm() <= 1e-12 * R.norm());
    CHECK((tri_solve(F, Rt, Side::Right, Trans::Yes) * F.factor.transpose() - Rt).norm() <= 1e-12 * R.norm());
  }
  LowerTriangular Z{Matrix::Identity(2, 2)};
  Z.factor(1, 1) = 0;
  CHECK_THROWS_AS(tri_solve(Z, b), NotSpdError);
}

TEST_CASE("interpolative decomposition examples") {
  Matrix M(2, 2);
  M << 1, 2, 2, 4;
  const IdResult r = interpolative_decomposition(M, 1e-6);
  REQUIRE(r.skeleton == std::vector<Index>{1});
  REQUIRE(r.redundant == std::vector<Index>{0});
  CHECK(r.T(0, 0) == doctest::Approx(0.5));

  const Matrix Q = Eigen::HouseholderQR<Matrix>(Matrix::Random(6, 6)).householderQ();
  const IdResult full = interpolative_decomposition(Q.leftCols(4), 1e-6);
  CHECK(full.redundant.empty());
  CHECK(full.skeleton.size() == 4);

  std::mt19937_64 rng(4);
  Vector sv(2);
  sv << 3, 1;
  const Matrix R2 = testing::with_singular_values(rng, 8, 4, sv);
  const IdResult low = interpolative_decomposition(R2, 1e-8);
  CHECK(low.skeleton.size() == 2);
  const Matrix resid = R2(Eigen::all, low.redundant) - R2(Eigen::all, low.skeleton) * low.T;
  CHECK(resid.norm() <= 1e-6 * R2.norm());

  const IdResult empty = interpolative_decomposition(Matrix(0, 3), 1e-6);
  CHECK(empty.skeleton.empty());
  CHECK(empty.redundant.size() == 3);
  const IdResult zero = interpolative_decomposition(Matrix::Zero(4, 3), 1e-6);
  CHECK(zero.skeleton.empty());
  CHECK(zero.T.rows() == 0);
  CHECK(zero.T.cols() == 3);
}

TEST_CASE("interpolative decomposition ties resolve to the lowest column") {
  Matrix M = Matrix::Zero(3, 3);
  M.col(0) << 1, 0, 0;
  M.col(1) << 0, 1, 0;
  M.col(2) << 1, 0, 0;
  const IdResult r = interpolative_decomposition(M, 1e-10);
  CHECK(r.skeleton == std::vector<Index>{0, 1});
  CHECK(r.redundant == std::vector<Index>{2});
}

TEST_CASE("interpolative decomposition with eps = 0 keeps independent columns") {
  std::mt19937_64 rng(5);
  const Matrix M = testing::random_matrix(rng, 10, 6);
  const IdResult r = interpolative_decomposition(M, 0.0);
  CHECK(r.skeleton.size() == 6);
  Vector sv(3);
  sv << 1, 1, 1;
  const IdResult d = interpolative_decomposition(testing::with_singular_values(rng, 10, 6, sv), 0.0);
  CHECK(d.skeleton.size() >= 3);
}

namespace {

Index svd_rank(const Matrix& M, double eps) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const Vector& s = svd.singularValues();
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) r += s[i] > eps * s[0];
  return r;
}

}  // namespace

TEST_CASE("interpolative decomposition property suite") {
  // Shapes from square to very tall/wide, exact ranks and geometric decay.
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> dim(1, 60);
  const double eps_list[] = {1e-2, 1e-4, 1e-6, 1e-8, 1e-12};
  int rank_checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Index rows = dim(rng), cols = dim(rng);
    if (trial % 5 == 0) rows *= 4;
    const double eps = eps_list[trial % 5];
    const Index kmax = std::min(rows, cols);
    Matrix M;
    const int kind = trial % 3;
    if (kind == 0) {
      M = testing::random_matrix(rng, rows, cols);
    } else if (kind == 1) {
      const Index k = std::uniform_int_distribution<Index>(0, kmax)(rng);
      M = k ? testing::with_singular_values(rng, rows, cols, Vector::Ones(k)) : Matrix::Zero(rows, cols);
    } else {
      Vector sv(kmax);
      const double decay = std::uniform_real_distribution<double>(0.05, 0.9)(rng);
      for (Index i = 0; i < kmax; ++i) sv[i] = std::pow(decay, i);
      M = testing::with_singular_values(rng, rows, cols, sv);
    }

    const IdResult r = interpolative_decomposition(M, eps);
    std::set<Index> all(r.skeleton.begin(), r.skeleton.end());
    all.insert(r.redundant.begin(), r.redundant.end());
    REQUIRE(all.size() == std::size_t(cols));
    REQUIRE(r.skeleton.size() + r.redundant.size() == std::size_t(cols));
    REQUIRE(r.T.rows() == Index(r.skeleton.size()));
    REQUIRE(r.T.cols() == Index(r.redundant.size()));

    const double resid = r.redundant.empty() ? 0.0
                                             : (M(Eigen::all, r.redundant) - M(Eigen::all, r.skeleton) * r.T).norm();
    const double bound = std::sqrt(double(r.redundant.size())) * eps * M.norm();
    CHECK(resid <= bound * (1 + 1e-10) + 1e-13 * M.norm());

    // rank comparison only where the spectrum has a gap around eps
    if (kind != 2) {
      CHECK(std::abs(Index(r.skeleton.size()) - svd_rank(M, eps)) <= 2);
      ++rank_checked;
    }
  }
  CHECK(rank_checked > 600);
}
