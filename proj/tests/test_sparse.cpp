// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>
#include "slabsolve/dense.hpp"
#include "slabsolve/discretize.hpp"
#include "slabsolve/hbs.hpp"
#include "slabsolve/sparse.hpp"

using namespace slabsolve;

namespace
{

Csr tridiagonal(int n)
{
  std::vector<Eigen::Triplet<double, int>> t;
  for (int i = 0; i < n; i++)
  {
    t.emplace_back(i, i, 2.0);
    if (i > 0)
    {
      t.emplace_back(i, i - 1, -1.0);
      t.emplace_back(i - 1, i, -1.0);
    }
  }
  Csr A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

std::vector<Point> line_points(int n)
{
  std::vector<Point> pts(n);
  for (int i = 0; i < n; i++)
  {
    pts[i] = {double(i), 0, 0};
  }
  return pts;
}

std::vector<Point> interior_points(const Grid &grid)
{
  std::vector<Point> pts;
  for (int n : grid.interior())
  {
    pts.push_back(grid.coord(n));
  }
  return pts;
}

}  // namespace

TEST(SparseLU, TridiagonalFactors)
{
  const SparseLU lu(tridiagonal(3), line_points(3));
  Matrix P, L, U, Q;
  lu.dense_factors(P, L, U, Q);
  const Matrix A = Matrix(tridiagonal(3));
  EXPECT_LT((P * A * Q - L * U).norm(), 1e-14);
  // eliminated in natural order: the hand elimination pivots
  EXPECT_NEAR(U(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(U(1, 1), 1.5, 1e-15);
  EXPECT_NEAR(U(2, 2), 4.0 / 3.0, 1e-15);
  EXPECT_TRUE(L.isLowerTriangular());
  EXPECT_TRUE(U.isUpperTriangular());
}

TEST(SparseLU, TridiagonalSolve)
{
  const SparseLU lu(tridiagonal(3), line_points(3));
  const Vector x = lu.solve(Vector(Vector::Ones(3)));
  EXPECT_NEAR(x(0), 1.5, 1e-14);
  EXPECT_NEAR(x(1), 2.0, 1e-14);
  EXPECT_NEAR(x(2), 1.5, 1e-14);
  EXPECT_EQ(lu.solve(Vector(Vector::Zero(3))).norm(), 0.0);
}

TEST(SparseLU, IdentityFactorsTrivially)
{
  Csr I(5, 5);
  I.setIdentity();
  const SparseLU lu(I, line_points(5));
  Matrix P, L, U, Q;
  lu.dense_factors(P, L, U, Q);
  EXPECT_TRUE(L.isIdentity(1e-15));
  EXPECT_TRUE(U.isIdentity(1e-15));
}

TEST(SparseLU, NestedDissectionOnGrid)
{
  const auto disc = Discretization::fd(2, {1, 1, 1}, 1.0 / 40);
  const auto sys = assemble_fd(make_variable_coefficient_2d(), disc, full_region(disc));
  const Csr A = sys.interior_block();
  const SparseLU lu(A, interior_points(sys.grid), {16, 1e-12});
  EXPECT_GT(lu.stats().fronts, 1);
  const long n = A.rows();
  EXPECT_LT(lu.stats().factor_nonzeros, n * n);
  const Matrix X = gaussian_matrix(n, 4, 3);
  const Matrix B = A * X;
  EXPECT_LT((lu.solve(B) - X).norm() / X.norm(), 1e-10);
  const Matrix Bt = Csr(A.transpose()) * X;
  EXPECT_LT((lu.solve_adjoint(Bt) - X).norm() / X.norm(), 1e-10);
}

TEST(SparseLU, MultiVectorMatchesColumns)
{
  const auto disc = Discretization::fd(2, {1, 1, 1}, 1.0 / 24);
  const auto sys = assemble_fd(make_helmholtz(3.0, 2), disc, full_region(disc));
  const SparseLU lu(sys.interior_block(), interior_points(sys.grid));
  const Matrix B = gaussian_matrix(lu.size(), 6, 9);
  const Matrix X = lu.solve(B);
  for (int c = 0; c < 6; c++)
  {
    EXPECT_LT((lu.solve(Vector(B.col(c))) - X.col(c)).norm(), 1e-12 * X.col(c).norm());
  }
}

TEST(SparseLU, SymmetricAdjointEqualsSolve)
{
  const auto disc = Discretization::fd(2, {1, 1, 1}, 1.0 / 16);
  const auto sys = assemble_fd(make_helmholtz(0.0, 2), disc, full_region(disc));
  const SparseLU lu(sys.interior_block(), interior_points(sys.grid));
  const Vector b = gaussian_matrix(lu.size(), 1, 4).col(0);
  EXPECT_LT((lu.solve(b) - lu.solve_adjoint(b)).norm(), 1e-12 * lu.solve(b).norm());
}

TEST(SparseLU, HpsAdjointResidual)
{
  const auto disc = Discretization::hps(2, {0.5, 1, 1}, {2, 4, 1}, 8);
  const auto sys = assemble_hps(make_variable_coefficient_2d(), disc, full_region(disc));
  const Csr A = sys.interior_block();
  const SparseLU lu(A, interior_points(sys.grid));
  const Vector b = gaussian_matrix(lu.size(), 1, 5).col(0);
  const Vector x = lu.solve_adjoint(b);
  EXPECT_LT((Csr(A.transpose()) * x - b).norm() / b.norm(), 1e-10);
  const Vector y = lu.solve(b);
  EXPECT_LT((A * y - b).norm() / b.norm(), 1e-10);
  Matrix P, L, U, Q;
  lu.dense_factors(P, L, U, Q);
  const Matrix r = P * Matrix(A) * Q - L * U;
  EXPECT_LT(r.norm() / Matrix(A).norm(), 1e-12);
}

TEST(SparseLU, LocalResonance)
{
  // kappa^2 equal to the smallest discrete Dirichlet eigenvalue of a small slab
  const auto disc = Discretization::fd(2, {0.25, 1, 1}, 1.0 / 16);
  const auto lap = assemble_fd(make_helmholtz(0.0, 2), disc, full_region(disc));
  const double lambda = symmetric_eigenvalues(Matrix(lap.interior_block()))(0);
  const auto sys = assemble_fd(make_helmholtz(std::sqrt(lambda), 2), disc, full_region(disc));
  try
  {
    SparseLU lu(sys.interior_block(), interior_points(sys.grid));
    FAIL() << "expected a singular pivot";
  }
  catch (const Error &e)
  {
    EXPECT_NE(std::string(e.what()).find("local resonance"), std::string::npos);
  }
}

TEST(SparseLU, DimensionMismatch)
{
  const SparseLU lu(tridiagonal(4), line_points(4));
  EXPECT_THROW(lu.solve(Vector(Vector::Ones(3))), Error);
  EXPECT_THROW(lu.solve_adjoint(Matrix(Matrix::Ones(5, 2))), Error);
}
