// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include "slabsolve/hbs.hpp"
#include "slabsolve/krylov.hpp"

using namespace slabsolve;

TEST(Gmres, IdentityInOneStep)
{
  GmresReport rep;
  const Vector b = gaussian_matrix(10, 1, 1).col(0);
  const Vector x = gmres([](const Vector &v) { return v; }, b, 1e-12, 50, rep);
  EXPECT_EQ(rep.iterations, 1);
  EXPECT_TRUE(rep.converged);
  EXPECT_LT((x - b).norm(), 1e-14 * b.norm());
}

TEST(Gmres, TwoDistinctEigenvalues)
{
  GmresReport rep;
  Vector b(2);
  b << 1, 1;
  auto A = [](const Vector &v)
  {
    Vector w = v;
    w(1) *= 2;
    return w;
  };
  const Vector x = gmres(A, b, 1e-12, 10, rep);
  EXPECT_EQ(rep.iterations, 2);
  EXPECT_TRUE(rep.converged);
  EXPECT_NEAR(x(0), 1.0, 1e-14);
  EXPECT_NEAR(x(1), 0.5, 1e-14);
}

TEST(Gmres, ZeroRightHandSide)
{
  GmresReport rep;
  int calls = 0;
  const Vector x = gmres(
      [&](const Vector &v)
      {
        calls++;
        return v;
      },
      Vector::Zero(5), 1e-8, 10, rep);
  EXPECT_EQ(x.norm(), 0.0);
  EXPECT_EQ(calls, 0);
  EXPECT_TRUE(rep.converged);
}

TEST(Gmres, HistoryOrthogonalityAndResidual)
{
  const int n = 300;
  // I - K with a smallish random K: a second-kind system
  const Matrix K = 0.4 * gaussian_matrix(n, n, 2) / std::sqrt(double(n));
  const Matrix S = Matrix::Identity(n, n) - K;
  const Vector b = gaussian_matrix(n, 1, 3).col(0);
  GmresReport rep;
  const Vector x = gmres([&](const Vector &v) { return Vector(S * v); }, b, 1e-10, 200, rep);
  EXPECT_TRUE(rep.converged);
  EXPECT_LT(rep.true_residual, 1e-9);
  EXPECT_LT((S * x - b).norm() / b.norm(), 1e-9);
  for (size_t i = 1; i < rep.history.size(); i++)
  {
    EXPECT_LE(rep.history[i], rep.history[i - 1] * (1 + 1e-12));
  }
  EXPECT_LT(rep.orthogonality, 1e-10);
  EXPECT_EQ(static_cast<int>(rep.history.size()), rep.iterations + 1);
}

TEST(Gmres, MaxIterationsIsFlagged)
{
  const int n = 100;
  Vector d(n);
  for (int i = 0; i < n; i++)
  {
    d(i) = 1.0 + i;
  }
  GmresReport rep;
  gmres([&](const Vector &v) { return Vector(d.cwiseProduct(v)); }, Vector::Ones(n), 1e-14, 5,
        rep);
  EXPECT_EQ(rep.iterations, 5);
  EXPECT_FALSE(rep.converged);
}

TEST(Gmres, NonFiniteIsAnError)
{
  GmresReport rep;
  auto bad = [](const Vector &v)
  {
    Vector w = v;
    w(0) = NAN;
    return w;
  };
  EXPECT_THROW(gmres(bad, Vector::Ones(4), 1e-8, 10, rep), Error);
}
