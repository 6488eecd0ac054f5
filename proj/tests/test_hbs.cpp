// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include "slabsolve/hbs.hpp"

using namespace slabsolve;

namespace
{

std::vector<Point2> line(int n, double a = 0.0, double b = 1.0)
{
  std::vector<Point2> pts(n);
  for (int i = 0; i < n; i++)
  {
    pts[i] = {a + (b - a) * (i + 0.5) / n, 0.0};
  }
  return pts;
}

std::vector<Point2> square(int n)
{
  std::vector<Point2> pts;
  for (int i = 0; i < n; i++)
  {
    for (int j = 0; j < n; j++)
    {
      pts.push_back({(i + 0.5) / n, (j + 0.5) / n});
    }
  }
  return pts;
}

HbsMatrix compress_dense(const Matrix &A, int k, const ClusterTree &tree,
                         unsigned long long seed = 5)
{
  return compress([&](const Matrix &X) { return Matrix(A * X); },
                  [&](const Matrix &X) { return Matrix(A.transpose() * X); }, k, tree, seed);
}

double relative_matvec_error(const HbsMatrix &H, const Matrix &A)
{
  const Matrix X = gaussian_matrix(A.cols(), 4, 77);
  return (H.matvec(X) - A * X).norm() / (A * X).norm();
}

}  // namespace

TEST(ClusterTree, BinaryLine)
{
  const auto tree = build_tree(line(8), 1, 2, 2);
  EXPECT_EQ(tree.levels(), 3);
  ASSERT_EQ(tree.leaves().size(), 4u);
  for (int id : tree.leaves())
  {
    EXPECT_EQ(tree.node(id).size(), 2);
  }
}

TEST(ClusterTree, QuadTreeOnInterface)
{
  // 16 x 16 cell faces, 4 x 4 interior face nodes each (p = 6)
  std::vector<Point2> pts;
  for (int c = 0; c < 16; c++)
  {
    for (int d = 0; d < 16; d++)
    {
      for (int i = 0; i < 4; i++)
      {
        for (int j = 0; j < 4; j++)
        {
          pts.push_back({(c + 0.2 + 0.2 * i) / 16, (d + 0.2 + 0.2 * j) / 16});
        }
      }
    }
  }
  const auto tree = build_tree(pts, 2, 4, 16);
  EXPECT_EQ(tree.levels(), 5);
  EXPECT_EQ(tree.level(5).size(), 256u);
  ASSERT_EQ(tree.level(4).size(), 64u);
  // level 4 boxes tile the face as an 8 x 8 grid of equal squares
  for (int id : tree.level(4))
  {
    const auto &nd = tree.node(id);
    EXPECT_EQ(nd.size(), 64);
    std::set<long> xs;
    for (int i : tree.indices(id))
    {
      xs.insert(std::lround(std::floor(pts[i][0] * 8)));
    }
    EXPECT_EQ(xs.size(), 1u);
  }
}

TEST(ClusterTree, ChildrenPartitionParent)
{
  const auto tree = build_tree(square(13), 2, 4, 10);
  for (int id = 0; id < tree.node_count(); id++)
  {
    const auto &nd = tree.node(id);
    if (nd.children.empty())
    {
      continue;
    }
    int covered = 0;
    int at = nd.begin;
    for (int c : nd.children)
    {
      EXPECT_EQ(tree.node(c).begin, at);
      at = tree.node(c).end;
      covered += tree.node(c).size();
    }
    EXPECT_EQ(covered, nd.size());
  }
  std::vector<int> perm = tree.permutation();
  std::sort(perm.begin(), perm.end());
  for (int i = 0; i < tree.size(); i++)
  {
    EXPECT_EQ(perm[i], i);
  }
}

TEST(ClusterTree, SmallSetIsOneNode)
{
  const auto tree = build_tree(line(5), 1, 2, 8);
  EXPECT_EQ(tree.levels(), 1);
  const Matrix A = gaussian_matrix(5, 5, 1);
  const auto H = compress_dense(A, 2, tree);
  EXPECT_DOUBLE_EQ(storage_report(H).rate, 1.0);
  EXPECT_LT((H.dense() - A).norm(), 1e-12 * A.norm());
}

TEST(Hbs, SampleCount)
{
  EXPECT_EQ(sample_count(20, 2), 70);
  EXPECT_EQ(sample_count(20, 4), 110);
  EXPECT_EQ(sample_count(20, 4, 2), 50);
}

TEST(Hbs, Identity)
{
  const int n = 64;
  const auto tree = build_tree(line(n), 1, 2, 8);
  const auto H = compress_dense(Matrix::Identity(n, n), 4, tree);
  for (int id = 0; id < tree.node_count(); id++)
  {
    const auto &nd = tree.node(id);
    if (nd.children.size() == 2)
    {
      const Matrix c = H.coupling(nd.children[0], nd.children[1]);
      EXPECT_LE(c.size() == 0 ? 0.0 : c.norm(), 1e-12);
    }
    if (nd.children.empty())
    {
      EXPECT_TRUE(H.diag(id).isIdentity(1e-12));
    }
  }
  const Vector x = gaussian_matrix(n, 1, 3).col(0);
  EXPECT_LT((H.matvec(x) - x).norm(), 1e-12 * x.norm());
}

TEST(Hbs, RankOne)
{
  const int n = 200;
  const Vector u = gaussian_matrix(n, 1, 10).col(0);
  const Vector v = gaussian_matrix(n, 1, 11).col(0);
  const Matrix A = u * v.transpose();
  const auto tree = build_tree(line(n), 1, 2, 12);
  const auto H = compress_dense(A, 3, tree);
  EXPECT_LT(relative_matvec_error(H, A), 1e-10);
  const Vector x = gaussian_matrix(n, 1, 12).col(0);
  EXPECT_LT((H.matvec(x) - u * v.dot(x)).norm(), 1e-10 * (u * v.dot(x)).norm());
}

TEST(Hbs, SmoothKernelBetweenSeparatedSegments)
{
  const int n = 400;
  const auto xs = line(n, 0.0, 1.0), ys = line(n, 2.0, 3.0);
  Matrix A(n, n);
  for (int i = 0; i < n; i++)
  {
    for (int j = 0; j < n; j++)
    {
      const double d = xs[i][0] - ys[j][0];
      A(i, j) = std::exp(-d * d);
    }
  }
  const auto tree = build_tree(xs, 1, 2, 50);
  const auto H = compress_dense(A, 24, tree);
  EXPECT_LT(relative_matvec_error(H, A), 1e-8);
}

TEST(Hbs, LinearityAndAdjoint)
{
  const int n = 256;
  const Matrix A = gaussian_matrix(n, n, 20);
  const auto tree = build_tree(square(16), 2, 4, 20);
  const auto H = compress_dense(A, 5, tree);
  const Vector x = gaussian_matrix(n, 1, 21).col(0);
  const Vector z = gaussian_matrix(n, 1, 22).col(0);
  const Vector lhs = H.matvec(Vector(2.5 * x - 0.5 * z));
  const Vector rhs = 2.5 * H.matvec(x) - 0.5 * H.matvec(z);
  EXPECT_LT((lhs - rhs).norm(), 1e-13 * rhs.norm());
  const double a = H.matvec(x).dot(z);
  const double b = x.dot(H.adjoint_matvec(z));
  EXPECT_LT(std::abs(a - b), 1e-12 * H.matvec(x).norm() * z.norm());
}

TEST(Hbs, Determinism)
{
  const int n = 300;
  const Matrix A = gaussian_matrix(n, n, 30);
  const auto tree = build_tree(line(n), 1, 2, 24);
  const auto H1 = compress_dense(A, 10, tree, 99);
  const auto H2 = compress_dense(A, 10, tree, 99);
  for (int id = 0; id < tree.node_count(); id++)
  {
    EXPECT_TRUE(H1.diag(id) == H2.diag(id));
    EXPECT_TRUE(H1.row_basis(id) == H2.row_basis(id));
    EXPECT_TRUE(H1.col_basis(id) == H2.col_basis(id));
  }
}

TEST(Hbs, StorageIsLinear)
{
  // full-rank input: every basis carries exactly k columns
  auto rate = [](int n, int k)
  {
    const auto tree = build_tree(line(n), 1, 2, 2 * k);
    return storage_report(compress_dense(gaussian_matrix(n, n, n + k), k, tree)).rate;
  };
  const double r1 = rate(320, 10), r2 = rate(640, 10), r3 = rate(1280, 10);
  EXPECT_NEAR(r2 / r1, 0.5, 0.05);
  EXPECT_NEAR(r3 / r2, 0.5, 0.05);
  const double q1 = rate(1280, 10), q2 = rate(1280, 20);
  EXPECT_NEAR(q2 / q1, 2.0, 0.2);
}

TEST(Hbs, Errors)
{
  const auto tree = build_tree(line(64), 1, 2, 8);
  const Matrix A = Matrix::Identity(64, 64);
  EXPECT_THROW(compress_dense(A, 8, tree), Error);
  auto bad = [](const Matrix &X) { return Matrix(X.topRows(10)); };
  EXPECT_THROW(compress(bad, bad, 2, tree, 1), Error);
  const auto H = compress_dense(A, 2, tree);
  EXPECT_THROW(H.matvec(Vector(Vector::Ones(63))), Error);
}
