// SPDX-License-Identifier: Apache-2.0

#include "slabsolve/hbs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace slabsolve
{

namespace
{

// Split a set at the median of its distinct coordinates along one axis. Returns the
// threshold and the shared face coordinate.
std::pair<double, double> median_cut(const std::vector<Point2> &pts,
                                     const std::vector<int> &idx, int axis)
{
  std::vector<double> v;
  v.reserve(idx.size());
  for (int i : idx)
  {
    v.push_back(pts[i][axis]);
  }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  if (v.size() < 2)
  {
    return {NAN, NAN};
  }
  const size_t k = v.size() / 2;
  return {v[k], 0.5 * (v[k - 1] + v[k])};
}

struct Piece
{
  std::vector<int> idx;
  Point2 lo, hi;
};

std::vector<Piece> split(const std::vector<Point2> &pts, const Piece &p, int axis)
{
  const auto [t, face] = median_cut(pts, p.idx, axis);
  if (std::isnan(t))
  {
    return {};
  }
  Piece a{{}, p.lo, p.hi}, b{{}, p.lo, p.hi};
  a.hi[axis] = face;
  b.lo[axis] = face;
  for (int i : p.idx)
  {
    (pts[i][axis] < t ? a.idx : b.idx).push_back(i);
  }
  return {a, b};
}

int widest_axis(const Piece &p, int dims)
{
  if (dims == 1)
  {
    return 0;
  }
  return (p.hi[1] - p.lo[1]) > (p.hi[0] - p.lo[0]) ? 1 : 0;
}

// Orthonormal basis for the dominant columns of S, truncated at rank r.
Matrix column_basis(const Matrix &S, int r)
{
  if (r == 0)
  {
    return Matrix(S.rows(), 0);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(S);
  return qr.householderQ() * Matrix::Identity(S.rows(), r);
}

int numerical_rank(const Matrix &S, double tol)
{
  if (S.rows() == 0 || S.cols() == 0)
  {
    return 0;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(S);
  const Matrix &R = qr.matrixR();
  const int d = std::min(S.rows(), S.cols());
  int r = 0;
  while (r < d && std::abs(R(r, r)) > tol)
  {
    r++;
  }
  return r;
}

// For Omega (m x s, m < s): null-space basis (s x (s-m)) and right pseudo-inverse (s x m).
void null_and_pinv(const Matrix &Omega, Matrix &null, Matrix &pinv)
{
  const int m = Omega.rows(), s = Omega.cols();
  Eigen::HouseholderQR<Matrix> qr(Omega.transpose());
  const Matrix Q = qr.householderQ() * Matrix::Identity(s, s);
  null = Q.rightCols(s - m);
  const Matrix R = qr.matrixQR().topLeftCorner(m, m).triangularView<Eigen::Upper>();
  // Omega = R^T Q1^T  =>  Omega^+ = Q1 R^{-T}
  pinv = R.triangularView<Eigen::Upper>()
             .transpose()
             .solve<Eigen::OnTheRight>(Q.leftCols(m));
}

}  // namespace

ClusterTree::ClusterTree(const std::vector<Point2> &points, int dims, int arity,
                         int leaf_size)
    : arity_(arity), dims_(dims)
{
  if (dims != 1 && dims != 2)
  {
    throw Error("cluster tree: interface point sets are 1D or 2D");
  }
  if (arity != 2 && arity != 4)
  {
    throw Error("cluster tree: arity must be 2 or 4");
  }
  if (arity == 4 && dims != 2)
  {
    throw Error("cluster tree: quad trees need a planar interface");
  }
  if (leaf_size < 1)
  {
    throw Error("cluster tree: leaf size must be positive");
  }
  const int n = static_cast<int>(points.size());
  Piece root;
  root.idx.resize(n);
  std::iota(root.idx.begin(), root.idx.end(), 0);
  root.lo = {0.0, 0.0};
  root.hi = {0.0, 0.0};
  if (n > 0)
  {
    root.lo = root.hi = points[0];
    for (const auto &x : points)
    {
      for (int a = 0; a < 2; a++)
      {
        root.lo[a] = std::min(root.lo[a], x[a]);
        root.hi[a] = std::max(root.hi[a], x[a]);
      }
    }
  }
  std::vector<std::vector<Piece>> levels = {{root}};
  while (true)
  {
    const auto &cur = levels.back();
    bool needed = false;
    for (const auto &p : cur)
    {
      needed = needed || static_cast<int>(p.idx.size()) > leaf_size;
    }
    if (!needed)
    {
      break;
    }
    std::vector<Piece> next;
    bool ok = true;
    for (const auto &p : cur)
    {
      std::vector<Piece> kids;
      if (arity == 2)
      {
        kids = split(points, p, widest_axis(p, dims));
      }
      else
      {
        for (const auto &half : split(points, p, 0))
        {
          auto q = split(points, half, 1);
          kids.insert(kids.end(), q.begin(), q.end());
        }
        if (kids.size() != 4)
        {
          kids.clear();
        }
      }
      if (kids.empty())
      {
        ok = false;
        break;
      }
      next.insert(next.end(), kids.begin(), kids.end());
    }
    if (!ok)
    {
      break;
    }
    levels.push_back(std::move(next));
  }

  // lay out: leaves define tree order
  perm.clear();
  for (const auto &leaf : levels.back())
  {
    perm.insert(perm.end(), leaf.idx.begin(), leaf.idx.end());
  }
  const int L = static_cast<int>(levels.size());
  by_level.assign(L, {});
  // node ids: level by level from the root; children of level-l piece i are consecutive
  std::vector<int> first(L + 1, 0);
  for (int l = 0; l < L; l++)
  {
    first[l + 1] = first[l] + static_cast<int>(levels[l].size());
  }
  nodes.resize(first[L]);
  for (int l = L - 1; l >= 0; l--)
  {
    for (size_t i = 0; i < levels[l].size(); i++)
    {
      const int id = first[l] + static_cast<int>(i);
      Node &nd = nodes[id];
      nd.level = l + 1;
      nd.lo = levels[l][i].lo;
      nd.hi = levels[l][i].hi;
      by_level[l].push_back(id);
      if (l == L - 1)
      {
        nd.begin = 0;
        for (size_t q = 0; q < i; q++)
        {
          nd.begin += static_cast<int>(levels[l][q].idx.size());
        }
        nd.end = nd.begin + static_cast<int>(levels[l][i].idx.size());
      }
      else
      {
        for (int c = 0; c < arity; c++)
        {
          const int cid = first[l + 1] + static_cast<int>(i) * arity + c;
          nd.children.push_back(cid);
          nodes[cid].parent = id;
        }
        nd.begin = nodes[nd.children.front()].begin;
        nd.end = nodes[nd.children.back()].end;
      }
    }
  }
}

std::vector<int> ClusterTree::indices(int id) const
{
  return std::vector<int>(perm.begin() + nodes[id].begin, perm.begin() + nodes[id].end);
}

ClusterTree build_tree(const std::vector<Point2> &points, int dims, int arity, int leaf_size)
{
  return ClusterTree(points, dims, arity, leaf_size);
}

int HbsMatrix::max_rank() const
{
  int r = 0;
  for (const auto &u : U)
  {
    r = std::max(r, static_cast<int>(u.cols()));
  }
  return r;
}

Matrix HbsMatrix::apply(const Matrix &X, bool adjoint) const
{
  if (X.rows() != rows())
  {
    throw Error("hbs apply: vector length does not match the matrix");
  }
  const int nn = tree_.node_count();
  const int L = tree_.levels();
  std::vector<Matrix> xs(nn), xh(nn), ys(nn);
  const auto &perm = tree_.permutation();
  for (int l = L; l >= 1; l--)
  {
    for (int id : tree_.level(l))
    {
      const auto &nd = tree_.node(id);
      if (nd.children.empty())
      {
        xs[id].resize(nd.size(), X.cols());
        for (int i = nd.begin; i < nd.end; i++)
        {
          xs[id].row(i - nd.begin) = X.row(perm[i]);
        }
      }
      else
      {
        int rows_total = 0;
        for (int c : nd.children)
        {
          rows_total += xh[c].rows();
        }
        xs[id].resize(rows_total, X.cols());
        int at = 0;
        for (int c : nd.children)
        {
          xs[id].middleRows(at, xh[c].rows()) = xh[c];
          at += xh[c].rows();
          Matrix().swap(xh[c]);
        }
      }
      if (nd.parent >= 0)
      {
        xh[id] = (adjoint ? U[id] : V[id]).transpose() * xs[id];
      }
    }
  }
  Matrix Y(rows(), X.cols());
  for (int l = 1; l <= L; l++)
  {
    for (int id : tree_.level(l))
    {
      const auto &nd = tree_.node(id);
      ys[id] = adjoint ? Matrix(D[id].transpose() * xs[id]) : Matrix(D[id] * xs[id]);
      if (nd.parent >= 0)
      {
        const Matrix &B = adjoint ? V[id] : U[id];
        ys[id].noalias() += B * ys[nd.parent].middleRows(offset[id], B.cols());
      }
      if (nd.children.empty())
      {
        for (int i = nd.begin; i < nd.end; i++)
        {
          Y.row(perm[i]) = ys[id].row(i - nd.begin);
        }
      }
    }
    if (l > 1)
    {
      for (int id : tree_.level(l - 1))
      {
        Matrix().swap(ys[id]);
      }
    }
  }
  return Y;
}

Vector HbsMatrix::matvec(const Vector &x) const
{
  return apply(Matrix(x), false).col(0);
}

Vector HbsMatrix::adjoint_matvec(const Vector &x) const
{
  return apply(Matrix(x), true).col(0);
}

Matrix HbsMatrix::matvec(const Matrix &X) const
{
  return apply(X, false);
}

Matrix HbsMatrix::adjoint_matvec(const Matrix &X) const
{
  return apply(X, true);
}

Matrix HbsMatrix::dense() const
{
  return apply(Matrix::Identity(rows(), rows()), false);
}

Matrix HbsMatrix::coupling(int a, int b) const
{
  const int p = tree_.node(a).parent;
  if (p < 0 || tree_.node(b).parent != p)
  {
    throw Error("hbs coupling: nodes are not siblings");
  }
  return D[p].block(offset[a], offset[b], rank(a), rank(b));
}

long HbsMatrix::stored_reals() const
{
  long total = 0;
  for (int id = 0; id < tree_.node_count(); id++)
  {
    total += D[id].size() + U[id].size() + V[id].size();
  }
  return total;
}

StorageReport storage_report(const HbsMatrix &H)
{
  StorageReport r;
  r.stored = H.stored_reals();
  const double n = H.rows();
  r.rate = n > 0 ? r.stored / (n * n) : 0.0;
  return r;
}

int sample_count(int k, int arity, int alpha)
{
  if (alpha <= 0)
  {
    alpha = arity == 4 ? 5 : 3;
  }
  return alpha * k + 10;
}

Matrix gaussian_matrix(int rows, int cols, unsigned long long seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix M(rows, cols);
  for (int j = 0; j < cols; j++)
  {
    for (int i = 0; i < rows; i++)
    {
      M(i, j) = normal(rng);
    }
  }
  return M;
}

HbsMatrix compress_samples(const Matrix &Omega, const Matrix &Psi, const Matrix &Y,
                           const Matrix &Z, int k, const ClusterTree &tree)
{
  const int n = tree.size();
  const int s = Omega.cols();
  if (Omega.rows() != n || Psi.rows() != n || Y.rows() != n || Z.rows() != n ||
      Psi.cols() != s || Y.cols() != s || Z.cols() != s)
  {
    throw Error("hbs compress: sample dimensions do not match the tree");
  }
  if (k < 0)
  {
    throw Error("hbs compress: rank must be nonnegative");
  }
  if (tree.levels() > 1)
  {
    int smallest_leaf = n;
    for (int id : tree.leaves())
    {
      smallest_leaf = std::min(smallest_leaf, tree.node(id).size());
    }
    if (k >= smallest_leaf)
    {
      throw Error("hbs compress: rank k = " + std::to_string(k) +
                  " is too large for leaf size " + std::to_string(smallest_leaf));
    }
  }

  HbsMatrix H;
  H.tree_ = tree;
  const int nn = tree.node_count();
  H.D.assign(nn, Matrix());
  H.U.assign(nn, Matrix());
  H.V.assign(nn, Matrix());
  H.offset.assign(nn, 0);

  const double scale = std::max(Y.norm(), Z.norm()) / std::sqrt(std::max(s, 1));
  const double rank_tol = 1e-12 * scale;

  std::vector<Matrix> om(nn), ps(nn), y(nn), z(nn);
  const auto &perm = tree.permutation();
  for (int l = tree.levels(); l >= 1; l--)
  {
    for (int id : tree.level(l))
    {
      const auto &nd = tree.node(id);
      if (nd.children.empty())
      {
        const int m = nd.size();
        om[id].resize(m, s);
        ps[id].resize(m, s);
        y[id].resize(m, s);
        z[id].resize(m, s);
        for (int i = 0; i < m; i++)
        {
          const int r = perm[nd.begin + i];
          om[id].row(i) = Omega.row(r);
          ps[id].row(i) = Psi.row(r);
          y[id].row(i) = Y.row(r);
          z[id].row(i) = Z.row(r);
        }
      }
      else
      {
        int m = 0;
        for (int c : nd.children)
        {
          H.offset[c] = m;
          m += om[c].rows();
        }
        om[id].resize(m, s);
        ps[id].resize(m, s);
        y[id].resize(m, s);
        z[id].resize(m, s);
        for (int c : nd.children)
        {
          const int r = om[c].rows();
          om[id].middleRows(H.offset[c], r) = om[c];
          ps[id].middleRows(H.offset[c], r) = ps[c];
          y[id].middleRows(H.offset[c], r) = y[c];
          z[id].middleRows(H.offset[c], r) = z[c];
          Matrix().swap(om[c]);
          Matrix().swap(ps[c]);
          Matrix().swap(y[c]);
          Matrix().swap(z[c]);
        }
      }

      const int m = om[id].rows();
      if (m >= s && !(nd.parent < 0 && m == s))
      {
        throw Error("hbs compress: node with " + std::to_string(m) +
                    " rows needs more than " + std::to_string(s) +
                    " samples; lower the leaf size or raise oversampling");
      }
      Matrix null_om, pinv_om;
      null_and_pinv(om[id], null_om, pinv_om);
      const Matrix A1 = y[id] * pinv_om;
      if (nd.parent < 0)
      {
        H.D[id] = A1;
        continue;
      }
      Matrix null_ps, pinv_ps;
      null_and_pinv(ps[id], null_ps, pinv_ps);
      const Matrix A2 = z[id] * pinv_ps;

      const Matrix su = y[id] * null_om;
      const Matrix sv = z[id] * null_ps;
      const int r = std::min(k, std::max(numerical_rank(su, rank_tol), numerical_rank(sv, rank_tol)));
      const Matrix Ub = column_basis(su, r);
      const Matrix Vb = column_basis(sv, r);

      // D = (I - UU^T) A1 + UU^T [(I - VV^T) A2]^T
      Matrix left = A1 - Ub * (Ub.transpose() * A1);
      const Matrix right = (A2 - Vb * (Vb.transpose() * A2)).transpose();
      left.noalias() += Ub * (Ub.transpose() * right);
      H.D[id] = std::move(left);
      H.U[id] = Ub;
      H.V[id] = Vb;

      const Matrix y_next = Ub.transpose() * (y[id] - H.D[id] * om[id]);
      const Matrix z_next = Vb.transpose() * (z[id] - H.D[id].transpose() * ps[id]);
      om[id] = Vb.transpose() * om[id];
      ps[id] = Ub.transpose() * ps[id];
      y[id] = y_next;
      z[id] = z_next;
    }
  }
  return H;
}

HbsMatrix compress(const BlockOracle &apply, const BlockOracle &apply_adjoint, int k,
                   const ClusterTree &tree, unsigned long long seed, int alpha)
{
  const int n = tree.size();
  const int s = sample_count(k, tree.arity(), alpha);
  const Matrix Omega = gaussian_matrix(n, s, seed);
  const Matrix Psi = gaussian_matrix(n, s, seed ^ 0x9e3779b97f4a7c15ULL);
  const Matrix Y = apply(Omega);
  const Matrix Z = apply_adjoint(Psi);
  if (Y.rows() != n || Y.cols() != s || Z.rows() != n || Z.cols() != s)
  {
    throw Error("hbs compress: oracle returned a block of the wrong shape");
  }
  return compress_samples(Omega, Psi, Y, Z, k, tree);
}

}  // namespace slabsolve
