// SPDX-License-Identifier: Apache-2.0

#include "slabsolve/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace slabsolve
{

namespace
{

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Graph
{
  std::vector<int> ptr, adj;
  int degree(int v) const { return ptr[v + 1] - ptr[v]; }
};

Graph symmetric_pattern(const Csr &A)
{
  const int n = A.rows();
  std::vector<std::vector<int>> nbr(n);
  for (int r = 0; r < n; r++)
  {
    for (Csr::InnerIterator it(A, r); it; ++it)
    {
      if (it.col() != r)
      {
        nbr[r].push_back(it.col());
        nbr[it.col()].push_back(r);
      }
    }
  }
  Graph g;
  g.ptr.assign(n + 1, 0);
  for (int v = 0; v < n; v++)
  {
    auto &l = nbr[v];
    std::sort(l.begin(), l.end());
    l.erase(std::unique(l.begin(), l.end()), l.end());
    g.ptr[v + 1] = g.ptr[v] + static_cast<int>(l.size());
  }
  g.adj.reserve(g.ptr[n]);
  for (auto &l : nbr)
  {
    g.adj.insert(g.adj.end(), l.begin(), l.end());
  }
  return g;
}

struct TreeNode
{
  std::vector<int> sep;
  std::vector<int> children;
};

// Geometric nested dissection. Nodes are appended children-first, so the node list is a
// post-order of the elimination tree.
class Dissector
{
public:
  Dissector(const Graph &g, const std::vector<Point> &pts, int leaf)
      : graph(g), points(pts), leaf_size(leaf), side(pts.size(), -1)
  {
  }

  int run(std::vector<int> vars)
  {
    if (static_cast<int>(vars.size()) <= leaf_size)
    {
      return leaf(std::move(vars));
    }
    int axis = 0;
    double widest = -1.0;
    for (int a = 0; a < 3; a++)
    {
      double lo = points[vars[0]][a], hi = lo;
      for (int v : vars)
      {
        lo = std::min(lo, points[v][a]);
        hi = std::max(hi, points[v][a]);
      }
      if (hi - lo > widest)
      {
        widest = hi - lo;
        axis = a;
      }
    }
    std::vector<double> vals;
    vals.reserve(vars.size());
    for (int v : vars)
    {
      vals.push_back(points[v][axis]);
    }
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    const int u = static_cast<int>(vals.size());
    if (u < 2)
    {
      return leaf(std::move(vars));
    }
    const int mid = u / 2;
    const int window = std::clamp(u / 8, 1, 12);

    std::vector<int> best_sep;
    double best_t = 0.0;
    bool found = false;
    long best_score = 0;
    for (int k = std::max(1, mid - window); k <= std::min(u - 1, mid + window); k++)
    {
      const double t = vals[k];
      std::vector<int> sep_lo, sep_hi;
      long n_lo = 0;
      for (int v : vars)
      {
        side[v] = points[v][axis] < t ? 0 : 1;
        n_lo += side[v] == 0;
      }
      for (int v : vars)
      {
        for (int e = graph.ptr[v]; e < graph.ptr[v + 1]; e++)
        {
          const int w = graph.adj[e];
          if (side[w] >= 0 && side[w] != side[v])
          {
            (side[v] == 0 ? sep_lo : sep_hi).push_back(v);
            break;
          }
        }
      }
      const long n_hi = static_cast<long>(vars.size()) - n_lo;
      std::vector<int> &sep = sep_hi.size() <= sep_lo.size() ? sep_hi : sep_lo;
      const long rest_lo = n_lo - (&sep == &sep_lo ? static_cast<long>(sep.size()) : 0);
      const long rest_hi = n_hi - (&sep == &sep_hi ? static_cast<long>(sep.size()) : 0);
      if (rest_lo == 0 || rest_hi == 0)
      {
        continue;
      }
      // separator size first, then distance from the median
      const long score = static_cast<long>(sep.size()) * 4 * u + 2 * std::abs(k - mid);
      if (!found || score < best_score)
      {
        found = true;
        best_score = score;
        best_sep = sep;
        best_t = t;
      }
    }
    for (int v : vars)
    {
      side[v] = -1;
    }
    if (!found)
    {
      return leaf(std::move(vars));
    }
    for (int v : best_sep)
    {
      side[v] = 2;
    }
    std::vector<int> lo_part, hi_part;
    for (int v : vars)
    {
      if (side[v] == 2)
      {
        continue;
      }
      (points[v][axis] < best_t ? lo_part : hi_part).push_back(v);
    }
    for (int v : best_sep)
    {
      side[v] = -1;
    }
    std::vector<int>().swap(vars);
    TreeNode node;
    node.children.push_back(run(std::move(lo_part)));
    node.children.push_back(run(std::move(hi_part)));
    std::sort(best_sep.begin(), best_sep.end());
    node.sep = std::move(best_sep);
    nodes.push_back(std::move(node));
    return static_cast<int>(nodes.size()) - 1;
  }

  std::vector<TreeNode> nodes;

private:
  int leaf(std::vector<int> vars)
  {
    std::sort(vars.begin(), vars.end());
    nodes.push_back({std::move(vars), {}});
    return static_cast<int>(nodes.size()) - 1;
  }

  const Graph &graph;
  const std::vector<Point> &points;
  int leaf_size;
  std::vector<int> side;
};

}  // namespace

struct SparseLU::Front
{
  std::vector<int> sep, border;
  Eigen::PartialPivLU<Matrix> lu;
  Matrix X12;  // F11^{-1} F12
  Matrix F21;
};

SparseLU::SparseLU(const Csr &A, const std::vector<Point> &points)
    : SparseLU(A, points, Options{})
{
}

SparseLU::SparseLU(const Csr &A, const std::vector<Point> &points, const Options &opts)
{
  factorize(A, points, opts);
}

SparseLU::~SparseLU() = default;
SparseLU::SparseLU(SparseLU &&) noexcept = default;
SparseLU &SparseLU::operator=(SparseLU &&) noexcept = default;

void SparseLU::factorize(const Csr &A, const std::vector<Point> &points, const Options &opts)
{
  Stopwatch clock;
  if (A.rows() != A.cols())
  {
    throw Error("sparse factorization: matrix is not square");
  }
  n = A.rows();
  if (static_cast<int>(points.size()) != n)
  {
    throw Error("sparse factorization: need one point per row");
  }
  if (n == 0)
  {
    return;
  }
  const Graph graph = symmetric_pattern(A);
  double amax = 0.0;
  for (int k = 0; k < A.outerSize(); k++)
  {
    for (Csr::InnerIterator it(A, k); it; ++it)
    {
      amax = std::max(amax, std::abs(it.value()));
    }
  }

  Dissector dissect(graph, points, std::max(opts.leaf_size, 1));
  std::vector<int> all(n);
  for (int i = 0; i < n; i++)
  {
    all[i] = i;
  }
  dissect.run(std::move(all));
  const std::vector<TreeNode> &tree = dissect.nodes;
  const int nf = static_cast<int>(tree.size());

  // elimination positions
  std::vector<int> elim(n, -1), last(nf, -1);
  order.clear();
  order.reserve(n);
  for (int f = 0; f < nf; f++)
  {
    for (int c : tree[f].children)
    {
      last[f] = std::max(last[f], last[c]);
    }
    for (int v : tree[f].sep)
    {
      elim[v] = static_cast<int>(order.size());
      order.push_back(v);
      last[f] = static_cast<int>(order.size()) - 1;
    }
  }

  // symbolic: border of each front = later-eliminated neighbors of its subtree
  fronts.assign(nf, Front{});
  std::vector<int> mark(n, -1);
  for (int f = 0; f < nf; f++)
  {
    Front &fr = fronts[f];
    fr.sep = tree[f].sep;
    auto consider = [&](int w)
    {
      if (elim[w] > last[f] && mark[w] != f)
      {
        mark[w] = f;
        fr.border.push_back(w);
      }
    };
    for (int v : fr.sep)
    {
      for (int e = graph.ptr[v]; e < graph.ptr[v + 1]; e++)
      {
        consider(graph.adj[e]);
      }
    }
    for (int c : tree[f].children)
    {
      for (int w : fronts[c].border)
      {
        consider(w);
      }
    }
    std::sort(fr.border.begin(), fr.border.end(),
              [&](int a, int b) { return elim[a] < elim[b]; });
  }

  // numeric
  std::vector<Matrix> updates(nf);
  std::vector<int> pos(n, -1);
  st = FactorStats{};
  for (int f = 0; f < nf; f++)
  {
    Front &fr = fronts[f];
    const int s = static_cast<int>(fr.sep.size());
    const int b = static_cast<int>(fr.border.size());
    for (int i = 0; i < s; i++)
    {
      pos[fr.sep[i]] = i;
    }
    for (int i = 0; i < b; i++)
    {
      pos[fr.border[i]] = s + i;
    }
    Matrix F = Matrix::Zero(s + b, s + b);
    for (int i = 0; i < s; i++)
    {
      for (Csr::InnerIterator it(A, fr.sep[i]); it; ++it)
      {
        if (pos[it.col()] >= 0)
        {
          F(i, pos[it.col()]) += it.value();
        }
      }
    }
    for (int i = 0; i < b; i++)
    {
      for (Csr::InnerIterator it(A, fr.border[i]); it; ++it)
      {
        const int c = pos[it.col()];
        if (c >= 0 && c < s)
        {
          F(s + i, c) += it.value();
        }
      }
    }
    for (int c : tree[f].children)
    {
      const std::vector<int> &cb = fronts[c].border;
      const Matrix &U = updates[c];
      std::vector<int> map(cb.size());
      for (size_t i = 0; i < cb.size(); i++)
      {
        map[i] = pos[cb[i]];
      }
      for (size_t jj = 0; jj < cb.size(); jj++)
      {
        for (size_t ii = 0; ii < cb.size(); ii++)
        {
          F(map[ii], map[jj]) += U(ii, jj);
        }
      }
      Matrix().swap(updates[c]);
    }
    for (int v : fr.sep)
    {
      pos[v] = -1;
    }
    for (int v : fr.border)
    {
      pos[v] = -1;
    }

    if (s > 0)
    {
      fr.lu.compute(F.topLeftCorner(s, s));
      const Matrix &LU = fr.lu.matrixLU();
      double smallest = std::abs(LU(0, 0));
      for (int i = 1; i < s; i++)
      {
        smallest = std::min(smallest, std::abs(LU(i, i)));
      }
      if (!(smallest > opts.singular_tol * amax))
      {
        std::ostringstream msg;
        msg << "local resonance: interior block is numerically singular (pivot "
            << smallest << " vs max entry " << amax << ")";
        throw Error(msg.str());
      }
      fr.X12 = fr.lu.solve(F.topRightCorner(s, b));
      fr.F21 = F.bottomLeftCorner(b, s);
      updates[f] = F.bottomRightCorner(b, b);
      updates[f].noalias() -= fr.F21 * fr.X12;
    }
    else
    {
      updates[f] = F;
    }
    st.factor_nonzeros += static_cast<long>(s) * s + 2L * s * b;
    st.peak_front = std::max<long>(st.peak_front, s + b);
  }
  st.fronts = nf;
  st.seconds = clock.seconds();
}

Matrix SparseLU::solve(const Matrix &B) const
{
  if (B.rows() != n)
  {
    throw Error("sparse solve: right-hand side has the wrong number of rows");
  }
  const int m = B.cols();
  RowMatrix X = B;
  RowMatrix bs, bb;
  for (const Front &fr : fronts)
  {
    const int s = fr.sep.size(), b = fr.border.size();
    if (s == 0)
    {
      continue;
    }
    bs.resize(s, m);
    for (int i = 0; i < s; i++)
    {
      bs.row(i) = X.row(fr.sep[i]);
    }
    bs = fr.lu.solve(bs);
    for (int i = 0; i < s; i++)
    {
      X.row(fr.sep[i]) = bs.row(i);
    }
    if (b > 0)
    {
      bb.noalias() = fr.F21 * bs;
      for (int i = 0; i < b; i++)
      {
        X.row(fr.border[i]) -= bb.row(i);
      }
    }
  }
  for (auto it = fronts.rbegin(); it != fronts.rend(); ++it)
  {
    const Front &fr = *it;
    const int s = fr.sep.size(), b = fr.border.size();
    if (s == 0 || b == 0)
    {
      continue;
    }
    bb.resize(b, m);
    for (int i = 0; i < b; i++)
    {
      bb.row(i) = X.row(fr.border[i]);
    }
    bs.noalias() = fr.X12 * bb;
    for (int i = 0; i < s; i++)
    {
      X.row(fr.sep[i]) -= bs.row(i);
    }
  }
  return X;
}

Matrix SparseLU::solve_adjoint(const Matrix &B) const
{
  if (B.rows() != n)
  {
    throw Error("sparse adjoint solve: right-hand side has the wrong number of rows");
  }
  const int m = B.cols();
  RowMatrix X = B;
  RowMatrix bs, bb;
  for (const Front &fr : fronts)
  {
    const int s = fr.sep.size(), b = fr.border.size();
    if (s == 0 || b == 0)
    {
      continue;
    }
    bs.resize(s, m);
    for (int i = 0; i < s; i++)
    {
      bs.row(i) = X.row(fr.sep[i]);
    }
    bb.noalias() = fr.X12.transpose() * bs;
    for (int i = 0; i < b; i++)
    {
      X.row(fr.border[i]) -= bb.row(i);
    }
  }
  for (auto it = fronts.rbegin(); it != fronts.rend(); ++it)
  {
    const Front &fr = *it;
    const int s = fr.sep.size(), b = fr.border.size();
    if (s == 0)
    {
      continue;
    }
    bs.resize(s, m);
    for (int i = 0; i < s; i++)
    {
      bs.row(i) = X.row(fr.sep[i]);
    }
    if (b > 0)
    {
      bb.resize(b, m);
      for (int i = 0; i < b; i++)
      {
        bb.row(i) = X.row(fr.border[i]);
      }
      bs.noalias() -= fr.F21.transpose() * bb;
    }
    bs = fr.lu.transpose().solve(bs);
    for (int i = 0; i < s; i++)
    {
      X.row(fr.sep[i]) = bs.row(i);
    }
  }
  return X;
}

Vector SparseLU::solve(const Vector &b) const
{
  return solve(Matrix(b)).col(0);
}

Vector SparseLU::solve_adjoint(const Vector &b) const
{
  return solve_adjoint(Matrix(b)).col(0);
}

void SparseLU::dense_factors(Matrix &P, Matrix &L, Matrix &U, Matrix &Q) const
{
  std::vector<int> elim(n), row_of(n);
  for (int k = 0; k < n; k++)
  {
    elim[order[k]] = k;
  }
  for (const Front &fr : fronts)
  {
    if (fr.sep.empty())
    {
      continue;
    }
    const int k0 = elim[fr.sep[0]];
    const auto &perm = fr.lu.permutationP().indices();
    for (size_t i = 0; i < fr.sep.size(); i++)
    {
      row_of[fr.sep[i]] = k0 + perm(i);
    }
  }
  P = Matrix::Zero(n, n);
  Q = Matrix::Zero(n, n);
  L = Matrix::Identity(n, n);
  U = Matrix::Zero(n, n);
  for (int v = 0; v < n; v++)
  {
    P(row_of[v], v) = 1.0;
    Q(v, elim[v]) = 1.0;
  }
  for (const Front &fr : fronts)
  {
    const int s = fr.sep.size(), b = fr.border.size();
    if (s == 0)
    {
      continue;
    }
    const int k0 = elim[fr.sep[0]];
    const Matrix Lf = fr.lu.matrixLU().triangularView<Eigen::UnitLower>();
    const Matrix Uf = fr.lu.matrixLU().triangularView<Eigen::Upper>();
    L.block(k0, k0, s, s) = Lf;
    U.block(k0, k0, s, s) = Uf;
    if (b > 0)
    {
      const Matrix U12 = Uf * fr.X12;
      const Matrix L21 =
          fr.lu.matrixLU().triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(fr.F21);
      for (int i = 0; i < b; i++)
      {
        const int w = fr.border[i];
        U.block(k0, elim[w], s, 1) = U12.col(i);
        L.block(row_of[w], k0, 1, s) = L21.row(i);
      }
    }
  }
}

}  // namespace slabsolve
