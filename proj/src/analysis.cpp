// SPDX-License-Identifier: Apache-2.0

#include "slabsolve/analysis.hpp"

#include <algorithm>
#include <cmath>
#include "slabsolve/dense.hpp"
#include "slabsolve/sparse.hpp"

namespace slabsolve
{

namespace
{

using Triplets = std::vector<Eigen::Triplet<double, int>>;

}  // namespace

Matrix schur_complement(const Csr &A, const std::vector<Point> &points,
                        const std::vector<int> &J)
{
  const int n = A.rows();
  std::vector<int> where(n, -1);  // >= 0: position in J; < 0: -(position in Jc) - 1
  for (size_t i = 0; i < J.size(); i++)
  {
    if (J[i] < 0 || J[i] >= n || where[J[i]] >= 0)
    {
      throw Error("schur_complement: invalid or repeated index in J");
    }
    where[J[i]] = static_cast<int>(i);
  }
  std::vector<int> Jc;
  std::vector<Point> pc;
  for (int v = 0; v < n; v++)
  {
    if (where[v] < 0)
    {
      where[v] = -static_cast<int>(Jc.size()) - 1;
      Jc.push_back(v);
      pc.push_back(points[v]);
    }
  }
  const int nj = J.size(), nc = Jc.size();
  Triplets tJJ, tJC, tCJ, tCC;
  for (int r = 0; r < n; r++)
  {
    for (Csr::InnerIterator it(A, r); it; ++it)
    {
      const int a = where[r], b = where[it.col()];
      if (a >= 0 && b >= 0)
      {
        tJJ.emplace_back(a, b, it.value());
      }
      else if (a >= 0)
      {
        tJC.emplace_back(a, -b - 1, it.value());
      }
      else if (b >= 0)
      {
        tCJ.emplace_back(-a - 1, b, it.value());
      }
      else
      {
        tCC.emplace_back(-a - 1, -b - 1, it.value());
      }
    }
  }
  Csr AJJ(nj, nj), AJC(nj, nc), ACJ(nc, nj), ACC(nc, nc);
  AJJ.setFromTriplets(tJJ.begin(), tJJ.end());
  AJC.setFromTriplets(tJC.begin(), tJC.end());
  ACJ.setFromTriplets(tCJ.begin(), tCJ.end());
  ACC.setFromTriplets(tCC.begin(), tCC.end());
  Matrix T = Matrix(AJJ);
  if (nc == 0)
  {
    return T;
  }
  const SparseLU lu(ACC, pc);
  const Matrix CJ = Matrix(ACJ);
  constexpr int chunk = 256;
  for (int c0 = 0; c0 < nj; c0 += chunk)
  {
    const int w = std::min(chunk, nj - c0);
    const Matrix X = lu.solve(Matrix(CJ.middleCols(c0, w)));
    T.middleCols(c0, w) -= AJC * X;
  }
  return T;
}

Matrix block_jacobi(const Matrix &T, const std::vector<int> &offsets)
{
  Matrix S(T.rows(), T.cols());
  for (size_t j = 0; j + 1 < offsets.size(); j++)
  {
    const int a = offsets[j], n = offsets[j + 1] - offsets[j];
    Eigen::PartialPivLU<Matrix> lu(T.block(a, a, n, n));
    S.middleRows(a, n) = lu.solve(T.middleRows(a, n));
  }
  return S;
}

DenseReduced schur_reduce(const SparseSystem &global, const SlabDecomposition &decomp,
                          long cap)
{
  const Grid &grid = global.grid;
  if (static_cast<long>(grid.interior().size()) > cap)
  {
    throw Error("schur_reduce: " + std::to_string(grid.interior().size()) +
                " interior unknowns exceed the dense oracle cap of " + std::to_string(cap));
  }
  DenseReduced out;
  out.nodes = global_interface_nodes(decomp, grid);
  out.offsets.push_back(0);
  for (size_t i = 0; i < out.nodes.size(); i++)
  {
    if (i > 0 && grid.lattice(out.nodes[i])[0] != grid.lattice(out.nodes[i - 1])[0])
    {
      out.offsets.push_back(static_cast<int>(i));
    }
  }
  out.offsets.push_back(static_cast<int>(out.nodes.size()));
  if (static_cast<int>(out.offsets.size()) != decomp.count() + 1)
  {
    throw Error("schur_reduce: interface blocks do not match the decomposition");
  }
  std::vector<int> J;
  for (int n : out.nodes)
  {
    J.push_back(grid.local_index(n));
  }
  std::vector<Point> pts;
  for (int n : grid.interior())
  {
    pts.push_back(grid.coord(n));
  }
  out.T = schur_complement(global.interior_block(), pts, J);
  out.S = block_jacobi(out.T, out.offsets);
  return out;
}

Projections red_black_projections(const Matrix &T, const std::vector<int> &offsets)
{
  const double scale = T.cwiseAbs().maxCoeff();
  if ((T - T.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
  {
    throw Error("red_black_projections: T is not symmetric");
  }
  Eigen::LLT<Matrix> llt(T);
  if (llt.info() != Eigen::Success)
  {
    throw Error("red_black_projections: T is not positive definite");
  }
  Projections out;
  for (size_t j = 0; j + 1 < offsets.size(); j++)
  {
    auto &list = j % 2 == 0 ? out.red : out.black;
    for (int i = offsets[j]; i < offsets[j + 1]; i++)
    {
      list.push_back(i);
    }
  }
  auto project = [&](const std::vector<int> &idx)
  {
    const int m = idx.size();
    Matrix Tcc(m, m), Tc(m, T.cols());
    for (int a = 0; a < m; a++)
    {
      Tc.row(a) = T.row(idx[a]);
      for (int b = 0; b < m; b++)
      {
        Tcc(a, b) = T(idx[a], idx[b]);
      }
    }
    const Matrix X = Eigen::LLT<Matrix>(Tcc).solve(Tc);
    Matrix P = Matrix::Zero(T.rows(), T.cols());
    for (int a = 0; a < m; a++)
    {
      P.row(idx[a]) = X.row(a);
    }
    return P;
  };
  out.P1 = project(out.red);
  out.P2 = project(out.black);
  return out;
}

NormalityReport normality_report(const Matrix &S_in, const std::vector<int> &offsets,
                                 const std::vector<double> &interface_x,
                                 const Vector &weights)
{
  Matrix S = S_in;
  if (weights.size() > 0)
  {
    if (weights.size() != S.rows())
    {
      throw Error("normality_report: weight vector has the wrong length");
    }
    S = weights.asDiagonal() * S * weights.cwiseInverse().asDiagonal();
  }
  NormalityReport r;
  const int N = static_cast<int>(offsets.size()) - 1;
  if (N >= 2)
  {
    int best = 1;
    for (int j = 1; j < N; j++)
    {
      if (std::abs(interface_x[j] - 0.5) < std::abs(interface_x[best] - 0.5))
      {
        best = j;
      }
    }
    r.interface = best;
    const int a = offsets[best - 1], na = offsets[best] - a;
    const int b = offsets[best], nb = offsets[best + 1] - b;
    const Matrix lower = S.block(b, a, nb, na);
    const Matrix upper = S.block(a, b, na, nb);
    r.block_difference = spectral_norm(lower - upper.transpose());
  }
  const auto lambda = eigenvalues(S);
  std::vector<double> mod(lambda.size());
  for (size_t i = 0; i < lambda.size(); i++)
  {
    mod[i] = std::abs(lambda[i]);
  }
  std::sort(mod.begin(), mod.end(), std::greater<>());
  const Vector sigma = singular_values(S);
  for (size_t i = 0; i < mod.size(); i++)
  {
    r.eig_sv_gap = std::max(r.eig_sv_gap, std::abs(mod[i] - sigma(i)));
  }
  r.kappa_rho = mod.front() / mod.back();
  r.kappa_2 = sigma(0) / sigma(sigma.size() - 1);
  r.ratio_minus_one = r.kappa_2 / r.kappa_rho - 1.0;
  return r;
}

std::vector<std::complex<double>> spectrum(const Matrix &A)
{
  return eigenvalues(A);
}

double spectral_radius(const Matrix &A)
{
  double r = 0.0;
  for (const auto &l : eigenvalues(A))
  {
    r = std::max(r, std::abs(l));
  }
  return r;
}

std::string to_string(Admissibility a)
{
  return a == Admissibility::weak ? "weak" : "strong";
}

std::vector<ClusterRank> rank_study(const Matrix &M, const ClusterTree &tree, int level,
                                    Admissibility adm, double tol)
{
  if (M.rows() != tree.size() || M.cols() != tree.size())
  {
    throw Error("rank_study: matrix does not match the cluster tree");
  }
  if (level < 1 || level > tree.levels())
  {
    throw Error("rank_study: level out of range");
  }
  const auto &ids = tree.level(level);
  auto touches = [&](int a, int b)
  {
    const auto &na = tree.node(a), &nb = tree.node(b);
    const double eps = 1e-12;
    for (int d = 0; d < tree.dims(); d++)
    {
      if (na.lo[d] > nb.hi[d] + eps || nb.lo[d] > na.hi[d] + eps)
      {
        return false;
      }
    }
    return true;
  };
  std::vector<ClusterRank> out;
  for (int id : ids)
  {
    const std::vector<int> rows = tree.indices(id);
    std::vector<int> far;
    for (int other : ids)
    {
      if (other == id || (adm == Admissibility::strong && touches(id, other)))
      {
        continue;
      }
      const auto cols = tree.indices(other);
      far.insert(far.end(), cols.begin(), cols.end());
    }
    Matrix sub(rows.size(), far.size());
    for (size_t c = 0; c < far.size(); c++)
    {
      for (size_t r = 0; r < rows.size(); r++)
      {
        sub(r, c) = M(rows[r], far[c]);
      }
    }
    ClusterRank cr;
    cr.node = id;
    cr.rows = rows.size();
    cr.far_cols = far.size();
    cr.rank = far.empty() ? 0 : numerical_rank(sub, tol);
    out.push_back(cr);
  }
  return out;
}

double loglog_slope(const std::vector<double> &x, const std::vector<double> &y)
{
  if (x.size() != y.size() || x.size() < 2)
  {
    throw Error("loglog_slope: need at least two matching points");
  }
  const int n = x.size();
  double mx = 0, my = 0;
  for (int i = 0; i < n; i++)
  {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < n; i++)
  {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace slabsolve
