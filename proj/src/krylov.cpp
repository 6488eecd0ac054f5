// SPDX-License-Identifier: Apache-2.0

#include "slabsolve/krylov.hpp"

#include <cmath>

namespace slabsolve
{

Vector gmres(const LinearOperator &A, const Vector &b, double tol, int max_iter,
             GmresReport &report)
{
  Stopwatch clock;
  report = GmresReport{};
  report.tolerance = tol;
  const int n = b.size();
  const double bnorm = b.norm();
  if (!std::isfinite(bnorm))
  {
    throw Error("gmres: right-hand side is not finite");
  }
  if (bnorm == 0.0)
  {
    report.converged = true;
    report.history = {0.0};
    return Vector::Zero(n);
  }
  report.history.push_back(1.0);

  const int m = std::max(1, std::min(max_iter, n));
  std::vector<Vector> Q;
  Q.reserve(m + 1);
  Matrix H = Matrix::Zero(m + 1, m);
  Vector cs = Vector::Zero(m), sn = Vector::Zero(m), g = Vector::Zero(m + 1);
  Q.push_back(b / bnorm);
  g(0) = bnorm;

  int k = 0;
  double rel = 1.0;
  bool breakdown = false;
  while (k < m && rel > tol)
  {
    Vector w = A(Q[k]);
    if (w.size() != n)
    {
      throw Error("gmres: operator returned a vector of the wrong length");
    }
    const double before = w.norm();
    for (int i = 0; i <= k; i++)
    {
      H(i, k) = Q[i].dot(w);
      w -= H(i, k) * Q[i];
    }
    if (w.norm() < 0.7 * before)
    {
      for (int i = 0; i <= k; i++)
      {
        const double c = Q[i].dot(w);
        H(i, k) += c;
        w -= c * Q[i];
      }
    }
    const double h = w.norm();
    if (!std::isfinite(h))
    {
      throw Error("gmres: non-finite value in the Arnoldi process");
    }
    H(k + 1, k) = h;
    breakdown = h <= 1e-14 * before;
    if (!breakdown)
    {
      Q.push_back(w / h);
    }

    for (int i = 0; i < k; i++)
    {
      const double t = cs(i) * H(i, k) + sn(i) * H(i + 1, k);
      H(i + 1, k) = -sn(i) * H(i, k) + cs(i) * H(i + 1, k);
      H(i, k) = t;
    }
    const double r = std::hypot(H(k, k), H(k + 1, k));
    cs(k) = r > 0.0 ? H(k, k) / r : 1.0;
    sn(k) = r > 0.0 ? H(k + 1, k) / r : 0.0;
    H(k, k) = r;
    H(k + 1, k) = 0.0;
    g(k + 1) = -sn(k) * g(k);
    g(k) = cs(k) * g(k);
    k++;
    rel = std::abs(g(k)) / bnorm;
    report.history.push_back(rel);
    if (breakdown)
    {
      // invariant subspace reached: the current iterate is exact
      rel = 0.0;
      break;
    }
  }

  const Vector y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
  Vector x = Vector::Zero(n);
  for (int i = 0; i < k; i++)
  {
    x += y(i) * Q[i];
  }
  if (!x.allFinite())
  {
    throw Error("gmres: solution is not finite");
  }
  report.iterations = k;
  report.residual = report.history.back();
  report.converged = rel <= tol;
  report.true_residual = (b - A(x)).norm() / bnorm;
  double worst = 0.0;
  // newest vectors against the whole basis: loss of orthogonality shows up there first
  for (size_t i = Q.size() > 32 ? Q.size() - 32 : 0; i < Q.size(); i++)
  {
    for (size_t j = 0; j <= i; j++)
    {
      worst = std::max(worst, std::abs(Q[i].dot(Q[j]) - (i == j ? 1.0 : 0.0)));
    }
  }
  report.orthogonality = worst;
  report.seconds = clock.seconds();
  return x;
}

}  // namespace slabsolve
