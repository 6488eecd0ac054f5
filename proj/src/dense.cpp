// SPDX-License-Identifier: Apache-2.0

#include "slabsolve/dense.hpp"

#include <lapacke.h>
#include <string>

namespace slabsolve
{

namespace
{

void check(lapack_int info, const char *what)
{
  if (info != 0)
  {
    throw Error(std::string(what) + " failed with info = " + std::to_string(info));
  }
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Matrix &A)
{
  if (A.rows() != A.cols())
  {
    throw Error("eigenvalues: matrix is not square");
  }
  const lapack_int n = A.rows();
  if (n == 0)
  {
    return {};
  }
  Matrix a = A;
  Vector wr(n), wi(n);
  check(LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, wr.data(), wi.data(),
                      nullptr, 1, nullptr, 1),
        "dgeev");
  std::vector<std::complex<double>> out(n);
  for (lapack_int i = 0; i < n; i++)
  {
    out[i] = {wr(i), wi(i)};
  }
  return out;
}

Vector symmetric_eigenvalues(const Matrix &A)
{
  if (A.rows() != A.cols())
  {
    throw Error("symmetric_eigenvalues: matrix is not square");
  }
  const lapack_int n = A.rows();
  Vector w(n);
  if (n == 0)
  {
    return w;
  }
  Matrix a = A;
  check(LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', n, a.data(), n, w.data()), "dsyevd");
  return w;
}

Vector singular_values(const Matrix &A)
{
  const lapack_int m = A.rows(), n = A.cols();
  const lapack_int k = std::min(m, n);
  Vector s(k);
  if (k == 0)
  {
    return s;
  }
  Matrix a = A;
  check(LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), m, s.data(), nullptr, 1,
                       nullptr, 1),
        "dgesdd");
  return s;
}

double spectral_norm(const Matrix &A)
{
  const Vector s = singular_values(A);
  return s.size() > 0 ? s(0) : 0.0;
}

int numerical_rank(const Matrix &A, double tol)
{
  const Vector s = singular_values(A);
  int r = 0;
  for (int i = 0; i < s.size(); i++)
  {
    r += s(i) > tol;
  }
  return r;
}

}  // namespace slabsolve
