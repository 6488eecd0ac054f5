// SPDX-License-Identifier: Apache-2.0

#ifndef SLABSOLVE_SPARSE_HPP
#define SLABSOLVE_SPARSE_HPP

#include <memory>
#include <vector>
#include "slabsolve/types.hpp"

namespace slabsolve
{

struct FactorStats
{
  long factor_nonzeros = 0;   // entries kept in the factors
  long peak_front = 0;        // largest dense front dimension
  long fronts = 0;
  double seconds = 0.0;
};

// Multifrontal LU of a square sparse matrix under a geometric nested-dissection ordering.
// Points give each row a location; any coordinates work, but grid geometry gives small
// separators.
class SparseLU
{
public:
  struct Options
  {
    int leaf_size = 64;
    // Pivot magnitude (relative to max |A_ij|) below which the matrix is declared singular.
    double singular_tol = 1e-12;
  };

  SparseLU(const Csr &A, const std::vector<Point> &points);
  SparseLU(const Csr &A, const std::vector<Point> &points, const Options &opts);
  ~SparseLU();
  SparseLU(SparseLU &&) noexcept;
  SparseLU &operator=(SparseLU &&) noexcept;

  int size() const { return n; }
  const FactorStats &stats() const { return st; }
  // Elimination order: position k holds the row eliminated k-th.
  const std::vector<int> &ordering() const { return order; }

  Matrix solve(const Matrix &B) const;
  Matrix solve_adjoint(const Matrix &B) const;
  Vector solve(const Vector &b) const;
  Vector solve_adjoint(const Vector &b) const;

  // Dense L and U (with the row permutation P, P A Q = L U) for small matrices.
  // Q is the elimination ordering. Intended for tests only.
  void dense_factors(Matrix &P, Matrix &L, Matrix &U, Matrix &Q) const;

private:
  struct Front;
  int n = 0;
  std::vector<Front> fronts;
  std::vector<int> order;
  FactorStats st;

  void factorize(const Csr &A, const std::vector<Point> &points, const Options &opts);
};

}  // namespace slabsolve

#endif  // SLABSOLVE_SPARSE_HPP
