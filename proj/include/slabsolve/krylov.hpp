// SPDX-License-Identifier: Apache-2.0

#ifndef SLABSOLVE_KRYLOV_HPP
#define SLABSOLVE_KRYLOV_HPP

#include <functional>
#include <vector>
#include "slabsolve/types.hpp"

namespace slabsolve
{

struct GmresReport
{
  int iterations = 0;
  bool converged = false;
  double tolerance = 0.0;
  double residual = 0.0;           // final relative residual (recurrence estimate)
  double true_residual = 0.0;      // ||b - A x|| / ||b|| recomputed at exit
  std::vector<double> history;     // relative residual after each iteration, [0] = 1
  double seconds = 0.0;
  double orthogonality = 0.0;      // max |Q^T Q - I|, newest 32 basis vectors vs all
};

using LinearOperator = std::function<Vector(const Vector &)>;

// Non-restarted GMRES, modified Gram-Schmidt with one reorthogonalization pass when the
// new vector loses more than 30% of its norm, Givens rotations on the Hessenberg matrix.
Vector gmres(const LinearOperator &A, const Vector &b, double tol, int max_iter,
             GmresReport &report);

}  // namespace slabsolve

#endif  // SLABSOLVE_KRYLOV_HPP
