// SPDX-License-Identifier: Apache-2.0

#ifndef SLABSOLVE_DENSE_HPP
#define SLABSOLVE_DENSE_HPP

#include <complex>
#include <vector>
#include "slabsolve/types.hpp"

namespace slabsolve
{

// Thin LAPACK wrappers for the large dense eigen/singular value problems of the studies.
std::vector<std::complex<double>> eigenvalues(const Matrix &A);
Vector symmetric_eigenvalues(const Matrix &A);  // ascending
Vector singular_values(const Matrix &A);         // descending
double spectral_norm(const Matrix &A);
// Number of singular values strictly above tol.
int numerical_rank(const Matrix &A, double tol);

}  // namespace slabsolve

#endif  // SLABSOLVE_DENSE_HPP
