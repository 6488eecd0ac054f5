// SPDX-License-Identifier: Apache-2.0

#ifndef SLABSOLVE_ANALYSIS_HPP
#define SLABSOLVE_ANALYSIS_HPP

#include <complex>
#include <string>
#include <vector>
#include "slabsolve/discretize.hpp"
#include "slabsolve/hbs.hpp"
#include "slabsolve/slabs.hpp"

namespace slabsolve
{

// T = A(J,J) - A(J,Jc) A(Jc,Jc)^{-1} A(Jc,J) over the index list J of a square matrix.
Matrix schur_complement(const Csr &A, const std::vector<Point> &points,
                        const std::vector<int> &J);

struct DenseReduced
{
  Matrix T;
  Matrix S;  // blockdiag(T_jj)^{-1} T
  std::vector<int> offsets;
  std::vector<int> nodes;  // global grid nodes of J_Gamma
};

// Eliminates every interior unknown off the interfaces of a global system.
DenseReduced schur_reduce(const SparseSystem &global, const SlabDecomposition &decomp,
                          long cap = 40000);
// S from T and block offsets.
Matrix block_jacobi(const Matrix &T, const std::vector<int> &offsets);

struct Projections
{
  Matrix P1, P2;
  std::vector<int> red, black;  // J_Gamma positions
};

// P1 = E_r T_rr^{-1} E_r^T T for even interfaces (red), P2 likewise for odd ones.
// Refuses when T is not symmetric positive definite.
Projections red_black_projections(const Matrix &T, const std::vector<int> &offsets);

struct NormalityReport
{
  double block_difference = 0.0;  // ||S_{j,j-1} - S_{j-1,j}^T||_2 at the interface nearest the middle
  double eig_sv_gap = 0.0;        // max_i ||lambda_i| - sigma_i|, both sorted descending
  double kappa_rho = 0.0;
  double kappa_2 = 0.0;
  double ratio_minus_one = 0.0;   // kappa_2 / kappa_rho - 1
  int interface = 0;
};

// Applies the similarity diag(w) S diag(w)^{-1} first when weights are given.
NormalityReport normality_report(const Matrix &S, const std::vector<int> &offsets,
                                 const std::vector<double> &interface_x,
                                 const Vector &weights = Vector());

std::vector<std::complex<double>> spectrum(const Matrix &A);
double spectral_radius(const Matrix &A);

enum class Admissibility
{
  weak,
  strong
};

std::string to_string(Admissibility a);

struct ClusterRank
{
  int node = 0;
  int rank = 0;
  int rows = 0, far_cols = 0;
};

// Ranks of M(I_tau, I_far(tau)) for every cluster on a tree level. Weak: far field is the
// complement. Strong: clusters on the same level whose boxes do not touch.
std::vector<ClusterRank> rank_study(const Matrix &M, const ClusterTree &tree, int level,
                                    Admissibility adm, double tol);

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double> &x, const std::vector<double> &y);

}  // namespace slabsolve

#endif  // SLABSOLVE_ANALYSIS_HPP
