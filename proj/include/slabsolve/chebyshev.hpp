// SPDX-License-Identifier: Apache-2.0

#ifndef SLABSOLVE_CHEBYSHEV_HPP
#define SLABSOLVE_CHEBYSHEV_HPP

#include "slabsolve/types.hpp"

namespace slabsolve
{

// Chebyshev extreme points on [-1, 1] in increasing order: t_i = -cos(pi i / (p-1)).
Vector chebyshev_points(int p);

// First-derivative matrix on chebyshev_points(p), from barycentric weights.
Matrix chebyshev_derivative(int p);

// Quadrature weights for chebyshev_points(p) on [-1, 1].
Vector clenshaw_curtis_weights(int p);

// Rows: barycentric interpolation from nodes to targets (both on [-1, 1]).
Matrix barycentric_interpolation(const Vector &nodes, const Vector &targets);

}  // namespace slabsolve

#endif  // SLABSOLVE_CHEBYSHEV_HPP
