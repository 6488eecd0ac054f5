// SPDX-License-Identifier: Apache-2.0

#ifndef SLABSOLVE_PROBLEM_HPP
#define SLABSOLVE_PROBLEM_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>
#include "slabsolve/types.hpp"

namespace slabsolve
{

using ScalarField = std::function<double(const Point &)>;

// -sum_a a_aa(x) d^2u/dx_a^2 + c(x) u. Coefficient callbacks must be pure.
struct EllipticOperator
{
  int dim = 2;
  std::array<ScalarField, 3> diffusion;
  ScalarField reaction;
  std::string name;

  double a(int axis, const Point &x) const { return diffusion[axis](x); }
  double c(const Point &x) const { return reaction(x); }
};

struct BoundaryData
{
  ScalarField dirichlet;
  ScalarField load;
};

struct ReferenceSolution
{
  ScalarField u;
  std::string provenance;
};

struct Problem
{
  EllipticOperator op;
  BoundaryData data;
  std::optional<ReferenceSolution> reference;
  Point box = {1.0, 1.0, 1.0};
};

struct GaussianBump
{
  Point center = {0.0, 0.0, 0.0};
  double width = 0.05;
  double amplitude = 0.5;
};

EllipticOperator make_helmholtz(double kappa, int dim);
EllipticOperator make_variable_coefficient_2d();
// Adds -kappa^2 u to the variable-coefficient operator.
EllipticOperator make_damped_variable_coefficient_2d(double kappa);
// -Lap u - kappa^2 (1 - b) u with b a sum of Gaussian bumps; u = 1 on the boundary.
Problem make_waveguide(double kappa, const std::vector<GaussianBump> &bumps);

// Smooth seeded boundary data: a short trigonometric series, identical for every
// discretization of the same domain.
ScalarField smooth_random_field(int dim, unsigned seed, int terms = 8);

struct ProblemParams
{
  double kappa = 0.0;
  Point source = {-0.5, -0.5, -0.5};
  unsigned data_seed = 7;
  std::vector<GaussianBump> bumps;
};

// laplace2d, laplace3d, vc2d, vc2d_damped, helmholtz2d, helmholtz3d, waveguide2d
Problem make_problem(const std::string &preset, const ProblemParams &params);
std::vector<std::string> problem_presets();

// Max |A u* - g| over the points using the continuous operator applied by central
// differences of step `step`; used to validate manufactured solutions.
double reference_self_check(const Problem &problem, const std::vector<Point> &points,
                            double step = 1e-3);

}  // namespace slabsolve

#endif  // SLABSOLVE_PROBLEM_HPP
