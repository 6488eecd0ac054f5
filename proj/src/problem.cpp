// SPDX-License-Identifier: Apache-2.0

#include "slabsolve/problem.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace slabsolve
{

namespace
{

constexpr double pi = std::numbers::pi;

ScalarField constant(double v)
{
  return [v](const Point &) { return v; };
}

EllipticOperator laplacian(int dim)
{
  EllipticOperator op;
  op.dim = dim;
  for (auto &a : op.diffusion)
  {
    a = constant(1.0);
  }
  op.reaction = constant(0.0);
  op.name = "laplace";
  return op;
}

double radius(const Point &x, const Point &x0, int dim)
{
  double r2 = 0.0;
  for (int a = 0; a < dim; a++)
  {
    r2 += (x[a] - x0[a]) * (x[a] - x0[a]);
  }
  return std::sqrt(r2);
}

}  // namespace

EllipticOperator make_helmholtz(double kappa, int dim)
{
  if (kappa < 0.0)
  {
    throw Error("helmholtz: kappa must be nonnegative");
  }
  if (dim < 1 || dim > 3)
  {
    throw Error("helmholtz: dim must be 1, 2 or 3");
  }
  EllipticOperator op = laplacian(dim);
  op.reaction = constant(-kappa * kappa);
  op.name = kappa == 0.0 ? "laplace" : "helmholtz";
  return op;
}

EllipticOperator make_variable_coefficient_2d()
{
  EllipticOperator op = laplacian(2);
  op.diffusion[0] = [](const Point &x) { return 1.0 + 0.5 * std::cos(2.0 * pi * x[0]); };
  op.diffusion[1] = [](const Point &x)
  { return 1.0 + 0.5 * x[0] * x[0] * std::sin(3.0 * pi * x[1]); };
  op.name = "vc2d";
  return op;
}

EllipticOperator make_damped_variable_coefficient_2d(double kappa)
{
  EllipticOperator op = make_variable_coefficient_2d();
  op.reaction = constant(-kappa * kappa);
  op.name = "vc2d_damped";
  return op;
}

Problem make_waveguide(double kappa, const std::vector<GaussianBump> &bumps)
{
  for (const auto &b : bumps)
  {
    if (!(b.amplitude >= 0.0 && b.amplitude < 1.0))
    {
      throw Error("waveguide: bump amplitude must lie in [0, 1)");
    }
    if (!(b.width > 0.0))
    {
      throw Error("waveguide: bump width must be positive");
    }
  }
  // Overlapping bumps can still push the sum to 1; cap below so 1 - b stays positive.
  auto b = [bumps](const Point &x)
  {
    double s = 0.0;
    for (const auto &bump : bumps)
    {
      const double dx = x[0] - bump.center[0], dy = x[1] - bump.center[1];
      s += bump.amplitude * std::exp(-(dx * dx + dy * dy) / (bump.width * bump.width));
    }
    return std::min(s, 0.99);
  };
  Problem p;
  p.op = laplacian(2);
  const double k2 = kappa * kappa;
  p.op.reaction = [b, k2](const Point &x) { return -k2 * (1.0 - b(x)); };
  p.op.name = "waveguide";
  p.data.dirichlet = constant(1.0);
  p.data.load = constant(0.0);
  return p;
}

ScalarField smooth_random_field(int dim, unsigned seed, int terms)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> freq(-4.0, 4.0), phase(0.0, 2.0 * pi),
      amp(-1.0, 1.0);
  std::vector<std::array<double, 5>> modes(terms);
  for (auto &m : modes)
  {
    m = {amp(rng), freq(rng), freq(rng), dim == 3 ? freq(rng) : 0.0, phase(rng)};
  }
  return [modes](const Point &x)
  {
    double s = 0.0;
    for (const auto &m : modes)
    {
      s += m[0] * std::cos(m[1] * x[0] + m[2] * x[1] + m[3] * x[2] + m[4]);
    }
    return s;
  };
}

std::vector<std::string> problem_presets()
{
  return {"laplace2d", "laplace3d", "vc2d", "vc2d_damped", "helmholtz2d", "helmholtz3d",
          "waveguide2d"};
}

Problem make_problem(const std::string &preset, const ProblemParams &params)
{
  Problem p;
  p.data.load = constant(0.0);
  if (preset == "laplace2d")
  {
    p.op = make_helmholtz(0.0, 2);
    auto u = [](const Point &x) { return std::exp(pi * x[0]) * std::sin(pi * x[1]); };
    p.data.dirichlet = u;
    p.reference = ReferenceSolution{u, "harmonic exp(pi x) sin(pi y)"};
  }
  else if (preset == "laplace3d")
  {
    p.op = make_helmholtz(0.0, 3);
    auto u = [](const Point &x)
    { return std::exp(std::sqrt(2.0) * x[0]) * std::cos(x[1]) * std::cos(x[2]); };
    p.data.dirichlet = u;
    p.reference = ReferenceSolution{u, "harmonic exp(sqrt2 x) cos y cos z"};
  }
  else if (preset == "vc2d")
  {
    p.op = make_variable_coefficient_2d();
    p.data.dirichlet = smooth_random_field(2, params.data_seed);
  }
  else if (preset == "vc2d_damped")
  {
    p.op = make_damped_variable_coefficient_2d(params.kappa);
    p.data.dirichlet = smooth_random_field(2, params.data_seed);
  }
  else if (preset == "helmholtz2d")
  {
    p.op = make_helmholtz(params.kappa, 2);
    const double k = params.kappa;
    auto u = [k](const Point &x) { return std::cos(k * (0.6 * x[0] + 0.8 * x[1]) + 0.3); };
    p.data.dirichlet = u;
    p.reference = ReferenceSolution{u, "plane wave"};
  }
  else if (preset == "helmholtz3d")
  {
    p.op = make_helmholtz(params.kappa, 3);
    const double k = params.kappa;
    const Point x0 = params.source;
    auto u = [k, x0](const Point &x)
    {
      const double r = radius(x, x0, 3);
      return std::cos(k * r) / r;
    };
    p.data.dirichlet = u;
    p.reference = ReferenceSolution{u, "exterior point source cos(kr)/r"};
  }
  else if (preset == "waveguide2d")
  {
    p = make_waveguide(params.kappa, params.bumps);
  }
  else
  {
    throw Error("unknown problem preset '" + preset + "'");
  }
  return p;
}

double reference_self_check(const Problem &problem, const std::vector<Point> &points,
                            double step)
{
  if (!problem.reference)
  {
    throw Error("reference_self_check: problem has no reference solution");
  }
  const auto &u = problem.reference->u;
  const auto &op = problem.op;
  double worst = 0.0;
  for (const auto &x : points)
  {
    double au = op.c(x) * u(x);
    for (int a = 0; a < op.dim; a++)
    {
      // fourth-order central second difference
      auto shifted = [&](double d)
      {
        Point y = x;
        y[a] += d;
        return u(y);
      };
      const double d2 = (-shifted(2 * step) + 16 * shifted(step) - 30 * u(x) +
                         16 * shifted(-step) - shifted(-2 * step)) /
                        (12 * step * step);
      au -= op.a(a, x) * d2;
    }
    worst = std::max(worst, std::abs(au - problem.data.load(x)));
  }
  return worst;
}

}  // namespace slabsolve
