// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include "slabsolve/chebyshev.hpp"
#include "slabsolve/dense.hpp"
#include "slabsolve/discretize.hpp"
#include "slabsolve/equilibrium.hpp"

using namespace slabsolve;

namespace
{

const double pi = 3.14159265358979323846;

// Dense value of A(r, c) for a row-major sparse matrix.
double entry(const Csr &A, int r, int c)
{
  return A.coeff(r, c);
}

}  // namespace

TEST(Chebyshev, ClenshawCurtisSmallRules)
{
  const Vector w2 = clenshaw_curtis_weights(2);
  EXPECT_NEAR(w2(0), 1.0, 1e-15);
  EXPECT_NEAR(w2(1), 1.0, 1e-15);
  const Vector w3 = clenshaw_curtis_weights(3);
  EXPECT_NEAR(w3(0), 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(w3(1), 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(w3(2), 1.0 / 3.0, 1e-15);
}

TEST(Chebyshev, ClenshawCurtisExactness)
{
  for (int p = 2; p <= 17; p++)
  {
    const Vector w = clenshaw_curtis_weights(p);
    const Vector t = chebyshev_points(p);
    EXPECT_NEAR(w.sum(), 2.0, 1e-13) << p;
    EXPECT_GT(w.minCoeff(), 0.0);
    if (p >= 3)
    {
      EXPECT_NEAR(w.dot(t.cwiseProduct(t)), 2.0 / 3.0, 1e-13) << p;
    }
  }
}

TEST(Chebyshev, DerivativeExactOnPolynomials)
{
  const int p = 9;
  const Vector t = chebyshev_points(p);
  const Matrix D = chebyshev_derivative(p);
  Vector u(p), du(p);
  for (int i = 0; i < p; i++)
  {
    u(i) = std::pow(t(i), 7) - 2 * t(i);
    du(i) = 7 * std::pow(t(i), 6) - 2;
  }
  EXPECT_LT((D * u - du).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Chebyshev, Interpolation)
{
  const Vector t = chebyshev_points(8);
  Vector targets(3);
  targets << -0.3, 0.1, 0.77;
  const Matrix P = barycentric_interpolation(t, targets);
  const Vector u = t.array().cube();
  const Vector v = P * u;
  for (int i = 0; i < 3; i++)
  {
    EXPECT_NEAR(v(i), std::pow(targets(i), 3), 1e-14);
  }
}

TEST(Fd, OneDimensionalStencil)
{
  const double h = 0.25;
  const auto disc = Discretization::fd(1, {1.0, 1.0, 1.0}, h);
  const auto sys = assemble_fd(make_helmholtz(0.0, 1), disc, full_region(disc));
  const Csr A = sys.interior_block();
  ASSERT_EQ(A.rows(), 3);
  EXPECT_DOUBLE_EQ(entry(A, 1, 0), -1.0 / (h * h));
  EXPECT_DOUBLE_EQ(entry(A, 1, 1), 2.0 / (h * h));
  EXPECT_DOUBLE_EQ(entry(A, 1, 2), -1.0 / (h * h));
}

TEST(Fd, OneDimensionalDirichletElimination)
{
  const double h = 0.25;
  const auto disc = Discretization::fd(1, {1.0, 1.0, 1.0}, h);
  const auto sys = assemble_fd(make_helmholtz(0.0, 1), disc, full_region(disc));
  BoundaryData data{[](const Point &x) { return x[0] == 0.0 ? 1.0 : 0.0; },
                    [](const Point &) { return 0.0; }};
  const Vector b = build_rhs(data, sys);
  ASSERT_EQ(b.size(), 3);
  EXPECT_DOUBLE_EQ(b(0), 1.0 / (h * h));
  EXPECT_EQ(b(1), 0.0);
  EXPECT_EQ(b(2), 0.0);
}

TEST(Fd, RhsFromLoadAndZeroData)
{
  const auto disc = Discretization::fd(2, {1.0, 1.0, 1.0}, 0.125);
  const auto sys = assemble_fd(make_helmholtz(0.0, 2), disc, full_region(disc));
  BoundaryData zero{[](const Point &) { return 0.0; }, [](const Point &) { return 0.0; }};
  EXPECT_EQ(build_rhs(zero, sys).cwiseAbs().maxCoeff(), 0.0);
  BoundaryData unit{[](const Point &) { return 0.0; }, [](const Point &) { return 1.0; }};
  const Vector b = build_rhs(unit, sys);
  EXPECT_EQ(b.size(), 49);
  EXPECT_EQ(b.minCoeff(), 1.0);
  EXPECT_EQ(b.maxCoeff(), 1.0);
}

TEST(Fd, LaplaceRowSumsAndSigns)
{
  const auto disc = Discretization::fd(2, {1.0, 1.0, 1.0}, 0.1);
  const auto sys = assemble_fd(make_helmholtz(0.0, 2), disc, full_region(disc));
  for (int n : sys.grid.interior())
  {
    double sum = 0.0;
    bool all_interior = true;
    for (Csr::InnerIterator it(sys.matrix, n); it; ++it)
    {
      sum += it.value();
      if (it.col() != n)
      {
        EXPECT_LE(it.value(), 0.0);
        all_interior = all_interior && sys.grid.is_interior(it.col());
      }
    }
    EXPECT_GE(sum, -1e-9);
    if (all_interior)
    {
      EXPECT_NEAR(sum, 0.0, 1e-9);
    }
  }
}

TEST(Fd, VariableCoefficientCoupling)
{
  const double h = 0.125;
  const auto disc = Discretization::fd(2, {1.0, 1.0, 1.0}, h);
  const auto sys = assemble_fd(make_variable_coefficient_2d(), disc, full_region(disc));
  const int n = sys.grid.find({2, 3, 0});  // (0.25, 0.375)
  ASSERT_GE(n, 0);
  EXPECT_NEAR(entry(sys.matrix, n, sys.grid.find({1, 3, 0})), -1.0 / (h * h), 1e-12);
  EXPECT_NEAR(entry(sys.matrix, n, sys.grid.find({3, 3, 0})), -1.0 / (h * h), 1e-12);
}

TEST(Fd, LaplaceIsSymmetricPositiveDefinite)
{
  const auto disc = Discretization::fd(2, {1.0, 1.0, 1.0}, 1.0 / 12);
  const auto sys = assemble_fd(make_helmholtz(0.0, 2), disc, full_region(disc));
  const Matrix A = Matrix(sys.interior_block());
  EXPECT_LT((A - A.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_GT(symmetric_eigenvalues(A)(0), 0.0);
}

TEST(Fd, NonCommensurateSpacing)
{
  EXPECT_THROW(Discretization::fd(2, {1.0, 1.0, 1.0}, 0.3), Error);
}

TEST(Hps, CellBoundaryCheck)
{
  const auto disc = Discretization::hps(2, {1.0, 1.0, 1.0}, {4, 4, 1}, 6);
  EXPECT_EQ(disc.to_units(0, 0.5, "interface"), 2);
  EXPECT_THROW(disc.to_units(0, 0.3, "interface"), Error);
  EXPECT_THROW(Discretization::hps(2, {1.0, 1.0, 1.0}, {2, 2, 1}, 3), Error);
}

TEST(Hps, ActiveNodeCounts)
{
  for (int p : {4, 6, 9})
  {
    for (Lattice cells : {Lattice{1, 1, 1}, Lattice{2, 3, 1}, Lattice{4, 2, 1}})
    {
      const auto disc = Discretization::hps(2, {1.0, 1.0, 1.0}, cells, p);
      const Grid grid(disc, full_region(disc));
      EXPECT_EQ(grid.size(), expected_active_nodes(disc, full_region(disc)));
    }
    const auto d3 = Discretization::hps(3, {1.0, 1.0, 1.0}, {2, 2, 3}, p);
    EXPECT_EQ(Grid(d3, full_region(d3)).size(), expected_active_nodes(d3, full_region(d3)));
  }
  // one 6x6 cell: 16 interior + 4 * 4 edge nodes, corners dropped
  const auto single = Discretization::hps(2, {1.0, 1.0, 1.0}, {1, 1, 1}, 6);
  EXPECT_EQ(Grid(single, full_region(single)).size(), 32);
  const auto fd = Discretization::fd(3, {1.0, 1.0, 1.0}, 0.25);
  EXPECT_EQ(Grid(fd, full_region(fd)).size(), expected_active_nodes(fd, full_region(fd)));
}

TEST(Hps, LinearFunctionsAreExact)
{
  const auto disc = Discretization::hps(2, {1.0, 1.0, 1.0}, {3, 2, 1}, 7);
  const auto sys = assemble_hps(make_helmholtz(0.0, 2), disc, full_region(disc));
  Vector u(sys.grid.size());
  for (int n = 0; n < sys.grid.size(); n++)
  {
    u(n) = sys.grid.coord(n)[0] - 2 * sys.grid.coord(n)[1];
  }
  const Vector r = sys.matrix * u;
  for (int n : sys.grid.interior())
  {
    double scale = 0.0;
    for (Csr::InnerIterator it(sys.matrix, n); it; ++it)
    {
      scale = std::max(scale, std::abs(it.value()));
    }
    EXPECT_LT(std::abs(r(n)) / scale, 1e-12);
  }
}

namespace
{

double sine_residual(int p)
{
  const auto disc = Discretization::hps(2, {1.0, 1.0, 1.0}, {2, 2, 1}, p);
  const auto sys = assemble_hps(make_helmholtz(0.0, 2), disc, full_region(disc));
  auto u = [](const Point &x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); };
  auto g = [&](const Point &x) { return 2 * pi * pi * u(x); };
  Vector v(sys.grid.size());
  for (int n = 0; n < sys.grid.size(); n++)
  {
    v(n) = u(sys.grid.coord(n));
  }
  const Vector r = sys.matrix * v;
  const Vector load = interior_load(g, sys.grid);
  double worst = 0.0;
  for (size_t i = 0; i < sys.grid.interior().size(); i++)
  {
    worst = std::max(worst, std::abs(r(sys.grid.interior()[i]) - load(i)));
  }
  return worst;
}

}  // namespace

TEST(Hps, SpectralResidualOfSmoothSolution)
{
  // p counts nodes per direction. Ten nodes (degree 9) leave 1.62e-7; degree 10 is
  // below 1e-8. Values frozen from the analytic -Lap u* comparison.
  EXPECT_NEAR(sine_residual(10), 1.624e-7, 0.01e-7);
  EXPECT_LT(sine_residual(11), 1e-8);
  double prev = sine_residual(6);
  for (int p = 7; p <= 13; p++)
  {
    const double r = sine_residual(p);
    EXPECT_LT(r, prev / 5) << p;
    prev = r;
  }
}

TEST(Hps, InterfaceWeightsArePositive)
{
  const auto disc = Discretization::hps(3, {1.0, 1.0, 1.0}, {2, 2, 2}, 5);
  const Grid grid(disc, full_region(disc));
  std::vector<int> plane;
  for (int n : grid.plane(4))
  {
    if (grid.is_interior(n))
    {
      plane.push_back(n);
    }
  }
  const Vector w = interface_weights(grid, plane);
  EXPECT_GT(w.minCoeff(), 0.0);
  // squared weights integrate the unit face
  EXPECT_NEAR(w.squaredNorm(), 1.0, 0.2);
}

TEST(Backends, ManufacturedConvergence)
{
  const Problem pb = make_problem("laplace2d", {});
  std::vector<double> fd_err;
  for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32})
  {
    const auto field = solve_global(pb, Discretization::fd(2, pb.box, h));
    double e = 0.0;
    for (int n = 0; n < field.grid.size(); n++)
    {
      e = std::max(e, std::abs(field.values(n) - pb.reference->u(field.grid.coord(n))));
    }
    fd_err.push_back(e);
  }
  for (size_t i = 1; i < fd_err.size(); i++)
  {
    EXPECT_NEAR(std::log2(fd_err[i - 1] / fd_err[i]), 2.0, 0.2);
  }
  std::vector<double> hps_err;
  for (int p : {6, 8, 10, 12})
  {
    const auto field = solve_global(pb, Discretization::hps(2, pb.box, {2, 2, 1}, p));
    double e = 0.0;
    for (int n = 0; n < field.grid.size(); n++)
    {
      e = std::max(e, std::abs(field.values(n) - pb.reference->u(field.grid.coord(n))));
    }
    hps_err.push_back(e);
  }
  for (size_t i = 1; i < hps_err.size(); i++)
  {
    EXPECT_LT(hps_err[i], hps_err[i - 1] / 8);
  }
  EXPECT_LT(hps_err.back(), 1e-7);
}
