// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include "slabsolve/problem.hpp"

using namespace slabsolve;

TEST(Problem, HelmholtzZeroWavenumberIsLaplace)
{
  const auto op = make_helmholtz(0.0, 2);
  for (const Point x : {Point{0.1, 0.7, 0}, Point{0.9, 0.2, 0}})
  {
    EXPECT_EQ(op.c(x), 0.0);
    EXPECT_EQ(op.a(0, x), 1.0);
    EXPECT_EQ(op.a(1, x), 1.0);
  }
}

TEST(Problem, HelmholtzReaction)
{
  const auto op = make_helmholtz(5.0, 3);
  EXPECT_EQ(op.dim, 3);
  EXPECT_DOUBLE_EQ(op.c({0.3, 0.3, 0.3}), -25.0);
  EXPECT_THROW(make_helmholtz(-1.0, 2), Error);
}

TEST(Problem, VariableCoefficientValues)
{
  const auto op = make_variable_coefficient_2d();
  EXPECT_DOUBLE_EQ(op.a(0, {0, 0, 0}), 1.5);
  EXPECT_DOUBLE_EQ(op.a(1, {0, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(op.a(1, {1.0, 1.0 / 6.0, 0}), 1.5);
  EXPECT_NEAR(op.a(0, {0.25, 0.4, 0}), 1.0, 1e-15);
  EXPECT_EQ(op.c({0.3, 0.3, 0}), 0.0);
}

TEST(Problem, DampedVariableCoefficient)
{
  const auto op = make_damped_variable_coefficient_2d(3.0);
  EXPECT_DOUBLE_EQ(op.c({0.5, 0.5, 0}), -9.0);
  EXPECT_DOUBLE_EQ(op.a(0, {0, 0, 0}), 1.5);
}

TEST(Problem, WaveguideWithoutBumpsIsHelmholtz)
{
  const auto wg = make_waveguide(10.0, {});
  EXPECT_DOUBLE_EQ(wg.op.c({0.2, 0.8, 0}), -100.0);
  EXPECT_EQ(wg.data.dirichlet({0, 0.5, 0}), 1.0);
  EXPECT_EQ(wg.data.load({0.5, 0.5, 0}), 0.0);
}

TEST(Problem, WaveguideRejectsLargeAmplitude)
{
  EXPECT_THROW(make_waveguide(10.0, {GaussianBump{{0.5, 0.5, 0}, 0.05, 1.5}}), Error);
  EXPECT_THROW(make_waveguide(10.0, {GaussianBump{{0.5, 0.5, 0}, 0.05, 1.0}}), Error);
}

TEST(Problem, WaveguideCoefficientStaysInUnitInterval)
{
  std::vector<GaussianBump> bumps;
  for (int i = 0; i < 4; i++)
  {
    bumps.push_back({{0.5, 0.5 + 0.01 * i, 0}, 0.1, 0.9});
  }
  const auto wg = make_waveguide(2.0, bumps);
  for (double x = 0; x <= 1.0; x += 0.05)
  {
    for (double y = 0; y <= 1.0; y += 0.05)
    {
      const double ratio = -wg.op.c({x, y, 0}) / 4.0;  // 1 - b
      EXPECT_GT(ratio, 0.0);
      EXPECT_LE(ratio, 1.0);
    }
  }
}

TEST(Problem, PresetsSatisfyTheirEquation)
{
  std::vector<Point> pts;
  for (double x : {0.2, 0.5, 0.8})
  {
    for (double y : {0.3, 0.6})
    {
      pts.push_back({x, y, 0.45});
    }
  }
  for (const auto &name : problem_presets())
  {
    ProblemParams params;
    params.kappa = 4.0;
    const Problem pb = make_problem(name, params);
    if (!pb.reference)
    {
      continue;
    }
    // Fourth-order differences with step 1e-3 leave roughly 1e-7 relative error.
    EXPECT_LT(reference_self_check(pb, pts), 1e-5) << name;
  }
}

TEST(Problem, ReferenceMatchesDirichletData)
{
  ProblemParams params;
  params.kappa = 5.0;
  const Problem pb = make_problem("helmholtz3d", params);
  ASSERT_TRUE(pb.reference.has_value());
  const Point x = {0.0, 0.3, 0.7};
  EXPECT_DOUBLE_EQ(pb.reference->u(x), pb.data.dirichlet(x));
  const double r = std::sqrt(0.25 + 0.64 + 1.44);
  EXPECT_NEAR(pb.reference->u(x), std::cos(5.0 * r) / r, 1e-14);
}

TEST(Problem, SmoothFieldIsDeterministic)
{
  const auto f = smooth_random_field(2, 11);
  const auto g = smooth_random_field(2, 11);
  const auto h = smooth_random_field(2, 12);
  const Point x = {0.3, 0.9, 0};
  EXPECT_EQ(f(x), g(x));
  EXPECT_NE(f(x), h(x));
}

TEST(Problem, UnknownPreset)
{
  EXPECT_THROW(make_problem("nope", {}), Error);
}
