// SPDX-License-Identifier: Apache-2.0

#include "slabsolve/chebyshev.hpp"

#include <cmath>
#include <numbers>

namespace slabsolve
{

namespace
{

constexpr double pi = std::numbers::pi;

Vector barycentric_weights(const Vector &x)
{
  const int n = x.size();
  Vector w = Vector::Ones(n);
  for (int j = 0; j < n; j++)
  {
    for (int k = 0; k < n; k++)
    {
      if (k != j)
      {
        w(j) *= x(j) - x(k);
      }
    }
    w(j) = 1.0 / w(j);
  }
  return w;
}

}  // namespace

Vector chebyshev_points(int p)
{
  if (p < 2)
  {
    throw Error("chebyshev_points: need p >= 2");
  }
  Vector t(p);
  for (int i = 0; i < p; i++)
  {
    t(i) = -std::cos(pi * i / (p - 1));
  }
  // exact symmetry and a clean midpoint
  for (int i = 0; i < p / 2; i++)
  {
    const double s = 0.5 * (t(p - 1 - i) - t(i));
    t(i) = -s;
    t(p - 1 - i) = s;
  }
  if (p % 2 == 1)
  {
    t(p / 2) = 0.0;
  }
  return t;
}

Matrix chebyshev_derivative(int p)
{
  const Vector t = chebyshev_points(p);
  Vector w(p);
  for (int j = 0; j < p; j++)
  {
    w(j) = (j % 2 == 0) ? 1.0 : -1.0;
  }
  w(0) *= 0.5;
  w(p - 1) *= 0.5;
  Matrix D = Matrix::Zero(p, p);
  for (int i = 0; i < p; i++)
  {
    double diag = 0.0;
    for (int j = 0; j < p; j++)
    {
      if (i != j)
      {
        D(i, j) = (w(j) / w(i)) / (t(i) - t(j));
        diag -= D(i, j);
      }
    }
    D(i, i) = diag;
  }
  return D;
}

Vector clenshaw_curtis_weights(int p)
{
  if (p < 2)
  {
    throw Error("clenshaw_curtis_weights: need p >= 2");
  }
  const int n = p - 1;
  Vector w = Vector::Zero(p);
  Vector v = Vector::Ones(std::max(n - 1, 0));
  auto theta = [n](int i) { return pi * i / n; };
  if (n % 2 == 0)
  {
    w(0) = w(n) = 1.0 / (n * n - 1.0);
    for (int k = 1; k < n / 2; k++)
    {
      for (int i = 1; i < n; i++)
      {
        v(i - 1) -= 2.0 * std::cos(2.0 * k * theta(i)) / (4.0 * k * k - 1.0);
      }
    }
    for (int i = 1; i < n; i++)
    {
      v(i - 1) -= std::cos(n * theta(i)) / (n * n - 1.0);
    }
  }
  else
  {
    w(0) = w(n) = 1.0 / (static_cast<double>(n) * n);
    for (int k = 1; k <= (n - 1) / 2; k++)
    {
      for (int i = 1; i < n; i++)
      {
        v(i - 1) -= 2.0 * std::cos(2.0 * k * theta(i)) / (4.0 * k * k - 1.0);
      }
    }
  }
  for (int i = 1; i < n; i++)
  {
    w(i) = 2.0 * v(i - 1) / n;
  }
  return w;
}

Matrix barycentric_interpolation(const Vector &nodes, const Vector &targets)
{
  const Vector w = barycentric_weights(nodes);
  Matrix P = Matrix::Zero(targets.size(), nodes.size());
  for (int r = 0; r < targets.size(); r++)
  {
    int hit = -1;
    for (int j = 0; j < nodes.size(); j++)
    {
      if (targets(r) == nodes(j))
      {
        hit = j;
      }
    }
    if (hit >= 0)
    {
      P(r, hit) = 1.0;
      continue;
    }
    double denom = 0.0;
    for (int j = 0; j < nodes.size(); j++)
    {
      P(r, j) = w(j) / (targets(r) - nodes(j));
      denom += P(r, j);
    }
    P.row(r) /= denom;
  }
  return P;
}

}  // namespace slabsolve
