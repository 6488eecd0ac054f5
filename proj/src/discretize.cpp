// SPDX-License-Identifier: Apache-2.0

#include "slabsolve/discretize.hpp"

#include <cmath>
#include <sstream>
#include "slabsolve/chebyshev.hpp"

namespace slabsolve
{

namespace
{

int floor_div(int a, int b)
{
  int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0)))
  {
    q--;
  }
  return q;
}

int floor_mod(int a, int b)
{
  return a - b * floor_div(a, b);
}

int cell_boundary_axes(const Discretization &disc, const Lattice &g)
{
  const int npu = disc.nodes_per_unit();
  int count = 0;
  for (int a = 0; a < disc.dim; a++)
  {
    count += floor_mod(g[a], npu) == 0;
  }
  return count;
}

using Triplets = std::vector<Eigen::Triplet<double, int>>;

void check_positive(double v, int axis, const Point &x)
{
  if (!(v > 0.0))
  {
    std::ostringstream msg;
    msg << "diffusion coefficient a_" << axis << axis << " is not positive at (" << x[0]
        << ", " << x[1] << ", " << x[2] << ")";
    throw Error(msg.str());
  }
}

Csr block(const SparseSystem &sys, bool interior_cols)
{
  const Grid &grid = sys.grid;
  const int rows = static_cast<int>(grid.interior().size());
  const int cols =
      static_cast<int>(interior_cols ? grid.interior().size() : grid.dirichlet().size());
  Triplets t;
  t.reserve(sys.matrix.nonZeros());
  for (int r : grid.interior())
  {
    for (Csr::InnerIterator it(sys.matrix, r); it; ++it)
    {
      if (grid.is_interior(it.col()) == interior_cols)
      {
        t.emplace_back(grid.local_index(r), grid.local_index(it.col()), it.value());
      }
    }
  }
  Csr out(rows, cols);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

}  // namespace

std::string to_string(Backend b)
{
  return b == Backend::fd ? "fd" : "hps";
}

Backend backend_from_string(const std::string &s)
{
  if (s == "fd")
  {
    return Backend::fd;
  }
  if (s == "hps")
  {
    return Backend::hps;
  }
  throw Error("unknown discretization backend '" + s + "' (expected fd or hps)");
}

Discretization Discretization::fd(int dim, const Point &box, double h)
{
  if (!(h > 0.0))
  {
    throw Error("fd: grid spacing must be positive");
  }
  Discretization d;
  d.backend = Backend::fd;
  d.dim = dim;
  d.box = box;
  for (int a = 0; a < dim; a++)
  {
    const double n = box[a] / h;
    d.units[a] = static_cast<int>(std::lround(n));
    if (d.units[a] < 1 || std::abs(n - d.units[a]) > 1e-9 * std::max(1.0, n))
    {
      std::ostringstream msg;
      msg << "fd: extent " << box[a] << " along axis " << a
          << " is not an integer multiple of h = " << h;
      throw Error(msg.str());
    }
  }
  return d;
}

Discretization Discretization::hps(int dim, const Point &box, const Lattice &cells, int p)
{
  if (p < 4)
  {
    throw Error("hps: order p must be at least 4");
  }
  Discretization d;
  d.backend = Backend::hps;
  d.dim = dim;
  d.box = box;
  d.p = p;
  for (int a = 0; a < dim; a++)
  {
    if (cells[a] < 1)
    {
      throw Error("hps: tiling needs at least one cell per axis");
    }
    d.units[a] = cells[a];
  }
  return d;
}

int Discretization::to_units(int axis, double x, const std::string &what) const
{
  const double u = x / unit_width(axis);
  const long r = std::lround(u);
  if (std::abs(u - r) > 1e-9 * std::max(1.0, std::abs(u)))
  {
    std::ostringstream msg;
    msg << what << " at x = " << x << " is not on a "
        << (backend == Backend::fd ? "grid line" : "cell boundary");
    throw Error(msg.str());
  }
  return static_cast<int>(r);
}

double Discretization::coordinate(int axis, int g) const
{
  const double w = unit_width(axis);
  if (backend == Backend::fd)
  {
    return g * w;
  }
  const int npu = nodes_per_unit();
  const int c = floor_div(g, npu);
  const int i = g - c * npu;
  const double t = chebyshev_points(p)(i);
  return (c + 0.5 * (1.0 + t)) * w;
}

Region full_region(const Discretization &disc)
{
  Region r;
  for (int a = 0; a < 3; a++)
  {
    r.lo[a] = 0;
    r.hi[a] = a < disc.dim ? disc.units[a] : 0;
  }
  r.wrap_x = disc.periodic_x;
  return r;
}

Grid::Grid(const Discretization &d, const Region &region) : disc(d), reg(region)
{
  const int npu = disc.nodes_per_unit();
  const int dim = disc.dim;
  std::array<std::vector<double>, 3> axis_coord;
  for (int a = 0; a < 3; a++)
  {
    if (a < dim)
    {
      if (reg.hi[a] <= reg.lo[a])
      {
        throw Error("grid: empty region");
      }
      lo_lat[a] = reg.lo[a] * npu;
      ext[a] = (reg.hi[a] - reg.lo[a]) * npu + ((a == 0 && reg.wrap_x) ? 0 : 1);
      axis_coord[a].resize(ext[a]);
      const Vector t = disc.backend == Backend::hps ? chebyshev_points(disc.p) : Vector();
      for (int k = 0; k < ext[a]; k++)
      {
        const int g = lo_lat[a] + k;
        if (disc.backend == Backend::fd)
        {
          axis_coord[a][k] = g * disc.unit_width(a);
        }
        else
        {
          const int c = floor_div(g, npu);
          axis_coord[a][k] = (c + 0.5 * (1.0 + t(g - c * npu))) * disc.unit_width(a);
        }
      }
    }
    else
    {
      lo_lat[a] = 0;
      ext[a] = 1;
      axis_coord[a] = {0.0};
    }
  }
  if (reg.wrap_x && (!disc.periodic_x || reg.lo[0] != 0 || reg.hi[0] != disc.units[0]))
  {
    throw Error("grid: a wrapped region must span the whole periodic x-range");
  }

  lookup.assign(static_cast<size_t>(ext[0]) * ext[1] * ext[2], -1);
  for (int i = 0; i < ext[0]; i++)
  {
    for (int j = 0; j < ext[1]; j++)
    {
      for (int k = 0; k < ext[2]; k++)
      {
        const Lattice g = {lo_lat[0] + i, lo_lat[1] + j, lo_lat[2] + k};
        const Lattice idx = {i, j, k};
        int region_axes = 0, boundary_axis = -1;
        for (int a = 0; a < dim; a++)
        {
          if (a == 0 && reg.wrap_x)
          {
            continue;
          }
          if (idx[a] == 0 || idx[a] == ext[a] - 1)
          {
            region_axes++;
            boundary_axis = a;
          }
        }
        bool active;
        if (disc.backend == Backend::fd)
        {
          active = region_axes <= 1;
        }
        else
        {
          active = cell_boundary_axes(disc, g) <= 1;
        }
        if (!active)
        {
          continue;
        }
        DofClass c = DofClass::interior;
        if (region_axes == 1)
        {
          const int a = boundary_axis;
          const bool physical = !(a == 0 && disc.periodic_x) &&
                                (g[a] == 0 || g[a] == disc.lattice_extent(a));
          c = physical ? DofClass::physical_boundary : DofClass::cut_boundary;
        }
        const int n = static_cast<int>(coords.size());
        lookup[(static_cast<size_t>(i) * ext[1] + j) * ext[2] + k] = n;
        coords.push_back({axis_coord[0][i], axis_coord[1][j], axis_coord[2][k]});
        lat.push_back(g);
        cls.push_back(c);
        if (c == DofClass::interior)
        {
          local.push_back(static_cast<int>(interior_nodes.size()));
          interior_nodes.push_back(n);
        }
        else
        {
          local.push_back(static_cast<int>(dirichlet_nodes.size()));
          dirichlet_nodes.push_back(n);
        }
      }
    }
  }
}

Point Grid::wrapped_coord(int n) const
{
  Point x = coords[n];
  if (disc.periodic_x)
  {
    x[0] -= disc.box[0] * std::floor(x[0] / disc.box[0]);
  }
  return x;
}

int Grid::find(Lattice g) const
{
  for (int a = 0; a < 3; a++)
  {
    if (a >= disc.dim)
    {
      if (g[a] != 0)
      {
        return -1;
      }
      continue;
    }
    int k = g[a] - lo_lat[a];
    if (a == 0 && disc.periodic_x)
    {
      k = floor_mod(k, disc.lattice_extent(0));
    }
    if (k < 0 || k >= ext[a])
    {
      return -1;
    }
    g[a] = k;
  }
  return lookup[(static_cast<size_t>(g[0]) * ext[1] + g[1]) * ext[2] + g[2]];
}

std::vector<int> Grid::plane(int gx) const
{
  std::vector<int> out;
  for (int j = 0; j < ext[1]; j++)
  {
    for (int k = 0; k < ext[2]; k++)
    {
      const int n = find({gx, lo_lat[1] + j, lo_lat[2] + k});
      if (n >= 0)
      {
        out.push_back(n);
      }
    }
  }
  return out;
}

Csr SparseSystem::interior_block() const
{
  return block(*this, true);
}

Csr SparseSystem::interior_boundary_block() const
{
  return block(*this, false);
}

SparseSystem assemble_fd(const EllipticOperator &op, const Discretization &disc,
                         const Region &region)
{
  if (disc.backend != Backend::fd)
  {
    throw Error("assemble_fd: discretization is not fd");
  }
  if (op.dim != disc.dim)
  {
    throw Error("assemble_fd: operator and discretization dimensions differ");
  }
  Grid grid(disc, region);
  Triplets t;
  t.reserve(static_cast<size_t>(grid.size()) * (2 * disc.dim + 1));
  for (int n = 0; n < grid.size(); n++)
  {
    if (!grid.is_interior(n))
    {
      t.emplace_back(n, n, 1.0);
      continue;
    }
    const Point x = grid.wrapped_coord(n);
    double diag = op.c(x);
    for (int a = 0; a < disc.dim; a++)
    {
      const double h = disc.unit_width(a);
      const double coef = op.a(a, x);
      check_positive(coef, a, x);
      const double s = coef / (h * h);
      diag += 2.0 * s;
      for (int step : {-1, 1})
      {
        Lattice g = grid.lattice(n);
        g[a] += step;
        const int m = grid.find(g);
        if (m < 0)
        {
          throw Error("assemble_fd: stencil leaves the region");
        }
        t.emplace_back(n, m, -s);
      }
    }
    t.emplace_back(n, n, diag);
  }
  Csr A(grid.size(), grid.size());
  A.setFromTriplets(t.begin(), t.end());
  return {std::move(grid), std::move(A)};
}

SparseSystem assemble_hps(const EllipticOperator &op, const Discretization &disc,
                          const Region &region)
{
  if (disc.backend != Backend::hps)
  {
    throw Error("assemble_hps: discretization is not hps");
  }
  if (op.dim != disc.dim)
  {
    throw Error("assemble_hps: operator and discretization dimensions differ");
  }
  const int p = disc.p, npu = disc.nodes_per_unit();
  const Matrix D = chebyshev_derivative(p);
  const Matrix D2 = D * D;
  Grid grid(disc, region);
  Triplets t;
  t.reserve(static_cast<size_t>(grid.size()) * (disc.dim * p + 1));
  auto node_on_line = [&](const Lattice &g, int a, int ga)
  {
    Lattice h = g;
    h[a] = ga;
    const int m = grid.find(h);
    if (m < 0)
    {
      throw Error("assemble_hps: collocation line leaves the region");
    }
    return m;
  };
  for (int n = 0; n < grid.size(); n++)
  {
    if (!grid.is_interior(n))
    {
      t.emplace_back(n, n, 1.0);
      continue;
    }
    const Lattice &g = grid.lattice(n);
    int face_axis = -1;
    for (int a = 0; a < disc.dim; a++)
    {
      if (floor_mod(g[a], npu) == 0)
      {
        face_axis = a;
      }
    }
    if (face_axis < 0)
    {
      const Point x = grid.wrapped_coord(n);
      t.emplace_back(n, n, op.c(x));
      for (int a = 0; a < disc.dim; a++)
      {
        const double coef = op.a(a, x);
        check_positive(coef, a, x);
        const double s = 2.0 / disc.unit_width(a);
        const int c = floor_div(g[a], npu);
        const int i = g[a] - c * npu;
        for (int j = 0; j < p; j++)
        {
          t.emplace_back(n, node_on_line(g, a, c * npu + j), -coef * s * s * D2(i, j));
        }
      }
    }
    else
    {
      // jump in the normal derivative across the shared face
      const int a = face_axis;
      const double s = 2.0 / disc.unit_width(a);
      const int c = floor_div(g[a], npu);
      for (int j = 0; j < p; j++)
      {
        t.emplace_back(n, node_on_line(g, a, (c - 1) * npu + j), s * D(p - 1, j));
        t.emplace_back(n, node_on_line(g, a, c * npu + j), -s * D(0, j));
      }
    }
  }
  Csr A(grid.size(), grid.size());
  A.setFromTriplets(t.begin(), t.end());
  return {std::move(grid), std::move(A)};
}

SparseSystem assemble(const EllipticOperator &op, const Discretization &disc,
                      const Region &region)
{
  return disc.backend == Backend::fd ? assemble_fd(op, disc, region)
                                     : assemble_hps(op, disc, region);
}

Vector dirichlet_values(const ScalarField &f, const Grid &grid)
{
  Vector v(grid.dirichlet().size());
  for (size_t i = 0; i < grid.dirichlet().size(); i++)
  {
    v(i) = f(grid.wrapped_coord(grid.dirichlet()[i]));
  }
  return v;
}

Vector interior_load(const ScalarField &g, const Grid &grid)
{
  const Discretization &disc = grid.discretization();
  Vector v(grid.interior().size());
  for (size_t i = 0; i < grid.interior().size(); i++)
  {
    const int n = grid.interior()[i];
    const bool pde_row =
        disc.backend == Backend::fd || cell_boundary_axes(disc, grid.lattice(n)) == 0;
    v(i) = pde_row ? g(grid.wrapped_coord(n)) : 0.0;
  }
  return v;
}

Vector build_rhs(const SparseSystem &system, const Vector &load, const Vector &dirichlet)
{
  if (load.size() != static_cast<long>(system.grid.interior().size()) ||
      dirichlet.size() != static_cast<long>(system.grid.dirichlet().size()))
  {
    throw Error("build_rhs: vector sizes do not match the system");
  }
  return load - system.interior_boundary_block() * dirichlet;
}

Vector build_rhs(const BoundaryData &data, const SparseSystem &system)
{
  return build_rhs(system, interior_load(data.load, system.grid),
                   dirichlet_values(data.dirichlet, system.grid));
}

Vector interface_weights(const Grid &grid, const std::vector<int> &nodes)
{
  const Discretization &disc = grid.discretization();
  Vector w(nodes.size());
  if (disc.backend == Backend::fd)
  {
    double m = 1.0;
    for (int a = 1; a < disc.dim; a++)
    {
      m *= disc.unit_width(a);
    }
    w.setConstant(std::sqrt(m));
    return w;
  }
  const Vector cc = clenshaw_curtis_weights(disc.p);
  const int npu = disc.nodes_per_unit();
  for (size_t i = 0; i < nodes.size(); i++)
  {
    double v = 1.0;
    for (int a = 1; a < disc.dim; a++)
    {
      const int local = floor_mod(grid.lattice(nodes[i])[a], npu);
      // a node on a shared cell face collects weight from both cells
      const double c = local == 0 ? cc(0) + cc(disc.p - 1) : cc(local);
      v *= c * 0.5 * disc.unit_width(a);
    }
    w(i) = std::sqrt(v);
  }
  return w;
}

long expected_active_nodes(const Discretization &disc, const Region &region)
{
  // Per axis: positions that are interior to a unit, and positions on unit boundaries.
  std::array<long, 3> inner{}, edge{};
  for (int a = 0; a < disc.dim; a++)
  {
    const long n = region.hi[a] - region.lo[a];
    const bool wrap = a == 0 && region.wrap_x;
    if (disc.backend == Backend::fd)
    {
      inner[a] = wrap ? n : n - 1;
      edge[a] = wrap ? 0 : 2;
    }
    else
    {
      inner[a] = n * (disc.p - 2);
      edge[a] = wrap ? n : n + 1;
    }
  }
  long all_inner = 1;
  for (int a = 0; a < disc.dim; a++)
  {
    all_inner *= inner[a];
  }
  long total = all_inner;
  for (int a = 0; a < disc.dim; a++)
  {
    long term = edge[a];
    for (int b = 0; b < disc.dim; b++)
    {
      if (b != a)
      {
        term *= inner[b];
      }
    }
    total += term;
  }
  return total;
}

}  // namespace slabsolve
