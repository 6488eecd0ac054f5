// SPDX-License-Identifier: Apache-2.0

#include "slabsolve/slabs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace slabsolve
{

namespace
{

std::vector<int> sorted_plane(const Grid &grid, int gx)
{
  std::vector<int> nodes = grid.plane(gx);
  std::stable_sort(nodes.begin(), nodes.end(),
                   [&](int a, int b)
                   {
                     const Lattice &la = grid.lattice(a), &lb = grid.lattice(b);
                     return std::tie(la[1], la[2]) < std::tie(lb[1], lb[2]);
                   });
  return nodes;
}

}  // namespace

std::string to_string(Topology t)
{
  return t == Topology::open ? "open" : "periodic";
}

Topology topology_from_string(const std::string &s)
{
  if (s == "open")
  {
    return Topology::open;
  }
  if (s == "periodic")
  {
    return Topology::periodic;
  }
  throw Error("unknown topology '" + s + "' (expected open or periodic)");
}

double SlabDecomposition::spacing() const
{
  if (topology == Topology::periodic)
  {
    return box[0] / count();
  }
  return box[0] / (count() + 1);
}

std::pair<int, int> SlabDecomposition::neighbors(int j) const
{
  const int n = count();
  if (topology == Topology::periodic)
  {
    return {(j + n - 1) % n, (j + 1) % n};
  }
  return {j > 0 ? j - 1 : -1, j + 1 < n ? j + 1 : -1};
}

std::pair<double, double> SlabDecomposition::double_slab(int j) const
{
  const int n = count();
  if (topology == Topology::periodic)
  {
    const double L = box[0];
    const double left = j > 0 ? interfaces[j - 1] : interfaces[n - 1] - L;
    const double right = j + 1 < n ? interfaces[j + 1] : interfaces[0] + L;
    return {left, right};
  }
  return {j > 0 ? interfaces[j - 1] : 0.0, j + 1 < n ? interfaces[j + 1] : box[0]};
}

int SlabDecomposition::single_slab_count() const
{
  return topology == Topology::periodic ? count() : count() + 1;
}

std::pair<double, double> SlabDecomposition::single_slab(int s) const
{
  const int n = count();
  if (topology == Topology::periodic)
  {
    return {interfaces[s], s + 1 < n ? interfaces[s + 1] : interfaces[0] + box[0]};
  }
  return {s > 0 ? interfaces[s - 1] : 0.0, s < n ? interfaces[s] : box[0]};
}

std::pair<int, int> SlabDecomposition::single_slab_interfaces(int s) const
{
  const int n = count();
  if (topology == Topology::periodic)
  {
    return {s, (s + 1) % n};
  }
  return {s > 0 ? s - 1 : -1, s < n ? s : -1};
}

SlabDecomposition decompose(int dim, const Point &box, std::vector<double> interfaces,
                            Topology topology)
{
  if (interfaces.empty())
  {
    throw Error("decompose: need at least one interface");
  }
  if (dim < 1 || dim > 3)
  {
    throw Error("decompose: dim must be 1, 2 or 3");
  }
  for (int a = 0; a < dim; a++)
  {
    if (!(box[a] > 0.0))
    {
      throw Error("decompose: box extents must be positive");
    }
  }
  if (topology == Topology::periodic && interfaces.size() < 3)
  {
    throw Error("decompose: periodic topology needs at least 3 interfaces");
  }
  for (size_t j = 0; j < interfaces.size(); j++)
  {
    const bool ordered = j == 0 || interfaces[j] > interfaces[j - 1];
    const bool inside = topology == Topology::periodic
                            ? (interfaces[j] >= 0.0 && interfaces[j] < box[0])
                            : (interfaces[j] > 0.0 && interfaces[j] < box[0]);
    if (!ordered || !inside)
    {
      throw Error("decompose: interfaces must be strictly increasing and inside the box");
    }
  }
  SlabDecomposition d;
  d.dim = dim;
  d.box = box;
  d.interfaces = std::move(interfaces);
  d.topology = topology;
  return d;
}

SlabDecomposition decompose(int dim, const Point &box, int n_interfaces, Topology topology)
{
  if (n_interfaces < 1)
  {
    throw Error("decompose: need at least one interface (n_interfaces = 0)");
  }
  std::vector<double> x(n_interfaces);
  if (topology == Topology::periodic)
  {
    const double H = box[0] / n_interfaces;
    for (int j = 0; j < n_interfaces; j++)
    {
      x[j] = j * H;
    }
  }
  else
  {
    const double H = box[0] / (n_interfaces + 1);
    for (int j = 0; j < n_interfaces; j++)
    {
      x[j] = (j + 1) * H;
    }
  }
  return decompose(dim, box, std::move(x), topology);
}

namespace
{

Region x_range_region(const SlabDecomposition &decomp, const Discretization &disc,
                      std::pair<double, double> x, const std::string &what)
{
  if (disc.dim != decomp.dim)
  {
    throw Error("slab region: decomposition and discretization dimensions differ");
  }
  if ((decomp.topology == Topology::periodic) != disc.periodic_x)
  {
    throw Error("slab region: decomposition topology and discretization disagree");
  }
  Region r = full_region(disc);
  r.wrap_x = false;
  r.lo[0] = disc.to_units(0, x.first, what);
  r.hi[0] = disc.to_units(0, x.second, what);
  return r;
}

}  // namespace

Region double_slab_region(const SlabDecomposition &decomp, const Discretization &disc, int j)
{
  return x_range_region(decomp, disc, decomp.double_slab(j),
                        "double slab " + std::to_string(j) + " boundary");
}

Region single_slab_region(const SlabDecomposition &decomp, const Discretization &disc, int s)
{
  return x_range_region(decomp, disc, decomp.single_slab(s),
                        "slab " + std::to_string(s) + " boundary");
}

int interface_lattice(const SlabDecomposition &decomp, const Discretization &disc, int j)
{
  return disc.to_units(0, decomp.interfaces[j], "interface " + std::to_string(j)) *
         disc.nodes_per_unit();
}

SlabIndex slab_index(const SlabDecomposition &decomp, const Grid &grid, int j)
{
  const Discretization &disc = grid.discretization();
  SlabIndex s;
  s.j = j;
  s.interior = grid.interior();
  s.boundary = grid.dirichlet();
  std::tie(s.left, s.right) = decomp.neighbors(j);
  const int npu = disc.nodes_per_unit();
  const Region &r = grid.region();
  for (int node : sorted_plane(grid, interface_lattice(decomp, disc, j)))
  {
    if (grid.is_interior(node))
    {
      s.center.push_back(node);
    }
  }
  if (s.left >= 0)
  {
    s.outer_left = sorted_plane(grid, r.lo[0] * npu);
  }
  if (s.right >= 0)
  {
    s.outer_right = sorted_plane(grid, r.hi[0] * npu);
  }
  if (s.center.empty())
  {
    throw Error("slab index: interface " + std::to_string(j) + " carries no interior nodes");
  }
  return s;
}

IndexSets index_sets(const SlabDecomposition &decomp,
                     const std::vector<Discretization> &per_slab)
{
  const int n = decomp.count();
  if (per_slab.size() != 1 && static_cast<int>(per_slab.size()) != n)
  {
    throw Error("index_sets: need one discretization or one per double slab");
  }
  auto disc_of = [&](int j) -> const Discretization &
  { return per_slab.size() == 1 ? per_slab[0] : per_slab[j]; };

  std::vector<Grid> grids;
  IndexSets out;
  out.offsets.push_back(0);
  for (int j = 0; j < n; j++)
  {
    grids.emplace_back(disc_of(j), double_slab_region(decomp, disc_of(j), j));
    out.slabs.push_back(slab_index(decomp, grids.back(), j));
    out.offsets.push_back(out.offsets.back() + static_cast<int>(out.slabs.back().center.size()));
    std::vector<Point> pts;
    for (int node : out.slabs.back().center)
    {
      pts.push_back(grids.back().coord(node));
    }
    out.interface_points.push_back(std::move(pts));
  }

  // Interface k seen from its own double slab must match its view from each neighbor.
  const double tol = 1e-10 * std::max({decomp.box[0], decomp.box[1], decomp.box[2]});
  for (int j = 0; j < n; j++)
  {
    const SlabIndex &s = out.slabs[j];
    for (int side = 0; side < 2; side++)
    {
      const int k = side == 0 ? s.left : s.right;
      if (k < 0)
      {
        continue;
      }
      const std::vector<int> &outer = side == 0 ? s.outer_left : s.outer_right;
      const std::vector<Point> &ref = out.interface_points[k];
      bool ok = outer.size() == ref.size();
      for (size_t i = 0; ok && i < outer.size(); i++)
      {
        const Point &x = grids[j].coord(outer[i]);
        for (int a = 1; a < decomp.dim; a++)
        {
          ok = ok && std::abs(x[a] - ref[i][a]) <= tol;
        }
      }
      if (!ok)
      {
        std::ostringstream msg;
        msg << "interface " << k << " does not conform: double slab " << j << " sees "
            << outer.size() << " nodes, double slab " << k << " has " << ref.size();
        throw Error(msg.str());
      }
    }
  }
  return out;
}

IndexSets index_sets(const SlabDecomposition &decomp, const Discretization &disc)
{
  return index_sets(decomp, std::vector<Discretization>{disc});
}

std::vector<int> global_interface_nodes(const SlabDecomposition &decomp, const Grid &global)
{
  std::vector<int> out;
  for (int j = 0; j < decomp.count(); j++)
  {
    for (int node : sorted_plane(global, interface_lattice(decomp, global.discretization(), j)))
    {
      if (global.is_interior(node))
      {
        out.push_back(node);
      }
    }
  }
  return out;
}

}  // namespace slabsolve
