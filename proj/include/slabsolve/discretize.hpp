// SPDX-License-Identifier: Apache-2.0

#ifndef SLABSOLVE_DISCRETIZE_HPP
#define SLABSOLVE_DISCRETIZE_HPP

#include <cstdint>
#include <string>
#include <vector>
#include "slabsolve/problem.hpp"
#include "slabsolve/types.hpp"

namespace slabsolve
{

enum class Backend
{
  fd,
  hps
};

std::string to_string(Backend b);
Backend backend_from_string(const std::string &s);

// Global description of how the domain box is discretized. Everything is measured in
// "units": grid intervals for FD, cells for HPS. Regions (slabs, double slabs, the whole
// box) are integer unit ranges, which keeps node identification exact.
struct Discretization
{
  Backend backend = Backend::fd;
  int dim = 2;
  Point box = {1.0, 1.0, 1.0};
  Lattice units = {1, 1, 1};
  int p = 2;
  bool periodic_x = false;

  static Discretization fd(int dim, const Point &box, double h);
  static Discretization hps(int dim, const Point &box, const Lattice &cells, int p);

  int nodes_per_unit() const { return backend == Backend::fd ? 1 : p - 1; }
  double unit_width(int axis) const { return box[axis] / units[axis]; }
  int lattice_extent(int axis) const { return units[axis] * nodes_per_unit(); }
  // Units covered by coordinate x along an axis; throws when x is not on a unit boundary.
  int to_units(int axis, double x, const std::string &what) const;
  double coordinate(int axis, int g) const;
};

struct Region
{
  Lattice lo = {0, 0, 0};
  Lattice hi = {1, 1, 1};
  // Region spans the whole periodic x-range; x has no boundary.
  bool wrap_x = false;
};

Region full_region(const Discretization &disc);

enum class DofClass : std::uint8_t
{
  interior,
  cut_boundary,       // Dirichlet node on a region face interior to the domain
  physical_boundary,  // Dirichlet node on the domain boundary
};

// Active nodes of one region. Node order is lexicographic in the lattice with x slowest.
class Grid
{
public:
  Grid(const Discretization &disc, const Region &region);

  const Discretization &discretization() const { return disc; }
  const Region &region() const { return reg; }
  int size() const { return static_cast<int>(coords.size()); }
  const Point &coord(int n) const { return coords[n]; }
  // Coordinate folded into the box (differs from coord() only across the periodic seam).
  Point wrapped_coord(int n) const;
  const Lattice &lattice(int n) const { return lat[n]; }
  DofClass dof_class(int n) const { return cls[n]; }
  bool is_interior(int n) const { return cls[n] == DofClass::interior; }
  const std::vector<int> &interior() const { return interior_nodes; }
  const std::vector<int> &dirichlet() const { return dirichlet_nodes; }
  // Position of node n inside interior() or dirichlet(), whichever holds it.
  int local_index(int n) const { return local[n]; }
  // Node with the given global lattice index, or -1 if absent or inactive.
  int find(Lattice g) const;
  // Nodes of the x-plane at lattice index gx, sorted by (y, z) lattice.
  std::vector<int> plane(int gx) const;

private:
  Discretization disc;
  Region reg;
  std::vector<Point> coords;
  std::vector<Lattice> lat;
  std::vector<DofClass> cls;
  std::vector<int> interior_nodes, dirichlet_nodes, local;
  Lattice lo_lat{}, ext{};
  std::vector<int> lookup;
};

struct SparseSystem
{
  Grid grid;
  // Rows for every active node; Dirichlet rows are identity rows.
  Csr matrix;
  Csr interior_block() const;            // A(I, I)
  Csr interior_boundary_block() const;   // A(I, J)
};

SparseSystem assemble_fd(const EllipticOperator &op, const Discretization &disc,
                         const Region &region);
SparseSystem assemble_hps(const EllipticOperator &op, const Discretization &disc,
                          const Region &region);
SparseSystem assemble(const EllipticOperator &op, const Discretization &disc,
                      const Region &region);

// Values of f at the Dirichlet nodes, in grid.dirichlet() order.
Vector dirichlet_values(const ScalarField &f, const Grid &grid);
// Body load over interior nodes: g at PDE rows, 0 at HPS continuity rows.
Vector interior_load(const ScalarField &g, const Grid &grid);
// b_I = load_I - A(I, J) f_J
Vector build_rhs(const SparseSystem &system, const Vector &load, const Vector &dirichlet);
Vector build_rhs(const BoundaryData &data, const SparseSystem &system);

// Square roots of the tensor Clenshaw-Curtis weights at nodes of an x-plane (HPS), or of
// the FD cell measure h^(dim-1).
Vector interface_weights(const Grid &grid, const std::vector<int> &nodes);

// Closed-form count of active nodes in a region for the given discretization.
long expected_active_nodes(const Discretization &disc, const Region &region);

}  // namespace slabsolve

#endif  // SLABSOLVE_DISCRETIZE_HPP
