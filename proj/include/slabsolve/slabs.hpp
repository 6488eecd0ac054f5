// SPDX-License-Identifier: Apache-2.0

#ifndef SLABSOLVE_SLABS_HPP
#define SLABSOLVE_SLABS_HPP

#include <string>
#include <utility>
#include <vector>
#include "slabsolve/discretize.hpp"

namespace slabsolve
{

enum class Topology
{
  open,
  periodic
};

std::string to_string(Topology t);
Topology topology_from_string(const std::string &s);

// Interfaces are x-planes; indices are 0-based. Under periodic topology interface 0 sits
// on the seam x = 0 and double slabs near the seam use unwrapped coordinates.
struct SlabDecomposition
{
  int dim = 2;
  Point box = {1.0, 1.0, 1.0};
  std::vector<double> interfaces;
  Topology topology = Topology::open;

  int count() const { return static_cast<int>(interfaces.size()); }
  double spacing() const;
  // Neighboring interfaces of j: {left, right}, -1 where a physical boundary closes Psi_j.
  std::pair<int, int> neighbors(int j) const;
  // x-extent of the double slab centered on interface j (unwrapped).
  std::pair<double, double> double_slab(int j) const;
  // Single slabs: open has count()+1 of them, periodic has count(). Slab s lies between
  // interfaces s-1 and s (open) or s and s+1 (periodic).
  int single_slab_count() const;
  std::pair<double, double> single_slab(int s) const;
  // Interfaces bounding single slab s: {left, right}, -1 for a physical boundary.
  std::pair<int, int> single_slab_interfaces(int s) const;
};

SlabDecomposition decompose(int dim, const Point &box, int n_interfaces, Topology topology);
// Validates and wraps an explicit, strictly increasing interface list.
SlabDecomposition decompose(int dim, const Point &box, std::vector<double> interfaces,
                            Topology topology);

Region double_slab_region(const SlabDecomposition &decomp, const Discretization &disc, int j);
Region single_slab_region(const SlabDecomposition &decomp, const Discretization &disc, int s);
// Global lattice x-index of interface j.
int interface_lattice(const SlabDecomposition &decomp, const Discretization &disc, int j);

// Index sets of one double slab, as node ids of its local grid. Interface lists are in
// canonical order: lexicographic in the (y, z) lattice.
struct SlabIndex
{
  int j = 0;
  std::vector<int> interior;   // I_j
  std::vector<int> boundary;   // J_j
  std::vector<int> center;     // C_j, subset of I_j
  std::vector<int> outer_left;   // J_{j,j-1}, empty when a physical boundary
  std::vector<int> outer_right;  // J_{j,j+1}
  int left = -1, right = -1;
};

SlabIndex slab_index(const SlabDecomposition &decomp, const Grid &grid, int j);

struct IndexSets
{
  std::vector<SlabIndex> slabs;
  // J_Gamma block offsets, size count()+1.
  std::vector<int> offsets;
  // Coordinates of each interface's nodes in canonical order.
  std::vector<std::vector<Point>> interface_points;

  int total() const { return offsets.back(); }
  int block_size(int j) const { return offsets[j + 1] - offsets[j]; }
};

// One discretization per double slab, or a single shared one. Throws naming the
// interface whose node sets disagree between neighboring double slabs.
IndexSets index_sets(const SlabDecomposition &decomp,
                     const std::vector<Discretization> &per_slab);
IndexSets index_sets(const SlabDecomposition &decomp, const Discretization &disc);

// Interface nodes of a global grid, concatenated in J_Gamma order.
std::vector<int> global_interface_nodes(const SlabDecomposition &decomp, const Grid &global);

}  // namespace slabsolve

#endif  // SLABSOLVE_SLABS_HPP
