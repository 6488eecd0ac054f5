// SPDX-License-Identifier: Apache-2.0

#ifndef SLABSOLVE_EQUILIBRIUM_HPP
#define SLABSOLVE_EQUILIBRIUM_HPP

#include <memory>
#include <string>
#include <vector>
#include "slabsolve/discretize.hpp"
#include "slabsolve/hbs.hpp"
#include "slabsolve/slabs.hpp"
#include "slabsolve/sparse.hpp"

namespace slabsolve
{

enum class BlockMode
{
  dense,
  hbs
};

struct HbsConfig
{
  int k = 20;
  int arity = 2;
  int leaf = 0;  // 0: 2k for binary trees, 4k for quad trees
  unsigned long long seed = 1;
  int alpha = 0;  // oversampling factor, 0 picks 3 (binary) or 5 (quad)
  // Relative probe error above which a compressed block is rejected.
  double probe_tol = 0.1;
  int probes = 5;

  int leaf_size() const { return leaf > 0 ? leaf : (arity == 4 ? 4 : 2) * k; }
};

struct Timers
{
  double t_A = 0.0;   // assembly + factorization
  double t_YZ = 0.0;  // sampling solves
  double t_HBS = 0.0; // compression post-processing
};

// S_{target, source}: Dirichlet data on interface `source` -> trace on interface `target`.
struct SolutionBlock
{
  int target = 0, source = 0;
  BlockMode mode = BlockMode::dense;
  Matrix dense;
  HbsMatrix hbs;
  double probe_error = 0.0;

  int rows() const;
  Vector apply(const Vector &x) const;
  Matrix to_dense() const;
};

// Interface points projected to the non-slab axes, for cluster trees.
std::vector<Point2> interface_coordinates(const std::vector<Point> &pts, int dim);

// A double slab with its interior factorization.
struct LocalSlab
{
  int j = 0;
  SparseSystem system;
  SlabIndex idx;
  std::unique_ptr<SparseLU> lu;
  Csr A_IJ;
  std::vector<int> center_pos;               // C_j as positions in the interior list
  std::array<Csr, 2> outer;                  // A(I, J_{j,j-1}) and A(I, J_{j,j+1})
  double seconds = 0.0;

  // Dense -R_C A(I,I)^{-1} A(I, J_side) X, side 0 = left, 1 = right.
  Matrix apply_block(int side, const Matrix &X) const;
  Matrix apply_block_adjoint(int side, const Matrix &X) const;
};

LocalSlab make_local_slab(const EllipticOperator &op, const SlabDecomposition &decomp,
                          const Discretization &disc, int j);

SolutionBlock build_block(const LocalSlab &slab, int side, BlockMode mode,
                          const HbsConfig &hbs, Timers &timers);

// Equivalent load on the central interface of a double slab.
Vector equivalent_load(const LocalSlab &slab, const BoundaryData &data);

class EquilibriumOperator
{
public:
  EquilibriumOperator() = default;
  EquilibriumOperator(std::vector<int> offsets, Topology topology,
                      std::vector<SolutionBlock> blocks);

  int size() const { return offsets_.back(); }
  int interfaces() const { return static_cast<int>(offsets_.size()) - 1; }
  const std::vector<int> &offsets() const { return offsets_; }
  Topology topology() const { return topology_; }
  const std::vector<SolutionBlock> &blocks() const { return blocks_; }
  // Block S_{target, source}, or nullptr.
  const SolutionBlock *find(int target, int source) const;

  Vector apply(const Vector &u) const;
  Matrix dense() const;

private:
  std::vector<int> offsets_ = {0};
  Topology topology_ = Topology::open;
  std::vector<SolutionBlock> blocks_;
};

struct BuildOptions
{
  BlockMode mode = BlockMode::dense;
  HbsConfig hbs;
  int threads = 1;
};

struct BlockStats
{
  int target = 0, source = 0, rows = 0, max_rank = 0;
  long stored = 0;
  double rate = 1.0, probe_error = 0.0;
};

struct EquilibriumSystem
{
  SlabDecomposition decomp;
  Discretization disc;
  EquilibriumOperator S;
  Vector rhs;  // equivalent loads over J_Gamma
  std::vector<std::vector<Point>> interface_points;
  Timers timers;
  long local_dofs = 0;  // sum of interior DOFs over double slabs
  std::vector<BlockStats> stats;
};

EquilibriumSystem build_operator(const Problem &problem, const SlabDecomposition &decomp,
                                 const Discretization &disc, const BuildOptions &opts);

// Values on every node of a region's grid.
struct Field
{
  Grid grid;
  Vector values;
};

// Single-slab Dirichlet solves with the interface solution as data.
Field reconstruct_interior(const Problem &problem, const SlabDecomposition &decomp,
                           const Discretization &disc, const Vector &u_gamma);

// Direct sparse solve of the whole problem (the oracle for end-to-end checks).
Field solve_global(const Problem &problem, const Discretization &disc);

// Values of a global field at J_Gamma, in operator order.
Vector interface_values(const Field &field, const SlabDecomposition &decomp);

// Raw dump: "SLABBLK1", int32 count, then per block int32 target, source, rows, cols and
// rows*cols doubles in row-major order.
void write_blocks(const std::string &path, const EquilibriumOperator &S);
std::vector<SolutionBlock> read_blocks(const std::string &path);

}  // namespace slabsolve

#endif  // SLABSOLVE_EQUILIBRIUM_HPP
