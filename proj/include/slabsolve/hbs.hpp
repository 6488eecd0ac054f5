// SPDX-License-Identifier: Apache-2.0

#ifndef SLABSOLVE_HBS_HPP
#define SLABSOLVE_HBS_HPP

#include <functional>
#include <vector>
#include "slabsolve/types.hpp"

namespace slabsolve
{

using Point2 = std::array<double, 2>;

// Balanced spatial bisection of interface points. Every leaf sits on the same level, so
// levels telescope cleanly. Levels are 1-based: level 1 is the root.
class ClusterTree
{
public:
  struct Node
  {
    int level = 1;
    int begin = 0, end = 0;  // range in tree order
    int parent = -1;
    std::vector<int> children;
    Point2 lo{}, hi{};  // spatial box; siblings share faces
    int size() const { return end - begin; }
  };

  ClusterTree() = default;
  // dims = 1 for line interfaces (2D problems), 2 for planar interfaces (3D problems).
  ClusterTree(const std::vector<Point2> &points, int dims, int arity, int leaf_size);

  int size() const { return static_cast<int>(perm.size()); }
  int levels() const { return static_cast<int>(by_level.size()); }
  int arity() const { return arity_; }
  int dims() const { return dims_; }
  const Node &node(int id) const { return nodes[id]; }
  int node_count() const { return static_cast<int>(nodes.size()); }
  // Node ids on a 1-based level, ordered by creation.
  const std::vector<int> &level(int l) const { return by_level.at(l - 1); }
  const std::vector<int> &leaves() const { return by_level.back(); }
  // Original indices held by a node.
  std::vector<int> indices(int id) const;
  // Tree position -> original index.
  const std::vector<int> &permutation() const { return perm; }

private:
  std::vector<Node> nodes;
  std::vector<std::vector<int>> by_level;
  std::vector<int> perm;
  int arity_ = 2, dims_ = 1;
};

ClusterTree build_tree(const std::vector<Point2> &points, int dims, int arity, int leaf_size);

// Every node stores D (its diagonal block in the telescoped basis); non-root nodes also
// store the row/column bases U and V.
class HbsMatrix
{
public:
  HbsMatrix() = default;

  int rows() const { return tree_.size(); }
  const ClusterTree &tree() const { return tree_; }
  int rank(int node) const { return static_cast<int>(U[node].cols()); }
  int max_rank() const;

  Vector matvec(const Vector &x) const;
  Vector adjoint_matvec(const Vector &x) const;
  Matrix matvec(const Matrix &X) const;
  Matrix adjoint_matvec(const Matrix &X) const;
  Matrix dense() const;

  // Coupling between two children of the same parent, in their compressed bases.
  Matrix coupling(int child_a, int child_b) const;

  long stored_reals() const;

  const Matrix &diag(int node) const { return D[node]; }
  const Matrix &row_basis(int node) const { return U[node]; }
  const Matrix &col_basis(int node) const { return V[node]; }

private:
  friend HbsMatrix compress_samples(const Matrix &, const Matrix &, const Matrix &,
                                    const Matrix &, int, const ClusterTree &);
  ClusterTree tree_;
  std::vector<Matrix> D, U, V;
  std::vector<int> offset;  // position of each node inside its parent's coordinates

  Matrix apply(const Matrix &X, bool adjoint) const;
};

struct StorageReport
{
  long stored = 0;
  double rate = 0.0;
};
StorageReport storage_report(const HbsMatrix &H);

// s = alpha k + 10 with alpha = 3 (binary) or 5 (quad) unless given.
int sample_count(int k, int arity, int alpha = 0);

// Gaussian test matrix, deterministic in the seed.
Matrix gaussian_matrix(int rows, int cols, unsigned long long seed);

// Build from samples Y = A Omega, Z = A^T Psi (all N x s, rows in original order).
HbsMatrix compress_samples(const Matrix &Omega, const Matrix &Psi, const Matrix &Y,
                           const Matrix &Z, int k, const ClusterTree &tree);

using BlockOracle = std::function<Matrix(const Matrix &)>;

// Draws Omega and Psi from the seed and calls each oracle exactly once with all s columns.
HbsMatrix compress(const BlockOracle &apply, const BlockOracle &apply_adjoint, int k,
                   const ClusterTree &tree, unsigned long long seed, int alpha = 0);

}  // namespace slabsolve

#endif  // SLABSOLVE_HBS_HPP
