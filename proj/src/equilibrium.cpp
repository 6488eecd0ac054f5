// SPDX-License-Identifier: Apache-2.0

#include "slabsolve/equilibrium.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include "slabsolve/parallel.hpp"

namespace slabsolve
{

namespace
{

std::string block_name(int target, int source)
{
  std::ostringstream s;
  s << "S_{" << target << "," << source << "}";
  return s.str();
}

Csr select_columns(const Csr &A, const std::vector<int> &cols, int ncols_total)
{
  std::vector<int> map(ncols_total, -1);
  for (size_t i = 0; i < cols.size(); i++)
  {
    map[cols[i]] = static_cast<int>(i);
  }
  std::vector<Eigen::Triplet<double, int>> t;
  for (int r = 0; r < A.rows(); r++)
  {
    for (Csr::InnerIterator it(A, r); it; ++it)
    {
      if (map[it.col()] >= 0)
      {
        t.emplace_back(r, map[it.col()], it.value());
      }
    }
  }
  Csr B(A.rows(), static_cast<int>(cols.size()));
  B.setFromTriplets(t.begin(), t.end());
  return B;
}

std::vector<Point> interior_points(const Grid &grid)
{
  std::vector<Point> pts;
  pts.reserve(grid.interior().size());
  for (int n : grid.interior())
  {
    pts.push_back(grid.coord(n));
  }
  return pts;
}

double max_relative_column_error(const Matrix &approx, const Matrix &exact)
{
  double worst = 0.0;
  for (int c = 0; c < exact.cols(); c++)
  {
    const double ref = exact.col(c).norm();
    const double diff = (approx.col(c) - exact.col(c)).norm();
    worst = std::max(worst, ref > 0.0 ? diff / ref : diff);
  }
  return worst;
}

}  // namespace

int SolutionBlock::rows() const
{
  return mode == BlockMode::dense ? static_cast<int>(dense.rows()) : hbs.rows();
}

Vector SolutionBlock::apply(const Vector &x) const
{
  return mode == BlockMode::dense ? Vector(dense * x) : hbs.matvec(x);
}

Matrix SolutionBlock::to_dense() const
{
  return mode == BlockMode::dense ? dense : hbs.dense();
}

std::vector<Point2> interface_coordinates(const std::vector<Point> &pts, int dim)
{
  std::vector<Point2> out;
  out.reserve(pts.size());
  for (const auto &x : pts)
  {
    out.push_back({dim >= 2 ? x[1] : 0.0, dim >= 3 ? x[2] : 0.0});
  }
  return out;
}

Matrix LocalSlab::apply_block(int side, const Matrix &X) const
{
  const Matrix rhs = outer[side] * X;
  const Matrix sol = lu->solve(rhs);
  Matrix out(center_pos.size(), X.cols());
  for (size_t i = 0; i < center_pos.size(); i++)
  {
    out.row(i) = -sol.row(center_pos[i]);
  }
  return out;
}

Matrix LocalSlab::apply_block_adjoint(int side, const Matrix &X) const
{
  Matrix E = Matrix::Zero(lu->size(), X.cols());
  for (size_t i = 0; i < center_pos.size(); i++)
  {
    E.row(center_pos[i]) = X.row(i);
  }
  const Matrix W = lu->solve_adjoint(E);
  return -(outer[side].transpose() * W);
}

LocalSlab make_local_slab(const EllipticOperator &op, const SlabDecomposition &decomp,
                          const Discretization &disc, int j)
{
  Stopwatch clock;
  SparseSystem system = assemble(op, disc, double_slab_region(decomp, disc, j));
  SlabIndex idx = slab_index(decomp, system.grid, j);
  const Grid &grid = system.grid;
  auto lu = std::make_unique<SparseLU>(system.interior_block(), interior_points(grid));
  Csr A_IJ = system.interior_boundary_block();
  std::vector<int> center_pos;
  for (int n : idx.center)
  {
    center_pos.push_back(grid.local_index(n));
  }
  std::array<Csr, 2> outer;
  const int nJ = static_cast<int>(grid.dirichlet().size());
  for (int side = 0; side < 2; side++)
  {
    std::vector<int> cols;
    for (int n : side == 0 ? idx.outer_left : idx.outer_right)
    {
      cols.push_back(grid.local_index(n));
    }
    outer[side] = select_columns(A_IJ, cols, nJ);
  }
  const double seconds = clock.seconds();
  return LocalSlab{j,
                   std::move(system),
                   std::move(idx),
                   std::move(lu),
                   std::move(A_IJ),
                   std::move(center_pos),
                   std::move(outer),
                   seconds};
}

SolutionBlock build_block(const LocalSlab &slab, int side, BlockMode mode,
                          const HbsConfig &hbs, Timers &timers)
{
  SolutionBlock b;
  b.target = slab.j;
  b.source = side == 0 ? slab.idx.left : slab.idx.right;
  b.mode = mode;
  if (b.source < 0)
  {
    throw Error("build_block: double slab " + std::to_string(slab.j) +
                " has no neighbor on that side");
  }
  const int n_src = slab.outer[side].cols();
  const int n = static_cast<int>(slab.center_pos.size());
  if (mode == BlockMode::dense)
  {
    Stopwatch clock;
    b.dense = slab.apply_block(side, Matrix::Identity(n_src, n_src));
    timers.t_YZ += clock.seconds();
    return b;
  }

  if (n_src != n)
  {
    throw Error("build_block: " + block_name(b.target, b.source) +
                " is not square; compressed blocks need matching interfaces");
  }
  std::vector<Point> pts;
  for (int node : slab.idx.center)
  {
    pts.push_back(slab.system.grid.coord(node));
  }
  const int dim = slab.system.grid.discretization().dim;
  const ClusterTree tree(interface_coordinates(pts, dim), dim >= 3 ? 2 : 1, hbs.arity,
                         hbs.leaf_size());
  const int s = sample_count(hbs.k, hbs.arity, hbs.alpha);
  const unsigned long long seed = hbs.seed * 1000003ULL + 2ULL * slab.j + side;

  Stopwatch clock;
  const Matrix Omega = gaussian_matrix(n, s, seed);
  const Matrix Psi = gaussian_matrix(n, s, seed ^ 0x5bd1e995ULL);
  const Matrix Y = slab.apply_block(side, Omega);
  const Matrix Z = slab.apply_block_adjoint(side, Psi);
  const Matrix probes = gaussian_matrix(n, hbs.probes, seed ^ 0x2545f491ULL);
  const Matrix exact = slab.apply_block(side, probes);
  timers.t_YZ += clock.seconds();

  clock.reset();
  b.hbs = compress_samples(Omega, Psi, Y, Z, hbs.k, tree);
  timers.t_HBS += clock.seconds();

  b.probe_error = max_relative_column_error(b.hbs.matvec(probes), exact);
  if (!(b.probe_error <= hbs.probe_tol))
  {
    std::ostringstream msg;
    msg << block_name(b.target, b.source) << " failed its probe check: relative error "
        << b.probe_error << " exceeds " << hbs.probe_tol;
    throw Error(msg.str());
  }
  return b;
}

Vector equivalent_load(const LocalSlab &slab, const BoundaryData &data)
{
  const Grid &grid = slab.system.grid;
  Vector f = dirichlet_values(data.dirichlet, grid);
  for (size_t i = 0; i < grid.dirichlet().size(); i++)
  {
    if (grid.dof_class(grid.dirichlet()[i]) == DofClass::cut_boundary)
    {
      f(i) = 0.0;
    }
  }
  const Vector b = interior_load(data.load, grid) - slab.A_IJ * f;
  const Vector x = slab.lu->solve(b);
  Vector out(slab.center_pos.size());
  for (size_t i = 0; i < slab.center_pos.size(); i++)
  {
    out(i) = x(slab.center_pos[i]);
  }
  return out;
}

EquilibriumOperator::EquilibriumOperator(std::vector<int> offsets, Topology topology,
                                         std::vector<SolutionBlock> blocks)
    : offsets_(std::move(offsets)), topology_(topology), blocks_(std::move(blocks))
{
  for (const auto &b : blocks_)
  {
    const int nt = offsets_[b.target + 1] - offsets_[b.target];
    if (b.rows() != nt)
    {
      throw Error("equilibrium operator: " + block_name(b.target, b.source) +
                  " has the wrong number of rows");
    }
  }
}

const SolutionBlock *EquilibriumOperator::find(int target, int source) const
{
  for (const auto &b : blocks_)
  {
    if (b.target == target && b.source == source)
    {
      return &b;
    }
  }
  return nullptr;
}

Vector EquilibriumOperator::apply(const Vector &u) const
{
  if (u.size() != size())
  {
    throw Error("equilibrium apply: vector length does not match the operator");
  }
  Vector y = u;
  for (const auto &b : blocks_)
  {
    const int nt = offsets_[b.target + 1] - offsets_[b.target];
    const int ns = offsets_[b.source + 1] - offsets_[b.source];
    y.segment(offsets_[b.target], nt) -= b.apply(u.segment(offsets_[b.source], ns));
  }
  return y;
}

Matrix EquilibriumOperator::dense() const
{
  Matrix S = Matrix::Identity(size(), size());
  for (const auto &b : blocks_)
  {
    const Matrix B = b.to_dense();
    S.block(offsets_[b.target], offsets_[b.source], B.rows(), B.cols()) -= B;
  }
  return S;
}

EquilibriumSystem build_operator(const Problem &problem, const SlabDecomposition &decomp,
                                 const Discretization &disc, const BuildOptions &opts)
{
  const IndexSets sets = index_sets(decomp, disc);
  const int N = decomp.count();
  std::vector<std::vector<SolutionBlock>> per_slab(N);
  std::vector<Vector> loads(N);
  std::vector<Timers> timers(N);
  std::vector<long> dofs(N);
  parallel_for(N, opts.threads,
               [&](int j)
               {
                 try
                 {
                   LocalSlab slab = make_local_slab(problem.op, decomp, disc, j);
                   timers[j].t_A += slab.seconds;
                   dofs[j] = slab.lu->size();
                   for (int side = 0; side < 2; side++)
                   {
                     if ((side == 0 ? slab.idx.left : slab.idx.right) >= 0)
                     {
                       per_slab[j].push_back(
                           build_block(slab, side, opts.mode, opts.hbs, timers[j]));
                     }
                   }
                   loads[j] = equivalent_load(slab, problem.data);
                 }
                 catch (const Error &e)
                 {
                   throw Error("double slab " + std::to_string(j) + ": " + e.what());
                 }
               });

  EquilibriumSystem out{decomp, disc, {}, Vector(sets.total()), sets.interface_points, {}, 0,
                        {}};
  std::vector<SolutionBlock> blocks;
  for (int j = 0; j < N; j++)
  {
    out.rhs.segment(sets.offsets[j], sets.block_size(j)) = loads[j];
    out.timers.t_A += timers[j].t_A;
    out.timers.t_YZ += timers[j].t_YZ;
    out.timers.t_HBS += timers[j].t_HBS;
    out.local_dofs += dofs[j];
    for (auto &b : per_slab[j])
    {
      BlockStats st;
      st.target = b.target;
      st.source = b.source;
      st.rows = b.rows();
      st.probe_error = b.probe_error;
      if (b.mode == BlockMode::hbs)
      {
        const StorageReport r = storage_report(b.hbs);
        st.stored = r.stored;
        st.rate = r.rate;
        st.max_rank = b.hbs.max_rank();
      }
      else
      {
        st.stored = b.dense.size();
        st.rate = b.dense.size() > 0 ? 1.0 : 0.0;
        st.max_rank = static_cast<int>(std::min(b.dense.rows(), b.dense.cols()));
      }
      out.stats.push_back(st);
      blocks.push_back(std::move(b));
    }
  }
  out.S = EquilibriumOperator(sets.offsets, decomp.topology, std::move(blocks));
  return out;
}

Field reconstruct_interior(const Problem &problem, const SlabDecomposition &decomp,
                           const Discretization &disc, const Vector &u_gamma)
{
  const IndexSets sets = index_sets(decomp, disc);
  if (u_gamma.size() != sets.total())
  {
    throw Error("reconstruct: interface vector has the wrong length");
  }
  Field out{Grid(disc, full_region(disc)), Vector()};
  out.values = Vector::Zero(out.grid.size());
  // boundary nodes where an interface meets the domain edge belong to no slab grid (FD)
  const Vector f_global = dirichlet_values(problem.data.dirichlet, out.grid);
  for (size_t i = 0; i < out.grid.dirichlet().size(); i++)
  {
    out.values(out.grid.dirichlet()[i]) = f_global(i);
  }
  const int npu = disc.nodes_per_unit();
  for (int s = 0; s < decomp.single_slab_count(); s++)
  {
    const Region region = single_slab_region(decomp, disc, s);
    const SparseSystem sys = assemble(problem.op, disc, region);
    const Grid &grid = sys.grid;
    Vector f = dirichlet_values(problem.data.dirichlet, grid);
    const auto [left, right] = decomp.single_slab_interfaces(s);
    for (int side = 0; side < 2; side++)
    {
      const int k = side == 0 ? left : right;
      if (k < 0)
      {
        continue;
      }
      const std::vector<int> plane = grid.plane((side == 0 ? region.lo[0] : region.hi[0]) * npu);
      if (static_cast<int>(plane.size()) != sets.block_size(k))
      {
        throw Error("reconstruct: slab " + std::to_string(s) + " does not conform to interface " +
                    std::to_string(k));
      }
      for (size_t i = 0; i < plane.size(); i++)
      {
        f(grid.local_index(plane[i])) = u_gamma(sets.offsets[k] + i);
      }
    }
    const SparseLU lu(sys.interior_block(), interior_points(grid));
    const Vector x = lu.solve(build_rhs(sys, interior_load(problem.data.load, grid), f));
    for (int n = 0; n < grid.size(); n++)
    {
      const int g = out.grid.find(grid.lattice(n));
      if (g >= 0)
      {
        out.values(g) = grid.is_interior(n) ? x(grid.local_index(n)) : f(grid.local_index(n));
      }
    }
  }
  return out;
}

Field solve_global(const Problem &problem, const Discretization &disc)
{
  const SparseSystem sys = assemble(problem.op, disc, full_region(disc));
  const Grid &grid = sys.grid;
  const Vector f = dirichlet_values(problem.data.dirichlet, grid);
  const SparseLU lu(sys.interior_block(), interior_points(grid));
  const Vector x = lu.solve(build_rhs(sys, interior_load(problem.data.load, grid), f));
  Field out{grid, Vector(grid.size())};
  for (int n = 0; n < grid.size(); n++)
  {
    out.values(n) = grid.is_interior(n) ? x(grid.local_index(n)) : f(grid.local_index(n));
  }
  return out;
}

Vector interface_values(const Field &field, const SlabDecomposition &decomp)
{
  const std::vector<int> nodes = global_interface_nodes(decomp, field.grid);
  Vector v(nodes.size());
  for (size_t i = 0; i < nodes.size(); i++)
  {
    v(i) = field.values(nodes[i]);
  }
  return v;
}

void write_blocks(const std::string &path, const EquilibriumOperator &S)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    throw Error("write_blocks: cannot open " + path);
  }
  out.write("SLABBLK1", 8);
  auto put = [&](std::int32_t v) { out.write(reinterpret_cast<const char *>(&v), sizeof v); };
  put(static_cast<std::int32_t>(S.blocks().size()));
  for (const auto &b : S.blocks())
  {
    const Matrix M = b.to_dense();
    put(b.target);
    put(b.source);
    put(static_cast<std::int32_t>(M.rows()));
    put(static_cast<std::int32_t>(M.cols()));
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R = M;
    out.write(reinterpret_cast<const char *>(R.data()),
              static_cast<std::streamsize>(sizeof(double) * R.size()));
  }
  if (!out)
  {
    throw Error("write_blocks: write failed for " + path);
  }
}

std::vector<SolutionBlock> read_blocks(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, "SLABBLK1", 8) != 0)
  {
    throw Error("read_blocks: " + path + " is not a block dump");
  }
  auto get = [&]()
  {
    std::int32_t v = 0;
    if (!in.read(reinterpret_cast<char *>(&v), sizeof v))
    {
      throw Error("read_blocks: truncated file " + path);
    }
    return v;
  };
  const int count = get();
  std::vector<SolutionBlock> out;
  for (int i = 0; i < count; i++)
  {
    SolutionBlock b;
    b.target = get();
    b.source = get();
    const int r = get(), c = get();
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> R(r, c);
    if (!in.read(reinterpret_cast<char *>(R.data()),
                 static_cast<std::streamsize>(sizeof(double) * R.size())))
    {
      throw Error("read_blocks: truncated file " + path);
    }
    b.dense = R;
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace slabsolve
