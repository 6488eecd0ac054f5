// SPDX-License-Identifier: Apache-2.0

#ifndef SLABSOLVE_EXPERIMENTS_HPP
#define SLABSOLVE_EXPERIMENTS_HPP

#include <string>
#include <vector>
#include "slabsolve/config.hpp"
#include "slabsolve/csv.hpp"

namespace slabsolve
{

struct ExperimentOutput
{
  std::vector<Table> tables;
  std::vector<std::string> summary;
  // false when GMRES stopped at max_iter somewhere
  bool ok = true;

  const Table &table(const std::string &name) const;
};

Problem build_problem(const ExperimentConfig &cfg);
Discretization build_discretization(const ExperimentConfig &cfg);
SlabDecomposition build_decomposition(const ExperimentConfig &cfg);

ExperimentOutput run_experiment(const ExperimentConfig &cfg);

// Appends every table to <dir>/<table>.csv and writes <dir>/<experiment>_summary.txt.
std::vector<std::string> write_outputs(const ExperimentOutput &out, const std::string &experiment,
                                       const std::string &dir);

// Values of a 2D HPS field at arbitrary points: tensor Chebyshev interpolation on each
// cell. Cell corners carry no node; they are extrapolated along both edges and averaged.
Vector evaluate_hps(const Field &field, const std::vector<Point> &points);

}  // namespace slabsolve

#endif  // SLABSOLVE_EXPERIMENTS_HPP
