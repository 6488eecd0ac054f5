// SPDX-License-Identifier: Apache-2.0

#ifndef SLABSOLVE_CONFIG_HPP
#define SLABSOLVE_CONFIG_HPP

#include <string>
#include <vector>
#include "slabsolve/equilibrium.hpp"

namespace slabsolve
{

// One experiment run. Sweep lists left empty fall back to the scalar value.
struct ExperimentConfig
{
  std::string experiment = "solve";

  std::string problem = "laplace2d";
  double kappa = 0.0;
  Point source = {-0.5, -0.5, -0.5};
  std::string data = "preset";  // preset | random
  unsigned data_seed = 7;
  std::string bumps_file;
  std::vector<GaussianBump> bumps;

  int n = 3;
  Topology topology = Topology::open;
  std::vector<double> H_sweep;

  Backend backend = Backend::fd;
  double h = 1.0 / 64;
  Lattice tiling = {8, 8, 8};
  int p = 8;
  std::vector<double> h_sweep;
  std::vector<int> p_sweep;

  BlockMode blocks = BlockMode::dense;
  HbsConfig hbs{20, 0, 0, 1, 0, 0.1, 5};  // arity 0: 2 for 2D, 4 for 3D
  std::vector<int> k_sweep;
  int hbs_slab = -1;  // block studied by hbs_error_vs_rank, -1 = middle double slab

  double tol_scale = 1e-5;
  int max_iter = 2000;

  std::vector<int> rank_levels = {4, 5};
  double rank_tol = 1e-5;
  int rank_leaf = 0;  // 0: each cell face split in two along every interface axis

  long schur_cap = 40000;
  long eig_cap = 6000;
  bool global_oracle = true;

  std::string output_dir = "results";
  int threads = 1;

  int dim() const;
  double H() const;  // uniform spacing of the current decomposition
  HbsConfig hbs_config() const;
};

class ConfigError : public Error
{
public:
  explicit ConfigError(const std::vector<std::string> &problems);
  std::vector<std::string> problems;
};

// Parses config text. `base_dir` resolves relative paths (bumps file). Overrides are
// "section.key=value" strings applied after the file. Every problem found is collected
// into a single ConfigError.
ExperimentConfig parse_config(const std::string &text, const std::string &base_dir,
                              const std::vector<std::string> &overrides = {});
ExperimentConfig load_config(const std::string &path,
                             const std::vector<std::string> &overrides = {});

// Bump files: one "cx cy width amplitude" per line, '#' comments.
std::vector<GaussianBump> read_bumps(const std::string &path);

std::string preset_dir();
std::vector<std::string> list_presets();
ExperimentConfig load_preset(const std::string &name,
                             const std::vector<std::string> &overrides = {});

std::vector<std::string> experiment_names();

}  // namespace slabsolve

#endif  // SLABSOLVE_CONFIG_HPP
