// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include "slabsolve/experiments.hpp"

using namespace slabsolve;
namespace fs = std::filesystem;

namespace
{

fs::path scratch(const std::string &name)
{
  const fs::path p = fs::temp_directory_path() / ("slabsolve_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::string> problems_of(const std::string &text,
                                     const std::vector<std::string> &overrides = {})
{
  try
  {
    parse_config(text, ".", overrides);
  }
  catch (const ConfigError &e)
  {
    return e.problems;
  }
  return {};
}

}  // namespace

TEST(Config, SectionsListsAndFractions)
{
  const auto c = parse_config(
      "experiment = normality_sweep\n"
      "[problem]\nname = vc2d\n"
      "[decomp]\nH_sweep = [1/4, 0.125]\n"
      "[disc]\nbackend = hps\nh = 1/96\ntiling = [32, 16]\np = 10\n"
      "[hbs]\nk = 12\nseed = 9\n",
      ".");
  EXPECT_EQ(c.experiment, "normality_sweep");
  EXPECT_EQ(c.problem, "vc2d");
  ASSERT_EQ(c.H_sweep.size(), 2u);
  EXPECT_EQ(c.H_sweep[0], 0.25);
  EXPECT_EQ(c.H_sweep[1], 0.125);
  EXPECT_EQ(c.backend, Backend::hps);
  EXPECT_DOUBLE_EQ(c.h, 1.0 / 96);
  EXPECT_EQ(c.tiling[0], 32);
  EXPECT_EQ(c.tiling[1], 16);
  EXPECT_EQ(c.p, 10);
  EXPECT_EQ(c.hbs.k, 12);
  EXPECT_EQ(c.hbs.seed, 9u);
  EXPECT_EQ(c.dim(), 2);
}

TEST(Config, SpacingFixesInterfaceCount)
{
  EXPECT_EQ(parse_config("[decomp]\nH = 1/8\n", ".").n, 7);
  const auto p = parse_config("[decomp]\nH = 1/8\ntopology = periodic\n", ".");
  EXPECT_EQ(p.n, 8);
  EXPECT_DOUBLE_EQ(p.H(), 0.125);
  EXPECT_FALSE(problems_of("[decomp]\nH = 1/8\nn = 3\n").empty());
  EXPECT_FALSE(problems_of("[decomp]\nH = 0.3\n").empty());
}

TEST(Config, ThreeDimensionalProblemsPickQuadTrees)
{
  const auto c = parse_config("[problem]\nname = helmholtz3d\n", ".");
  EXPECT_EQ(c.dim(), 3);
  EXPECT_EQ(c.hbs_config().arity, 4);
  EXPECT_EQ(parse_config("", ".").hbs_config().arity, 2);
}

TEST(Config, ProblemsAreListedExhaustively)
{
  const auto errs = problems_of("bogus = 1\n"
                                "[problem]\nname = poisson9d\nkappa = -1\n"
                                "[disc]\np = two\nh = 0.3\n"
                                "[gmres]\nmax_iter = 0\n");
  // unknown key, unknown preset, kappa, p, h, max_iter
  EXPECT_EQ(errs.size(), 6u);
  std::set<std::string> joined;
  for (const auto &e : errs)
  {
    joined.insert(e.substr(0, e.find(' ')));
  }
  EXPECT_TRUE(joined.count("unknown"));
  EXPECT_TRUE(joined.count("problem.name"));
  EXPECT_TRUE(joined.count("disc.p"));
}

TEST(Config, OverridesApplyLast)
{
  const auto c = parse_config("[disc]\np = 8\n", ".", {"disc.p=12", "hbs.k_sweep=[4, 8]"});
  EXPECT_EQ(c.p, 12);
  EXPECT_EQ(c.k_sweep, (std::vector<int>{4, 8}));
  EXPECT_FALSE(problems_of("", {"disc.p"}).empty());
  EXPECT_FALSE(problems_of("", {"disc.nonsense=3"}).empty());
}

TEST(Config, OutputDirectoryFromEnvironment)
{
  setenv("SLABSOLVE_OUTPUT_DIR", "/tmp/elsewhere", 1);
  const auto c = parse_config("[output]\ndir = here\n", ".");
  unsetenv("SLABSOLVE_OUTPUT_DIR");
  EXPECT_EQ(c.output_dir, "/tmp/elsewhere");
  EXPECT_EQ(parse_config("[output]\ndir = here\n", ".").output_dir, "here");
}

TEST(Config, EveryPresetLoads)
{
  const auto names = list_presets();
  for (const std::string need :
       {"smoke", "oracle_equivalence", "gmres_scaling_laplace", "gmres_scaling_vc",
        "normality_sweep", "spectrum_gallery", "t_spectrum_growth", "rank_study_2d",
        "rank_study_3d_reduced", "hbs_error_vs_rank", "cube_helmholtz", "waveguide_selfconv"})
  {
    EXPECT_NE(std::find(names.begin(), names.end(), need), names.end()) << need;
  }
  for (const auto &n : names)
  {
    const auto c = load_preset(n);
    EXPECT_EQ(c.experiment, n);
  }
  EXPECT_THROW(load_preset("no_such_preset"), ConfigError);
}

TEST(Config, WaveguideNeedsBumps)
{
  EXPECT_FALSE(problems_of("[problem]\nname = waveguide2d\n").empty());
  const auto c = load_preset("waveguide_selfconv");
  EXPECT_GT(c.bumps.size(), 50u);
  for (const auto &b : c.bumps)
  {
    EXPECT_GT(b.width, 0.0);
  }
}

TEST(Config, BumpFileErrors)
{
  const auto dir = scratch("bumps");
  const auto good = dir / "good.txt", bad = dir / "bad.txt";
  std::ofstream(good) << "# comment\n0.5 0.5 0.1 0.3\n\n0.2 0.2 0.05 0.4  # tail\n";
  std::ofstream(bad) << "0.5 0.5 0.1\n";
  const auto b = read_bumps(good.string());
  ASSERT_EQ(b.size(), 2u);
  EXPECT_EQ(b[1].amplitude, 0.4);
  EXPECT_THROW(read_bumps(bad.string()), Error);
  EXPECT_THROW(read_bumps((dir / "missing.txt").string()), Error);
}

TEST(Csv, NumbersRoundTrip)
{
  for (double x : {0.1, 1.0 / 3, 1e-300, -2.5e17, 0.0})
  {
    EXPECT_EQ(std::stod(format_number(x)), x);
  }
  EXPECT_EQ(format_number(NAN), "nan");
  EXPECT_EQ(format_number(3.0), "3");
}

TEST(Csv, SchemaHeaderAndAppend)
{
  const auto dir = scratch("csv");
  Table t("sweep");
  t.add(Row().set("H", 0.25).set("iters", 8).set("label", "a,b"));
  t.add(Row().set("H", 0.125).set("iters", 18).set("label", "plain"));
  const auto path = append_csv(t, dir.string());
  append_csv(t, dir.string());
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "# schema=1");
  const Table back = read_csv(path);
  ASSERT_EQ(back.size(), 4);
  EXPECT_EQ(back.columns(), t.columns());
  EXPECT_EQ(back.str(0, "label"), "a,b");
  EXPECT_EQ(back.num(3, "iters"), 18);
  EXPECT_FALSE(fs::exists(path + ".tmp"));

  Table other("sweep");
  other.add(Row().set("p", 8));
  EXPECT_THROW(append_csv(other, dir.string()), Error);
  EXPECT_THROW(t.add(Row().set("H", 1.0)), Error);
  EXPECT_THROW(t.num(0, "missing"), Error);
  Table dup("dup");
  EXPECT_THROW(dup.add(Row().set("k", 1).set("k", 2)), Error);
}

TEST(Experiments, SmokeAgreesWithGlobalSolve)
{
  auto c = load_preset("smoke", {"disc.h=1/96"});
  const auto out = run_experiment(c);
  ASSERT_TRUE(out.ok);
  const Table &t = out.table("smoke");
  ASSERT_EQ(t.size(), 2);
  EXPECT_EQ(t.str(0, "blocks"), "dense");
  EXPECT_LE(t.num(0, "err_global"), 1e-8);
  EXPECT_EQ(t.str(1, "blocks"), "hbs");
  EXPECT_LE(t.num(1, "err_global"), 10 * std::max(t.num(1, "probe_error"), t.num(1, "tol")));
  // laplace2d ships a manufactured solution; FD error is O(h^2)
  EXPECT_LE(t.num(0, "err_reference"), 1e-3);
  for (const std::string col : {"t_A", "t_YZ", "t_HBS", "t_gmres"})
  {
    EXPECT_GE(t.num(0, col), 0.0);
  }
}

TEST(Experiments, RerunIsBitIdenticalOutsideTimers)
{
  const auto c = load_preset("smoke", {"disc.h=1/48", "hbs.k=8"});
  const Table a = run_experiment(c).table("smoke"), b = run_experiment(c).table("smoke");
  ASSERT_EQ(a.columns(), b.columns());
  for (int r = 0; r < a.size(); r++)
  {
    for (const auto &col : a.columns())
    {
      if (col.rfind("t_", 0) != 0)
      {
        EXPECT_EQ(a.str(r, col), b.str(r, col)) << col;
      }
    }
  }
}

TEST(Experiments, NonConvergenceIsReported)
{
  const auto c = load_preset("smoke", {"disc.h=1/48", "decomp.n=5", "gmres.max_iter=1"});
  EXPECT_FALSE(run_experiment(c).ok);
}

TEST(Experiments, OutputsAppendAndSummarize)
{
  const auto dir = scratch("outputs");
  const auto c = load_preset("oracle_equivalence", {"disc.h=1/16", "disc.tiling=[4, 4]", "disc.p=6"});
  const auto out = run_experiment(c);
  for (int r = 0; r < out.table("oracle_equivalence").size(); r++)
  {
    EXPECT_LE(out.table("oracle_equivalence").num(r, "oracle_gap"), 1e-10);
  }
  write_outputs(out, c.experiment, dir.string());
  const auto files = write_outputs(out, c.experiment, dir.string());
  EXPECT_EQ(read_csv(files[0]).size(), 6);
  EXPECT_TRUE(fs::exists(dir / "oracle_equivalence_summary.txt"));
}

TEST(Experiments, HpsEvaluationIsExactOnPolynomials)
{
  const auto disc = Discretization::hps(2, {1, 1, 1}, {3, 2, 1}, 8);
  Field f{Grid(disc, full_region(disc)), Vector()};
  auto u = [](const Point &x) { return x[0] * x[0] * x[0] * x[1] * x[1] - 2 * x[1] + 0.5; };
  f.values.resize(f.grid.size());
  for (int i = 0; i < f.grid.size(); i++)
  {
    f.values(i) = u(f.grid.coord(i));
  }
  std::vector<Point> pts = {{0.01, 0.02, 0}, {0.5, 0.5, 0}, {0.99, 0.3, 0}, {1.0 / 3, 0.5, 0}};
  const Vector v = evaluate_hps(f, pts);
  for (size_t i = 0; i < pts.size(); i++)
  {
    EXPECT_NEAR(v(i), u(pts[i]), 1e-12);
  }
}

TEST(Experiments, UnknownExperimentThrows)
{
  ExperimentConfig c;
  c.experiment = "nope";
  EXPECT_THROW(run_experiment(c), Error);
}

TEST(Experiments, WaveguideErrorsFallToTheFloor)
{
  const auto dir = scratch("waveguide");
  const auto c = load_preset("waveguide_selfconv", {"output.dir=" + dir.string()});
  const auto out = run_experiment(c);
  ASSERT_TRUE(out.ok);
  const Table &t = out.table("waveguide_selfconv");
  const auto err = t.column("err_selfconv");
  ASSERT_GE(err.size(), 3u);
  for (size_t i = 1; i < err.size(); i++)
  {
    EXPECT_LT(err[i], err[i - 1]);
  }
  EXPECT_LE(err.back(), 10 * t.num(t.size() - 1, "floor"));
  // second run reads the cached reference and reproduces the errors
  const Table again = run_experiment(c).table("waveguide_selfconv");
  EXPECT_EQ(again.str(0, "err_selfconv"), t.str(0, "err_selfconv"));
  EXPECT_NE(out.summary.front().find("computed"), std::string::npos);
}

TEST(Experiments, CubeIterationsIndependentOfResolution)
{
  const auto c = load_preset("cube_helmholtz", {"disc.h_sweep=[1/16, 1/32]"});
  const auto out = run_experiment(c);
  ASSERT_TRUE(out.ok);
  const auto its = out.table("cube_helmholtz").column("iters");
  ASSERT_EQ(its.size(), 2u);
  EXPECT_LE(std::abs(its[1] - its[0]), 2.0);
  const auto err = out.table("cube_helmholtz").column("err_reference");
  EXPECT_LT(err[1], err[0]);
}
