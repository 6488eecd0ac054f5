// SPDX-License-Identifier: Apache-2.0

#include "slabsolve/config.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#ifndef SLABSOLVE_PRESET_DIR
#define SLABSOLVE_PRESET_DIR "presets"
#endif

namespace fs = std::filesystem;

namespace slabsolve
{

namespace
{

const std::vector<std::string> kExperiments = {
    "solve",
    "smoke",
    "oracle_equivalence",
    "conditioning_bounds",
    "gmres_scaling_laplace",
    "gmres_scaling_vc",
    "normality_sweep",
    "spectrum_gallery",
    "t_spectrum_growth",
    "rank_study_2d",
    "rank_study_3d_reduced",
    "hbs_error_vs_rank",
    "cube_helmholtz",
    "waveguide_selfconv",
};

std::string join(const std::vector<std::string> &v)
{
  std::string s;
  for (const auto &x : v)
  {
    s += (s.empty() ? "" : " ") + x;
  }
  return s;
}

// "0.25", "1e-5" or "1/96"
bool parse_double(const std::string &s, double &out)
{
  const auto slash = s.find('/');
  if (slash != std::string::npos)
  {
    double a = 0, b = 0;
    if (!parse_double(s.substr(0, slash), a) || !parse_double(s.substr(slash + 1), b) || b == 0)
    {
      return false;
    }
    out = a / b;
    return true;
  }
  const char *end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_long(const std::string &s, long &out)
{
  const char *end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

struct Parser
{
  ExperimentConfig cfg;
  std::vector<std::string> errors;
  std::string bumps_path;
  bool have_H = false, have_n = false;
  double H = 0;

  void bad(const std::string &key, const std::vector<std::string> &v, const std::string &why)
  {
    errors.push_back(key + " = " + join(v) + ": " + why);
  }

  bool one(const std::string &key, const std::vector<std::string> &v)
  {
    if (v.size() != 1)
    {
      bad(key, v, "expected a single value");
      return false;
    }
    return true;
  }

  void real(const std::string &key, const std::vector<std::string> &v, double &out)
  {
    if (one(key, v) && !parse_double(v[0], out))
    {
      bad(key, v, "not a number");
    }
  }

  template <class Int>
  void integer(const std::string &key, const std::vector<std::string> &v, Int &out)
  {
    long x = 0;
    if (one(key, v))
    {
      if (parse_long(v[0], x))
      {
        out = static_cast<Int>(x);
      }
      else
      {
        bad(key, v, "not an integer");
      }
    }
  }

  void reals(const std::string &key, const std::vector<std::string> &v, std::vector<double> &out)
  {
    out.clear();
    for (const auto &s : v)
    {
      double x = 0;
      if (!parse_double(s, x))
      {
        bad(key, v, "not a list of numbers");
        return;
      }
      out.push_back(x);
    }
  }

  void integers(const std::string &key, const std::vector<std::string> &v, std::vector<int> &out)
  {
    out.clear();
    for (const auto &s : v)
    {
      long x = 0;
      if (!parse_long(s, x))
      {
        bad(key, v, "not a list of integers");
        return;
      }
      out.push_back(static_cast<int>(x));
    }
  }

  void boolean(const std::string &key, const std::vector<std::string> &v, bool &out)
  {
    if (!one(key, v))
    {
      return;
    }
    if (v[0] == "true" || v[0] == "1")
    {
      out = true;
    }
    else if (v[0] == "false" || v[0] == "0")
    {
      out = false;
    }
    else
    {
      bad(key, v, "expected true or false");
    }
  }

  bool choice(const std::string &key, const std::vector<std::string> &v,
              const std::vector<std::string> &allowed, std::string &out)
  {
    if (!one(key, v))
    {
      return false;
    }
    if (std::find(allowed.begin(), allowed.end(), v[0]) == allowed.end())
    {
      bad(key, v, "expected one of: " + join(allowed));
      return false;
    }
    out = v[0];
    return true;
  }

  void set(const std::string &key, const std::vector<std::string> &v)
  {
    std::string s;
    if (key == "experiment")
    {
      choice(key, v, kExperiments, cfg.experiment);
    }
    else if (key == "problem.name")
    {
      choice(key, v, problem_presets(), cfg.problem);
    }
    else if (key == "problem.kappa")
    {
      real(key, v, cfg.kappa);
    }
    else if (key == "problem.source")
    {
      std::vector<double> x;
      reals(key, v, x);
      if (x.size() != 3)
      {
        bad(key, v, "expected three coordinates");
      }
      else
      {
        cfg.source = {x[0], x[1], x[2]};
      }
    }
    else if (key == "problem.data")
    {
      choice(key, v, {"preset", "random"}, cfg.data);
    }
    else if (key == "problem.data_seed")
    {
      integer(key, v, cfg.data_seed);
    }
    else if (key == "problem.bumps")
    {
      if (one(key, v))
      {
        bumps_path = v[0];
      }
    }
    else if (key == "decomp.n")
    {
      integer(key, v, cfg.n);
      have_n = true;
    }
    else if (key == "decomp.H")
    {
      real(key, v, H);
      have_H = true;
    }
    else if (key == "decomp.topology")
    {
      if (choice(key, v, {"open", "periodic"}, s))
      {
        cfg.topology = topology_from_string(s);
      }
    }
    else if (key == "decomp.H_sweep")
    {
      reals(key, v, cfg.H_sweep);
    }
    else if (key == "disc.backend")
    {
      if (choice(key, v, {"fd", "hps"}, s))
      {
        cfg.backend = backend_from_string(s);
      }
    }
    else if (key == "disc.h")
    {
      real(key, v, cfg.h);
    }
    else if (key == "disc.tiling")
    {
      std::vector<int> t;
      integers(key, v, t);
      if (t.size() < 2 || t.size() > 3)
      {
        bad(key, v, "expected two or three cell counts");
      }
      else
      {
        cfg.tiling = {t[0], t[1], t.size() == 3 ? t[2] : 1};
      }
    }
    else if (key == "disc.p")
    {
      integer(key, v, cfg.p);
    }
    else if (key == "disc.h_sweep")
    {
      reals(key, v, cfg.h_sweep);
    }
    else if (key == "disc.p_sweep")
    {
      integers(key, v, cfg.p_sweep);
    }
    else if (key == "blocks.mode")
    {
      if (choice(key, v, {"dense", "hbs"}, s))
      {
        cfg.blocks = s == "hbs" ? BlockMode::hbs : BlockMode::dense;
      }
    }
    else if (key == "hbs.k")
    {
      integer(key, v, cfg.hbs.k);
    }
    else if (key == "hbs.arity")
    {
      integer(key, v, cfg.hbs.arity);
    }
    else if (key == "hbs.leaf")
    {
      integer(key, v, cfg.hbs.leaf);
    }
    else if (key == "hbs.seed")
    {
      integer(key, v, cfg.hbs.seed);
    }
    else if (key == "hbs.alpha")
    {
      integer(key, v, cfg.hbs.alpha);
    }
    else if (key == "hbs.probe_tol")
    {
      real(key, v, cfg.hbs.probe_tol);
    }
    else if (key == "hbs.k_sweep")
    {
      integers(key, v, cfg.k_sweep);
    }
    else if (key == "hbs.slab")
    {
      integer(key, v, cfg.hbs_slab);
    }
    else if (key == "gmres.tol_scale")
    {
      real(key, v, cfg.tol_scale);
    }
    else if (key == "gmres.max_iter")
    {
      integer(key, v, cfg.max_iter);
    }
    else if (key == "rank.levels")
    {
      integers(key, v, cfg.rank_levels);
    }
    else if (key == "rank.tol")
    {
      real(key, v, cfg.rank_tol);
    }
    else if (key == "rank.leaf")
    {
      integer(key, v, cfg.rank_leaf);
    }
    else if (key == "analysis.schur_cap")
    {
      integer(key, v, cfg.schur_cap);
    }
    else if (key == "analysis.eig_cap")
    {
      integer(key, v, cfg.eig_cap);
    }
    else if (key == "analysis.global_oracle")
    {
      boolean(key, v, cfg.global_oracle);
    }
    else if (key == "output.dir")
    {
      if (one(key, v))
      {
        cfg.output_dir = v[0];
      }
    }
    else if (key == "run.threads")
    {
      integer(key, v, cfg.threads);
    }
    else
    {
      errors.push_back("unknown key " + key);
    }
  }

  bool unit_fraction(double x) const
  {
    return x > 0 && x < 1 && std::abs(1 / x - std::round(1 / x)) < 1e-9;
  }

  void validate(const std::string &base_dir)
  {
    auto &c = cfg;
    auto need = [&](bool ok, const std::string &msg)
    {
      if (!ok)
      {
        errors.push_back(msg);
      }
    };
    if (have_H)
    {
      if (have_n)
      {
        errors.push_back("decomp.n and decomp.H are mutually exclusive");
      }
      else if (!unit_fraction(H))
      {
        errors.push_back("decomp.H must be 1/m for an integer m >= 2");
      }
      else
      {
        const int m = static_cast<int>(std::lround(1 / H));
        c.n = c.topology == Topology::open ? m - 1 : m;
      }
    }
    need(c.n >= 1, "decomp.n must be at least 1");
    need(c.topology == Topology::open || c.n >= 3, "periodic topology needs decomp.n >= 3");
    for (double x : c.H_sweep)
    {
      need(unit_fraction(x), "decomp.H_sweep entries must be 1/m for integers m >= 2");
    }
    need(c.kappa >= 0, "problem.kappa must be nonnegative");
    need(unit_fraction(c.h), "disc.h must be 1/m for an integer m >= 2");
    for (double x : c.h_sweep)
    {
      need(unit_fraction(x), "disc.h_sweep entries must be 1/m for integers m >= 2");
    }
    need(c.p >= 3, "disc.p must be at least 3");
    for (int x : c.p_sweep)
    {
      need(x >= 3, "disc.p_sweep entries must be at least 3");
    }
    need(c.tiling[0] >= 1 && c.tiling[1] >= 1 && c.tiling[2] >= 1,
         "disc.tiling entries must be positive");
    need(c.hbs.k >= 1, "hbs.k must be positive");
    for (int x : c.k_sweep)
    {
      need(x >= 1, "hbs.k_sweep entries must be positive");
    }
    need(c.hbs.arity == 0 || c.hbs.arity == 2 || c.hbs.arity == 4, "hbs.arity must be 2 or 4");
    need(c.hbs.leaf >= 0, "hbs.leaf must be nonnegative");
    need(c.hbs.alpha >= 0, "hbs.alpha must be nonnegative");
    need(c.hbs.probe_tol > 0, "hbs.probe_tol must be positive");
    need(c.tol_scale > 0, "gmres.tol_scale must be positive");
    need(c.max_iter >= 1, "gmres.max_iter must be positive");
    for (int x : c.rank_levels)
    {
      need(x >= 1, "rank.levels entries must be at least 1");
    }
    need(c.rank_tol > 0 && c.rank_tol < 1, "rank.tol must lie in (0, 1)");
    need(c.rank_leaf >= 0, "rank.leaf must be nonnegative");
    need(c.schur_cap > 0 && c.eig_cap > 0, "analysis caps must be positive");
    need(c.threads >= 1, "run.threads must be positive");
    need(c.problem != "waveguide2d" || !bumps_path.empty(),
         "problem waveguide2d needs problem.bumps");
    if (!bumps_path.empty())
    {
      fs::path p(bumps_path);
      if (p.is_relative())
      {
        p = fs::path(base_dir) / p;
      }
      c.bumps_file = p.lexically_normal().string();
      try
      {
        c.bumps = read_bumps(c.bumps_file);
      }
      catch (const Error &e)
      {
        errors.push_back(e.what());
      }
    }
    const int d = c.dim();
    if (d == 3 && c.backend == Backend::fd && c.h < 1.0 / 64)
    {
      errors.push_back("3D FD below h = 1/64 exceeds the desk-scale budget");
    }
  }
};

std::string read_file(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw Error("cannot read " + path);
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<CLI::ConfigItem> parse_items(const std::string &text)
{
  std::istringstream in(text);
  CLI::ConfigTOML reader;
  std::vector<CLI::ConfigItem> out;
  for (auto &item : reader.from_config(in))
  {
    if (item.name != "++" && item.name != "--")
    {
      out.push_back(item);
    }
  }
  return out;
}

}  // namespace

int ExperimentConfig::dim() const
{
  return problem.find("3d") != std::string::npos ? 3 : 2;
}

double ExperimentConfig::H() const
{
  return topology == Topology::open ? 1.0 / (n + 1) : 1.0 / n;
}

HbsConfig ExperimentConfig::hbs_config() const
{
  HbsConfig c = hbs;
  if (c.arity == 0)
  {
    c.arity = dim() == 3 ? 4 : 2;
  }
  return c;
}

ConfigError::ConfigError(const std::vector<std::string> &list)
    : Error(
          [&]
          {
            std::string s = "invalid config (" + std::to_string(list.size()) + " problem" +
                            (list.size() == 1 ? "" : "s") + "):";
            for (const auto &x : list)
            {
              s += "\n  " + x;
            }
            return s;
          }()),
      problems(list)
{
}

ExperimentConfig parse_config(const std::string &text, const std::string &base_dir,
                              const std::vector<std::string> &overrides)
{
  Parser ps;
  std::vector<CLI::ConfigItem> items;
  try
  {
    items = parse_items(text);
  }
  catch (const std::exception &e)
  {
    throw ConfigError({std::string("syntax: ") + e.what()});
  }
  for (const auto &o : overrides)
  {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0)
    {
      ps.errors.push_back("override '" + o + "' is not key=value");
      continue;
    }
    const std::string key = o.substr(0, eq);
    const auto dot = key.rfind('.');
    std::string snippet;
    if (dot != std::string::npos)
    {
      snippet = "[" + key.substr(0, dot) + "]\n";
    }
    snippet += key.substr(dot == std::string::npos ? 0 : dot + 1) + " = " + o.substr(eq + 1) + "\n";
    try
    {
      for (auto &item : parse_items(snippet))
      {
        items.push_back(item);
      }
    }
    catch (const std::exception &e)
    {
      ps.errors.push_back("override '" + o + "': " + e.what());
    }
  }
  for (const auto &item : items)
  {
    const std::string key = item.fullname();
    ps.set(key, item.inputs);
  }
  ps.validate(base_dir);
  if (const char *env = std::getenv("SLABSOLVE_OUTPUT_DIR"); env && *env)
  {
    ps.cfg.output_dir = env;
  }
  if (!ps.errors.empty())
  {
    throw ConfigError(ps.errors);
  }
  return ps.cfg;
}

ExperimentConfig load_config(const std::string &path, const std::vector<std::string> &overrides)
{
  return parse_config(read_file(path), fs::path(path).parent_path().string(), overrides);
}

std::vector<GaussianBump> read_bumps(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw Error("cannot read bumps file " + path);
  }
  std::vector<GaussianBump> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line))
  {
    lineno++;
    line = line.substr(0, line.find('#'));
    std::istringstream ls(line);
    GaussianBump b;
    if (!(ls >> b.center[0]))
    {
      continue;
    }
    std::string rest;
    if (!(ls >> b.center[1] >> b.width >> b.amplitude) || (ls >> rest))
    {
      throw Error(path + ":" + std::to_string(lineno) + ": expected cx cy width amplitude");
    }
    if (!(b.width > 0))
    {
      throw Error(path + ":" + std::to_string(lineno) + ": width must be positive");
    }
    out.push_back(b);
  }
  if (out.empty())
  {
    throw Error("bumps file " + path + " holds no bumps");
  }
  return out;
}

std::string preset_dir()
{
  return SLABSOLVE_PRESET_DIR;
}

std::vector<std::string> list_presets()
{
  std::vector<std::string> out;
  for (const auto &e : fs::directory_iterator(preset_dir()))
  {
    if (e.path().extension() == ".toml")
    {
      out.push_back(e.path().stem().string());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ExperimentConfig load_preset(const std::string &name, const std::vector<std::string> &overrides)
{
  const fs::path p = fs::path(preset_dir()) / (name + ".toml");
  if (!fs::exists(p))
  {
    throw ConfigError({"unknown preset " + name + " (see list-presets)"});
  }
  return load_config(p.string(), overrides);
}

std::vector<std::string> experiment_names()
{
  return kExperiments;
}

}  // namespace slabsolve
