// SPDX-License-Identifier: Apache-2.0

#ifndef SLABSOLVE_TYPES_HPP
#define SLABSOLVE_TYPES_HPP

#include <array>
#include <chrono>
#include <stdexcept>
#include <string>
#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace slabsolve
{

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Csr = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Point = std::array<double, 3>;
using Lattice = std::array<int, 3>;

// All recoverable failures (bad input, singular local problems, caps) are reported
// through this type so the CLI can print them and exit nonzero.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class Stopwatch
{
public:
  Stopwatch() : start(std::chrono::steady_clock::now()) {}
  double seconds() const
  {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  void reset() { start = std::chrono::steady_clock::now(); }

private:
  std::chrono::steady_clock::time_point start;
};

}  // namespace slabsolve

#endif  // SLABSOLVE_TYPES_HPP
