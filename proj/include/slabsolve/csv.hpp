// SPDX-License-Identifier: Apache-2.0

#ifndef SLABSOLVE_CSV_HPP
#define SLABSOLVE_CSV_HPP

#include <string>
#include <utility>
#include <vector>

namespace slabsolve
{

// Shortest round-trip decimal form, so reruns are bit-identical.
std::string format_number(double x);

class Row
{
public:
  Row &set(const std::string &column, double value);
  Row &set(const std::string &column, long value);
  Row &set(const std::string &column, int value) { return set(column, static_cast<long>(value)); }
  Row &set(const std::string &column, const std::string &value);
  Row &set(const std::string &column, const char *value) { return set(column, std::string(value)); }

  const std::vector<std::pair<std::string, std::string>> &cells() const { return cells_; }

private:
  std::vector<std::pair<std::string, std::string>> cells_;
};

// One CSV file: `name`.csv. The first row fixes the columns.
class Table
{
public:
  explicit Table(std::string name = "") : name_(std::move(name)) {}

  void add(const Row &row);

  const std::string &name() const { return name_; }
  const std::vector<std::string> &columns() const { return columns_; }
  const std::vector<std::vector<std::string>> &rows() const { return rows_; }
  int size() const { return static_cast<int>(rows_.size()); }

  const std::string &str(int row, const std::string &column) const;
  double num(int row, const std::string &column) const;
  std::vector<double> column(const std::string &column) const;
  // Rows whose `column` equals `value`.
  std::vector<int> where(const std::string &column, const std::string &value) const;

private:
  int index(const std::string &column) const;

  std::string name_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// Appends the table under `dir` through a temporary file and a rename. A new file gets the
// "# schema=1" line and the header; an existing one must carry the same header.
std::string append_csv(const Table &table, const std::string &dir);

// Parses a file written by append_csv.
Table read_csv(const std::string &path);

}  // namespace slabsolve

#endif  // SLABSOLVE_CSV_HPP
