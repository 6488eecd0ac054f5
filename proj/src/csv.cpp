// SPDX-License-Identifier: Apache-2.0

#include "slabsolve/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>
#include "slabsolve/types.hpp"

namespace fs = std::filesystem;

namespace slabsolve
{

namespace
{

const char *kSchema = "# schema=1";

std::string quote(const std::string &s)
{
  if (s.find_first_of(",\"\n") == std::string::npos)
  {
    return s;
  }
  std::string q = "\"";
  for (char c : s)
  {
    q += c == '"' ? std::string("\"\"") : std::string(1, c);
  }
  return q + "\"";
}

std::string line_of(const std::vector<std::string> &cells)
{
  std::string s;
  for (size_t i = 0; i < cells.size(); i++)
  {
    s += (i ? "," : "") + quote(cells[i]);
  }
  return s + "\n";
}

std::vector<std::string> split(const std::string &line)
{
  std::vector<std::string> out(1);
  bool quoted = false;
  for (size_t i = 0; i < line.size(); i++)
  {
    const char c = line[i];
    if (quoted)
    {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"')
      {
        out.back() += '"';
        i++;
      }
      else if (c == '"')
      {
        quoted = false;
      }
      else
      {
        out.back() += c;
      }
    }
    else if (c == '"')
    {
      quoted = true;
    }
    else if (c == ',')
    {
      out.emplace_back();
    }
    else
    {
      out.back() += c;
    }
  }
  return out;
}

}  // namespace

std::string format_number(double x)
{
  if (std::isnan(x))
  {
    return "nan";
  }
  if (std::isinf(x))
  {
    return x > 0 ? "inf" : "-inf";
  }
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

Row &Row::set(const std::string &column, double value)
{
  cells_.emplace_back(column, format_number(value));
  return *this;
}

Row &Row::set(const std::string &column, long value)
{
  cells_.emplace_back(column, std::to_string(value));
  return *this;
}

Row &Row::set(const std::string &column, const std::string &value)
{
  cells_.emplace_back(column, value);
  return *this;
}

void Table::add(const Row &row)
{
  std::vector<std::string> cols, vals;
  for (const auto &[c, v] : row.cells())
  {
    cols.push_back(c);
    vals.push_back(v);
  }
  if (rows_.empty() && columns_.empty())
  {
    for (size_t i = 0; i < cols.size(); i++)
    {
      if (std::find(cols.begin(), cols.begin() + i, cols[i]) != cols.begin() + i)
      {
        throw Error("table " + name_ + ": duplicate column " + cols[i]);
      }
    }
    columns_ = cols;
  }
  else if (cols != columns_)
  {
    throw Error("table " + name_ + ": row columns differ from the header");
  }
  rows_.push_back(vals);
}

int Table::index(const std::string &column) const
{
  for (size_t i = 0; i < columns_.size(); i++)
  {
    if (columns_[i] == column)
    {
      return static_cast<int>(i);
    }
  }
  throw Error("table " + name_ + " has no column " + column);
}

const std::string &Table::str(int row, const std::string &column) const
{
  return rows_.at(row)[index(column)];
}

double Table::num(int row, const std::string &column) const
{
  const std::string &s = str(row, column);
  if (s == "nan")
  {
    return NAN;
  }
  double x = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size())
  {
    throw Error("table " + name_ + ": " + column + " = '" + s + "' is not numeric");
  }
  return x;
}

std::vector<double> Table::column(const std::string &c) const
{
  std::vector<double> out;
  for (int r = 0; r < size(); r++)
  {
    out.push_back(num(r, c));
  }
  return out;
}

std::vector<int> Table::where(const std::string &c, const std::string &value) const
{
  const int i = index(c);
  std::vector<int> out;
  for (int r = 0; r < size(); r++)
  {
    if (rows_[r][i] == value)
    {
      out.push_back(r);
    }
  }
  return out;
}

std::string append_csv(const Table &table, const std::string &dir)
{
  if (table.columns().empty())
  {
    throw Error("table " + table.name() + " is empty");
  }
  fs::create_directories(dir);
  const fs::path path = fs::path(dir) / (table.name() + ".csv");
  std::string existing;
  if (fs::exists(path))
  {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    existing = ss.str();
    const std::string head = std::string(kSchema) + "\n" + line_of(table.columns());
    if (existing.compare(0, head.size(), head) != 0)
    {
      throw Error(path.string() + " has a different schema or header; move it aside");
    }
  }
  else
  {
    existing = std::string(kSchema) + "\n" + line_of(table.columns());
  }
  for (const auto &r : table.rows())
  {
    existing += line_of(r);
  }
  const fs::path tmp = path.string() + ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary);
    out << existing;
    if (!out.flush())
    {
      throw Error("cannot write " + tmp.string());
    }
  }
  fs::rename(tmp, path);
  return path.string();
}

Table read_csv(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw Error("cannot read " + path);
  }
  std::string line;
  if (!std::getline(in, line) || line != kSchema)
  {
    throw Error(path + ": missing '# schema=1' line");
  }
  if (!std::getline(in, line))
  {
    throw Error(path + ": missing header");
  }
  Table t(fs::path(path).stem().string());
  const auto cols = split(line);
  while (std::getline(in, line))
  {
    const auto vals = split(line);
    if (vals.size() != cols.size())
    {
      throw Error(path + ": ragged row");
    }
    Row r;
    for (size_t i = 0; i < cols.size(); i++)
    {
      r.set(cols[i], vals[i]);
    }
    t.add(r);
  }
  return t;
}

}  // namespace slabsolve
