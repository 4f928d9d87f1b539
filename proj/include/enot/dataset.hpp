#pragma once

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "enot/common.hpp"

namespace enot {

/// Shortest round-trip decimal form of a double.
inline std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Writes a sample matrix as CSV with header f0,f1,...,f{d-1}.
inline void write_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (Eigen::Index j = 0; j < data.cols(); ++j) out << (j ? "," : "") << "f" << j;
  out << "\n";
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j)
      out << (j ? "," : "") << format_double(data(i, j));
    out << "\n";
  }
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

inline void write_csv_int(const std::string& path, const Eigen::MatrixXi& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (Eigen::Index j = 0; j < data.cols(); ++j) out << (j ? "," : "") << "f" << j;
  out << "\n";
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) out << (j ? "," : "") << data(i, j);
    out << "\n";
  }
}

namespace detail {
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}
}  // namespace detail

/// Reads a CSV of doubles. First line is a header; every data row must have
/// the same field count. Ragged rows and unparsable values raise with the
/// offending line number.
inline Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: " + path + " is empty");
  const std::size_t dim = detail::split_csv_line(line).size();
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() && in.eof()) break;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != dim) {
      throw std::runtime_error("read_csv: " + path + " line " + std::to_string(line_no) +
                               ": expected " + std::to_string(dim) + " fields, got " +
                               std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      char* end = nullptr;
      const double v = std::strtod(f.c_str(), &end);
      if (end == f.c_str() || *end != '\0' || !std::isfinite(v)) {
        throw std::runtime_error("read_csv: " + path + " line " + std::to_string(line_no) +
                                 ": bad value '" + f + "'");
      }
      values.push_back(v);
    }
    ++rows;
  }
  Dataset data(rows, dim);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < dim; ++j) data(i, j) = values[i * dim + j];
  return data;
}

}  // namespace enot
