#include "robreg/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>
#include <vector>

#include "robreg/errors.hpp"

namespace robreg {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Matrix read_csv_matrix(std::istream& in, bool header, bool allow_nan) {
  std::vector<double> cells;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (header && line_no == 1) continue;
    if (trim(line).empty()) continue;
    std::size_t count = 0;
    std::string_view rest = line;
    while (true) {
      const std::size_t comma = rest.find(',');
      const std::string_view cell = trim(rest.substr(0, comma));
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size() ||
          std::isinf(v) || (std::isnan(v) && !allow_nan)) {
        throw ConfigError("csv: non-numeric cell '" + std::string(cell) + "' at line " +
                          std::to_string(line_no) + ", column " + std::to_string(count + 1));
      }
      cells.push_back(v);
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw ConfigError("csv: line " + std::to_string(line_no) + " has " +
                        std::to_string(count) + " columns, expected " + std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw ConfigError("csv: no data rows");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cells[i * cols + j];
  return m;
}

Matrix read_csv_matrix(const std::string& path, bool header, bool allow_nan) {
  std::ifstream in(path);
  if (!in) throw ConfigError("csv: cannot open " + path);
  return read_csv_matrix(in, header, allow_nan);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv_matrix(const Matrix& m, std::ostream& os) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_number(m(i, j));
    }
    os << '\n';
  }
}

}  // namespace robreg
