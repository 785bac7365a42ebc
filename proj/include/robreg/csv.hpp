#pragma once

#include <iosfwd>
#include <string>

#include "robreg/problem.hpp"

namespace robreg {

/// Reads a numeric, comma separated table. Throws ConfigError on ragged rows,
/// empty input or non-numeric cells (reported with line and column). NaN
/// cells are accepted only with allow_nan; infinities never are.
Matrix read_csv_matrix(std::istream& in, bool header = false, bool allow_nan = false);
Matrix read_csv_matrix(const std::string& path, bool header = false, bool allow_nan = false);

void write_csv_matrix(const Matrix& m, std::ostream& os);
std::string format_number(double v);

}  // namespace robreg
