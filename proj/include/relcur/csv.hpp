#pragma once

#include <string>
#include <vector>

#include "relcur/matrix.hpp"

namespace relcur {

// Locale-independent float rendering, 12 significant digits by default.
std::string format_double(double v, int digits = 12);

// Labeled integer matrix as CSV with a header row and a label column.
std::string matrix_csv(const IMat& m, const std::vector<std::string>& labels);

// Two CSV texts agree when numeric cells match within tol (exactly for
// integer-rendered cells) and non-numeric cells are identical.
bool csv_equivalent(const std::string& a, const std::string& b, double tol, std::string* why);

}  // namespace relcur
