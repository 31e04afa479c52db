#include "relcur/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace relcur {

std::string format_double(double v, int digits) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, digits);
  return std::string(buf, ptr);
}

std::string matrix_csv(const IMat& m, const std::vector<std::string>& labels) {
  std::ostringstream out;
  for (int j = 0; j < m.cols(); ++j) out << ',' << labels[j];
  out << '\n';
  for (int i = 0; i < m.rows(); ++i) {
    out << labels[i];
    for (int j = 0; j < m.cols(); ++j) out << ',' << m(i, j);
    out << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string> cells_of(const std::string& text) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : text) {
    if (c == ',' || c == '\n') {
      cells.push_back(cur);
      cur.clear();
      cells.push_back(std::string(1, c));
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

bool parse_number(const std::string& s, double* v) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), *v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool integer_rendered(const std::string& s) {
  return s.find_first_of(".eE") == std::string::npos;
}

}  // namespace

bool csv_equivalent(const std::string& a, const std::string& b, double tol, std::string* why) {
  auto ca = cells_of(a);
  auto cb = cells_of(b);
  if (ca.size() != cb.size()) {
    if (why) *why = "cell counts differ";
    return false;
  }
  for (std::size_t i = 0; i < ca.size(); ++i) {
    if (ca[i] == cb[i]) continue;
    double x = 0, y = 0;
    if (parse_number(ca[i], &x) && parse_number(cb[i], &y)) {
      if (integer_rendered(ca[i]) && integer_rendered(cb[i])) {
        if (why) *why = "integer cells differ: " + ca[i] + " vs " + cb[i];
        return false;
      }
      if (std::fabs(x - y) <= tol) continue;
      if (why) *why = "float cells differ beyond tol: " + ca[i] + " vs " + cb[i];
      return false;
    }
    if (why) *why = "cells differ: '" + ca[i] + "' vs '" + cb[i] + "'";
    return false;
  }
  return true;
}

}  // namespace relcur
