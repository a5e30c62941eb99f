#include "cqr/textio.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace cqr {

std::string g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void write_tensor(std::ostream& out, std::string_view name, const Tensor& t) {
  out << name << ' ' << t.rows << ' ' << t.cols << '\n';
  for (int i = 0; i < t.rows; ++i) {
    const double* row = t.row(i);
    for (int j = 0; j < t.cols; ++j) {
      if (j) out << ' ';
      out << g9(row[j]);
    }
    out << '\n';
  }
}

Tensor read_tensor(std::istream& in, std::string_view expect_name) {
  std::string header;
  if (!std::getline(in, header))
    throw ParseError(0, "missing tensor " + std::string(expect_name));
  std::istringstream hs(header);
  std::string name;
  int rows = 0, cols = 0;
  hs >> name >> rows >> cols;
  if (hs.fail() || name != expect_name)
    throw ParseError(0, "expected tensor " + std::string(expect_name) + ", got " + header);
  Tensor t(rows, cols);
  for (int i = 0; i < rows; ++i) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError(0, "truncated tensor " + name);
    std::istringstream ls(line);
    for (int j = 0; j < cols; ++j) {
      ls >> t.at(i, j);
      if (ls.fail()) throw ParseError(0, "bad value in tensor " + name);
    }
  }
  return t;
}

}  // namespace cqr
