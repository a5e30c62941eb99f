#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "cqr/tensor.hpp"

namespace cqr {

// 9-significant-digit decimal, the fixed width used by every model file.
std::string g9(double v);

// "name rows cols" header line followed by row-major g9 rows.
void write_tensor(std::ostream& out, std::string_view name, const Tensor& t);
Tensor read_tensor(std::istream& in, std::string_view expect_name);

}  // namespace cqr
