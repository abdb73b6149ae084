#pragma once

#include <iosfwd>
#include <string_view>
#include <vector>

#include "rzl/types.hpp"

namespace rzl::cli {

/// `a`, `a+bi`, `a-bi`, `bi`; no spaces. Throws precondition on bad input.
cplx parse_complex(std::string_view text);

/// Comma-separated list of complex numbers.
CVec parse_complex_vector(std::string_view text);

/// Comma-separated list of integers.
std::vector<int> parse_int_list(std::string_view text);

/// Runs the command line. CSV goes to `out` unless --out names a file; the
/// JSON summary goes to --summary or, failing that, to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rzl::cli
