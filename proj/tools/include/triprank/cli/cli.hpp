#pragma once

#include <ostream>

namespace triprank::cli {

/// Parses arguments and dispatches to a command. Exit codes: 0 success,
/// 2 input error, 3 schema or config error, 1 anything else.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace triprank::cli
