#pragma once

#include <ostream>

namespace ctk::cli {

enum ExitCode { ok = 0, refuted = 1, input_error = 2, numerical_error = 3 };

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ctk::cli
