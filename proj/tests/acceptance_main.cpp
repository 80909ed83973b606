// Prints one line per acceptance criterion; exit status 1 when any fails.
#include "ctk/acceptance.hpp"

#include <cstring>
#include <iostream>

int main(int argc, char** argv) {
  ctk::acceptance::Options opts;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--quick") == 0) opts.quick = true;
  const auto results = ctk::acceptance::run_all(opts);
  int failed = 0;
  for (const auto& r : results) {
    std::cout << ctk::acceptance::format_line(r) << "\n";
    if (!r.passed) ++failed;
  }
  std::cout << results.size() - failed << "/" << results.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
