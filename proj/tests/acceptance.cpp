// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.
// Exit status is nonzero when any criterion fails.

#include <iostream>

#include "fracmax/suite.hpp"

int main() {
  int failures = 0;
  try {
    auto results = fracmax::run_suite({}, [&](const fracmax::CriterionResult& r) {
      std::cout << r.summary_line() << std::endl;
      if (!r.passed()) ++failures;
    });
    std::cout << results.size() - failures << " of " << results.size() << " criteria pass" << std::endl;
  } catch (const std::exception& e) {
    std::cout << "FAIL acceptance run aborted: " << e.what() << std::endl;
    return 2;
  }
  return failures == 0 ? 0 : 1;
}
