// Acceptance suite runner: one pass/fail line per criterion; nonzero exit
// status when any criterion fails. Accepts an optional name-filter argument.

#include <cstdio>
#include <string>

#include "nestctl/harness.hpp"

int main(int argc, char** argv) {
  const std::string filter = argc > 1 ? argv[1] : "";
  const nestctl::AcceptanceReport report = nestctl::run_acceptance(filter);
  std::fputs(report.text.c_str(), stdout);
  return report.failures == 0 ? 0 : 1;
}
