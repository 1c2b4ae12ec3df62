#pragma once

#include <string>
#include <vector>

namespace uvac::criteria {

struct Options {
  // Test hook: added to every gamma value A1 checks. A non-zero bias must
  // make A1 fail.
  double gamma_bias = 0.0;
  unsigned threads = 0;
};

struct Outcome {
  std::string id;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
  double budget_s = 0.0;
};

// Runs A1..A10 in order. Each criterion passes only if its numeric check and
// its runtime budget both hold.
std::vector<Outcome> run_all(const Options& options = {});

std::string format_line(const Outcome& outcome);

}  // namespace uvac::criteria
