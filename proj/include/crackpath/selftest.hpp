#pragma once

// Built-in verification suites runnable from a deployed binary: shadow-cone
// filtering against brute-force visibility, the Frechet dynamic program
// against exhaustive coupling enumeration, kernel evaluation and probability
// normalization against direct formulas, and a parameter-recovery smoke test.

#include <cstdint>
#include <string>
#include <vector>

namespace crackpath::selftest {

struct Options {
  bool quick = false;  // reduced instance counts
  std::uint64_t seed = 0x5E1F7E57;
  // Test fixture: corrupt a kernel sign inside the normalization suite to
  // demonstrate that the comparison actually detects defects.
  bool inject_kernel_sign_flip = false;
};

struct Line {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Report {
  std::vector<Line> lines;

  int failures() const;
  bool all_pass() const { return failures() == 0; }
  std::string to_string() const;  // deterministic (no timings)
};

Report run(const Options& options = {});

}  // namespace crackpath::selftest
