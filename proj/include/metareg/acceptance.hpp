#pragma once

#include <string>
#include <vector>

namespace metareg {

/* Self-contained verification checks with pinned tolerances: equivalence
   oracles against classical recurrences, theorem inequalities on recorded
   runs, and scaled-down qualitative reproductions. Used by both the `verify`
   subcommand and the acceptance test binary. */
struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;  // measured values
  double seconds = 0.0;
};

std::vector<int> acceptance_ids();
std::string acceptance_name(int id);
CheckResult run_acceptance_check(int id);
std::vector<CheckResult> run_acceptance(const std::vector<int>& ids = {});

/* Diagnostic demonstration, not a pass/fail check: drive the alternating rule
   with the given divergence and clip factor into large gradients and report
   the out-of-domain clip counters. */
std::string domain_clip_demo(const std::string& divergence, double clip_factor);

std::string format_check_line(const CheckResult& r);

}  // namespace metareg
