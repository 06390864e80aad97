#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace anomaly {

struct CheckResult {
  std::string id;
  double error = 0.0;      // measured deviation
  double tolerance = 0.0;  // pass iff error <= tolerance
  double runtime_ms = 0.0;
  bool pass() const { return error <= tolerance; }
};

struct SuiteResult {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass()) return false;
    return true;
  }
};

// name in {algebra, chernweil, asymptotics, transport, localindex, spectral,
// all}. config_path (optional) points at a spectral job config; when given,
// the spectral suite additionally runs that job and reports its residual.
// tolerance_scale multiplies every tolerance.
std::vector<SuiteResult> run_suite(const std::string& name, std::uint64_t seed,
                                   const std::string& config_path = {},
                                   double tolerance_scale = 1.0);

// format in {json, csv, text}. Field ordering is stable and the output is
// byte-identical for identical inputs; all run-to-run variability (wall
// clock, elapsed time) is isolated in the single `generated` header field.
std::string emit_report(const std::vector<SuiteResult>& results, const std::string& format,
                        const std::string& generated);

} // namespace anomaly
