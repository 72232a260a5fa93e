#pragma once

// Analytic oracle suite behind `snie selfcheck`.

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "snie/spectral_ops.hpp"

namespace snie {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Replaceable pieces, so a test build can inject a faulty antiderivative and
/// watch the suite catch it.
struct SelfcheckHooks {
  std::function<AntiderivCoeffs(const ChebCoeffs&)> antiderivative =
      [](const ChebCoeffs& b) { return snie::antiderivative(b); };
};

std::vector<CheckResult> run_selfcheck(const SelfcheckHooks& hooks = {}, std::uint64_t seed = 0);

/// Prints one "PASS name (detail)" / "FAIL name (detail)" line per check;
/// returns true when all passed.
bool report_selfcheck(const std::vector<CheckResult>& results, std::ostream& out);

}  // namespace snie
