#ifndef LSM_VERIFY_HPP
#define LSM_VERIFY_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace lsm {

struct VerifyConfig {
  double h_target = 0.02;
  int order = 16;
  int threads = 1;
};

struct CheckResult {
  std::string name;
  double achieved = 0.0;
  double required = 0.0;
  bool passed = false;
  std::string detail;  // set when the check could not run
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

// Analytic-oracle checks: background spectrum, two-phase spectrum, centred
// dipole trace, layer mode multipliers, scalar Tikhonov and Morozov. A check
// that throws is reported as failed, never propagated.
VerifyReport run_verification(const VerifyConfig& config);

// One line per check: "PASS|FAIL name achieved=... required=..."
void write_report(std::ostream& out, const VerifyReport& report);

} // namespace lsm

#endif
