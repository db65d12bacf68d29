#pragma once

// Finite-difference self-checks of the analytic loss gradients, left
// Jacobians and pose-graph residual Jacobians.

#include <cstdint>
#include <string>
#include <vector>

namespace lgc {

struct GradcheckOptions {
  int n = 1000;
  std::uint64_t seed = 0;
  double step = 1e-6;
  /// Test hook: perturbs the analytic residual Jacobians so the suites fail.
  bool corrupt_jacobian = false;
};

struct SuiteResult {
  std::string name;
  int trials = 0;
  int skipped = 0;  // draws rejected for leaving the canonical chart
  double max_error = 0.0;
  double tolerance = 0.0;

  bool passed() const { return trials > 0 && max_error < tolerance; }
};

/// Largest relative gap between Method I and Method II gradients for
/// targets with ||xi*|| <= radius and xi near xi*.
struct AgreementPoint {
  double radius = 0.0;
  double max_relative_gap = 0.0;
};

struct GradcheckReport {
  std::vector<SuiteResult> suites;
  std::vector<AgreementPoint> agreement;

  bool passed() const;
  std::string to_text() const;
};

GradcheckReport run_gradcheck(const GradcheckOptions& options = {});

/// ||a - b|| / max(||a||, ||b||, 1e-12).
double relative_error(double norm_diff, double norm_a, double norm_b);

}  // namespace lgc
