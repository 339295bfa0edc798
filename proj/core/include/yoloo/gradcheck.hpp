#pragma once

#include <cstdint>
#include <string>

namespace yoloo {

struct GradcheckOptions {
  int trials = 50;
  std::uint64_t seed = 0;
  int max_batch = 4;
  int max_points = 16;
  double step = 1e-4;
  /// Coordinates sampled from each parameter tensor per trial.
  int coords_per_tensor = 1;
  double tolerance = 1e-4;
};

struct GradcheckReport {
  int trials = 0;
  int checked = 0;
  /// Coordinates whose +-step perturbation crossed a ReLU/max/hinge boundary.
  int skipped = 0;
  double max_relative_error = 0.0;
  std::string worst;  // "<tensor>[<index>] analytic=... numeric=..."
  bool passed = false;
};

/// |a - n| / max(|a|, |n|, floor), with floor guarding near-zero gradients.
double relative_error(double analytic, double numeric);

inline constexpr double kRelErrorFloor = 1e-5;

/// Compares total-loss gradients (encoder parameters and temperature) against
/// central finite differences on random toy batches.
GradcheckReport gradcheck(const GradcheckOptions& opts);

}  // namespace yoloo
