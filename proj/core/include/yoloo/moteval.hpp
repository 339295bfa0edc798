#pragma once

#include <span>
#include <string>
#include <vector>

#include "yoloo/detection.hpp"
#include "yoloo/simkit.hpp"

namespace yoloo {

inline constexpr double kDefaultMatchThreshold = 2.0;  // meters, BEV center distance

struct EvalReport {
  double mota = 0.0;
  long fp = 0;
  long fn = 0;
  long idsw = 0;
  long gt_count = 0;
  long matches = 0;
  double fp_rate = 0.0;    // fp / gt_count
  double miss_rate = 0.0;  // fn / gt_count

  /// Recomputes the ratios from the counts.
  void finalize();
  /// Sums counts (sequence reduction); call finalize() afterwards.
  EvalReport& operator+=(const EvalReport& other);
};

/// CLEAR-MOT: correspondences from the previous frame are kept while still
/// within `match_threshold`; the rest are matched by minimum total distance.
/// A ground-truth object whose hypothesis id differs from the id it was last
/// matched to counts as an identity switch.
EvalReport evaluate(std::span<const std::vector<GroundTruthObject>> gt,
                    const TrajectorySet& hyp,
                    double match_threshold = kDefaultMatchThreshold);

/// Two-line aligned table: MOTA, FP, Miss, IDS, GT.
std::string format_report_table(const EvalReport& report);

}  // namespace yoloo
