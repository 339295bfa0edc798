#pragma once

#include <optional>
#include <string>
#include <vector>

#include "yoloo/geom.hpp"
#include "yoloo/lgpenc.hpp"

namespace yoloo {

/// One observation in one frame. The tracker needs either an embedding or a
/// point patch (encoded on the fly) unless it runs geometry-only.
struct Detection {
  Box3D box;
  double score = 1.0;
  std::string category = "Car";
  std::optional<Embedding> embedding;
  std::optional<PointPatch> patch;
};

/// Index is the frame number; frames without detections are empty.
using DetectionStream = std::vector<std::vector<Detection>>;

struct TrajectoryRow {
  int frame = 0;
  int track_id = 0;
  Box3D box;
  double score = 1.0;
  std::string category = "Car";

  friend bool operator==(const TrajectoryRow&, const TrajectoryRow&) = default;
};

using TrajectorySet = std::vector<TrajectoryRow>;

/// Sorts rows by (frame, track_id).
void canonicalize(TrajectorySet& rows);

}  // namespace yoloo
