#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "yoloo/detection.hpp"
#include "yoloo/moteval.hpp"
#include "yoloo/simkit.hpp"
#include "yoloo/utcl.hpp"

namespace yoloo {

/// One line of a KITTI tracking label/result file:
///   frame track_id type truncated occluded alpha x1 y1 x2 y2 h w l x y z ry [score]
/// Locations are in the camera frame (x right, y down, z forward; y at the
/// bottom of the box).
struct KittiTrackRow {
  int frame = 0;
  int track_id = -1;
  std::string type = "Car";
  int truncated = 0;
  int occluded = 0;
  double alpha = 0.0;
  std::array<double, 4> bbox2d{0.0, 0.0, 0.0, 0.0};
  double h = 1.0, w = 1.0, l = 1.0;
  double x = 0.0, y = 0.0, z = 0.0;
  double rotation_y = 0.0;
  std::optional<double> score;

  friend bool operator==(const KittiTrackRow&, const KittiTrackRow&) = default;
};

/// Camera -> ground frame: x = loc_z, y = -loc_x, z = -loc_y + h/2,
/// yaw = -rotation_y - pi/2.
Box3D kitti_to_box(const KittiTrackRow& row);
/// Inverse of kitti_to_box for the geometric fields; alpha is derived.
KittiTrackRow box_to_kitti(const Box3D& box);

/// Throws ParseError naming `path` and `line_no` on malformed input.
KittiTrackRow parse_kitti_row(std::string_view line, const std::string& path,
                              std::size_t line_no);
/// Floats with 6 decimals, locale independent.
std::string format_kitti_row(const KittiTrackRow& row);

std::vector<KittiTrackRow> read_kitti_rows(const std::filesystem::path& path);

/// Detections grouped by frame: index f holds frame f (dense from 0 to the
/// last frame present). DontCare rows are skipped; missing scores are 1.
DetectionStream read_detections(const std::filesystem::path& path);

/// KITTI tracking submission format, rows sorted by (frame, track_id).
void write_tracks(const TrajectorySet& tracks, const std::filesystem::path& path);
std::string format_tracks(const TrajectorySet& tracks);
TrajectorySet read_tracks(const std::filesystem::path& path);

/// Ground truth from a KITTI label file (rows with track_id >= 0).
GroundTruthFrames read_kitti_ground_truth(const std::filesystem::path& path);

/// "The category of the object is {category}, and its location can be
/// represented by four coordinates: (x1, y1), (x2, y2), (x3, y3), and (x4, y4)."
/// with two decimals per coordinate.
std::string format_text_prompt(std::string_view category, const std::array<Point2, 4>& corners);

/// Fixed-point formatting through std::to_chars (never locale dependent).
std::string format_fixed(double value, int decimals);

// Scenario files are JSON lines. Line 1:
//   {"scenario": {"name": ..., "config": {<simkit config>}}}
// then one line per frame:
//   {"frame": t,
//    "ground_truth": [{"id": 1, "category": "Car", "box": [x,y,z,l,w,h,yaw]}],
//    "detections": [{"box": [...], "score": s, "category": "Car",
//                    "object_id": 1 | null, "embedding": [512 floats]?}]}
void write_scenario(const Scenario& s, const std::filesystem::path& path,
                    bool include_embeddings = true);
Scenario read_scenario(const std::filesystem::path& path);

/// One record of the image/text embedding fixture (JSON lines):
///   {"sequence_id": 0, "frame": 3, "object_id": 7,
///    "image_embedding": [512 floats], "text_embedding": [512 floats],
///    "dims": [l, w, h]?, "points": [[x, y, z], ...]?}
/// Embeddings must be unit norm. `points` is an object-frame patch; when it is
/// absent and `dims` is present a cuboid surface patch is synthesized.
struct FixtureRecord {
  int sequence_id = 0;
  int frame = 0;
  int object_id = 0;
  Embedding image;
  Embedding text;
  std::optional<std::array<double, 3>> dims;
  std::optional<PointPatch> points;
};

std::vector<FixtureRecord> read_fixture_embeddings(const std::filesystem::path& path);
void write_fixture_embeddings(const std::vector<FixtureRecord>& records,
                              const std::filesystem::path& path);
/// Records carrying each observation's point patch.
std::vector<FixtureRecord> fixtures_from_dataset(const TrackletDataset& ds);
/// Builds a training store; records without points or dims are rejected.
TrackletDataset tracklets_from_fixtures(const std::vector<FixtureRecord>& records,
                                        int raw_points, std::uint64_t seed);

std::string report_to_json(const EvalReport& report);

}  // namespace yoloo
