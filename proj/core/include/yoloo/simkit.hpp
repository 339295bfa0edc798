#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "yoloo/detection.hpp"
#include "yoloo/utcl.hpp"

namespace yoloo {

struct GroundTruthObject {
  int id = 0;
  Box3D box;
  std::string category = "Car";

  friend bool operator==(const GroundTruthObject&, const GroundTruthObject&) = default;
};

using GroundTruthFrames = std::vector<std::vector<GroundTruthObject>>;

/// A detection plus its source object; `object_id` is empty for clutter and
/// is never shown to the tracker.
struct ScenarioDetection {
  Detection detection;
  std::optional<int> object_id;
};

struct ScenarioFrame {
  std::vector<GroundTruthObject> ground_truth;
  std::vector<ScenarioDetection> detections;
};

struct SimConfig {
  int n_objects = 10;
  int n_frames = 50;
  double speed_min = 0.3;  // m/frame
  double speed_max = 1.2;
  double turn_noise = 0.02;      // heading random walk, rad/frame
  double position_noise = 0.0;   // sigma, m
  double p_miss = 0.0;
  double clutter_rate = 0.0;     // expected false positives per frame
  double embedding_noise = 0.3;  // kappa
  double area_half_extent = 40.0;
  std::vector<std::string> categories{"Car"};
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct Scenario {
  std::string name = "generated";
  SimConfig config;
  std::vector<ScenarioFrame> frames;
};

/// Typical (l, w, h) for a category; unknown names fall back to Car.
Box3D category_template(std::string_view category);

/// Constant-velocity BEV motion with heading noise; per-frame Bernoulli
/// detection with Gaussian position noise; Poisson clutter. Deterministic
/// under the seed. Embeddings are not attached.
Scenario generate(const SimConfig& cfg);

/// One embedding per detection, frame-major: each identity has a fixed random
/// unit anchor and observations are normalize(anchor + kappa * g / sqrt(D)),
/// g ~ N(0, I). Clutter gets fresh random unit vectors.
std::vector<std::vector<Embedding>> oracle_embeddings(const Scenario& s, double kappa,
                                                      std::uint64_t seed,
                                                      int dim = kEmbeddingDim);

/// Writes oracle embeddings into every detection of `s`.
void attach_oracle_embeddings(Scenario& s, double kappa, std::uint64_t seed);

/// Points on the surface of the box, in the box frame, with small jitter.
/// Every point lies inside the box inflated by 10%.
PointPatch cuboid_patch(const Box3D& box, int n_points, std::uint64_t seed);

/// Hand-built scenes: "easy" (separated objects), "moderate" (adjacent lanes
/// that swap plus a distant look-alike) and "difficult" (a small object whose
/// per-frame motion exceeds its length). Embeddings are attached.
Scenario crafted_scenario(std::string_view name);

DetectionStream detection_stream(const Scenario& s);
GroundTruthFrames ground_truth(const Scenario& s);

struct ToyDatasetConfig {
  int n_identities = 20;
  int n_sequences = 4;
  int observations_per_identity = 6;
  int raw_points = kTrainPoints;
  double embedding_noise = 0.1;
  std::uint64_t seed = 0;
};

/// Tracklet store for contrastive training: identities with distinct cuboid
/// shapes spread over sequences, consecutive frames, synthetic image/text
/// embeddings clustered per identity.
TrackletDataset make_toy_dataset(const ToyDatasetConfig& cfg);

/// Base dims of toy identity `k` (deterministic under the seed).
std::vector<Box3D> toy_identity_shapes(const ToyDatasetConfig& cfg);

}  // namespace yoloo
