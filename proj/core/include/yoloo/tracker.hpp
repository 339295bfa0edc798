#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "yoloo/assoc.hpp"
#include "yoloo/detection.hpp"
#include "yoloo/kalman.hpp"
#include "yoloo/lgpenc.hpp"

namespace yoloo {

enum class TrackStatus { kTentative, kConfirmed, kDead };

enum class EmbeddingUpdate {
  kReplace,  // the last associated UTR wins
  kEma,      // normalize(m * old + (1 - m) * new)
};

std::string_view to_string(EmbeddingUpdate mode);
EmbeddingUpdate embedding_update_from_string(std::string_view name);

struct TrackerConfig {
  int min_hits = 3;
  int max_age = 2;
  double max_cost = kDefaultMaxCost;
  EmbeddingUpdate embedding_update_mode = EmbeddingUpdate::kReplace;
  double ema_momentum = 0.9;
  AssociationMode association = AssociationMode::kUtrFgc;
  /// run_sequence also emits the tentative frames of tracks that later
  /// become confirmed.
  bool backfill_tentative = true;
  /// Points per patch when detections are encoded by the tracker.
  int encoder_points = kTestPoints;
  KFConfig kalman;

  void validate() const;
  friend bool operator==(const TrackerConfig&, const TrackerConfig&) = default;
};

struct Track {
  int id = 0;
  KFState kf;
  Embedding embedding;
  int hits = 0;    // consecutive matches
  int misses = 0;  // consecutive misses
  TrackStatus status = TrackStatus::kTentative;
  std::string category;
  double score = 1.0;
  /// Rows recorded while tentative, released on confirmation.
  std::vector<TrajectoryRow> pending;
};

struct TrackerState {
  std::vector<Track> tracks;  // live tracks only; dead ones are dropped
  int next_id = 1;
  int frame = 0;  // index of the next frame to process
};

struct StepResult {
  /// Confirmed tracks updated in this frame.
  std::vector<TrajectoryRow> output;
  /// Earlier tentative rows of tracks confirmed in this frame.
  std::vector<TrajectoryRow> backfill;
  TrackerState state;
};

/// predict -> embed -> cost -> greedy association -> update -> lifecycle.
/// `encoder` is used for detections that carry a patch but no embedding.
StepResult step(std::span<const Detection> frame_dets, TrackerState state,
                const TrackerConfig& cfg, const EncoderParams* encoder = nullptr);

/// Stateful convenience wrapper over `step`.
class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg = {},
                   std::shared_ptr<const EncoderParams> encoder = nullptr);

  StepResult step(std::span<const Detection> frame_dets);
  const TrackerState& state() const noexcept { return state_; }
  const TrackerConfig& config() const noexcept { return cfg_; }

 private:
  TrackerConfig cfg_;
  std::shared_ptr<const EncoderParams> encoder_;
  TrackerState state_;
};

/// Folds `step` over the stream; rows sorted by (frame, track_id).
TrajectorySet run_sequence(const DetectionStream& stream, const TrackerConfig& cfg,
                           std::shared_ptr<const EncoderParams> encoder = nullptr);

}  // namespace yoloo
