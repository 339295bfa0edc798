#include "yoloo/tracker.hpp"

#include <algorithm>
#include <string>
#include <tuple>

#include "yoloo/errors.hpp"

namespace yoloo {

void canonicalize(TrajectorySet& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const TrajectoryRow& a, const TrajectoryRow& b) {
    return std::tie(a.frame, a.track_id) < std::tie(b.frame, b.track_id);
  });
}

std::string_view to_string(EmbeddingUpdate mode) {
  return mode == EmbeddingUpdate::kReplace ? "replace" : "ema";
}

EmbeddingUpdate embedding_update_from_string(std::string_view name) {
  if (name == "replace") return EmbeddingUpdate::kReplace;
  if (name == "ema") return EmbeddingUpdate::kEma;
  throw InvalidArgumentError("unknown embedding update mode '" + std::string(name) +
                             "' (expected replace or ema)");
}

void TrackerConfig::validate() const {
  if (min_hits < 1) throw InvalidArgumentError("tracker.min_hits must be >= 1");
  if (max_age < 1) throw InvalidArgumentError("tracker.max_age must be >= 1");
  if (!(max_cost >= 0.0)) throw InvalidArgumentError("tracker.max_cost must be >= 0");
  if (!(ema_momentum >= 0.0 && ema_momentum < 1.0)) {
    throw InvalidArgumentError("tracker.ema_momentum must be in [0, 1)");
  }
  if (encoder_points < 1) throw InvalidArgumentError("tracker.encoder_points must be >= 1");
  kalman.validate();
}

namespace {

Embedding detection_embedding(const Detection& det, const TrackerConfig& cfg,
                              const EncoderParams* encoder, std::uint64_t seed) {
  if (det.embedding) return *det.embedding;
  if (det.patch && encoder) {
    const PointPatch& p = *det.patch;
    if (p.size() == cfg.encoder_points) return encode(p, *encoder);
    return encode(resample(p, cfg.encoder_points, seed), *encoder);
  }
  throw InvalidArgumentError(
      "detection has no embedding and no (patch, encoder) pair to compute one");
}

TrajectoryRow row_of(const Track& t, int frame) {
  return {frame, t.id, t.kf.box(), t.score, t.category};
}

}  // namespace

StepResult step(std::span<const Detection> frame_dets, TrackerState state,
                const TrackerConfig& cfg, const EncoderParams* encoder) {
  const int frame = state.frame;
  const bool use_utr = cfg.association != AssociationMode::kGeomOnly;

  for (Track& t : state.tracks) t.kf = kf_predict(t.kf, cfg.kalman);

  std::vector<Embedding> det_embeds;
  std::vector<Box3D> det_boxes;
  det_boxes.reserve(frame_dets.size());
  for (std::size_t i = 0; i < frame_dets.size(); ++i) {
    require_valid(frame_dets[i].box);
    det_boxes.push_back(frame_dets[i].box);
    if (use_utr) {
      det_embeds.push_back(detection_embedding(
          frame_dets[i], cfg, encoder,
          (static_cast<std::uint64_t>(frame) << 32) ^ static_cast<std::uint64_t>(i)));
    }
  }
  std::vector<Embedding> track_embeds;
  std::vector<Box3D> pred_boxes;
  for (const Track& t : state.tracks) {
    pred_boxes.push_back(t.kf.box());
    if (use_utr) track_embeds.push_back(t.embedding);
  }

  const CostMatrix costs =
      build_cost_matrix(track_embeds, det_embeds, pred_boxes, det_boxes, cfg.association);
  const Assignment assignment = greedy_assign(costs, cfg.max_cost);

  StepResult result;
  for (const auto& [ti, di] : assignment.matches) {
    Track& t = state.tracks[static_cast<std::size_t>(ti)];
    const Detection& det = frame_dets[static_cast<std::size_t>(di)];
    t.kf = kf_update(t.kf, det.box, cfg.kalman);
    t.hits += 1;
    t.misses = 0;
    t.category = det.category;
    t.score = det.score;
    if (use_utr) {
      const Embedding& fresh = det_embeds[static_cast<std::size_t>(di)];
      if (cfg.embedding_update_mode == EmbeddingUpdate::kReplace || t.embedding.empty()) {
        t.embedding = fresh;
      } else {
        t.embedding = Embedding::normalized(cfg.ema_momentum * t.embedding.vector() +
                                            (1.0 - cfg.ema_momentum) * fresh.vector());
      }
    }
    if (t.status == TrackStatus::kTentative && t.hits >= cfg.min_hits) {
      t.status = TrackStatus::kConfirmed;
      result.backfill.insert(result.backfill.end(), t.pending.begin(), t.pending.end());
      t.pending.clear();
    } else if (t.status == TrackStatus::kTentative) {
      t.pending.push_back(row_of(t, frame));
    }
  }
  for (int ti : assignment.unmatched_tracks) {
    Track& t = state.tracks[static_cast<std::size_t>(ti)];
    t.hits = 0;
    t.misses += 1;
    if (t.misses > cfg.max_age) t.status = TrackStatus::kDead;
  }
  std::erase_if(state.tracks, [](const Track& t) { return t.status == TrackStatus::kDead; });

  for (int di : assignment.unmatched_dets) {
    const Detection& det = frame_dets[static_cast<std::size_t>(di)];
    Track t;
    t.id = state.next_id++;
    t.kf = kf_init(det.box, cfg.kalman);
    if (use_utr) t.embedding = det_embeds[static_cast<std::size_t>(di)];
    t.hits = 1;
    t.category = det.category;
    t.score = det.score;
    if (t.hits >= cfg.min_hits) {
      t.status = TrackStatus::kConfirmed;
    } else {
      t.pending.push_back(row_of(t, frame));
    }
    state.tracks.push_back(std::move(t));
  }

  for (const Track& t : state.tracks) {
    if (t.status == TrackStatus::kConfirmed && t.misses == 0) result.output.push_back(row_of(t, frame));
  }
  canonicalize(result.output);
  canonicalize(result.backfill);
  state.frame = frame + 1;
  result.state = std::move(state);
  return result;
}

Tracker::Tracker(TrackerConfig cfg, std::shared_ptr<const EncoderParams> encoder)
    : cfg_(std::move(cfg)), encoder_(std::move(encoder)) {
  cfg_.validate();
}

StepResult Tracker::step(std::span<const Detection> frame_dets) {
  StepResult r = yoloo::step(frame_dets, std::move(state_), cfg_, encoder_.get());
  state_ = r.state;
  return r;
}

TrajectorySet run_sequence(const DetectionStream& stream, const TrackerConfig& cfg,
                           std::shared_ptr<const EncoderParams> encoder) {
  cfg.validate();
  TrajectorySet rows;
  TrackerState state;
  for (const auto& frame : stream) {
    StepResult r = step(frame, std::move(state), cfg, encoder.get());
    rows.insert(rows.end(), r.output.begin(), r.output.end());
    if (cfg.backfill_tentative) rows.insert(rows.end(), r.backfill.begin(), r.backfill.end());
    state = std::move(r.state);
  }
  canonicalize(rows);
  return rows;
}

}  // namespace yoloo
