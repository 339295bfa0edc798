#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "yoloo/lgpenc.hpp"

namespace yoloo {

struct LossConfig {
  double gamma = 1.0;    // weight of the image and text alignment terms
  double delta = 1.0;    // weight of the positive-pair and triplet terms
  double epsilon = 0.2;  // triplet margin
  double tau = 0.07;     // temperature

  void validate() const;
  friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

struct TrainConfig {
  int epochs = 250;
  double learning_rate = 0.003;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 0.01;
  double adam_eps = 1e-8;
  int batch_size = 8;
  int steps_per_epoch = 1;
  int train_points = kTrainPoints;
  bool learn_tau = true;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Rows are embeddings.
using EmbeddingMatrix = Eigen::MatrixXd;

EmbeddingMatrix stack(std::span<const Embedding> embeddings);

struct PairLoss {
  double value = 0.0;
  EmbeddingMatrix d_first;   // dL/d rows of the first argument
  EmbeddingMatrix d_second;  // dL/d rows of the second argument
  double d_tau = 0.0;
};

/// Symmetric InfoNCE over the B x B similarity matrix S/tau with S_ik = p_i.f_k;
/// row i's match is column i. Averaged over the B matched pairs.
PairLoss cc_loss_grad(const EmbeddingMatrix& p, const EmbeddingMatrix& f, double tau);
double cc_loss(std::span<const Embedding> p, std::span<const Embedding> f, double tau);

struct TripletLoss {
  double value = 0.0;
  EmbeddingMatrix d_anchor;
  EmbeddingMatrix d_positive;
  EmbeddingMatrix d_negative;
  /// Per anchor: hardest positive, hardest negative, hinge active.
  std::vector<std::array<int, 3>> branches;
};

/// Batch-hard triplet loss with cosine distance d(a, b) = 1 - a.b:
/// mean_i max(max_k d(a_i, p_k) - min_k d(a_i, n_k) + epsilon, 0).
TripletLoss triplet_loss_grad(const EmbeddingMatrix& anchors,
                              const EmbeddingMatrix& positives,
                              const EmbeddingMatrix& negatives, double epsilon);
double triplet_loss(std::span<const Embedding> anchors,
                    std::span<const Embedding> positives,
                    std::span<const Embedding> negatives, double epsilon);

/// One labeled observation of a tracked object.
struct TrackletObservation {
  int sequence_id = 0;
  int frame = 0;
  int object_id = 0;
  Embedding image;
  Embedding text;
  PointPatch points;  // object frame, any size >= 1
};

struct TrackletDataset {
  std::vector<TrackletObservation> observations;
};

inline constexpr int kPositiveWindow = 3;

struct TriModalItem {
  PointPatch anchor;
  PointPatch positive;
  PointPatch negative;
  Embedding image;
  Embedding text;
  std::size_t anchor_index = 0;
  std::size_t positive_index = 0;
  std::size_t negative_index = 0;
  /// True when no other observation of the identity was in the window and
  /// the anchor itself was resampled as its positive.
  bool positive_fallback = false;
};

struct TriModalBatch {
  std::vector<TriModalItem> items;
  std::size_t size() const noexcept { return items.size(); }
};

/// Anchors are uniform over observations. Positives share the anchor's
/// (sequence, object) identity within +-3 frames; negatives come from a
/// different sequence. Patches are resampled to `n_points`.
TriModalBatch sample_batch(const TrackletDataset& dataset, int batch_size,
                           std::uint64_t seed, int n_points = kTrainPoints);

struct LossBreakdown {
  double cc_image = 0.0;
  double cc_text = 0.0;
  double cc_positive = 0.0;
  double triplet = 0.0;
};

struct TotalLoss {
  double value = 0.0;
  LossBreakdown parts;
  EncoderParams grads;
  double d_tau = 0.0;
  /// Hash of the piecewise branches (encoder ReLU/max, triplet hardest
  /// indices and hinge state) the value was computed on.
  std::uint64_t branch_signature = 0;
};

/// gamma*(cc(P,I) + cc(P,T)) + delta*(cc(P,P+) + triplet(P,P+,P-)).
/// Image and text embeddings are constants; both patch branches share the
/// encoder and receive gradients.
TotalLoss total_loss(const TriModalBatch& batch, const EncoderParams& params,
                     const LossConfig& cfg);
double total_loss_value(const TriModalBatch& batch, const EncoderParams& params,
                        const LossConfig& cfg);

struct LossProbe {
  double value = 0.0;
  std::uint64_t branch_signature = 0;
};
/// Forward-only loss value together with its branch signature.
LossProbe total_loss_probe(const TriModalBatch& batch, const EncoderParams& params,
                           const LossConfig& cfg);

/// Decoupled-weight-decay Adam. Weight decay applies to ".weight" tensors.
class AdamW {
 public:
  AdamW(const TrainConfig& cfg);

  void step(EncoderParams& params, const EncoderParams& grads);
  /// Scalar parameter update (used for log-temperature, no decay).
  double step_scalar(double value, double grad);

 private:
  TrainConfig cfg_;
  EncoderParams m_;
  EncoderParams v_;
  double m_scalar_ = 0.0;
  double v_scalar_ = 0.0;
  long step_count_ = 0;
  long scalar_count_ = 0;
};

struct TrainResult {
  EncoderParams params;
  double tau = 0.0;
  std::vector<double> epoch_loss;
};

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

/// AdamW over sampled batches; the temperature is optimized as log(tau).
TrainResult train(const TrackletDataset& dataset, EncoderParams params,
                  const TrainConfig& train_cfg, const LossConfig& loss_cfg,
                  const EpochCallback& on_epoch = {});

struct RetrievalReport {
  /// Leave-one-out nearest neighbor (by utr_similarity_cost) shares the
  /// query's identity.
  double nn_accuracy = 0.0;
  double mean_intra_cost = 0.0;
  double mean_inter_cost = 0.0;
  std::size_t queries = 0;
};

/// Encodes every observation (resampled to `n_points`) and scores identity
/// retrieval. Identity is (sequence_id, object_id).
RetrievalReport evaluate_retrieval(const TrackletDataset& dataset, const EncoderParams& params,
                                   int n_points, std::uint64_t seed);

}  // namespace yoloo
