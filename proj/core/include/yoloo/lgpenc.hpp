#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "yoloo/geom.hpp"

namespace yoloo {

inline constexpr int kEmbeddingDim = 512;
inline constexpr int kPointDim = 3;
inline constexpr int kLocalWidth = 64;     // second per-point layer
inline constexpr int kGlobalWidth = 1024;  // fifth per-point layer
inline constexpr int kConcatWidth = kLocalWidth + kGlobalWidth;
inline constexpr std::array<int, 5> kFeatureWidths{64, 64, 64, 128, 1024};
inline constexpr double kAttentionEps = 1e-12;

inline constexpr int kTrainPoints = 800;
inline constexpr int kTestPoints = 400;

using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, kPointDim, Eigen::RowMajor>;

/// Unit-L2-norm vector. The dimension is free (512 for encoder output).
class Embedding {
 public:
  Embedding() = default;

  /// Takes a vector that must already be unit norm (|norm - 1| < 1e-6).
  static Embedding from_unit(Eigen::VectorXd v);
  /// Normalizes `v`; throws on a zero or non-finite vector.
  static Embedding normalized(Eigen::VectorXd v);

  const Eigen::VectorXd& vector() const noexcept { return v_; }
  Eigen::Index dim() const noexcept { return v_.size(); }
  bool empty() const noexcept { return v_.size() == 0; }

  double dot(const Embedding& other) const;

  friend bool operator==(const Embedding& a, const Embedding& b) {
    return a.v_.size() == b.v_.size() && a.v_ == b.v_;
  }

 private:
  explicit Embedding(Eigen::VectorXd v) : v_(std::move(v)) {}
  Eigen::VectorXd v_;
};

/// clamp(1 - a.b, 0, 1).
double utr_similarity_cost(const Embedding& a, const Embedding& b);

/// N x 3 object-frame points.
struct PointPatch {
  PointMatrix points;

  Eigen::Index size() const noexcept { return points.rows(); }
  void validate() const;
};

/// Points of `cloud` inside `box`, moved into the box frame (centered,
/// yaw-aligned), resampled to exactly `n_target` points. With enough points
/// the subset is drawn without replacement; otherwise every inside point is
/// kept once and the remainder is drawn with replacement.
PointPatch crop_and_resample(const PointMatrix& cloud, const Box3D& box,
                             int n_target, std::uint64_t seed);

/// Resamples an existing patch to `n_target` points with the same rule.
PointPatch resample(const PointPatch& patch, int n_target, std::uint64_t seed);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

struct TensorView {
  std::string name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;
  Eigen::Index size() const noexcept { return rows * cols; }
};

struct ConstTensorView {
  std::string name;
  const double* data;
  Eigen::Index rows;
  Eigen::Index cols;
  Eigen::Index size() const noexcept { return rows * cols; }
};

/// Weights of the local-global point encoder: five per-point layers, the
/// attention layer (local features -> channel weights), the fusion layer and
/// the two fusion vectors.
struct EncoderParams {
  std::array<DenseLayer, 5> feature;
  DenseLayer attention;
  DenseLayer fusion;
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;

  /// He-style uniform initialization, alpha = beta = 1.
  static EncoderParams random(std::uint64_t seed);
  static EncoderParams zeros();

  /// Named tensors in a fixed order. Matrices are column-major in memory.
  std::vector<TensorView> tensors();
  std::vector<ConstTensorView> tensors() const;

  std::size_t parameter_count() const;
  bool all_finite() const;
  void set_zero();
  /// this += scale * other
  void axpy(double scale, const EncoderParams& other);
};

/// Forward activations kept for the backward pass.
struct EncoderTrace {
  PointMatrix input;
  std::array<Eigen::MatrixXd, 5> hidden;  // post-ReLU, N x width
  Eigen::MatrixXd attn_logits;            // N x 1088, before softplus
  Eigen::MatrixXd attn_weights;           // N x 1088, after softplus
  Eigen::VectorXd row_sums;               // N, sum over channels + eps
  Eigen::VectorXd local;                  // attention-pooled, 1088
  Eigen::VectorXd global;                 // max-pooled, 1088
  std::vector<int> argmax;                // 1088 row indices of the max
  Eigen::VectorXd fused;                  // alpha*local + beta*global
  Eigen::VectorXd pre_norm;               // fusion output, 512
  double norm = 0.0;
  Embedding output;

  /// Hash of every piecewise branch taken (ReLU masks, max indices). Two
  /// traces with equal signatures lie on the same smooth piece.
  std::uint64_t branch_signature() const;
};

struct EncoderGrads {
  EncoderParams params;
  PointMatrix points;
};

Embedding encode(const PointPatch& patch, const EncoderParams& params);
EncoderTrace encode_traced(const PointPatch& patch, const EncoderParams& params);
/// encode_traced without the parameter finiteness scan, for callers that
/// validated `params` once for many patches.
EncoderTrace encode_traced_prechecked(const PointPatch& patch, const EncoderParams& params);

/// Reverse-mode gradient of <upstream, encode(patch)> with respect to every
/// parameter tensor and the input points.
EncoderGrads encode_backward(const PointPatch& patch, const EncoderParams& params,
                             const Eigen::VectorXd& upstream);
/// Same, reusing a forward trace. Parameter gradients are accumulated into
/// `param_grads`; the input gradient is returned.
PointMatrix encode_backward(const EncoderTrace& trace, const EncoderParams& params,
                            const Eigen::VectorXd& upstream,
                            EncoderParams& param_grads);

}  // namespace yoloo
