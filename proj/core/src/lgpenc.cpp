#include "yoloo/lgpenc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "yoloo/errors.hpp"
#include "yoloo/random.hpp"

namespace yoloo {

namespace {

constexpr double kUnitNormTol = 1e-6;

// max(z, 0) + log(1 + exp(-|z|)); absolute error stays below 1e-15.
Eigen::MatrixXd softplus(const Eigen::MatrixXd& z) {
  return (z.array().max(0.0) + (1.0 + (-z.array().abs()).exp()).log()).matrix();
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  const Eigen::ArrayXXd e = (-z.array().abs()).exp();
  return (z.array() >= 0.0).select(1.0 / (1.0 + e), e / (1.0 + e)).matrix();
}

DenseLayer make_layer(int out, int in, Rng& rng) {
  DenseLayer layer;
  layer.weight.resize(out, in);
  layer.bias = Eigen::VectorXd::Zero(out);
  const double bound = std::sqrt(6.0 / in);
  for (Eigen::Index c = 0; c < layer.weight.cols(); ++c)
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r)
      layer.weight(r, c) = rng.uniform(-bound, bound);
  return layer;
}

DenseLayer zero_layer(int out, int in) {
  return {Eigen::MatrixXd::Zero(out, in), Eigen::VectorXd::Zero(out)};
}

void hash_mix(std::uint64_t& h, std::uint64_t v) {
  h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
}

std::vector<Eigen::Index> pick_rows(Eigen::Index available, int n_target, Rng& rng) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(available));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  const auto n = static_cast<std::size_t>(n_target);
  if (rows.size() >= n) {
    // Partial Fisher-Yates: first n entries become a uniform subset.
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = i + rng.index(rows.size() - i);
      std::swap(rows[i], rows[j]);
    }
    rows.resize(n);
  } else {
    const std::size_t have = rows.size();
    while (rows.size() < n) rows.push_back(static_cast<Eigen::Index>(rng.index(have)));
  }
  return rows;
}

}  // namespace

Embedding Embedding::from_unit(Eigen::VectorXd v) {
  const double n = v.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) >= kUnitNormTol) {
    throw InvalidArgumentError("embedding is not unit norm (norm = " +
                               std::to_string(n) + ")");
  }
  return Embedding(std::move(v));
}

Embedding Embedding::normalized(Eigen::VectorXd v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n <= 0.0) {
    throw InvalidArgumentError("cannot normalize a zero or non-finite vector");
  }
  v /= n;
  return Embedding(std::move(v));
}

double Embedding::dot(const Embedding& other) const {
  if (dim() != other.dim()) {
    throw InvalidArgumentError("embedding dimension mismatch: " +
                               std::to_string(dim()) + " vs " +
                               std::to_string(other.dim()));
  }
  return v_.dot(other.v_);
}

double utr_similarity_cost(const Embedding& a, const Embedding& b) {
  if (a.empty() || b.empty()) throw InvalidArgumentError("empty embedding");
  return std::clamp(1.0 - a.dot(b), 0.0, 1.0);
}

void PointPatch::validate() const {
  if (points.rows() < 1) throw InvalidArgumentError("point patch is empty");
  if (!points.allFinite()) throw InvalidArgumentError("point patch has non-finite coordinates");
}

PointPatch crop_and_resample(const PointMatrix& cloud, const Box3D& box,
                             int n_target, std::uint64_t seed) {
  require_valid(box);
  if (n_target < 1) throw InvalidArgumentError("n_target must be >= 1");
  const double c = std::cos(box.yaw);
  const double s = std::sin(box.yaw);
  std::vector<Eigen::RowVector3d> inside;
  for (Eigen::Index i = 0; i < cloud.rows(); ++i) {
    const double dx = cloud(i, 0) - box.x;
    const double dy = cloud(i, 1) - box.y;
    const double lx = c * dx + s * dy;
    const double ly = -s * dx + c * dy;
    const double lz = cloud(i, 2) - box.z;
    if (std::abs(lx) <= 0.5 * box.l && std::abs(ly) <= 0.5 * box.w &&
        std::abs(lz) <= 0.5 * box.h) {
      inside.emplace_back(lx, ly, lz);
    }
  }
  if (inside.empty()) throw EmptyPatchError("no points inside the box");
  PointPatch all;
  all.points.resize(static_cast<Eigen::Index>(inside.size()), kPointDim);
  for (std::size_t i = 0; i < inside.size(); ++i)
    all.points.row(static_cast<Eigen::Index>(i)) = inside[i];
  return resample(all, n_target, seed);
}

PointPatch resample(const PointPatch& patch, int n_target, std::uint64_t seed) {
  if (n_target < 1) throw InvalidArgumentError("n_target must be >= 1");
  if (patch.size() < 1) throw EmptyPatchError("cannot resample an empty patch");
  Rng rng(seed);
  const auto rows = pick_rows(patch.size(), n_target, rng);
  PointPatch out;
  out.points.resize(n_target, kPointDim);
  for (int i = 0; i < n_target; ++i) out.points.row(i) = patch.points.row(rows[static_cast<std::size_t>(i)]);
  return out;
}

EncoderParams EncoderParams::random(std::uint64_t seed) {
  Rng rng(seed);
  EncoderParams p;
  int in = kPointDim;
  for (std::size_t k = 0; k < kFeatureWidths.size(); ++k) {
    p.feature[k] = make_layer(kFeatureWidths[k], in, rng);
    in = kFeatureWidths[k];
  }
  p.attention = make_layer(kConcatWidth, kLocalWidth, rng);
  p.fusion = make_layer(kEmbeddingDim, kConcatWidth, rng);
  p.alpha = Eigen::VectorXd::Ones(kConcatWidth);
  p.beta = Eigen::VectorXd::Ones(kConcatWidth);
  return p;
}

EncoderParams EncoderParams::zeros() {
  EncoderParams p;
  int in = kPointDim;
  for (std::size_t k = 0; k < kFeatureWidths.size(); ++k) {
    p.feature[k] = zero_layer(kFeatureWidths[k], in);
    in = kFeatureWidths[k];
  }
  p.attention = zero_layer(kConcatWidth, kLocalWidth);
  p.fusion = zero_layer(kEmbeddingDim, kConcatWidth);
  p.alpha = Eigen::VectorXd::Zero(kConcatWidth);
  p.beta = Eigen::VectorXd::Zero(kConcatWidth);
  return p;
}

std::vector<TensorView> EncoderParams::tensors() {
  std::vector<TensorView> out;
  auto add_layer = [&out](const std::string& name, DenseLayer& layer) {
    out.push_back({name + ".weight", layer.weight.data(), layer.weight.rows(), layer.weight.cols()});
    out.push_back({name + ".bias", layer.bias.data(), layer.bias.rows(), 1});
  };
  for (std::size_t k = 0; k < feature.size(); ++k) add_layer("mlp" + std::to_string(k + 1), feature[k]);
  add_layer("attn", attention);
  add_layer("fusion", fusion);
  out.push_back({"alpha", alpha.data(), alpha.rows(), 1});
  out.push_back({"beta", beta.data(), beta.rows(), 1});
  return out;
}

std::vector<ConstTensorView> EncoderParams::tensors() const {
  std::vector<ConstTensorView> out;
  for (const auto& t : const_cast<EncoderParams*>(this)->tensors()) {
    out.push_back({t.name, t.data, t.rows, t.cols});
  }
  return out;
}

std::size_t EncoderParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors()) n += static_cast<std::size_t>(t.size());
  return n;
}

bool EncoderParams::all_finite() const {
  for (const auto& t : tensors()) {
    if (!Eigen::Map<const Eigen::VectorXd>(t.data, t.size()).allFinite()) return false;
  }
  return true;
}

void EncoderParams::set_zero() {
  for (auto& t : tensors()) std::fill(t.data, t.data + t.size(), 0.0);
}

void EncoderParams::axpy(double scale, const EncoderParams& other) {
  auto mine = tensors();
  const auto theirs = other.tensors();
  for (std::size_t k = 0; k < mine.size(); ++k) {
    Eigen::Map<Eigen::VectorXd>(mine[k].data, mine[k].size()) +=
        scale * Eigen::Map<const Eigen::VectorXd>(theirs[k].data, theirs[k].size());
  }
}

std::uint64_t EncoderTrace::branch_signature() const {
  std::uint64_t h = 0;
  for (const auto& layer : hidden) {
    std::uint64_t word = 0;
    int bits = 0;
    for (Eigen::Index i = 0; i < layer.size(); ++i) {
      word = (word << 1) | (layer.data()[i] > 0.0 ? 1u : 0u);
      if (++bits == 64) {
        hash_mix(h, word);
        word = 0;
        bits = 0;
      }
    }
    hash_mix(h, word);
  }
  for (int idx : argmax) hash_mix(h, static_cast<std::uint64_t>(idx));
  return h;
}

EncoderTrace encode_traced(const PointPatch& patch, const EncoderParams& params) {
  if (!params.all_finite()) throw InvalidArgumentError("encoder parameters contain NaN or Inf");
  return encode_traced_prechecked(patch, params);
}

EncoderTrace encode_traced_prechecked(const PointPatch& patch, const EncoderParams& params) {
  patch.validate();

  EncoderTrace t;
  t.input = patch.points;
  const Eigen::Index n = patch.size();

  Eigen::MatrixXd prev = patch.points;
  for (std::size_t k = 0; k < params.feature.size(); ++k) {
    const DenseLayer& layer = params.feature[k];
    Eigen::MatrixXd act = prev * layer.weight.transpose();
    act.rowwise() += layer.bias.transpose();
    t.hidden[k] = act.cwiseMax(0.0);
    prev = t.hidden[k];
  }
  const Eigen::MatrixXd& local_feat = t.hidden[1];
  const Eigen::MatrixXd& global_feat = t.hidden[4];

  t.attn_logits = local_feat * params.attention.weight.transpose();
  t.attn_logits.rowwise() += params.attention.bias.transpose();
  t.attn_weights = softplus(t.attn_logits);
  t.row_sums = t.attn_weights.rowwise().sum().array() + kAttentionEps;

  // Concatenated features [local | global] are never materialized; each
  // half is handled through its block.
  t.local.resize(kConcatWidth);
  t.global.resize(kConcatWidth);
  t.argmax.assign(kConcatWidth, 0);
  const Eigen::VectorXd inv_rows = t.row_sums.cwiseInverse();
  auto pool = [&](const Eigen::MatrixXd& feat, Eigen::Index offset) {
    const auto w = t.attn_weights.middleCols(offset, feat.cols());
    t.local.segment(offset, feat.cols()) =
        (feat.array() * w.array()).matrix().transpose() * inv_rows;
    for (Eigen::Index j = 0; j < feat.cols(); ++j) {
      Eigen::Index best = 0;
      double value = feat(0, j);
      for (Eigen::Index i = 1; i < n; ++i) {
        if (feat(i, j) > value) {
          value = feat(i, j);
          best = i;
        }
      }
      t.global(offset + j) = value;
      t.argmax[static_cast<std::size_t>(offset + j)] = static_cast<int>(best);
    }
  };
  pool(local_feat, 0);
  pool(global_feat, kLocalWidth);

  t.fused = params.alpha.cwiseProduct(t.local) + params.beta.cwiseProduct(t.global);
  t.pre_norm = params.fusion.weight * t.fused + params.fusion.bias;
  t.norm = t.pre_norm.norm();
  if (!(t.norm > 0.0) || !std::isfinite(t.norm)) {
    throw InvalidArgumentError("encoder output has zero or non-finite norm");
  }
  t.output = Embedding::normalized(t.pre_norm);
  return t;
}

Embedding encode(const PointPatch& patch, const EncoderParams& params) {
  return encode_traced(patch, params).output;
}

PointMatrix encode_backward(const EncoderTrace& t, const EncoderParams& params,
                            const Eigen::VectorXd& upstream, EncoderParams& grads) {
  if (upstream.size() != kEmbeddingDim) {
    throw InvalidArgumentError("upstream gradient must have 512 entries");
  }
  const Eigen::VectorXd& out = t.output.vector();
  const Eigen::VectorXd d_pre = (upstream - out * out.dot(upstream)) / t.norm;

  grads.fusion.weight.noalias() += d_pre * t.fused.transpose();
  grads.fusion.bias += d_pre;
  const Eigen::VectorXd d_fused = params.fusion.weight.transpose() * d_pre;

  grads.alpha += d_fused.cwiseProduct(t.local);
  grads.beta += d_fused.cwiseProduct(t.global);
  const Eigen::VectorXd d_local = d_fused.cwiseProduct(params.alpha);
  const Eigen::VectorXd d_global = d_fused.cwiseProduct(params.beta);

  const Eigen::Index n = t.input.rows();
  const Eigen::VectorXd inv_rows = t.row_sums.cwiseInverse();

  // local_j = sum_i C_ij W_ij / s_i with s_i = sum_j W_ij + eps.
  //   dC_ij = d_local_j W_ij / s_i
  //   dW_ij = (d_local_j C_ij - q_i) / s_i,  q_i = sum_k d_local_k C_ik W_ik / s_i
  Eigen::MatrixXd d_concat_local(n, kLocalWidth);
  Eigen::MatrixXd d_concat_global(n, kGlobalWidth);
  Eigen::MatrixXd d_weights(n, kConcatWidth);
  Eigen::VectorXd q = Eigen::VectorXd::Zero(n);
  auto pool_back = [&](const Eigen::MatrixXd& feat, Eigen::Index offset, Eigen::MatrixXd& d_feat) {
    const auto w = t.attn_weights.middleCols(offset, feat.cols());
    const auto dl = d_local.segment(offset, feat.cols());
    d_feat = (w.array().rowwise() * dl.transpose().array()).colwise() * inv_rows.array();
    d_weights.middleCols(offset, feat.cols()) = feat.array().rowwise() * dl.transpose().array();
    q += (feat.array() * w.array()).matrix() * dl;
    for (Eigen::Index j = 0; j < feat.cols(); ++j) {
      d_feat(t.argmax[static_cast<std::size_t>(offset + j)], j) += d_global(offset + j);
    }
  };
  pool_back(t.hidden[1], 0, d_concat_local);
  pool_back(t.hidden[4], kLocalWidth, d_concat_global);
  q = q.cwiseProduct(inv_rows);
  d_weights.colwise() -= q;
  d_weights.array().colwise() *= inv_rows.array();

  // softplus'(z) = sigmoid(z)
  const Eigen::MatrixXd d_logits =
      d_weights.cwiseProduct(sigmoid(t.attn_logits));
  grads.attention.weight.noalias() += d_logits.transpose() * t.hidden[1];
  grads.attention.bias += d_logits.colwise().sum().transpose();

  Eigen::MatrixXd d_hidden = d_concat_global;
  for (int k = 4; k >= 0; --k) {
    if (k == 1) {
      d_hidden += d_concat_local;
      d_hidden.noalias() += d_logits * params.attention.weight;
    }
    const Eigen::MatrixXd d_act =
        d_hidden.cwiseProduct((t.hidden[static_cast<std::size_t>(k)].array() > 0.0).cast<double>().matrix());
    DenseLayer& g = grads.feature[static_cast<std::size_t>(k)];
    if (k > 0) {
      g.weight.noalias() += d_act.transpose() * t.hidden[static_cast<std::size_t>(k - 1)];
    } else {
      g.weight.noalias() += d_act.transpose() * t.input;
    }
    g.bias += d_act.colwise().sum().transpose();
    d_hidden = d_act * params.feature[static_cast<std::size_t>(k)].weight;
  }
  return d_hidden;
}

EncoderGrads encode_backward(const PointPatch& patch, const EncoderParams& params,
                             const Eigen::VectorXd& upstream) {
  const EncoderTrace trace = encode_traced(patch, params);
  EncoderGrads g{EncoderParams::zeros(), {}};
  g.points = encode_backward(trace, params, upstream, g.params);
  return g;
}

}  // namespace yoloo
