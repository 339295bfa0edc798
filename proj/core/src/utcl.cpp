#include "yoloo/utcl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <Eigen/Dense>

#include "yoloo/errors.hpp"
#include "yoloo/random.hpp"

namespace yoloo {

namespace {

void hash_mix(std::uint64_t& h, std::uint64_t v) {
  h ^= v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
}

void require_unit_rows(const EmbeddingMatrix& m, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (std::abs(m.row(i).norm() - 1.0) >= 1e-6) {
      throw InvalidArgumentError(std::string(what) + " row " + std::to_string(i) +
                                 " is not unit norm");
    }
  }
}

// Row-wise softmax, numerically stabilized.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& a) {
  Eigen::MatrixXd out = a;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double m = a.row(i).maxCoeff();
    out.row(i) = (a.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = seed;
  hash_mix(h, a);
  hash_mix(h, b);
  return h;
}

}  // namespace

void LossConfig::validate() const {
  if (!(gamma >= 0.0) || !(delta >= 0.0)) throw InvalidArgumentError("gamma and delta must be >= 0");
  if (!(epsilon >= 0.0)) throw InvalidArgumentError("epsilon must be >= 0");
  if (!(tau > 0.0)) throw InvalidArgumentError("tau must be > 0");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgumentError("epochs must be >= 1");
  if (!(learning_rate >= 0.0)) throw InvalidArgumentError("learning_rate must be >= 0");
  if (batch_size < 1 || steps_per_epoch < 1 || train_points < 1) {
    throw InvalidArgumentError("batch_size, steps_per_epoch and train_points must be >= 1");
  }
}

EmbeddingMatrix stack(std::span<const Embedding> embeddings) {
  if (embeddings.empty()) return {};
  EmbeddingMatrix m(static_cast<Eigen::Index>(embeddings.size()), embeddings.front().dim());
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    if (embeddings[i].dim() != m.cols()) throw InvalidArgumentError("embedding dimension mismatch");
    m.row(static_cast<Eigen::Index>(i)) = embeddings[i].vector().transpose();
  }
  return m;
}

PairLoss cc_loss_grad(const EmbeddingMatrix& p, const EmbeddingMatrix& f, double tau) {
  if (!(tau > 0.0)) throw InvalidArgumentError("tau must be > 0");
  if (p.rows() < 1 || p.rows() != f.rows() || p.cols() != f.cols()) {
    throw InvalidArgumentError("cc_loss needs two non-empty batches of equal shape");
  }
  require_unit_rows(p, "cc_loss first batch");
  require_unit_rows(f, "cc_loss second batch");
  const Eigen::Index b = p.rows();
  const Eigen::MatrixXd logits = p * f.transpose() / tau;

  double loss = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    loss += 0.5 * (log_sum_exp(logits.row(i).transpose()) - logits(i, i));
    loss += 0.5 * (log_sum_exp(logits.col(i)) - logits(i, i));
  }
  loss /= static_cast<double>(b);

  const Eigen::MatrixXd row_sm = softmax_rows(logits);
  const Eigen::MatrixXd col_sm = softmax_rows(logits.transpose()).transpose();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(b, b);
  const Eigen::MatrixXd d_logits = (row_sm - eye + col_sm - eye) / (2.0 * static_cast<double>(b));

  PairLoss out;
  out.value = loss;
  out.d_first = d_logits * f / tau;
  out.d_second = d_logits.transpose() * p / tau;
  out.d_tau = -(d_logits.array() * logits.array()).sum() / tau;
  return out;
}

double cc_loss(std::span<const Embedding> p, std::span<const Embedding> f, double tau) {
  return cc_loss_grad(stack(p), stack(f), tau).value;
}

TripletLoss triplet_loss_grad(const EmbeddingMatrix& anchors,
                              const EmbeddingMatrix& positives,
                              const EmbeddingMatrix& negatives, double epsilon) {
  const Eigen::Index b = anchors.rows();
  if (b < 1 || positives.rows() != b || negatives.rows() != b ||
      positives.cols() != anchors.cols() || negatives.cols() != anchors.cols()) {
    throw InvalidArgumentError("triplet_loss needs three non-empty batches of equal shape");
  }
  require_unit_rows(anchors, "triplet anchors");
  require_unit_rows(positives, "triplet positives");
  require_unit_rows(negatives, "triplet negatives");

  const Eigen::MatrixXd d_pos = 1.0 - (anchors * positives.transpose()).array();
  const Eigen::MatrixXd d_neg = 1.0 - (anchors * negatives.transpose()).array();

  TripletLoss out;
  out.d_anchor = Eigen::MatrixXd::Zero(b, anchors.cols());
  out.d_positive = Eigen::MatrixXd::Zero(b, anchors.cols());
  out.d_negative = Eigen::MatrixXd::Zero(b, anchors.cols());
  const double scale = 1.0 / static_cast<double>(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    Eigen::Index kp = 0;
    Eigen::Index kn = 0;
    const double hardest_pos = d_pos.row(i).maxCoeff(&kp);
    const double hardest_neg = d_neg.row(i).minCoeff(&kn);
    const double margin = hardest_pos - hardest_neg + epsilon;
    const bool active = margin > 0.0;
    out.branches.push_back({static_cast<int>(kp), static_cast<int>(kn), active ? 1 : 0});
    if (!active) continue;
    out.value += scale * margin;
    // d(1 - a.x)/da = -x
    out.d_anchor.row(i) += scale * (negatives.row(kn) - positives.row(kp));
    out.d_positive.row(kp) -= scale * anchors.row(i);
    out.d_negative.row(kn) += scale * anchors.row(i);
  }
  return out;
}

double triplet_loss(std::span<const Embedding> anchors, std::span<const Embedding> positives,
                    std::span<const Embedding> negatives, double epsilon) {
  return triplet_loss_grad(stack(anchors), stack(positives), stack(negatives), epsilon).value;
}

TriModalBatch sample_batch(const TrackletDataset& dataset, int batch_size,
                           std::uint64_t seed, int n_points) {
  if (batch_size < 1) throw InvalidArgumentError("batch size must be >= 1");
  const auto& obs = dataset.observations;

  std::map<int, std::vector<std::size_t>> by_sequence;
  std::map<std::pair<int, int>, std::vector<std::size_t>> by_identity;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    by_sequence[obs[i].sequence_id].push_back(i);
    by_identity[{obs[i].sequence_id, obs[i].object_id}].push_back(i);
  }
  if (by_sequence.size() < 2) {
    throw SamplingError(
        "negative rule violated: negatives must come from a different sequence, "
        "but the dataset has fewer than 2 sequences");
  }

  // Same-identity candidates within the frame window, excluding the anchor.
  std::vector<std::vector<std::size_t>> positives(obs.size());
  bool any_window_pair = false;
  for (const auto& [key, members] : by_identity) {
    for (std::size_t a : members) {
      for (std::size_t c : members) {
        if (c != a && std::abs(obs[c].frame - obs[a].frame) <= kPositiveWindow) {
          positives[a].push_back(c);
        }
      }
      any_window_pair = any_window_pair || !positives[a].empty();
    }
  }
  if (!any_window_pair) {
    throw SamplingError(
        "positive rule violated: no identity has two observations within +-3 frames");
  }

  std::map<int, std::vector<std::size_t>> others;
  for (const auto& [seq, members] : by_sequence) {
    auto& list = others[seq];
    for (const auto& [other_seq, other_members] : by_sequence) {
      if (other_seq != seq) list.insert(list.end(), other_members.begin(), other_members.end());
    }
  }

  Rng rng(seed);
  TriModalBatch batch;
  batch.items.reserve(static_cast<std::size_t>(batch_size));
  for (int b = 0; b < batch_size; ++b) {
    TriModalItem item;
    item.anchor_index = rng.index(obs.size());
    const TrackletObservation& anchor = obs[item.anchor_index];
    const auto& cands = positives[item.anchor_index];
    if (cands.empty()) {
      item.positive_index = item.anchor_index;
      item.positive_fallback = true;
    } else {
      item.positive_index = cands[rng.index(cands.size())];
    }
    const auto& negs = others.at(anchor.sequence_id);
    item.negative_index = negs[rng.index(negs.size())];

    item.image = anchor.image;
    item.text = anchor.text;
    item.anchor = resample(anchor.points, n_points, rng.fork());
    item.positive = resample(obs[item.positive_index].points, n_points, rng.fork());
    item.negative = resample(obs[item.negative_index].points, n_points, rng.fork());
    batch.items.push_back(std::move(item));
  }
  return batch;
}

namespace {

struct BatchForward {
  std::vector<EncoderTrace> anchor;
  std::vector<EncoderTrace> positive;
  std::vector<EncoderTrace> negative;
  EmbeddingMatrix p, p_pos, p_neg, image, text;
};

BatchForward forward_batch(const TriModalBatch& batch, const EncoderParams& params) {
  if (batch.items.empty()) throw InvalidArgumentError("empty batch");
  BatchForward fw;
  const auto b = static_cast<Eigen::Index>(batch.size());
  const Eigen::Index dim = batch.items.front().image.dim();
  if (dim != kEmbeddingDim || batch.items.front().text.dim() != kEmbeddingDim) {
    throw InvalidArgumentError("image/text embeddings must have 512 entries");
  }
  fw.p.resize(b, kEmbeddingDim);
  fw.p_pos.resize(b, kEmbeddingDim);
  fw.p_neg.resize(b, kEmbeddingDim);
  fw.image.resize(b, kEmbeddingDim);
  fw.text.resize(b, kEmbeddingDim);
  if (!params.all_finite()) throw InvalidArgumentError("encoder parameters contain NaN or Inf");
  for (Eigen::Index i = 0; i < b; ++i) {
    const TriModalItem& item = batch.items[static_cast<std::size_t>(i)];
    if (item.image.dim() != kEmbeddingDim || item.text.dim() != kEmbeddingDim) {
      throw InvalidArgumentError("image/text embeddings must have 512 entries");
    }
    fw.anchor.push_back(encode_traced_prechecked(item.anchor, params));
    fw.positive.push_back(encode_traced_prechecked(item.positive, params));
    fw.negative.push_back(encode_traced_prechecked(item.negative, params));
    fw.p.row(i) = fw.anchor.back().output.vector().transpose();
    fw.p_pos.row(i) = fw.positive.back().output.vector().transpose();
    fw.p_neg.row(i) = fw.negative.back().output.vector().transpose();
    fw.image.row(i) = item.image.vector().transpose();
    fw.text.row(i) = item.text.vector().transpose();
  }
  return fw;
}

std::uint64_t batch_signature(const BatchForward& fw, const TripletLoss& tri) {
  std::uint64_t sig = 0;
  for (std::size_t k = 0; k < fw.anchor.size(); ++k) {
    hash_mix(sig, fw.anchor[k].branch_signature());
    hash_mix(sig, fw.positive[k].branch_signature());
    hash_mix(sig, fw.negative[k].branch_signature());
  }
  for (const auto& br : tri.branches) {
    for (int v : br) hash_mix(sig, static_cast<std::uint64_t>(v));
  }
  return sig;
}

}  // namespace

TotalLoss total_loss(const TriModalBatch& batch, const EncoderParams& params,
                     const LossConfig& cfg) {
  cfg.validate();
  const BatchForward fw = forward_batch(batch, params);
  const Eigen::Index b = fw.p.rows();

  const PairLoss cc_img = cc_loss_grad(fw.p, fw.image, cfg.tau);
  const PairLoss cc_txt = cc_loss_grad(fw.p, fw.text, cfg.tau);
  const PairLoss cc_pos = cc_loss_grad(fw.p, fw.p_pos, cfg.tau);
  const TripletLoss tri = triplet_loss_grad(fw.p, fw.p_pos, fw.p_neg, cfg.epsilon);

  TotalLoss out{0.0, {}, EncoderParams::zeros(), 0.0, 0};
  out.parts = {cc_img.value, cc_txt.value, cc_pos.value, tri.value};
  out.value = cfg.gamma * (cc_img.value + cc_txt.value) + cfg.delta * (cc_pos.value + tri.value);
  out.d_tau = cfg.gamma * (cc_img.d_tau + cc_txt.d_tau) + cfg.delta * cc_pos.d_tau;

  const EmbeddingMatrix d_p =
      cfg.gamma * (cc_img.d_first + cc_txt.d_first) + cfg.delta * (cc_pos.d_first + tri.d_anchor);
  const EmbeddingMatrix d_pos = cfg.delta * (cc_pos.d_second + tri.d_positive);
  const EmbeddingMatrix d_neg = cfg.delta * tri.d_negative;

  for (Eigen::Index i = 0; i < b; ++i) {
    const auto k = static_cast<std::size_t>(i);
    encode_backward(fw.anchor[k], params, d_p.row(i).transpose(), out.grads);
    encode_backward(fw.positive[k], params, d_pos.row(i).transpose(), out.grads);
    encode_backward(fw.negative[k], params, d_neg.row(i).transpose(), out.grads);
  }
  out.branch_signature = batch_signature(fw, tri);
  return out;
}

LossProbe total_loss_probe(const TriModalBatch& batch, const EncoderParams& params,
                           const LossConfig& cfg) {
  cfg.validate();
  const BatchForward fw = forward_batch(batch, params);
  const TripletLoss tri = triplet_loss_grad(fw.p, fw.p_pos, fw.p_neg, cfg.epsilon);
  LossProbe out;
  out.value = cfg.gamma * (cc_loss_grad(fw.p, fw.image, cfg.tau).value +
                           cc_loss_grad(fw.p, fw.text, cfg.tau).value) +
              cfg.delta * (cc_loss_grad(fw.p, fw.p_pos, cfg.tau).value + tri.value);
  out.branch_signature = batch_signature(fw, tri);
  return out;
}

double total_loss_value(const TriModalBatch& batch, const EncoderParams& params,
                        const LossConfig& cfg) {
  return total_loss_probe(batch, params, cfg).value;
}

AdamW::AdamW(const TrainConfig& cfg)
    : cfg_(cfg), m_(EncoderParams::zeros()), v_(EncoderParams::zeros()) {}

void AdamW::step(EncoderParams& params, const EncoderParams& grads) {
  ++step_count_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
  auto p = params.tensors();
  const auto g = grads.tensors();
  auto m = m_.tensors();
  auto v = v_.tensors();
  for (std::size_t k = 0; k < p.size(); ++k) {
    const bool decay = p[k].name.ends_with(".weight");
    for (Eigen::Index i = 0; i < p[k].size(); ++i) {
      const double gi = g[k].data[i];
      m[k].data[i] = cfg_.beta1 * m[k].data[i] + (1.0 - cfg_.beta1) * gi;
      v[k].data[i] = cfg_.beta2 * v[k].data[i] + (1.0 - cfg_.beta2) * gi * gi;
      const double m_hat = m[k].data[i] / bc1;
      const double v_hat = v[k].data[i] / bc2;
      double& w = p[k].data[i];
      if (decay) w -= cfg_.learning_rate * cfg_.weight_decay * w;
      w -= cfg_.learning_rate * m_hat / (std::sqrt(v_hat) + cfg_.adam_eps);
    }
  }
}

double AdamW::step_scalar(double value, double grad) {
  ++scalar_count_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(scalar_count_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(scalar_count_));
  m_scalar_ = cfg_.beta1 * m_scalar_ + (1.0 - cfg_.beta1) * grad;
  v_scalar_ = cfg_.beta2 * v_scalar_ + (1.0 - cfg_.beta2) * grad * grad;
  return value - cfg_.learning_rate * (m_scalar_ / bc1) / (std::sqrt(v_scalar_ / bc2) + cfg_.adam_eps);
}

TrainResult train(const TrackletDataset& dataset, EncoderParams params,
                  const TrainConfig& train_cfg, const LossConfig& loss_cfg,
                  const EpochCallback& on_epoch) {
  train_cfg.validate();
  loss_cfg.validate();
  AdamW opt(train_cfg);
  LossConfig cfg = loss_cfg;
  double log_tau = std::log(cfg.tau);

  TrainResult result;
  for (int epoch = 0; epoch < train_cfg.epochs; ++epoch) {
    double sum = 0.0;
    for (int step = 0; step < train_cfg.steps_per_epoch; ++step) {
      const TriModalBatch batch =
          sample_batch(dataset, train_cfg.batch_size,
                       mix_seed(train_cfg.seed, static_cast<std::uint64_t>(epoch),
                                static_cast<std::uint64_t>(step)),
                       train_cfg.train_points);
      const TotalLoss loss = total_loss(batch, params, cfg);
      if (!std::isfinite(loss.value)) {
        throw DivergenceError("training diverged at epoch " + std::to_string(epoch) +
                              ", step " + std::to_string(step) + " (tau = " +
                              std::to_string(cfg.tau) + ")");
      }
      sum += loss.value;
      opt.step(params, loss.grads);
      if (train_cfg.learn_tau) {
        // dL/dlog(tau) = tau * dL/dtau
        log_tau = opt.step_scalar(log_tau, cfg.tau * loss.d_tau);
        cfg.tau = std::exp(log_tau);
      }
    }
    const double mean = sum / train_cfg.steps_per_epoch;
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  result.params = std::move(params);
  result.tau = cfg.tau;
  return result;
}

RetrievalReport evaluate_retrieval(const TrackletDataset& dataset, const EncoderParams& params,
                                   int n_points, std::uint64_t seed) {
  const auto& obs = dataset.observations;
  if (obs.size() < 2) throw InvalidArgumentError("retrieval needs at least two observations");
  if (!params.all_finite()) throw InvalidArgumentError("encoder parameters contain NaN or Inf");
  std::vector<Embedding> utr;
  utr.reserve(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const PointPatch patch = resample(obs[i].points, n_points, mix_seed(seed, i, 0));
    utr.push_back(encode_traced_prechecked(patch, params).output);
  }
  auto same = [&](std::size_t a, std::size_t b) {
    return obs[a].sequence_id == obs[b].sequence_id && obs[a].object_id == obs[b].object_id;
  };
  RetrievalReport r;
  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0, hits = 0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = i;
    for (std::size_t j = 0; j < obs.size(); ++j) {
      if (j == i) continue;
      const double c = utr_similarity_cost(utr[i], utr[j]);
      if (c < best) {
        best = c;
        best_j = j;
      }
      if (j > i) {
        if (same(i, j)) {
          intra += c;
          ++n_intra;
        } else {
          inter += c;
          ++n_inter;
        }
      }
    }
    if (same(i, best_j)) ++hits;
  }
  r.queries = obs.size();
  r.nn_accuracy = static_cast<double>(hits) / static_cast<double>(obs.size());
  r.mean_intra_cost = n_intra ? intra / static_cast<double>(n_intra) : 0.0;
  r.mean_inter_cost = n_inter ? inter / static_cast<double>(n_inter) : 0.0;
  return r;
}

}  // namespace yoloo
