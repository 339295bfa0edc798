#include "yoloo/assoc.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <tuple>

#include "yoloo/errors.hpp"

namespace yoloo {

namespace {

Assignment collect(const CostMatrix& c, const std::vector<int>& row_to_col) {
  Assignment out;
  std::vector<bool> col_used(static_cast<std::size_t>(c.cols()), false);
  for (Eigen::Index r = 0; r < c.rows(); ++r) {
    const int col = row_to_col[static_cast<std::size_t>(r)];
    if (col >= 0) {
      out.matches.emplace_back(static_cast<int>(r), col);
      col_used[static_cast<std::size_t>(col)] = true;
    } else {
      out.unmatched_tracks.push_back(static_cast<int>(r));
    }
  }
  for (Eigen::Index k = 0; k < c.cols(); ++k) {
    if (!col_used[static_cast<std::size_t>(k)]) out.unmatched_dets.push_back(static_cast<int>(k));
  }
  return out;
}

}  // namespace

std::string_view to_string(AssociationMode mode) {
  switch (mode) {
    case AssociationMode::kUtrFgc: return "utr+fgc";
    case AssociationMode::kUtrOnly: return "utr";
    case AssociationMode::kUtrCgc: return "utr+cgc";
    case AssociationMode::kGeomOnly: return "geom-only";
  }
  return "unknown";
}

AssociationMode association_mode_from_string(std::string_view name) {
  for (auto m : {AssociationMode::kUtrFgc, AssociationMode::kUtrOnly,
                 AssociationMode::kUtrCgc, AssociationMode::kGeomOnly}) {
    if (to_string(m) == name) return m;
  }
  throw InvalidArgumentError("unknown association mode '" + std::string(name) +
                             "' (expected utr, utr+fgc, utr+cgc or geom-only)");
}

CostMatrix::CostMatrix(Eigen::Index rows, Eigen::Index cols)
    : entries(Eigen::MatrixXd::Zero(rows, cols)),
      feasible(Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(rows, cols, true)) {}

CostMatrix CostMatrix::dense(const Eigen::MatrixXd& costs) {
  CostMatrix c(costs.rows(), costs.cols());
  c.entries = costs;
  return c;
}

void CostMatrix::gate(Eigen::Index r, Eigen::Index c) {
  feasible(r, c) = false;
  entries(r, c) = kInfeasibleCost;
}

double Assignment::total_cost(const CostMatrix& c) const {
  double sum = 0.0;
  for (const auto& [r, k] : matches) sum += c.entries(r, k);
  return sum;
}

CostMatrix build_cost_matrix(std::span<const Embedding> track_embeds,
                             std::span<const Embedding> det_embeds,
                             std::span<const Box3D> predicted_boxes,
                             std::span<const Box3D> det_boxes) {
  return build_cost_matrix(track_embeds, det_embeds, predicted_boxes, det_boxes,
                           AssociationMode::kUtrFgc);
}

CostMatrix build_cost_matrix(std::span<const Embedding> track_embeds,
                             std::span<const Embedding> det_embeds,
                             std::span<const Box3D> predicted_boxes,
                             std::span<const Box3D> det_boxes, AssociationMode mode) {
  // Geometry-only costs ignore embeddings, so those lists may be empty.
  const bool needs_utr = mode != AssociationMode::kGeomOnly;
  if (needs_utr && (track_embeds.size() != predicted_boxes.size() ||
                    det_embeds.size() != det_boxes.size())) {
    throw InvalidArgumentError("cost matrix: " + std::to_string(track_embeds.size()) +
                               " track embeddings for " + std::to_string(predicted_boxes.size()) +
                               " boxes, " + std::to_string(det_embeds.size()) +
                               " detection embeddings for " + std::to_string(det_boxes.size()) +
                               " boxes");
  }
  const auto rows = static_cast<Eigen::Index>(predicted_boxes.size());
  const auto cols = static_cast<Eigen::Index>(det_boxes.size());
  CostMatrix c(rows, cols);
  for (Eigen::Index j = 0; j < rows; ++j) {
    const Box3D& pred = predicted_boxes[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < cols; ++i) {
      const Box3D& det = det_boxes[static_cast<std::size_t>(i)];
      double cost = 0.0;
      bool ok = true;
      switch (mode) {
        case AssociationMode::kUtrFgc: {
          const GeomCost g = fgam(det, pred);
          ok = is_compatible(g);
          cost = utr_similarity_cost(track_embeds[static_cast<std::size_t>(j)],
                                     det_embeds[static_cast<std::size_t>(i)]) + g.value;
          break;
        }
        case AssociationMode::kUtrOnly:
          cost = utr_similarity_cost(track_embeds[static_cast<std::size_t>(j)],
                                     det_embeds[static_cast<std::size_t>(i)]);
          break;
        case AssociationMode::kUtrCgc:
          ok = bev_iou(det, pred) > 0.0;
          cost = utr_similarity_cost(track_embeds[static_cast<std::size_t>(j)],
                                     det_embeds[static_cast<std::size_t>(i)]);
          break;
        case AssociationMode::kGeomOnly: {
          const double iou = bev_iou(det, pred);
          ok = iou > 0.0;
          cost = 1.0 - iou;
          break;
        }
      }
      if (ok) {
        c.entries(j, i) = cost;
      } else {
        c.gate(j, i);
      }
    }
  }
  return c;
}

Assignment greedy_assign(const CostMatrix& c, double max_cost) {
  struct Entry {
    double cost;
    int row;
    int col;
  };
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(c.rows() * c.cols()));
  for (Eigen::Index r = 0; r < c.rows(); ++r) {
    for (Eigen::Index k = 0; k < c.cols(); ++k) {
      if (c.feasible(r, k) && c.entries(r, k) <= max_cost) {
        entries.push_back({c.entries(r, k), static_cast<int>(r), static_cast<int>(k)});
      }
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.cost, a.row, a.col) < std::tie(b.cost, b.row, b.col);
  });
  std::vector<int> row_to_col(static_cast<std::size_t>(c.rows()), -1);
  std::vector<bool> col_used(static_cast<std::size_t>(c.cols()), false);
  for (const Entry& e : entries) {
    auto& slot = row_to_col[static_cast<std::size_t>(e.row)];
    if (slot >= 0 || col_used[static_cast<std::size_t>(e.col)]) continue;
    slot = e.col;
    col_used[static_cast<std::size_t>(e.col)] = true;
  }
  return collect(c, row_to_col);
}

Assignment hungarian_assign(const CostMatrix& c) {
  const auto rows = static_cast<int>(c.rows());
  const auto cols = static_cast<int>(c.cols());
  const int n = std::max(rows, cols);
  std::vector<int> row_to_col(static_cast<std::size_t>(rows), -1);
  if (rows == 0 || cols == 0) return collect(c, row_to_col);

  // Square padding; padded and gated cells share the infeasible cost so the
  // solver prefers any feasible pairing over leaving a row unmatched.
  auto cost = [&](int r, int k) {
    if (r >= rows || k >= cols || !c.feasible(r, k)) return kInfeasibleCost;
    return c.entries(r, k);
  };

  // Shortest augmenting path with potentials, 1-based, O(n^3).
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const auto sz = static_cast<std::size_t>(n + 1);
  std::vector<double> u(sz, 0.0), v(sz, 0.0);
  std::vector<int> match_of_col(sz, 0), way(sz, 0);
  for (int r = 1; r <= n; ++r) {
    match_of_col[0] = r;
    int col0 = 0;
    std::vector<double> min_slack(sz, kInf);
    std::vector<bool> used(sz, false);
    do {
      used[static_cast<std::size_t>(col0)] = true;
      const int r0 = match_of_col[static_cast<std::size_t>(col0)];
      double delta = kInf;
      int col1 = 0;
      for (int k = 1; k <= n; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        if (used[ks]) continue;
        const double cur = cost(r0 - 1, k - 1) - u[static_cast<std::size_t>(r0)] - v[ks];
        if (cur < min_slack[ks]) {
          min_slack[ks] = cur;
          way[ks] = col0;
        }
        if (min_slack[ks] < delta) {
          delta = min_slack[ks];
          col1 = k;
        }
      }
      for (int k = 0; k <= n; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        if (used[ks]) {
          u[static_cast<std::size_t>(match_of_col[ks])] += delta;
          v[ks] -= delta;
        } else {
          min_slack[ks] -= delta;
        }
      }
      col0 = col1;
    } while (match_of_col[static_cast<std::size_t>(col0)] != 0);
    do {
      const int col1 = way[static_cast<std::size_t>(col0)];
      match_of_col[static_cast<std::size_t>(col0)] = match_of_col[static_cast<std::size_t>(col1)];
      col0 = col1;
    } while (col0 != 0);
  }
  for (int k = 1; k <= n; ++k) {
    const int r = match_of_col[static_cast<std::size_t>(k)] - 1;
    const int col = k - 1;
    if (r < rows && col < cols && c.feasible(r, col)) row_to_col[static_cast<std::size_t>(r)] = col;
  }
  return collect(c, row_to_col);
}

}  // namespace yoloo
