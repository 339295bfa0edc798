#pragma once

#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "yoloo/geom.hpp"
#include "yoloo/lgpenc.hpp"

namespace yoloo {

/// Cost assigned to gated-out entries.
inline constexpr double kInfeasibleCost = 1e9;
inline constexpr double kDefaultMaxCost = 1.5;

/// How pairwise costs and the feasibility gate are formed.
enum class AssociationMode {
  kUtrFgc,    // cost = UTR cost + F-GAM, gate F-GAM <= 1
  kUtrOnly,   // cost = UTR cost, no gate
  kUtrCgc,    // cost = UTR cost, gate BEV IoU > 0
  kGeomOnly,  // cost = 1 - BEV IoU, gate BEV IoU > 0
};

std::string_view to_string(AssociationMode mode);
AssociationMode association_mode_from_string(std::string_view name);

/// Rows are trajectories, columns are detections.
struct CostMatrix {
  Eigen::MatrixXd entries;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> feasible;

  CostMatrix() = default;
  CostMatrix(Eigen::Index rows, Eigen::Index cols);
  /// Fully feasible matrix over the given costs.
  static CostMatrix dense(const Eigen::MatrixXd& costs);

  Eigen::Index rows() const noexcept { return entries.rows(); }
  Eigen::Index cols() const noexcept { return entries.cols(); }
  void gate(Eigen::Index r, Eigen::Index c);
};

struct Assignment {
  std::vector<std::pair<int, int>> matches;  // (track, detection)
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_dets;

  double total_cost(const CostMatrix& c) const;
};

/// Entry (j, i) = utr_similarity_cost + fgam(det_i, pred_j), gated by
/// is_compatible on the F-GAM part.
CostMatrix build_cost_matrix(std::span<const Embedding> track_embeds,
                             std::span<const Embedding> det_embeds,
                             std::span<const Box3D> predicted_boxes,
                             std::span<const Box3D> det_boxes);

CostMatrix build_cost_matrix(std::span<const Embedding> track_embeds,
                             std::span<const Embedding> det_embeds,
                             std::span<const Box3D> predicted_boxes,
                             std::span<const Box3D> det_boxes, AssociationMode mode);

/// Repeatedly takes the globally cheapest feasible entry whose row and column
/// are both free and whose cost is <= max_cost. Ties go to the lower row,
/// then the lower column.
Assignment greedy_assign(const CostMatrix& c, double max_cost = kDefaultMaxCost);

/// Minimum-cost assignment. Among assignments of maximal feasible size it
/// returns one with the smallest total cost; gated entries are never used.
Assignment hungarian_assign(const CostMatrix& c);

}  // namespace yoloo
