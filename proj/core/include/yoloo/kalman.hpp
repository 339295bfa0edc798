#pragma once

#include <Eigen/Core>

#include "yoloo/geom.hpp"

namespace yoloo {

/// Constant-velocity filter over (x, y, z, yaw, l, w, h, vx, vy, vz) with a
/// unit per-frame timestep. Measurements are the first seven components.
inline constexpr int kStateDim = 10;
inline constexpr int kMeasDim = 7;

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using MeasVector = Eigen::Matrix<double, kMeasDim, 1>;

struct KFConfig {
  /// Process noise on the velocity block; the remaining diagonal is 1.
  double process_noise_scale = 0.01;
  /// R = measurement_noise_scale * I.
  double measurement_noise_scale = 1.0;
  /// Prior variance of the (unobserved) velocity components.
  double initial_velocity_cov = 10000.0;
  /// Prior variance of the observed components.
  double initial_state_cov = 10.0;

  void validate() const;
  friend bool operator==(const KFConfig&, const KFConfig&) = default;
};

struct KFState {
  StateVector mean = StateVector::Zero();
  StateMatrix cov = StateMatrix::Identity();

  /// Box view of the mean. Dimensions are floored at a small positive value
  /// so a drifting estimate never yields an invalid box.
  Box3D box() const;
};

KFState kf_init(const Box3D& det, const KFConfig& cfg = {});
KFState kf_predict(const KFState& s, const KFConfig& cfg = {});
/// Standard update with orientation correction: when the measured yaw is more
/// than pi/2 away from the prior it is flipped by pi before differencing.
KFState kf_update(const KFState& s, const Box3D& z, const KFConfig& cfg = {});

StateMatrix transition_matrix();
StateMatrix process_noise(const KFConfig& cfg);

}  // namespace yoloo
