#include "yoloo/kalman.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "yoloo/errors.hpp"

namespace yoloo {

namespace {

constexpr double kMinDim = 1e-3;

using MeasMatrix = Eigen::Matrix<double, kMeasDim, kStateDim>;

MeasMatrix measurement_matrix() {
  MeasMatrix h = MeasMatrix::Zero();
  h.leftCols<kMeasDim>().setIdentity();
  return h;
}

void symmetrize(StateMatrix& m) { m = 0.5 * (m + m.transpose()).eval(); }

}  // namespace

void KFConfig::validate() const {
  if (!(process_noise_scale > 0.0) || !(measurement_noise_scale > 0.0) ||
      !(initial_velocity_cov > 0.0) || !(initial_state_cov > 0.0)) {
    throw InvalidArgumentError("kalman config values must all be > 0");
  }
}

Box3D KFState::box() const {
  return Box3D(mean(0), mean(1), mean(2), std::max(mean(4), kMinDim),
               std::max(mean(5), kMinDim), std::max(mean(6), kMinDim), mean(3));
}

StateMatrix transition_matrix() {
  StateMatrix f = StateMatrix::Identity();
  f(0, 7) = 1.0;
  f(1, 8) = 1.0;
  f(2, 9) = 1.0;
  return f;
}

StateMatrix process_noise(const KFConfig& cfg) {
  StateMatrix q = StateMatrix::Identity();
  q.bottomRightCorner<3, 3>() *= cfg.process_noise_scale;
  return q;
}

KFState kf_init(const Box3D& det, const KFConfig& cfg) {
  require_valid(det);
  KFState s;
  s.mean << det.x, det.y, det.z, det.yaw, det.l, det.w, det.h, 0.0, 0.0, 0.0;
  s.cov = StateMatrix::Identity() * cfg.initial_state_cov;
  s.cov.bottomRightCorner<3, 3>() =
      Eigen::Matrix3d::Identity() * cfg.initial_velocity_cov;
  return s;
}

KFState kf_predict(const KFState& s, const KFConfig& cfg) {
  static const StateMatrix f = transition_matrix();
  KFState out;
  out.mean = f * s.mean;
  out.mean(3) = normalize_angle(out.mean(3));
  out.cov = f * s.cov * f.transpose() + process_noise(cfg);
  symmetrize(out.cov);
  return out;
}

KFState kf_update(const KFState& s, const Box3D& z, const KFConfig& cfg) {
  if (!std::isfinite(z.x) || !std::isfinite(z.y) || !std::isfinite(z.z) ||
      !std::isfinite(z.yaw) || !std::isfinite(z.l) || !std::isfinite(z.w) ||
      !std::isfinite(z.h)) {
    throw InvalidArgumentError("kalman update: non-finite measurement");
  }
  static const MeasMatrix h = measurement_matrix();

  MeasVector meas;
  meas << z.x, z.y, z.z, z.yaw, z.l, z.w, z.h;

  MeasVector innovation = meas - h * s.mean;
  double dyaw = normalize_angle(innovation(3));
  if (std::abs(dyaw) > 0.5 * kPi) dyaw = normalize_angle(dyaw + kPi);
  innovation(3) = dyaw;

  const Eigen::Matrix<double, kMeasDim, kMeasDim> r =
      Eigen::Matrix<double, kMeasDim, kMeasDim>::Identity() *
      cfg.measurement_noise_scale;
  const Eigen::Matrix<double, kMeasDim, kMeasDim> innov_cov =
      h * s.cov * h.transpose() + r;
  // K = P H^T S^-1, solved through the Cholesky factor of S.
  const Eigen::Matrix<double, kStateDim, kMeasDim> gain =
      innov_cov.llt().solve(h * s.cov).transpose();

  KFState out;
  out.mean = s.mean + gain * innovation;
  out.mean(3) = normalize_angle(out.mean(3));

  // Joseph form keeps the covariance symmetric positive semidefinite.
  const StateMatrix i_kh = StateMatrix::Identity() - gain * h;
  out.cov = i_kh * s.cov * i_kh.transpose() + gain * r * gain.transpose();
  symmetrize(out.cov);
  return out;
}

}  // namespace yoloo
