#include "slio/sensing.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

namespace slio {

ImuNoiseSpec ImuNoiseSpec::with_default_bias_shapes(double accel_bound, double gyro_bound,
                                                    double bias_scale) {
  ImuNoiseSpec spec;
  spec.accel_bound = accel_bound;
  spec.gyro_bound = gyro_bound;
  const double ba = bias_scale * accel_bound;
  const double bg = bias_scale * gyro_bound;
  spec.accel_bias_shape = 3.0 * ba * ba * Eigen::Matrix3d::Identity();
  spec.gyro_bias_shape = 3.0 * bg * bg * Eigen::Matrix3d::Identity();
  return spec;
}

BoundedPoint point_noise_ellipsoid(const PointMeasurement& m, const LidarNoiseSpec& spec,
                                   const Extrinsics& ext) {
  if (m.range <= 0.0) {
    throw std::invalid_argument("point range must be positive, got " +
                                std::to_string(m.range));
  }
  if (std::abs(m.bearing.norm() - 1.0) > 1e-6) {
    throw std::invalid_argument("point bearing must be a unit vector, |b| = " +
                                std::to_string(m.bearing.norm()));
  }
  if (spec.range_bound <= 0.0 || spec.bearing_bound <= 0.0) {
    throw std::invalid_argument("lidar noise bounds must be positive");
  }

  Eigen::Matrix3d a;
  a.col(0) = m.bearing;
  a.rightCols<2>() = -m.range * skew(m.bearing) * tangent_basis_s2(m.bearing);

  const double br2 = 3.0 * spec.range_bound * spec.range_bound;
  const double bp2 = 3.0 * spec.bearing_bound * spec.bearing_bound;
  const Eigen::Matrix3d noise_box = Eigen::Vector3d(br2, bp2, bp2).asDiagonal();

  const Eigen::Matrix3d& r = ext.rotation.matrix();
  BoundedPoint out;
  out.point = r * (m.range * m.bearing) + ext.translation;
  out.shape = floor_psd(r * (a * noise_box * a.transpose()) * r.transpose());
  return out;
}

StaticInitResult static_initialize(std::span<const ImuSample> samples,
                                   double gravity_magnitude,
                                   const StaticInitParams& params) {
  if (static_cast<int>(samples.size()) < params.min_samples) {
    throw InitializationError("static initialization needs at least " +
                              std::to_string(params.min_samples) + " samples, got " +
                              std::to_string(samples.size()));
  }

  Eigen::Vector3d mean_accel = Eigen::Vector3d::Zero();
  Eigen::Vector3d mean_gyro = Eigen::Vector3d::Zero();
  for (const ImuSample& s : samples) {
    mean_accel += s.accel;
    mean_gyro += s.gyro;
  }
  const double inv_n = 1.0 / static_cast<double>(samples.size());
  mean_accel *= inv_n;
  mean_gyro *= inv_n;

  double accel_var = 0.0;
  for (const ImuSample& s : samples) {
    accel_var += (s.accel - mean_accel).squaredNorm();
  }
  accel_var *= inv_n / 3.0;
  const double accel_std = std::sqrt(accel_var);
  if (accel_std > params.max_accel_std) {
    throw InitializationError("motion detected during static window: accel std " +
                              std::to_string(accel_std) + " exceeds " +
                              std::to_string(params.max_accel_std));
  }

  StaticInitResult result;
  result.sample_count = static_cast<int>(samples.size());
  result.accel_std = accel_std;
  result.gyro_bias = mean_gyro;
  result.gravity_world = Eigen::Vector3d(0.0, 0.0, -gravity_magnitude);

  // Minimal rotation taking the mean specific force onto +z (i.e. -gravity).
  const Eigen::Vector3d up_body = mean_accel.normalized();
  const Eigen::Vector3d up_world = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d axis = up_body.cross(up_world);
  const double sin_angle = axis.norm();
  const double cos_angle = up_body.dot(up_world);
  if (sin_angle < 1e-12) {
    result.initial_rotation =
        cos_angle > 0.0 ? Rotation::identity()
                        : so3_exp(std::numbers::pi * Eigen::Vector3d::UnitX());
  } else {
    const double angle = std::atan2(sin_angle, cos_angle);
    result.initial_rotation = so3_exp((angle / sin_angle) * axis);
  }

  result.accel_bias =
      mean_accel - result.initial_rotation.inverse() *
                       Eigen::Vector3d(0.0, 0.0, gravity_magnitude);
  return result;
}

}  // namespace slio
