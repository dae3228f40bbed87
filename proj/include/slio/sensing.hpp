#pragma once

#include <Eigen/Core>
#include <span>
#include <stdexcept>
#include <vector>

#include "slio/ellipsoid.hpp"
#include "slio/manifold.hpp"

namespace slio {

/// One LiDAR return: range along a unit bearing in the LiDAR frame.
struct PointMeasurement {
  double range = 0.0;
  Eigen::Vector3d bearing = Eigen::Vector3d::UnitX();
  double timestamp = 0.0;
};

/// Hard bounds on per-return noise: |n_d| <= range_bound (meters),
/// |n_phi| <= bearing_bound (radians, tangent-plane perturbation).
struct LidarNoiseSpec {
  double range_bound = 0.08;
  double bearing_bound = 0.1 * std::numbers::pi / 180.0;
};

struct ImuSample {
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();  // m/s^2
  Eigen::Vector3d gyro = Eigen::Vector3d::Zero();   // rad/s
  double timestamp = 0.0;
};

/// Hard per-axis bounds on IMU noise plus shape matrices bounding the
/// residual error of the calibrated biases.
struct ImuNoiseSpec {
  double accel_bound = 0.2;  // m/s^2
  double gyro_bound = 0.07;  // rad/s
  Eigen::Matrix3d accel_bias_shape = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d gyro_bias_shape = Eigen::Matrix3d::Identity();

  Eigen::Matrix3d accel_noise_shape() const {
    return 3.0 * accel_bound * accel_bound * Eigen::Matrix3d::Identity();
  }
  Eigen::Matrix3d gyro_noise_shape() const {
    return 3.0 * gyro_bound * gyro_bound * Eigen::Matrix3d::Identity();
  }

  /// Bias residual shapes defaulted to diag(3 (scale * bound)^2); the
  /// calibration residual is assumed a fraction of the raw noise bound.
  static ImuNoiseSpec with_default_bias_shapes(double accel_bound, double gyro_bound,
                                               double bias_scale = 0.1);
};

/// LiDAR-to-IMU rigid transform, treated as exactly known.
struct Extrinsics {
  Rotation rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

struct Scan {
  double timestamp = 0.0;
  std::vector<PointMeasurement> points;
};

/// A measured point expressed in the IMU frame together with the shape
/// matrix of the ellipsoid guaranteed to contain the true point's deviation.
struct BoundedPoint {
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  Eigen::Matrix3d shape = Eigen::Matrix3d::Zero();
};

/// Maps the range/bearing noise box through the linearized point model:
/// A = [bearing, -range * bearing^ * N(bearing)], shape = R_IL A P A^T R_IL^T
/// with P = diag(3 b_r^2, 3 b_phi^2, 3 b_phi^2), floored.
BoundedPoint point_noise_ellipsoid(const PointMeasurement& m, const LidarNoiseSpec& spec,
                                   const Extrinsics& ext);

class InitializationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StaticInitParams {
  int min_samples = 200;
  /// Per-axis RMS accelerometer deviation above which the window is
  /// rejected as containing motion.
  double max_accel_std = 0.3;
};

struct StaticInitResult {
  Eigen::Vector3d accel_bias = Eigen::Vector3d::Zero();
  Eigen::Vector3d gyro_bias = Eigen::Vector3d::Zero();
  Eigen::Vector3d gravity_world = Eigen::Vector3d::Zero();
  Rotation initial_rotation;
  int sample_count = 0;
  double accel_std = 0.0;
};

/// Estimates IMU biases and the initial attitude from a stationary window:
/// gyro bias is the mean rate, the mean specific force is aligned with -g
/// to fix roll/pitch, and the accel bias is the residual after gravity
/// removal. Throws InitializationError on short or non-still windows.
StaticInitResult static_initialize(std::span<const ImuSample> samples,
                                   double gravity_magnitude,
                                   const StaticInitParams& params = {});

}  // namespace slio
