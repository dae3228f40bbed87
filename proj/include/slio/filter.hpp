#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "slio/ellipsoid.hpp"
#include "slio/manifold.hpp"
#include "slio/sensing.hpp"

namespace slio {

inline Ellipsoid ellipsoid3(const Eigen::Vector3d& center, const Eigen::Matrix3d& shape,
                            double psd_floor = kPsdFloor) {
  return Ellipsoid(center, shape, psd_floor);
}

/// Nominal filter state on R^6 x SO(3).
struct NavState {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  Rotation rotation;
  double timestamp = 0.0;

  Pose pose() const { return Pose{rotation, translation}; }
};

/// Ellipsoids bounding the error state (translation / velocity / rotation).
/// Centers are zero after every update reset.
struct StateBounds {
  Ellipsoid translation_set;
  Ellipsoid velocity_set;
  Ellipsoid rotation_set;

  StateBounds() : StateBounds(floored()) {}
  StateBounds(Ellipsoid t, Ellipsoid v, Ellipsoid r)
      : translation_set(std::move(t)), velocity_set(std::move(v)),
        rotation_set(std::move(r)) {}

  static StateBounds floored(double psd_floor = kPsdFloor) {
    const Ellipsoid unit = ellipsoid3(Eigen::Vector3d::Zero(),
                                      psd_floor * Eigen::Matrix3d::Identity(), psd_floor);
    return StateBounds(unit, unit, unit);
  }
};

/// Error bounds relative to the global map (current bounds inflated by the
/// closing bounds of every past local map).
struct ProtectionLevel {
  Ellipsoid translation_set;
  Ellipsoid velocity_set;
  Ellipsoid rotation_set;
};

/// Closing snapshot of a finished local map.
struct LocalMapRecord {
  int origin_index = 0;
  StateBounds closing_bounds;
};

struct ImuBiases {
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();
  Eigen::Vector3d gyro = Eigen::Vector3d::Zero();
};

class FilterTimingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InconsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PredictParams {
  double dt_max = 0.02;
  double psd_floor = kPsdFloor;
};

/// Advances the nominal state with the noise-free IMU model and the error
/// bounds with trace-optimal Minkowski sums of the propagated terms.
/// Throws FilterTimingError unless 0 < dt <= dt_max.
std::pair<NavState, StateBounds> predict(const NavState& state, const StateBounds& bounds,
                                         const ImuSample& imu, const ImuBiases& biases,
                                         const ImuNoiseSpec& noise, double dt,
                                         const Eigen::Vector3d& gravity,
                                         const PredictParams& params = {});

/// Translation observation cached from the last accepted update, used by the
/// finite-difference velocity observation.
struct CachedTranslationObs {
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Eigen::Matrix3d shape_world = Eigen::Matrix3d::Zero();
  double timestamp = 0.0;
};

enum class DisjointPolicy {
  /// Keep the predicted component, log nothing fatal.
  skip_component,
  /// Abort the update with InconsistencyError.
  strict,
};

struct UpdateParams {
  DisjointPolicy policy = DisjointPolicy::skip_component;
  IntersectParams intersect;
  double psd_floor = kPsdFloor;
};

struct UpdateOutcome {
  NavState state;
  StateBounds bounds;
  /// World-frame translation observation of this update, to cache for the
  /// next velocity observation.
  CachedTranslationObs observation;
  bool translation_updated = false;
  bool velocity_updated = false;
  bool rotation_updated = false;
};

/// Fuses a gated-in ICP pose (with increment bound shape_xi, ordered
/// [rho; phi]) into the predicted state: intersects observed and predicted
/// error sets per component, folds the fused centers into the nominal state,
/// and resets all error-set centers to zero. The velocity observation
/// differences this translation observation against `previous` over `dt`;
/// when `previous` is absent the velocity set is left untouched.
UpdateOutcome update(const NavState& predicted_state, const StateBounds& predicted_bounds,
                     const Pose& icp_pose, const Eigen::Matrix<double, 6, 6>& shape_xi,
                     const std::optional<CachedTranslationObs>& previous, double dt,
                     const UpdateParams& params = {});

/// Global protection level: each component is the Minkowski sum of the
/// current bound with the combined closing bounds of all past local maps.
ProtectionLevel propagate_global(const StateBounds& bounds,
                                 std::span<const LocalMapRecord> history);

/// When the position has moved more than `radius` from the local-map origin,
/// snapshots the running bounds as the closing record and resets them to the
/// floor; the caller starts a new local map at the current position.
std::optional<LocalMapRecord> maybe_close_local_map(const Eigen::Vector3d& position,
                                                    const Eigen::Vector3d& local_origin,
                                                    StateBounds& bounds, int next_index,
                                                    double radius,
                                                    double psd_floor = kPsdFloor);

/// Error bounds immediately after static initialization: translation and
/// velocity anchor the odometry frame (floor), the rotation bound covers the
/// worst-case tilt of the gravity alignment under the accelerometer noise
/// and bias-residual bounds.
StateBounds initial_state_bounds(const ImuNoiseSpec& noise, double gravity_magnitude,
                                 double psd_floor = kPsdFloor);

}  // namespace slio
