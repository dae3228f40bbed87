#include "slio/filter.hpp"

#include <Eigen/Dense>
#include <array>
#include <cmath>

namespace slio {

namespace {

Ellipsoid outer_sum(std::span<const Ellipsoid> operands) {
  return minkowski_sum_outer(operands);
}

}  // namespace

std::pair<NavState, StateBounds> predict(const NavState& state, const StateBounds& bounds,
                                         const ImuSample& imu, const ImuBiases& biases,
                                         const ImuNoiseSpec& noise, double dt,
                                         const Eigen::Vector3d& gravity,
                                         const PredictParams& params) {
  if (!(dt > 0.0) || dt > params.dt_max) {
    throw FilterTimingError("prediction step dt = " + std::to_string(dt) +
                            " outside (0, " + std::to_string(params.dt_max) + "]");
  }

  const Eigen::Vector3d accel = imu.accel - biases.accel;
  const Eigen::Vector3d rate = imu.gyro - biases.gyro;
  const Eigen::Matrix3d r = state.rotation.matrix();
  const Eigen::Vector3d accel_world = r * accel + gravity;

  NavState next;
  next.translation = state.translation + state.velocity * dt + 0.5 * accel_world * dt * dt;
  next.velocity = state.velocity + accel_world * dt;
  next.rotation = (state.rotation * so3_exp(rate * dt)).orthonormalized();
  next.timestamp = state.timestamp + dt;

  const Eigen::Matrix3d c = -r * skew(accel) * dt;
  const Eigen::Matrix3d d = -r * dt;
  const Eigen::Matrix3d e = so3_exp(-rate * dt).matrix();
  const double dt2 = dt * dt;
  const double floor = params.psd_floor;

  // The translation error integrates the acceleration error directly over
  // half a step; without these second-order terms the bound is violated
  // whenever it sits near the floor (first steps, local-map resets).
  const double half_dt2 = 0.5 * dt2;
  const Eigen::Matrix3d c_t = half_dt2 / dt * c;  // -R (a - b)^ * dt^2 / 2
  const Eigen::Matrix3d d_t = half_dt2 / dt * d;
  const std::array<Ellipsoid, 5> t_terms{
      bounds.translation_set,
      ellipsoid3(Eigen::Vector3d::Zero(), dt2 * bounds.velocity_set.shape(), floor),
      ellipsoid3(Eigen::Vector3d::Zero(),
                 c_t * bounds.rotation_set.shape() * c_t.transpose(), floor),
      ellipsoid3(Eigen::Vector3d::Zero(), d_t * noise.accel_bias_shape * d_t.transpose(),
                 floor),
      ellipsoid3(Eigen::Vector3d::Zero(), half_dt2 * half_dt2 * noise.accel_noise_shape(),
                 floor)};
  const std::array<Ellipsoid, 4> v_terms{
      bounds.velocity_set,
      ellipsoid3(Eigen::Vector3d::Zero(),
                 c * bounds.rotation_set.shape() * c.transpose(), floor),
      ellipsoid3(Eigen::Vector3d::Zero(), d * noise.accel_bias_shape * d.transpose(),
                 floor),
      ellipsoid3(Eigen::Vector3d::Zero(), dt2 * noise.accel_noise_shape(), floor)};
  const std::array<Ellipsoid, 3> r_terms{
      ellipsoid3(Eigen::Vector3d::Zero(),
                 e * bounds.rotation_set.shape() * e.transpose(), floor),
      ellipsoid3(Eigen::Vector3d::Zero(), dt2 * noise.gyro_bias_shape, floor),
      ellipsoid3(Eigen::Vector3d::Zero(), dt2 * noise.gyro_noise_shape(), floor)};

  StateBounds next_bounds(outer_sum(t_terms), outer_sum(v_terms), outer_sum(r_terms));
  return {next, next_bounds};
}

UpdateOutcome update(const NavState& predicted_state, const StateBounds& predicted_bounds,
                     const Pose& icp_pose, const Eigen::Matrix<double, 6, 6>& shape_xi,
                     const std::optional<CachedTranslationObs>& previous, double dt,
                     const UpdateParams& params) {
  const Eigen::Matrix3d r_star = icp_pose.rotation.matrix();

  // Body-frame rho-block of the increment bound mapped to world coordinates.
  const Eigen::Matrix3d q_t_world =
      r_star * shape_xi.topLeftCorner<3, 3>() * r_star.transpose();
  const Eigen::Matrix3d q_r = shape_xi.bottomRightCorner<3, 3>();

  UpdateOutcome out;
  out.observation = CachedTranslationObs{icp_pose.translation, q_t_world,
                                         predicted_state.timestamp};

  Eigen::Vector3d dt_center = Eigen::Vector3d::Zero();
  Eigen::Vector3d dv_center = Eigen::Vector3d::Zero();
  Eigen::Vector3d dr_center = Eigen::Vector3d::Zero();
  Ellipsoid t_set = predicted_bounds.translation_set;
  Ellipsoid v_set = predicted_bounds.velocity_set;
  Ellipsoid r_set = predicted_bounds.rotation_set;

  const auto fuse = [&](const Ellipsoid& predicted, const Ellipsoid& observed,
                        const char* component) -> std::optional<Ellipsoid> {
    try {
      return intersect_outer(predicted, observed, params.intersect);
    } catch (const DisjointSetsError& err) {
      if (params.policy == DisjointPolicy::strict) {
        throw InconsistencyError(std::string(component) +
                                 " observation is inconsistent with the prediction: " +
                                 err.what());
      }
      return std::nullopt;
    }
  };

  // Translation: observed error set centered at the ICP/prediction gap.
  const Ellipsoid t_obs = ellipsoid3(icp_pose.translation - predicted_state.translation,
                                     q_t_world, params.psd_floor);
  if (const auto fused = fuse(predicted_bounds.translation_set, t_obs, "translation")) {
    dt_center = fused->center();
    t_set = *fused;
    out.translation_updated = true;
  }

  // Velocity: finite-difference observation against the previous accepted
  // translation observation, scaled by 1/dt.
  if (previous.has_value()) {
    if (!(dt > 0.0)) {
      throw FilterTimingError("velocity observation dt = " + std::to_string(dt) +
                              " must be positive");
    }
    const std::array<Ellipsoid, 2> diff_terms{
        ellipsoid3(icp_pose.translation, q_t_world, params.psd_floor),
        ellipsoid3(-previous->translation, previous->shape_world, params.psd_floor)};
    const Ellipsoid diff = outer_sum(diff_terms);
    const Ellipsoid v_obs =
        ellipsoid3(diff.center() / dt - predicted_state.velocity,
                   diff.shape() / (dt * dt), params.psd_floor);
    if (const auto fused = fuse(predicted_bounds.velocity_set, v_obs, "velocity")) {
      dv_center = fused->center();
      v_set = *fused;
      out.velocity_updated = true;
    }
  }

  // Rotation: observed error center from the relative rotation, shape mapped
  // through the inverse right Jacobian at that center.
  try {
    const Eigen::Vector3d phi_err =
        so3_log(predicted_state.rotation.inverse() * icp_pose.rotation);
    const Eigen::Matrix3d j_inv = so3_right_jacobian_inv(phi_err);
    const Ellipsoid r_obs =
        ellipsoid3(phi_err, j_inv * q_r * j_inv.transpose(), params.psd_floor);
    if (const auto fused = fuse(predicted_bounds.rotation_set, r_obs, "rotation")) {
      dr_center = fused->center();
      r_set = *fused;
      out.rotation_updated = true;
    }
  } catch (const std::domain_error& err) {
    if (params.policy == DisjointPolicy::strict) {
      throw InconsistencyError(std::string("rotation observation unusable: ") +
                               err.what());
    }
  }

  // Fold fused centers into the nominal state, then reset centers to zero.
  out.state = predicted_state;
  out.state.translation += dt_center;
  out.state.velocity += dv_center;
  out.state.rotation = (predicted_state.rotation * so3_exp(dr_center)).orthonormalized();
  out.bounds = StateBounds(
      ellipsoid3(Eigen::Vector3d::Zero(), t_set.shape(), params.psd_floor),
      ellipsoid3(Eigen::Vector3d::Zero(), v_set.shape(), params.psd_floor),
      ellipsoid3(Eigen::Vector3d::Zero(), r_set.shape(), params.psd_floor));
  return out;
}

ProtectionLevel propagate_global(const StateBounds& bounds,
                                 std::span<const LocalMapRecord> history) {
  if (history.empty()) {
    return ProtectionLevel{bounds.translation_set, bounds.velocity_set,
                           bounds.rotation_set};
  }

  const auto combine = [&](const Ellipsoid& current,
                           auto&& component) -> Ellipsoid {
    std::vector<Ellipsoid> closing;
    closing.reserve(history.size());
    for (const LocalMapRecord& rec : history) {
      closing.push_back(component(rec.closing_bounds));
    }
    const std::array<Ellipsoid, 2> terms{current, minkowski_sum_outer(closing)};
    return minkowski_sum_outer(terms);
  };

  return ProtectionLevel{
      combine(bounds.translation_set,
              [](const StateBounds& b) { return b.translation_set; }),
      combine(bounds.velocity_set, [](const StateBounds& b) { return b.velocity_set; }),
      combine(bounds.rotation_set, [](const StateBounds& b) { return b.rotation_set; })};
}

std::optional<LocalMapRecord> maybe_close_local_map(const Eigen::Vector3d& position,
                                                    const Eigen::Vector3d& local_origin,
                                                    StateBounds& bounds, int next_index,
                                                    double radius, double psd_floor) {
  if ((position - local_origin).norm() <= radius) {
    return std::nullopt;
  }
  LocalMapRecord record{next_index, bounds};
  bounds = StateBounds::floored(psd_floor);
  return record;
}

StateBounds initial_state_bounds(const ImuNoiseSpec& noise, double gravity_magnitude,
                                 double psd_floor) {
  // Worst-case gravity-alignment tilt: mean accel noise plus the bias
  // residual, divided by gravity. The disc orientation is unknown, so the
  // bound is isotropic.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(noise.accel_bias_shape);
  const double bias_radius = std::sqrt(std::max(0.0, eig.eigenvalues().maxCoeff()));
  const double tilt = (noise.accel_bound + bias_radius) / gravity_magnitude;

  const Ellipsoid anchor = ellipsoid3(Eigen::Vector3d::Zero(),
                                      psd_floor * Eigen::Matrix3d::Identity(), psd_floor);
  const Ellipsoid attitude = ellipsoid3(Eigen::Vector3d::Zero(),
                                        tilt * tilt * Eigen::Matrix3d::Identity(),
                                        psd_floor);
  return StateBounds(anchor, anchor, attitude);
}

}  // namespace slio
