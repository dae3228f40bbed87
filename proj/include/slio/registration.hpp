#pragma once

#include <Eigen/Core>
#include <span>
#include <stdexcept>
#include <vector>

#include "slio/ellipsoid.hpp"
#include "slio/manifold.hpp"
#include "slio/mapping.hpp"
#include "slio/sensing.hpp"

namespace slio {

/// A scan point (IMU frame, with its noise shape) matched to a map plane.
struct Correspondence {
  Eigen::Vector3d point_imu = Eigen::Vector3d::Zero();
  Eigen::Matrix3d point_shape_imu = Eigen::Matrix3d::Zero();
  Eigen::Vector3d normal_world = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d anchor_world = Eigen::Vector3d::Zero();
};

struct IcpParams {
  int max_iterations = 30;
  double converge_tol = 1e-6;   // twist-norm threshold on the increment
  int min_correspondences = 10;
  double cond_max = 1e8;
  int max_step_halvings = 4;
  /// Once the increment drops below this, the correspondence set is frozen
  /// for the remaining iterations. Marginal points flip between planes under
  /// micrometre pose moves, which otherwise keeps the increment jittering
  /// above converge_tol indefinitely.
  double refresh_freeze_tol = 1e-3;
  /// Correspondences with a point-to-plane distance above this are wrong
  /// associations (typically a point on one surface matched to the plane of
  /// an adjacent one near a junction) and are dropped at matching time.
  double residual_cap = 0.4;
  PlaneQueryParams plane_query;
  int threads = 0;
};

struct IcpIterationStats {
  double cost_before = 0.0;  // at the pre-step pose, this iteration's planes
  double cost_after = 0.0;   // at the accepted pose, same planes
  int halvings = 0;
};

struct IcpResult {
  Pose pose;
  std::vector<Correspondence> correspondences;
  Twist last_increment;
  int iterations = 0;
  bool converged = false;
  double final_cost = 0.0;
  std::vector<IcpIterationStats> iteration_stats;
};

/// Shape matrix of the ellipsoid containing the final ICP increment,
/// ordered [rho; phi].
struct IcpUncertainty {
  Eigen::Matrix<double, 6, 6> shape_xi = Eigen::Matrix<double, 6, 6>::Zero();
};

class RegistrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateRegistrationError : public RegistrationError {
 public:
  using RegistrationError::RegistrationError;
};

class IllConditionedError : public RegistrationError {
 public:
  using RegistrationError::RegistrationError;
};

/// Scan-to-map point-to-plane ICP with right-perturbation Gauss-Newton
/// steps (T <- T Exp(dxi)) and per-iteration correspondence refresh.
/// Throws DegenerateRegistrationError when fewer than min_correspondences
/// planes match and IllConditionedError when the normal-equation system is
/// numerically unobservable.
IcpResult icp_point_to_plane(std::span<const BoundedPoint> points, const PointMap& map,
                             const Pose& initial, const IcpParams& params = {});

struct UncertaintyParams {
  /// Per-point compensation set for the linearization remainder,
  /// diag(3 * (1e-4)^2) on all six twist axes by default.
  Eigen::Matrix<double, 6, 6> compensation =
      3.0 * 1e-8 * Eigen::Matrix<double, 6, 6>::Identity();
  /// When set, a single compensation term is used instead of one per point.
  bool single_term = false;
  int threads = 0;
};

/// Closed-form bound on the ICP increment: maps each point's noise
/// ellipsoid through the implicit-function Jacobian of the final
/// Gauss-Newton step and combines the images (plus compensation terms)
/// with trace-optimal Minkowski sums. Requires a converged result.
IcpUncertainty resolve_icp_uncertainty(const IcpResult& result,
                                       const UncertaintyParams& params = {});

/// Accept gate: converged and final increment within gate_tol. A rejected
/// result skips both the filter update and the map insertion.
bool gate_icp(const IcpResult& result, double gate_tol);

namespace detail {

/// One Gauss-Newton increment for fixed correspondences evaluated at `pose`
/// (no refresh, no step control). Shared by the solver and by
/// finite-difference checks of the uncertainty Jacobian.
Twist gauss_newton_increment(std::span<const Correspondence> correspondences,
                             const Pose& pose, double cond_max = 1e12);

double point_to_plane_cost(std::span<const Correspondence> correspondences,
                           const Pose& pose);

/// Implicit-function Jacobians of the final increment with respect to each
/// point, evaluated at the converged pose.
std::vector<Eigen::Matrix<double, 6, 3>> implicit_point_jacobians(
    const IcpResult& result);

}  // namespace detail

}  // namespace slio
