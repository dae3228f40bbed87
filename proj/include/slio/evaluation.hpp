#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

#include "slio/manifold.hpp"

namespace slio {

/// One estimated pose with its protection-level shapes (global translation
/// shape is mandatory, rotation optional).
struct TrajectoryRecord {
  double timestamp = 0.0;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Rotation rotation;
  Eigen::Matrix3d protection_translation = Eigen::Matrix3d::Identity();
  std::optional<Eigen::Matrix3d> protection_rotation;
};

struct GroundTruthSample {
  double timestamp = 0.0;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  Rotation rotation;
};

struct AssociationResult {
  /// (estimate index, ground-truth index) pairs.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t dropped_estimates = 0;
};

/// Nearest-neighbor timestamp association within tol seconds; unmatched
/// estimate records are dropped and counted. Both inputs must be sorted by
/// timestamp.
AssociationResult associate(std::span<const double> est_times,
                            std::span<const double> gt_times, double tol);

inline constexpr double kDefaultAssociationTol = 0.010;

/// Percentage of associated timesteps where the ground-truth position lies
/// inside the reported translation protection level. Throws
/// std::invalid_argument when the association is empty.
double cover_rate(std::span<const TrajectoryRecord> estimates,
                  std::span<const GroundTruthSample> truth,
                  double assoc_tol = kDefaultAssociationTol);

enum class AilMode {
  deterministic,  // interval radius sqrt(P_ii)
  three_sigma,    // interval radius 3 sqrt(P_ii), for covariance inputs
};

/// Mean per-axis interval width implied by the protection-level diagonals.
double ail(std::span<const TrajectoryRecord> records,
           AilMode mode = AilMode::deterministic);

struct AteOptions {
  /// When set, remove a best-fit rigid transform before computing the error
  /// (off by default: odometry shares the ground-truth frame).
  bool align = false;
  double assoc_tol = kDefaultAssociationTol;
};

/// RMSE of the translation error over associated timesteps.
double ate(std::span<const TrajectoryRecord> estimates,
           std::span<const GroundTruthSample> truth, const AteOptions& options = {});

struct EndToEndReport {
  /// Norm of the loop-closure error: estimated net displacement minus the
  /// ground-truth net displacement.
  double error = 0.0;
  /// Whether the final protection level contains the loop error vector.
  bool covered = false;
};

EndToEndReport end_to_end_error(std::span<const TrajectoryRecord> estimates,
                                std::span<const GroundTruthSample> truth,
                                double assoc_tol = kDefaultAssociationTol);

}  // namespace slio
