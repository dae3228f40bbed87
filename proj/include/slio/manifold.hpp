#pragma once

#include <Eigen/Core>

namespace slio {

/// Angle below which closed-form SO(3)/SE(3) expressions switch to their
/// Taylor expansions to avoid sinc-type cancellation.
inline constexpr double kAngleEps = 1e-8;

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

/// A validated member of SO(3). Construction through from_matrix checks
/// orthonormality and determinant; composition stays unchecked.
class Rotation {
 public:
  Rotation() : mat_(Eigen::Matrix3d::Identity()) {}

  static Rotation identity() { return Rotation(); }

  /// Throws std::invalid_argument unless R^T R = I within 1e-9 and
  /// det(R) is within 1e-9 of +1.
  static Rotation from_matrix(const Eigen::Matrix3d& m);

  const Eigen::Matrix3d& matrix() const { return mat_; }

  Rotation inverse() const { return Rotation(mat_.transpose(), Unchecked{}); }

  Rotation operator*(const Rotation& rhs) const {
    return Rotation(mat_ * rhs.mat_, Unchecked{});
  }

  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return mat_ * v; }

  /// Polar projection back onto SO(3); used to keep long product chains
  /// from drifting off the manifold.
  Rotation orthonormalized() const;

  bool is_approx(const Rotation& rhs, double tol = 1e-9) const {
    return (mat_ - rhs.mat_).cwiseAbs().maxCoeff() <= tol;
  }

 private:
  friend Rotation so3_exp(const Eigen::Vector3d&);
  struct Unchecked {};
  Rotation(const Eigen::Matrix3d& m, Unchecked) : mat_(m) {}
  Eigen::Matrix3d mat_;
};

/// Element of se(3), ordered [rho; phi] (translational, rotational).
struct Twist {
  Eigen::Vector3d rho = Eigen::Vector3d::Zero();
  Eigen::Vector3d phi = Eigen::Vector3d::Zero();

  Eigen::Matrix<double, 6, 1> vector() const {
    Eigen::Matrix<double, 6, 1> out;
    out << rho, phi;
    return out;
  }
  static Twist from_vector(const Eigen::Matrix<double, 6, 1>& v) {
    return Twist{v.head<3>(), v.tail<3>()};
  }
  double norm() const { return vector().norm(); }
};

struct Pose {
  Rotation rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose identity() { return Pose{}; }

  Pose operator*(const Pose& rhs) const {
    return Pose{rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }

  Pose inverse() const {
    const Rotation rinv = rotation.inverse();
    return Pose{rinv, -(rinv * translation)};
  }
};

/// Rodrigues formula; second-order Taylor series below kAngleEps.
Rotation so3_exp(const Eigen::Vector3d& phi);

/// Principal branch. Throws std::domain_error when the rotation angle is
/// within 1e-6 of pi (the branch cut); callers retry with perturbed input.
Eigen::Vector3d so3_log(const Rotation& r);

/// Left Jacobian of SO(3), i.e. the series sum_j (phi^)^j / (j+1)!.
Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& phi);

Eigen::Matrix3d so3_right_jacobian(const Eigen::Vector3d& phi);

/// Inverse of the right Jacobian. Throws std::domain_error for |phi| >= pi.
Eigen::Matrix3d so3_right_jacobian_inv(const Eigen::Vector3d& phi);

Pose se3_exp(const Twist& xi);

/// Inverse of se3_exp; same branch-cut restriction as so3_log.
Twist se3_log(const Pose& t);

/// Orthonormal basis of the tangent plane of the unit sphere at phi,
/// built by Gram-Schmidt from the canonical axis least aligned with phi
/// (ties broken by lowest index) so the result is deterministic.
/// Throws std::invalid_argument unless |phi| = 1 within 1e-6.
Eigen::Matrix<double, 3, 2> tangent_basis_s2(const Eigen::Vector3d& phi);

}  // namespace slio
