#include "slio/manifold.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace slio {

namespace {
constexpr double kPi = std::numbers::pi;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Rotation Rotation::from_matrix(const Eigen::Matrix3d& m) {
  const double ortho_err =
      (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-9) {
    throw std::invalid_argument("rotation matrix is not orthonormal (max |R^T R - I| = " +
                                std::to_string(ortho_err) + ")");
  }
  const double det = m.determinant();
  if (std::abs(det - 1.0) > 1e-9) {
    throw std::invalid_argument("rotation matrix determinant is " + std::to_string(det) +
                                ", expected +1");
  }
  return Rotation(m, Unchecked{});
}

Rotation Rotation::orthonormalized() const {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(mat_, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return Rotation(r, Unchecked{});
}

Rotation so3_exp(const Eigen::Vector3d& phi) {
  const double angle = phi.norm();
  const Eigen::Matrix3d s = skew(phi);
  Eigen::Matrix3d r;
  if (angle < kAngleEps) {
    r = Eigen::Matrix3d::Identity() + s + 0.5 * s * s;
  } else {
    const double a = std::sin(angle) / angle;
    const double b = (1.0 - std::cos(angle)) / (angle * angle);
    r = Eigen::Matrix3d::Identity() + a * s + b * s * s;
  }
  return Rotation(r, Rotation::Unchecked{});
}

Eigen::Vector3d so3_log(const Rotation& rot) {
  const Eigen::Matrix3d& r = rot.matrix();
  Eigen::Vector3d axis_times_sin;
  axis_times_sin << r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1);
  axis_times_sin *= 0.5;
  // atan2 of (sin, cos) keeps the angle well conditioned near the branch
  // cut, where acos of the trace alone loses six digits.
  const double sin_angle = axis_times_sin.norm();
  const double cos_angle = 0.5 * (r.trace() - 1.0);
  const double angle = std::atan2(sin_angle, cos_angle);
  if (angle > kPi - 1e-6) {
    throw std::domain_error("so3_log: rotation angle " + std::to_string(angle) +
                            " is within 1e-6 of the pi branch cut");
  }
  if (angle < 1e-4) {
    // axis_times_sin = phi * (1 - angle^2/6 + ...); invert the leading terms.
    return axis_times_sin * (1.0 + angle * angle / 6.0);
  }
  return axis_times_sin * (angle / sin_angle);
}

Eigen::Matrix3d so3_left_jacobian(const Eigen::Vector3d& phi) {
  const double angle = phi.norm();
  const Eigen::Matrix3d s = skew(phi);
  if (angle < kAngleEps) {
    return Eigen::Matrix3d::Identity() + 0.5 * s + s * s / 6.0;
  }
  const double a2 = angle * angle;
  const double b = (1.0 - std::cos(angle)) / a2;
  const double c = (angle - std::sin(angle)) / (a2 * angle);
  return Eigen::Matrix3d::Identity() + b * s + c * s * s;
}

Eigen::Matrix3d so3_right_jacobian(const Eigen::Vector3d& phi) {
  // J_r(phi) = J_l(-phi)
  return so3_left_jacobian(-phi);
}

Eigen::Matrix3d so3_right_jacobian_inv(const Eigen::Vector3d& phi) {
  const double angle = phi.norm();
  if (angle >= kPi) {
    throw std::domain_error("so3_right_jacobian_inv: |phi| = " + std::to_string(angle) +
                            " is outside the domain [0, pi)");
  }
  const Eigen::Matrix3d s = skew(phi);
  double coeff;
  if (angle < 1e-4) {
    coeff = 1.0 / 12.0 + angle * angle / 720.0;
  } else {
    coeff = 1.0 / (angle * angle) -
            (1.0 + std::cos(angle)) / (2.0 * angle * std::sin(angle));
  }
  return Eigen::Matrix3d::Identity() + 0.5 * s + coeff * s * s;
}

Pose se3_exp(const Twist& xi) {
  return Pose{so3_exp(xi.phi), so3_left_jacobian(xi.phi) * xi.rho};
}

Twist se3_log(const Pose& t) {
  Twist xi;
  xi.phi = so3_log(t.rotation);
  xi.rho = so3_left_jacobian(xi.phi).partialPivLu().solve(t.translation);
  return xi;
}

Eigen::Matrix<double, 3, 2> tangent_basis_s2(const Eigen::Vector3d& phi) {
  if (std::abs(phi.norm() - 1.0) > 1e-6) {
    throw std::invalid_argument("tangent_basis_s2: input must be a unit vector, |phi| = " +
                                std::to_string(phi.norm()));
  }
  int seed = 0;
  double best = std::abs(phi(0));
  for (int i = 1; i < 3; ++i) {
    if (std::abs(phi(i)) < best) {
      best = std::abs(phi(i));
      seed = i;
    }
  }
  const Eigen::Vector3d e = Eigen::Vector3d::Unit(seed);
  const Eigen::Vector3d n1 = (e - e.dot(phi) * phi).normalized();
  const Eigen::Vector3d n2 = phi.cross(n1);
  Eigen::Matrix<double, 3, 2> basis;
  basis.col(0) = n1;
  basis.col(1) = n2;
  return basis;
}

}  // namespace slio
