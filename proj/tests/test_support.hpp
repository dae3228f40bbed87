#pragma once

#include <Eigen/Dense>

#include "slio/simulation.hpp"

namespace slio::testing {

inline double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

/// Uniform point inside (or on, when boundary) an ellipsoid: x = a + L u
/// with L the Cholesky factor of the shape and u from the unit ball.
inline Eigen::VectorXd sample_in_ellipsoid(Rng& rng, const Ellipsoid& e,
                                           bool boundary = false) {
  const Eigen::Index n = e.dim();
  Eigen::VectorXd direction(n);
  double norm2 = 0.0;
  do {
    for (Eigen::Index i = 0; i < n; ++i) {
      direction(i) = rng.uniform(-1.0, 1.0);
    }
    norm2 = direction.squaredNorm();
  } while (norm2 > 1.0 || norm2 < 1e-12);
  Eigen::VectorXd u = direction;
  if (boundary) {
    u /= std::sqrt(norm2);
  }
  const Eigen::MatrixXd l = e.shape().llt().matrixL();
  return e.center() + l * u;
}

/// Random symmetric positive-definite matrix with eigenvalues in
/// [scale_min, scale_max].
inline Eigen::MatrixXd random_spd(Rng& rng, Eigen::Index n, double scale_min = 0.1,
                                  double scale_max = 4.0) {
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      m(i, j) = rng.uniform(-1.0, 1.0);
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  const Eigen::MatrixXd q = qr.householderQ();
  Eigen::VectorXd eigs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    eigs(i) = rng.uniform(scale_min, scale_max);
  }
  return q * eigs.asDiagonal() * q.transpose();
}

inline Eigen::Vector3d random_unit3(Rng& rng) {
  Eigen::Vector3d v;
  do {
    v = Eigen::Vector3d(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
                        rng.uniform(-1.0, 1.0));
  } while (v.norm() < 1e-6 || v.norm() > 1.0);
  return v.normalized();
}

}  // namespace slio::testing
