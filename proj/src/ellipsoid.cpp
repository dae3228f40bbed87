#include "slio/ellipsoid.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

namespace slio {

namespace {

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

std::string dim_string(Eigen::Index rows, Eigen::Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

}  // namespace

Eigen::MatrixXd floor_psd(const Eigen::MatrixXd& m, double floor) {
  const Eigen::MatrixXd sym = symmetrized(m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd& vals = eig.eigenvalues();
  const double scale = std::max(1.0, vals.cwiseAbs().maxCoeff());
  if (vals.minCoeff() < -1e-8 * scale) {
    throw DegenerateShapeError("shape matrix has negative eigenvalue " +
                               std::to_string(vals.minCoeff()));
  }
  if (vals.minCoeff() >= floor) {
    return sym;
  }
  const Eigen::VectorXd clamped = vals.cwiseMax(floor);
  return symmetrized(eig.eigenvectors() * clamped.asDiagonal() *
                     eig.eigenvectors().transpose());
}

Ellipsoid::Ellipsoid(Eigen::VectorXd center, const Eigen::MatrixXd& shape,
                     double psd_floor)
    : center_(std::move(center)) {
  if (shape.rows() != shape.cols() || shape.rows() != center_.size()) {
    throw std::invalid_argument("ellipsoid center dimension " +
                                std::to_string(center_.size()) +
                                " does not match shape " +
                                dim_string(shape.rows(), shape.cols()));
  }
  shape_ = floor_psd(shape, psd_floor);
}

bool Ellipsoid::contains(const Eigen::VectorXd& x, double slack) const {
  if (x.size() != dim()) {
    throw std::invalid_argument("membership query dimension " +
                                std::to_string(x.size()) + " against " +
                                std::to_string(dim()) + "-dimensional set");
  }
  const Eigen::VectorXd d = x - center_;
  const double q = d.dot(shape_.ldlt().solve(d));
  return q <= 1.0 + slack;
}

Ellipsoid affine_map(const Ellipsoid& set, const Eigen::MatrixXd& a,
                     const Eigen::VectorXd& b) {
  if (a.cols() != set.dim()) {
    throw std::invalid_argument("affine map has " + std::to_string(a.cols()) +
                                " columns but the set is " +
                                std::to_string(set.dim()) + "-dimensional");
  }
  if (b.size() != a.rows()) {
    throw std::invalid_argument("affine offset dimension " + std::to_string(b.size()) +
                                " does not match map rows " + std::to_string(a.rows()));
  }
  if (a.rows() <= a.cols()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const double sigma_min = svd.singularValues().minCoeff();
    const double sigma_max = svd.singularValues().maxCoeff();
    if (sigma_min <= 1e-12 * std::max(1.0, sigma_max)) {
      throw DegenerateShapeError("affine map is rank deficient: smallest singular value " +
                                 std::to_string(sigma_min));
    }
  }
  return Ellipsoid(a * set.center() + b, a * set.shape() * a.transpose());
}

Ellipsoid minkowski_sum_outer(std::span<const Ellipsoid> operands) {
  if (operands.empty()) {
    throw std::invalid_argument("minkowski_sum_outer requires at least one operand");
  }
  const Eigen::Index n = operands.front().dim();
  Eigen::VectorXd center = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd weighted = Eigen::MatrixXd::Zero(n, n);
  double root_sum = 0.0;
  for (const Ellipsoid& e : operands) {
    if (e.dim() != n) {
      throw std::invalid_argument("minkowski_sum_outer operands have mixed dimensions " +
                                  std::to_string(n) + " and " + std::to_string(e.dim()));
    }
    const double root = std::sqrt(e.trace());
    center += e.center();
    weighted += e.shape() / root;
    root_sum += root;
  }
  return Ellipsoid(std::move(center), root_sum * weighted);
}

namespace {

struct Fusion {
  Eigen::VectorXd center;
  Eigen::MatrixXd shape_lambda;  // P_lambda, before the (1 - nu) scaling
  double nu = 0.0;
  double trace() const { return std::max(0.0, 1.0 - nu) * shape_lambda.trace(); }
};

Fusion fuse_at(double lambda, const Ellipsoid& e1, const Ellipsoid& e2,
               const Eigen::MatrixXd& p1_inv, const Eigen::MatrixXd& p2_inv) {
  Fusion f;
  const Eigen::MatrixXd info = (1.0 - lambda) * p1_inv + lambda * p2_inv;
  f.shape_lambda = info.ldlt().solve(
      Eigen::MatrixXd::Identity(info.rows(), info.cols()));
  f.center = f.shape_lambda * ((1.0 - lambda) * (p1_inv * e1.center()) +
                               lambda * (p2_inv * e2.center()));
  f.nu = (1.0 - lambda) * e1.center().dot(p1_inv * e1.center()) +
         lambda * e2.center().dot(p2_inv * e2.center()) -
         f.center.dot(info * f.center);
  return f;
}

}  // namespace

Ellipsoid intersect_outer(const Ellipsoid& e1, const Ellipsoid& e2,
                          const IntersectParams& params) {
  if (e1.dim() != e2.dim()) {
    throw std::invalid_argument("intersect_outer operands have dimensions " +
                                std::to_string(e1.dim()) + " and " +
                                std::to_string(e2.dim()));
  }
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(e1.dim(), e1.dim());
  const Eigen::MatrixXd p1_inv = e1.shape().ldlt().solve(identity);
  const Eigen::MatrixXd p2_inv = e2.shape().ldlt().solve(identity);

  const auto trace_at = [&](double lambda) {
    return fuse_at(lambda, e1, e2, p1_inv, p2_inv).trace();
  };

  // Golden-section search on the open interval; the trace is treated as
  // unimodal in lambda (grid_check detects violations in debug runs).
  constexpr double inv_golden = 0.6180339887498949;
  double lo = params.lambda_eps;
  double hi = 1.0 - params.lambda_eps;
  double x1 = hi - inv_golden * (hi - lo);
  double x2 = lo + inv_golden * (hi - lo);
  double f1 = trace_at(x1);
  double f2 = trace_at(x2);
  while (hi - lo > params.lambda_tol) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_golden * (hi - lo);
      f1 = trace_at(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_golden * (hi - lo);
      f2 = trace_at(x2);
    }
  }
  double lambda_star = 0.5 * (lo + hi);

  if (params.grid_check) {
    constexpr int kGridPoints = 10000;
    double best_lambda = lambda_star;
    double best_trace = trace_at(lambda_star);
    for (int i = 0; i <= kGridPoints; ++i) {
      const double lambda = params.lambda_eps +
          (1.0 - 2.0 * params.lambda_eps) * static_cast<double>(i) / kGridPoints;
      const double t = trace_at(lambda);
      if (t < best_trace) {
        best_trace = t;
        best_lambda = lambda;
      }
    }
    if (best_trace < (1.0 - 1e-6) * trace_at(lambda_star)) {
      throw std::logic_error("intersect_outer: trace is not unimodal in lambda; "
                             "grid search found a better minimum at lambda = " +
                             std::to_string(best_lambda));
    }
  }

  Fusion f = fuse_at(lambda_star, e1, e2, p1_inv, p2_inv);
  if (f.nu >= 1.0) {
    throw DisjointSetsError("ellipsoids do not intersect (nu = " +
                            std::to_string(f.nu) + " at lambda = " +
                            std::to_string(lambda_star) + ")");
  }
  const double scale = 1.0 - std::max(0.0, f.nu);
  return Ellipsoid(std::move(f.center), scale * f.shape_lambda);
}

Ellipsoid box_to_ellipsoid(const Box& box, double psd_floor) {
  const auto n = static_cast<Eigen::Index>(box.intervals.size());
  if (n == 0) {
    throw std::invalid_argument("box_to_ellipsoid requires at least one interval");
  }
  Eigen::VectorXd center(n);
  Eigen::VectorXd diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Interval& iv = box.intervals[static_cast<std::size_t>(i)];
    if (iv.lower > iv.upper) {
      throw std::invalid_argument("box interval " + std::to_string(i) +
                                  " has lower bound above upper bound");
    }
    center(i) = 0.5 * (iv.lower + iv.upper);
    const double radius = std::max(iv.upper - center(i), std::sqrt(psd_floor));
    diag(i) = static_cast<double>(n) * radius * radius;
  }
  return Ellipsoid(std::move(center), diag.asDiagonal(), psd_floor);
}

}  // namespace slio
