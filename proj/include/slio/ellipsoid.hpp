#pragma once

#include <Eigen/Core>
#include <span>
#include <stdexcept>
#include <vector>

namespace slio {

/// Eigenvalue floor applied to every shape matrix so that degenerate sets
/// (zero noise bounds, rank-deficient maps) stay invertible downstream.
inline constexpr double kPsdFloor = 1e-12;

/// Slack added to the unit quadratic form in membership tests.
inline constexpr double kContainmentSlack = 1e-9;

class DegenerateShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an intersection is provably empty; signals an inconsistent
/// observation rather than silently clamping to an empty set.
class DisjointSetsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symmetrizes `m` and clamps its eigenvalues to at least `floor`.
/// Throws DegenerateShapeError if an eigenvalue is significantly negative,
/// i.e. the input is not a positive semidefinite matrix up to roundoff.
Eigen::MatrixXd floor_psd(const Eigen::MatrixXd& m, double floor = kPsdFloor);

/// Bounded set { x : (x - a)^T P^-1 (x - a) <= 1 } with center a and
/// symmetric positive-definite shape matrix P. Immutable after construction;
/// the constructor symmetrizes and floors the shape.
class Ellipsoid {
 public:
  Ellipsoid(Eigen::VectorXd center, const Eigen::MatrixXd& shape,
            double psd_floor = kPsdFloor);

  Eigen::Index dim() const { return center_.size(); }
  const Eigen::VectorXd& center() const { return center_; }
  const Eigen::MatrixXd& shape() const { return shape_; }
  double trace() const { return shape_.trace(); }

  bool contains(const Eigen::VectorXd& x, double slack = kContainmentSlack) const;

  static Ellipsoid unit_ball(Eigen::Index dim) {
    return Ellipsoid(Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim));
  }

 private:
  Eigen::VectorXd center_;
  Eigen::MatrixXd shape_;
};

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Axis-aligned box as a list of per-dimension intervals.
struct Box {
  std::vector<Interval> intervals;
};

/// Image { A x + b : x in set }. Exact (no conservatism) for invertible A.
/// Throws DegenerateShapeError when m <= n and A is rank deficient, naming
/// the offending singular value.
Ellipsoid affine_map(const Ellipsoid& set, const Eigen::MatrixXd& a,
                     const Eigen::VectorXd& b);

/// Trace-optimal outer ellipsoid of the Minkowski sum of the operands,
/// using the closed-form weights beta_i = sqrt(tr P_i) / sum_j sqrt(tr P_j).
/// Throws std::invalid_argument on an empty list or mismatched dimensions.
Ellipsoid minkowski_sum_outer(std::span<const Ellipsoid> operands);

struct IntersectParams {
  /// Open-interval clamp for the fusion parameter, lambda in [eps, 1-eps].
  double lambda_eps = 1e-9;
  /// Golden-section termination width on lambda.
  double lambda_tol = 1e-8;
  /// Debug check: also grid-search lambda and fail loudly if the golden
  /// section missed a better minimum (unimodality violation).
  bool grid_check = false;
};

/// Trace-optimal outer ellipsoid of the intersection of two sets with the
/// fusion parameter found by golden-section search. Throws DisjointSetsError
/// when the sets provably do not intersect.
Ellipsoid intersect_outer(const Ellipsoid& e1, const Ellipsoid& e2,
                          const IntersectParams& params = {});

/// Smallest-trace outer ellipsoid of an axis-aligned box: center at the
/// interval midpoints, shape diag(n r_i^2). Zero-width intervals are widened
/// to radius sqrt(psd_floor).
Ellipsoid box_to_ellipsoid(const Box& box, double psd_floor = kPsdFloor);

}  // namespace slio
