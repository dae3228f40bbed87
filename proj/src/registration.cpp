#include "slio/registration.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "slio/parallel.hpp"

namespace slio {

namespace {

using Vector6d = Eigen::Matrix<double, 6, 1>;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using RowVector6d = Eigen::Matrix<double, 1, 6>;

struct NormalEquations {
  Matrix6d h = Matrix6d::Zero();
  Vector6d g = Vector6d::Zero();
  double cost = 0.0;
};

RowVector6d residual_row(const Correspondence& c, const Eigen::Matrix3d& rotation) {
  const Eigen::RowVector3d b = c.normal_world.transpose() * rotation;
  RowVector6d row;
  row.head<3>() = b;
  row.tail<3>() = -b * skew(c.point_imu);
  return row;
}

NormalEquations accumulate(std::span<const Correspondence> correspondences,
                           const Pose& pose, int threads) {
  std::vector<NormalEquations> partial(
      static_cast<std::size_t>(resolve_threads(threads)));
  parallel_chunks(correspondences.size(), threads,
                  [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                    NormalEquations& acc = partial[chunk];
                    for (std::size_t i = begin; i < end; ++i) {
                      const Correspondence& c = correspondences[i];
                      const RowVector6d row = residual_row(c, pose.rotation.matrix());
                      const double eps =
                          c.normal_world.dot(pose * c.point_imu - c.anchor_world);
                      acc.h.noalias() += row.transpose() * row;
                      acc.g.noalias() += row.transpose() * eps;
                      acc.cost += eps * eps;
                    }
                  });
  NormalEquations total;
  for (const NormalEquations& p : partial) {
    total.h += p.h;
    total.g += p.g;
    total.cost += p.cost;
  }
  return total;
}

Matrix6d checked_inverse(const Matrix6d& h, double cond_max) {
  Eigen::SelfAdjointEigenSolver<Matrix6d> eig(h);
  const double lambda_min = eig.eigenvalues().minCoeff();
  const double lambda_max = eig.eigenvalues().maxCoeff();
  if (lambda_min <= 0.0 || lambda_max / lambda_min > cond_max) {
    throw IllConditionedError(
        "registration system is ill conditioned: eigenvalue range [" +
        std::to_string(lambda_min) + ", " + std::to_string(lambda_max) + "]");
  }
  return eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

std::vector<Correspondence> match_planes(std::span<const BoundedPoint> points,
                                         const PointMap& map, const Pose& pose,
                                         const IcpParams& params) {
  std::vector<std::vector<Correspondence>> partial(
      static_cast<std::size_t>(resolve_threads(params.threads)));
  parallel_chunks(points.size(), params.threads,
                  [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                    std::vector<Correspondence>& out = partial[chunk];
                    out.reserve(end - begin);
                    for (std::size_t i = begin; i < end; ++i) {
                      const BoundedPoint& bp = points[i];
                      const Eigen::Vector3d p_world = pose * bp.point;
                      const auto fit = map.query_plane(p_world, params.plane_query);
                      if (!fit) {
                        continue;
                      }
                      if (std::abs(fit->normal.dot(p_world - fit->anchor)) >
                          params.residual_cap) {
                        continue;
                      }
                      out.push_back(Correspondence{bp.point, bp.shape, fit->normal,
                                                   fit->anchor});
                    }
                  });
  std::vector<Correspondence> all;
  for (std::vector<Correspondence>& p : partial) {
    all.insert(all.end(), p.begin(), p.end());
  }
  return all;
}

}  // namespace

namespace detail {

Twist gauss_newton_increment(std::span<const Correspondence> correspondences,
                             const Pose& pose, double cond_max) {
  const NormalEquations eq = accumulate(correspondences, pose, 1);
  const Matrix6d h_inv = checked_inverse(eq.h, cond_max);
  return Twist::from_vector(-(h_inv * eq.g));
}

double point_to_plane_cost(std::span<const Correspondence> correspondences,
                           const Pose& pose) {
  double cost = 0.0;
  for (const Correspondence& c : correspondences) {
    const double eps = c.normal_world.dot(pose * c.point_imu - c.anchor_world);
    cost += eps * eps;
  }
  return cost;
}

std::vector<Eigen::Matrix<double, 6, 3>> implicit_point_jacobians(
    const IcpResult& result) {
  const Eigen::Matrix3d rotation = result.pose.rotation.matrix();
  const NormalEquations eq = accumulate(result.correspondences, result.pose, 1);
  const Matrix6d h_inv = checked_inverse(eq.h, 1e12);

  std::vector<Eigen::Matrix<double, 6, 3>> jacobians;
  jacobians.reserve(result.correspondences.size());
  for (const Correspondence& c : result.correspondences) {
    const Eigen::RowVector3d b = c.normal_world.transpose() * rotation;
    const Eigen::Matrix3d btb = b.transpose() * b;
    const double offset = c.normal_world.dot(result.pose.translation - c.anchor_world);
    Eigen::Matrix<double, 6, 3> cross;
    cross.topRows<3>() = btb;
    cross.bottomRows<3>() = skew(c.point_imu) * btb - skew(btb * c.point_imu) -
                            skew(b.transpose() * offset);
    jacobians.push_back(-(h_inv * cross));
  }
  return jacobians;
}

}  // namespace detail

IcpResult icp_point_to_plane(std::span<const BoundedPoint> points, const PointMap& map,
                             const Pose& initial, const IcpParams& params) {
  if (points.empty()) {
    throw std::invalid_argument("icp_point_to_plane requires a nonempty point list");
  }
  if (map.empty()) {
    throw std::invalid_argument("icp_point_to_plane requires a nonempty map");
  }

  IcpResult result;
  result.pose = initial;
  bool frozen = false;

  for (int iter = 0; iter < params.max_iterations; ++iter) {
    if (!frozen) {
      result.correspondences = match_planes(points, map, result.pose, params);
      if (static_cast<int>(result.correspondences.size()) < params.min_correspondences) {
        throw DegenerateRegistrationError(
            "only " + std::to_string(result.correspondences.size()) +
            " plane correspondences matched, need " +
            std::to_string(params.min_correspondences));
      }
    }

    const NormalEquations eq = accumulate(result.correspondences, result.pose,
                                          params.threads);
    const Matrix6d h_inv = checked_inverse(eq.h, params.cond_max);
    Vector6d dxi = -(h_inv * eq.g);

    Pose candidate = result.pose * se3_exp(Twist::from_vector(dxi));
    double candidate_cost =
        detail::point_to_plane_cost(result.correspondences, candidate);
    int halvings = 0;
    for (; halvings < params.max_step_halvings && candidate_cost > eq.cost;
         ++halvings) {
      dxi *= 0.5;
      candidate = result.pose * se3_exp(Twist::from_vector(dxi));
      candidate_cost = detail::point_to_plane_cost(result.correspondences, candidate);
    }
    result.iteration_stats.push_back(IcpIterationStats{eq.cost, candidate_cost,
                                                       halvings});

    result.pose = candidate;
    result.last_increment = Twist::from_vector(dxi);
    result.final_cost = candidate_cost;
    result.iterations = iter + 1;
    if (result.last_increment.norm() < params.converge_tol) {
      result.converged = true;
      break;
    }
    if (result.last_increment.norm() < params.refresh_freeze_tol) {
      frozen = true;
    }
  }
  return result;
}

IcpUncertainty resolve_icp_uncertainty(const IcpResult& result,
                                       const UncertaintyParams& params) {
  if (!result.converged) {
    throw std::invalid_argument("resolve_icp_uncertainty requires a converged result");
  }
  const std::size_t n = result.correspondences.size();
  const Eigen::Matrix3d rotation = result.pose.rotation.matrix();

  const NormalEquations eq = accumulate(result.correspondences, result.pose,
                                        params.threads);
  const Matrix6d h_inv = checked_inverse(eq.h, 1e12);

  // Trace-weighted Minkowski accumulation of the per-point noise images
  // under the implicit-function Jacobian, a single pass over the points.
  struct SumAcc {
    Matrix6d weighted = Matrix6d::Zero();
    double root_sum = 0.0;
  };
  std::vector<SumAcc> partial(static_cast<std::size_t>(resolve_threads(params.threads)));
  parallel_chunks(n, params.threads, [&](std::size_t chunk, std::size_t begin,
                                         std::size_t end) {
    SumAcc& acc = partial[chunk];
    for (std::size_t i = begin; i < end; ++i) {
      const Correspondence& c = result.correspondences[i];
      const Eigen::RowVector3d b = c.normal_world.transpose() * rotation;
      const Eigen::Matrix3d btb = b.transpose() * b;
      const double offset = c.normal_world.dot(result.pose.translation - c.anchor_world);
      Eigen::Matrix<double, 6, 3> cross;
      cross.topRows<3>() = btb;
      cross.bottomRows<3>() = skew(c.point_imu) * btb - skew(btb * c.point_imu) -
                              skew(b.transpose() * offset);
      const Eigen::Matrix<double, 6, 3> jac = -(h_inv * cross);
      const Matrix6d mapped = jac * c.point_shape_imu * jac.transpose();
      const double root = std::sqrt(std::max(mapped.trace(), 6.0 * kPsdFloor));
      acc.weighted.noalias() += mapped / root;
      acc.root_sum += root;
    }
  });
  SumAcc total_acc;
  for (const SumAcc& p : partial) {
    total_acc.weighted += p.weighted;
    total_acc.root_sum += p.root_sum;
  }
  const Ellipsoid point_sum(Eigen::VectorXd::Zero(6),
                            total_acc.root_sum * total_acc.weighted);

  const Ellipsoid compensation(Eigen::VectorXd::Zero(6), params.compensation);
  Ellipsoid remainder = compensation;
  if (!params.single_term) {
    // n identical operands: beta_i = 1/n, so the combined shape is n^2 P.
    remainder = Ellipsoid(Eigen::VectorXd::Zero(6),
                          static_cast<double>(n) * static_cast<double>(n) *
                              compensation.shape());
  }

  const std::vector<Ellipsoid> total{point_sum, remainder};
  IcpUncertainty unc;
  unc.shape_xi = minkowski_sum_outer(total).shape();
  return unc;
}

bool gate_icp(const IcpResult& result, double gate_tol) {
  return result.converged && result.last_increment.norm() <= gate_tol;
}

}  // namespace slio
