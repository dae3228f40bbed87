#include "slio/evaluation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slio {

namespace {

bool inside(const Eigen::Vector3d& error, const Eigen::Matrix3d& shape) {
  return error.dot(shape.ldlt().solve(error)) <= 1.0;
}

AssociationResult associate_records(std::span<const TrajectoryRecord> estimates,
                                    std::span<const GroundTruthSample> truth,
                                    double tol) {
  std::vector<double> est_times;
  est_times.reserve(estimates.size());
  for (const TrajectoryRecord& r : estimates) {
    est_times.push_back(r.timestamp);
  }
  std::vector<double> gt_times;
  gt_times.reserve(truth.size());
  for (const GroundTruthSample& s : truth) {
    gt_times.push_back(s.timestamp);
  }
  return associate(est_times, gt_times, tol);
}

}  // namespace

AssociationResult associate(std::span<const double> est_times,
                            std::span<const double> gt_times, double tol) {
  AssociationResult result;
  for (std::size_t i = 0; i < est_times.size(); ++i) {
    const double t = est_times[i];
    const auto it = std::lower_bound(gt_times.begin(), gt_times.end(), t);
    std::size_t best = gt_times.size();
    double best_gap = tol;
    if (it != gt_times.end() && std::abs(*it - t) <= best_gap) {
      best = static_cast<std::size_t>(it - gt_times.begin());
      best_gap = std::abs(*it - t);
    }
    if (it != gt_times.begin() && std::abs(*(it - 1) - t) <= best_gap) {
      best = static_cast<std::size_t>(it - gt_times.begin()) - 1;
    }
    if (best < gt_times.size()) {
      result.pairs.emplace_back(i, best);
    } else {
      ++result.dropped_estimates;
    }
  }
  return result;
}

double cover_rate(std::span<const TrajectoryRecord> estimates,
                  std::span<const GroundTruthSample> truth, double assoc_tol) {
  const AssociationResult assoc = associate_records(estimates, truth, assoc_tol);
  if (assoc.pairs.empty()) {
    throw std::invalid_argument("cover_rate: no estimate/ground-truth pairs within " +
                                std::to_string(assoc_tol) + " s");
  }
  std::size_t covered = 0;
  for (const auto& [ei, gi] : assoc.pairs) {
    const Eigen::Vector3d error = truth[gi].translation - estimates[ei].translation;
    if (inside(error, estimates[ei].protection_translation)) {
      ++covered;
    }
  }
  return 100.0 * static_cast<double>(covered) / static_cast<double>(assoc.pairs.size());
}

double ail(std::span<const TrajectoryRecord> records, AilMode mode) {
  if (records.empty()) {
    throw std::invalid_argument("ail: record list is empty");
  }
  const double scale = mode == AilMode::three_sigma ? 3.0 : 1.0;
  double total = 0.0;
  for (const TrajectoryRecord& r : records) {
    double width = 0.0;
    for (int i = 0; i < 3; ++i) {
      width += 2.0 * scale * std::sqrt(std::max(0.0, r.protection_translation(i, i)));
    }
    total += width / 3.0;
  }
  return total / static_cast<double>(records.size());
}

double ate(std::span<const TrajectoryRecord> estimates,
           std::span<const GroundTruthSample> truth, const AteOptions& options) {
  const AssociationResult assoc = associate_records(estimates, truth, options.assoc_tol);
  if (assoc.pairs.empty()) {
    throw std::invalid_argument("ate: no estimate/ground-truth pairs within " +
                                std::to_string(options.assoc_tol) + " s");
  }

  const auto k = static_cast<Eigen::Index>(assoc.pairs.size());
  Eigen::Matrix3Xd est(3, k);
  Eigen::Matrix3Xd gt(3, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    est.col(i) = estimates[assoc.pairs[static_cast<std::size_t>(i)].first].translation;
    gt.col(i) = truth[assoc.pairs[static_cast<std::size_t>(i)].second].translation;
  }

  if (options.align) {
    // Best-fit rigid transform (no scale) mapping estimates onto the truth.
    const Eigen::Vector3d est_mean = est.rowwise().mean();
    const Eigen::Vector3d gt_mean = gt.rowwise().mean();
    const Eigen::Matrix3d cross =
        (gt.colwise() - gt_mean) * (est.colwise() - est_mean).transpose();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
    if (r.determinant() < 0.0) {
      Eigen::Matrix3d u = svd.matrixU();
      u.col(2) *= -1.0;
      r = u * svd.matrixV().transpose();
    }
    const Eigen::Vector3d t = gt_mean - r * est_mean;
    est = (r * est).colwise() + t;
  }

  return std::sqrt((gt - est).colwise().squaredNorm().mean());
}

EndToEndReport end_to_end_error(std::span<const TrajectoryRecord> estimates,
                                std::span<const GroundTruthSample> truth,
                                double assoc_tol) {
  const AssociationResult assoc = associate_records(estimates, truth, assoc_tol);
  if (assoc.pairs.empty()) {
    throw std::invalid_argument("end_to_end_error: empty association");
  }
  const auto& [e0, g0] = assoc.pairs.front();
  const auto& [e1, g1] = assoc.pairs.back();
  const Eigen::Vector3d est_loop = estimates[e1].translation - estimates[e0].translation;
  const Eigen::Vector3d gt_loop = truth[g1].translation - truth[g0].translation;
  const Eigen::Vector3d loop_error = est_loop - gt_loop;

  EndToEndReport report;
  report.error = loop_error.norm();
  report.covered = inside(loop_error, estimates[e1].protection_translation);
  return report;
}

}  // namespace slio
