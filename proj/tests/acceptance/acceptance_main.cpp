// Acceptance suite: one verdict line per criterion, nonzero exit on failure.
// Usage: slio_acceptance [N | all]

#include <Eigen/Dense>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "slio/config.hpp"
#include "slio/evaluation.hpp"
#include "slio/filter.hpp"
#include "slio/pipeline.hpp"
#include "slio/registration.hpp"
#include "slio/simulation.hpp"

using namespace slio;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& message) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) {
        detail += "; ";
      }
      detail += message;
    }
  }
};

RunConfig default_run_config() {
  std::istringstream text(default_config_text());
  return parse_config(text, "<defaults>");
}

struct Episode {
  std::vector<TrajectoryRecord> records;
  std::vector<GroundTruthSample> truth;
  RunResult run;
  double run_seconds = 0.0;
};

Episode run_episode(const RunConfig& sim_config, const RunConfig& run_config) {
  const Dataset data = generate_dataset(sim_config);
  Episode episode;
  const auto start = std::chrono::steady_clock::now();
  episode.run = run_pipeline(data.imu, data.scans, run_config);
  episode.run_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  episode.records = episode.run.records;
  episode.truth = tum_to_ground_truth(data.ground_truth);
  return episode;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Shared synthetic registration scenes (three orthogonal planes).

struct Scene {
  PointMap map{1.0};
  std::vector<Eigen::Vector3d> scan_world;
  Pose truth;
};

void init_scene(Scene& scene, Rng& rng) {
  scene.truth.rotation = so3_exp({rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05),
                                  rng.uniform(-0.3, 0.3)});
  scene.truth.translation = Eigen::Vector3d(rng.uniform(-0.3, 0.3),
                                            rng.uniform(-0.3, 0.3),
                                            rng.uniform(-0.3, 0.3));
  std::vector<Eigen::Vector3d> map_points;
  for (double a = 0.25; a <= 5.0; a += 0.25) {
    for (double b = 0.25; b <= 5.0; b += 0.25) {
      map_points.emplace_back(a, b, 0.0);
      map_points.emplace_back(0.0, a, b);
      map_points.emplace_back(a, 0.0, b);
    }
  }
  scene.map.insert_scan(map_points, 0.01);
  for (double a = 0.4; a <= 4.6; a += 0.35) {
    for (double b = 0.4; b <= 4.6; b += 0.35) {
      scene.scan_world.emplace_back(a, b, 0.0);
      scene.scan_world.emplace_back(0.0, a, b);
      scene.scan_world.emplace_back(a, 0.0, b);
    }
  }
}

std::vector<BoundedPoint> scene_scan(const Scene& scene, double bound, Rng& rng) {
  const Pose imu_from_world = scene.truth.inverse();
  std::vector<BoundedPoint> points;
  points.reserve(scene.scan_world.size());
  for (const Eigen::Vector3d& p_world : scene.scan_world) {
    BoundedPoint bp;
    bp.point = imu_from_world * p_world + rng.box3(bound, false);
    bp.shape = 3.0 * bound * bound * Eigen::Matrix3d::Identity();
    points.push_back(bp);
  }
  return points;
}

// Dense lambda scan used as the independent oracle for criterion 5.
double grid_min_trace(const Ellipsoid& e1, const Ellipsoid& e2, int grid_points) {
  const Eigen::MatrixXd p1_inv = e1.shape().inverse();
  const Eigen::MatrixXd p2_inv = e2.shape().inverse();
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= grid_points; ++i) {
    const double lambda = 1e-9 + (1.0 - 2e-9) * static_cast<double>(i) / grid_points;
    const Eigen::MatrixXd info = (1.0 - lambda) * p1_inv + lambda * p2_inv;
    const Eigen::MatrixXd p_lambda = info.inverse();
    const Eigen::VectorXd center = p_lambda * ((1.0 - lambda) * p1_inv * e1.center() +
                                               lambda * p2_inv * e2.center());
    const double nu = (1.0 - lambda) * e1.center().dot(p1_inv * e1.center()) +
                      lambda * e2.center().dot(p2_inv * e2.center()) -
                      center.dot(info * center);
    best = std::min(best, std::max(0.0, 1.0 - nu) * p_lambda.trace());
  }
  return best;
}

Eigen::MatrixXd random_spd(Rng& rng, Eigen::Index n, double lo, double hi) {
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
    eigs(i) = rng.uniform(lo, hi);
  }
  return q * eigs.asDiagonal() * q.transpose();
}

Eigen::VectorXd sample_in(Rng& rng, const Ellipsoid& e, bool boundary) {
  const Eigen::Index n = e.dim();
  Eigen::VectorXd u(n);
  double norm2 = 0.0;
  do {
    for (Eigen::Index i = 0; i < n; ++i) {
      u(i) = rng.uniform(-1.0, 1.0);
    }
    norm2 = u.squaredNorm();
  } while (norm2 > 1.0 || norm2 < 1e-12);
  if (boundary) {
    u /= std::sqrt(norm2);
  }
  const Eigen::MatrixXd l = e.shape().llt().matrixL();
  return e.center() + l * u;
}

// ---------------------------------------------------------------------------

Verdict criterion_1() {
  Verdict verdict;
  constexpr int kEpisodes = 20;
  constexpr int kAdversarialFrom = 12;

  double worst_runtime = 0.0;
  for (int i = 0; i < kEpisodes; ++i) {
    RunConfig config = default_run_config();
    config.sim.duration = 60.0;
    config.sim.seed = 1000 + static_cast<std::uint64_t>(i) * 7919;
    config.sim.adversarial = i >= kAdversarialFrom;

    const Episode episode = run_episode(config, config);
    worst_runtime = std::max(worst_runtime, episode.run_seconds);

    const double cr = cover_rate(episode.records, episode.truth);
    verdict.require(cr == 100.0, "episode " + std::to_string(i) +
                                     (config.sim.adversarial ? " (adversarial)" : "") +
                                     " translation CR = " + fmt(cr) + "%");

    // filter invariant: the rotation error stays inside its protection level
    std::vector<double> est_times;
    for (const auto& r : episode.records) {
      est_times.push_back(r.timestamp);
    }
    std::vector<double> gt_times;
    for (const auto& s : episode.truth) {
      gt_times.push_back(s.timestamp);
    }
    const AssociationResult assoc = associate(est_times, gt_times, 0.010);
    int rotation_violations = 0;
    for (const auto& [ei, gi] : assoc.pairs) {
      const TrajectoryRecord& rec = episode.records[ei];
      if (!rec.protection_rotation) {
        continue;
      }
      const Eigen::Vector3d err =
          so3_log(rec.rotation.inverse() * episode.truth[gi].rotation);
      const Ellipsoid set(Eigen::Vector3d::Zero(), *rec.protection_rotation);
      if (!set.contains(err)) {
        ++rotation_violations;
      }
    }
    verdict.require(rotation_violations == 0,
                    "episode " + std::to_string(i) + " rotation containment violated " +
                        std::to_string(rotation_violations) + " times");
    verdict.require(episode.run_seconds <= 120.0,
                    "episode " + std::to_string(i) + " took " +
                        fmt(episode.run_seconds) + " s");
  }
  if (verdict.pass) {
    verdict.detail = "20 episodes (8 adversarial) at CR = 100.0%, slowest run " +
                     fmt(worst_runtime) + " s";
  }
  return verdict;
}

Verdict criterion_2() {
  Verdict verdict;
  Rng rng(4242);
  const double delta = 1e-5;
  int checked = 0;
  double worst = 0.0;
  for (int scene_idx = 0; scene_idx < 5 && checked < 50; ++scene_idx) {
    Scene scene;
    init_scene(scene, rng);
    const auto points = scene_scan(scene, 0.02, rng);
    const IcpResult result = icp_point_to_plane(points, scene.map, scene.truth);
    if (!result.converged) {
      verdict.require(false, "scene " + std::to_string(scene_idx) + " did not converge");
      continue;
    }
    const auto jacobians = detail::implicit_point_jacobians(result);
    const Twist base = detail::gauss_newton_increment(result.correspondences,
                                                      result.pose);
    for (int rep = 0; rep < 10 && checked < 50; ++rep) {
      const auto i = static_cast<std::size_t>(
          rng.uniform(0, static_cast<double>(result.correspondences.size())));
      const int axis = static_cast<int>(rng.uniform(0, 3));
      std::vector<Correspondence> perturbed(result.correspondences.begin(),
                                            result.correspondences.end());
      perturbed[i].point_imu(axis) += delta;
      const Twist stepped = detail::gauss_newton_increment(perturbed, result.pose);
      const Eigen::Matrix<double, 6, 1> measured = stepped.vector() - base.vector();
      const Eigen::Matrix<double, 6, 1> predicted =
          jacobians[i] * (delta * Eigen::Vector3d::Unit(axis));
      const double rel = (measured - predicted).norm() / predicted.norm();
      worst = std::max(worst, rel);
      verdict.require(rel < 1e-4, "triple " + std::to_string(checked) +
                                      " relative error " + fmt(rel));
      ++checked;
    }
  }
  verdict.require(checked >= 50, "only " + std::to_string(checked) + " triples checked");
  if (verdict.pass) {
    verdict.detail = std::to_string(checked) + " triples, worst relative error " +
                     fmt(worst);
  }
  return verdict;
}

Verdict criterion_3() {
  Verdict verdict;
  Rng rng(333);
  const double bound = 0.02;
  int total = 0;
  int violations = 0;
  for (int scene_idx = 0; scene_idx < 5; ++scene_idx) {
    Scene scene;
    init_scene(scene, rng);
    const auto points = scene_scan(scene, bound, rng);
    const Pose initial =
        scene.truth * se3_exp(Twist{{0.05, -0.02, 0.03}, {0.01, -0.005, 0.008}});
    const IcpResult reference = icp_point_to_plane(points, scene.map, initial);
    if (!reference.converged) {
      verdict.require(false, "scene " + std::to_string(scene_idx) + " did not converge");
      continue;
    }
    const Ellipsoid bound_set(Eigen::VectorXd::Zero(6),
                              resolve_icp_uncertainty(reference).shape_xi);
    for (int rep = 0; rep < 500; ++rep) {
      const auto resampled = scene_scan(scene, bound, rng);
      const IcpResult solved = icp_point_to_plane(resampled, scene.map, initial);
      if (!solved.converged) {
        ++violations;
        ++total;
        continue;
      }
      const Twist increment = se3_log(reference.pose.inverse() * solved.pose);
      if (!bound_set.contains(increment.vector())) {
        ++violations;
      }
      ++total;
    }
  }
  verdict.require(violations == 0,
                  std::to_string(violations) + " of " + std::to_string(total) +
                      " re-registrations escaped the bound");
  if (verdict.pass) {
    verdict.detail = std::to_string(total) + " re-registrations contained";
  }
  return verdict;
}

Verdict criterion_4() {
  Verdict verdict;
  Rng rng(444);
  int minkowski_checked = 0;
  int minkowski_violations = 0;
  int intersect_checked = 0;
  int intersect_violations = 0;
  int box_checked = 0;
  int box_violations = 0;

  for (Eigen::Index dim = 2; dim <= 6; ++dim) {
    for (int rep = 0; rep < 5; ++rep) {
      // Minkowski sum
      const int n_ops = 2 + static_cast<int>(rng.uniform(0, 3));
      std::vector<Ellipsoid> ops;
      for (int k = 0; k < n_ops; ++k) {
        Eigen::VectorXd c(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
          c(i) = rng.uniform(-2, 2);
        }
        ops.emplace_back(c, random_spd(rng, dim, 0.1, 4.0));
      }
      const Ellipsoid sum = minkowski_sum_outer(ops);
      for (int s = 0; s < 4000; ++s) {
        Eigen::VectorXd total = Eigen::VectorXd::Zero(dim);
        for (const Ellipsoid& op : ops) {
          total += sample_in(rng, op, s % 2 == 0);
        }
        if (!sum.contains(total)) {
          ++minkowski_violations;
        }
        ++minkowski_checked;
      }

      // intersection
      Eigen::VectorXd c1(dim);
      Eigen::VectorXd c2(dim);
      for (Eigen::Index i = 0; i < dim; ++i) {
        c1(i) = rng.uniform(-0.5, 0.5);
        c2(i) = c1(i) + rng.uniform(-0.3, 0.3);
      }
      const Ellipsoid e1(c1, random_spd(rng, dim, 0.5, 3.0));
      const Ellipsoid e2(c2, random_spd(rng, dim, 0.5, 3.0));
      const Ellipsoid fused = intersect_outer(e1, e2);
      int kept = 0;
      for (int s = 0; kept < 4000 && s < 100000; ++s) {
        const Eigen::VectorXd x = sample_in(rng, e1, false);
        if (!e2.contains(x)) {
          continue;
        }
        ++kept;
        if (!fused.contains(x)) {
          ++intersect_violations;
        }
        ++intersect_checked;
      }

      // box conversion
      Box box;
      for (Eigen::Index i = 0; i < dim; ++i) {
        const double lo = rng.uniform(-2, 1);
        box.intervals.push_back({lo, lo + rng.uniform(0.05, 2.0)});
      }
      const Ellipsoid outer = box_to_ellipsoid(box);
      for (int s = 0; s < 4000; ++s) {
        Eigen::VectorXd x(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
          const auto& iv = box.intervals[static_cast<std::size_t>(i)];
          x(i) = s % 2 == 0 ? (rng.uniform(0, 1) < 0.5 ? iv.lower : iv.upper)
                            : rng.uniform(iv.lower, iv.upper);
        }
        if (!outer.contains(x)) {
          ++box_violations;
        }
        ++box_checked;
      }
    }
  }

  verdict.require(minkowski_checked >= 100000 && minkowski_violations == 0,
                  "minkowski: " + std::to_string(minkowski_violations) + " of " +
                      std::to_string(minkowski_checked));
  verdict.require(intersect_checked >= 90000 && intersect_violations == 0,
                  "intersection: " + std::to_string(intersect_violations) + " of " +
                      std::to_string(intersect_checked));
  verdict.require(box_checked >= 100000 && box_violations == 0,
                  "box: " + std::to_string(box_violations) + " of " +
                      std::to_string(box_checked));
  if (verdict.pass) {
    verdict.detail = "0 violations over " +
                     std::to_string(minkowski_checked + intersect_checked + box_checked) +
                     " samples, dimensions 2-6";
  }
  return verdict;
}

Verdict criterion_5() {
  Verdict verdict;
  Rng rng(555);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index dim = 2 + static_cast<Eigen::Index>(rng.uniform(0, 5));
    Eigen::VectorXd c1(dim);
    Eigen::VectorXd c2(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      c1(i) = rng.uniform(-0.5, 0.5);
      c2(i) = c1(i) + rng.uniform(-0.4, 0.4);
    }
    const Ellipsoid e1(c1, random_spd(rng, dim, 0.5, 3.0));
    const Ellipsoid e2(c2, random_spd(rng, dim, 0.5, 3.0));
    const double golden = intersect_outer(e1, e2).trace();
    const double grid = grid_min_trace(e1, e2, 10000);
    const double rel = std::abs(golden - grid) / grid;
    worst = std::max(worst, rel);
    verdict.require(rel <= 1e-6, "pair " + std::to_string(rep) + " relative gap " +
                                     fmt(rel));
  }
  if (verdict.pass) {
    verdict.detail = "100 pairs, worst relative trace gap " + fmt(worst);
  }
  return verdict;
}

Verdict criterion_6() {
  Verdict verdict;
  // One dataset at the smallest grid noise; declared bounds sweep the grid.
  RunConfig sim_config = default_run_config();
  sim_config.sim.duration = 20.0;
  sim_config.sim.seed = 77;
  sim_config.lidar.range_bound = 0.04;
  sim_config.lidar.bearing_bound_deg = 0.05;
  const Dataset data = generate_dataset(sim_config);
  const auto truth = tum_to_ground_truth(data.ground_truth);

  std::string table;
  for (const double bearing_deg : {0.05, 0.3, 1.2}) {
    double previous = 0.0;
    for (const double range_bound : {0.04, 0.08, 0.12, 0.20}) {
      RunConfig run_config = sim_config;
      run_config.lidar.range_bound = range_bound;
      run_config.lidar.bearing_bound_deg = bearing_deg;
      const RunResult run = run_pipeline(data.imu, data.scans, run_config);
      const double value = ail(run.records);
      table += " (" + fmt(bearing_deg) + "deg," + fmt(range_bound) + "m)=" + fmt(value);
      verdict.require(value >= previous,
                      "AIL dropped from " + fmt(previous) + " to " + fmt(value) +
                          " at b_r = " + fmt(range_bound) + ", b_phi = " +
                          fmt(bearing_deg) + " deg");
      previous = value;
      const double cr = cover_rate(run.records, truth);
      verdict.require(cr == 100.0, "CR " + fmt(cr) + "% at b_r = " + fmt(range_bound));
    }
  }
  if (verdict.pass) {
    verdict.detail = "AIL non-decreasing in b_r at each b_phi:" + table;
  }
  return verdict;
}

Verdict criterion_7() {
  Verdict verdict;
  RunConfig sim_config = default_run_config();
  sim_config.sim.duration = 20.0;
  sim_config.sim.seed = 88;
  const Dataset data = generate_dataset(sim_config);

  RunConfig base = sim_config;
  const RunResult run_base = run_pipeline(data.imu, data.scans, base);
  const double ail_base = ail(run_base.records);

  RunConfig quadrupled = sim_config;
  quadrupled.imu.accel_bound = 4.0 * sim_config.imu.accel_bound;
  const RunResult run_quad = run_pipeline(data.imu, data.scans, quadrupled);
  const double ail_quad = ail(run_quad.records);

  const double change = std::abs(ail_quad - ail_base) / ail_base;
  verdict.require(change < 0.10, "AIL changed by " + fmt(100 * change) + "%");
  verdict.detail = "AIL " + fmt(ail_base) + " m -> " + fmt(ail_quad) + " m (" +
                   fmt(100 * change) + "% change) when b_a quadruples";
  return verdict;
}

Verdict criterion_8() {
  Verdict verdict;
  RunConfig config = default_run_config();
  config.sim.duration = 60.0;
  config.sim.seed = 99;
  const Episode episode = run_episode(config, config);

  double total_ms = 0.0;
  double resolve_and_filter_ms = 0.0;
  double mean_points = 0.0;
  int updates = 0;
  for (const TimingRow& row : episode.run.timing) {
    if (row.icp_ms == 0.0) {
      continue;  // bootstrap insertion
    }
    total_ms += row.total_ms;
    resolve_and_filter_ms += row.uncertainty_ms + row.filter_ms;
    mean_points += row.points;
    ++updates;
  }
  const double mean_total = total_ms / updates;
  const double fraction = resolve_and_filter_ms / total_ms;
  mean_points /= updates;

  verdict.require(mean_points > 1000.0,
                  "only " + fmt(mean_points) + " effective points per scan");
  verdict.require(mean_total < 150.0, "mean update " + fmt(mean_total) + " ms");
  verdict.require(fraction < 0.30, "uncertainty + filter take " +
                                       fmt(100 * fraction) + "% of the update");
  verdict.detail = fmt(mean_points) + " points/scan, mean update " + fmt(mean_total) +
                   " ms, uncertainty+filter " + fmt(100 * fraction) + "%";
  return verdict;
}

Verdict criterion_9() {
  Verdict verdict;
  // The dataset carries (numerically) zero sensor noise; a dense beam grid
  // keeps plane neighborhoods well conditioned at the tight tolerances of
  // the noiseless regime.
  RunConfig sim_config = default_run_config();
  sim_config.sim.duration = 20.0;
  sim_config.sim.seed = 5;
  sim_config.lidar.beams.azimuth_count = 256;
  sim_config.lidar.beams.elevation_count = 16;
  sim_config.lidar.range_bound = 1e-9;
  sim_config.lidar.bearing_bound_deg = 1e-9;
  sim_config.imu.accel_bound = 1e-9;
  sim_config.imu.gyro_bound = 1e-9;

  // The declared bounds still have to cover the zero-order-hold residual of
  // the IMU integration (the only "noise" left in a noiseless dataset);
  // everything else drops to the floor.
  RunConfig run_config = sim_config;
  run_config.imu.accel_bound = 5e-3;
  run_config.imu.gyro_bound = 2e-3;
  run_config.lidar.range_bound = 1e-6;
  run_config.lidar.bearing_bound_deg = 1e-6;
  run_config.icp.compensation_bound = 0.0;
  run_config.map.plane_tol = 1e-3;
  run_config.icp.residual_cap = 5e-3;

  const Episode episode = run_episode(sim_config, run_config);
  const double trajectory_error = ate(episode.records, episode.truth);
  verdict.require(trajectory_error < 1e-3,
                  "ATE " + fmt(trajectory_error) + " m on noiseless data");

  double worst_radius = 0.0;
  for (const TrajectoryRecord& rec : episode.records) {
    for (int i = 0; i < 3; ++i) {
      worst_radius = std::max(worst_radius,
                              std::sqrt(std::max(0.0, rec.protection_translation(i, i))));
    }
  }
  verdict.require(worst_radius < 0.01,
                  "protection radius " + fmt(worst_radius) + " m is above floor scale");
  verdict.detail = "ATE " + fmt(trajectory_error) + " m, max protection radius " +
                   fmt(worst_radius) + " m";
  return verdict;
}

Verdict criterion_10() {
  Verdict verdict;
  const auto record_at = [](double t, const Eigen::Vector3d& p,
                            const Eigen::Matrix3d& shape) {
    TrajectoryRecord r;
    r.timestamp = t;
    r.translation = p;
    r.protection_translation = shape;
    return r;
  };
  const auto truth_at = [](double t, const Eigen::Vector3d& p) {
    GroundTruthSample s;
    s.timestamp = t;
    s.translation = p;
    return s;
  };
  const Eigen::Matrix3d eye = Eigen::Matrix3d::Identity();

  // cover rate: 100 / 0 / 50
  std::vector<TrajectoryRecord> est{record_at(0.0, {0, 0, 0}, eye),
                                    record_at(0.1, {0, 0, 0}, eye)};
  std::vector<GroundTruthSample> gt{truth_at(0.0, {0, 0, 0}), truth_at(0.1, {0, 0, 0})};
  verdict.require(cover_rate(est, gt) == 100.0, "CR(est == gt) != 100");

  std::vector<TrajectoryRecord> one{record_at(0.0, {0, 0, 0}, eye)};
  std::vector<GroundTruthSample> off{truth_at(0.0, {2, 0, 0})};
  verdict.require(cover_rate(one, off) == 0.0, "CR(single outside) != 0");

  std::vector<GroundTruthSample> half{truth_at(0.0, {0.5, 0, 0}),
                                      truth_at(0.1, {2, 0, 0})};
  verdict.require(cover_rate(est, half) == 50.0, "CR(one in, one out) != 50");

  // AIL: 1.0 m deterministic, 0.6 m three-sigma, 4.0 m mixed diagonal
  std::vector<TrajectoryRecord> quarter{
      record_at(0.0, {0, 0, 0}, Eigen::Vector3d(0.25, 0.25, 0.25).asDiagonal())};
  verdict.require(std::abs(ail(quarter) - 1.0) < 1e-12, "AIL quarter-shape != 1.0");
  std::vector<TrajectoryRecord> sigma{record_at(0.0, {0, 0, 0}, 0.01 * eye)};
  verdict.require(std::abs(ail(sigma, AilMode::three_sigma) - 0.6) < 1e-12,
                  "three-sigma AIL != 0.6");
  std::vector<TrajectoryRecord> mixed{
      record_at(0.0, {0, 0, 0}, Eigen::Vector3d(1, 4, 9).asDiagonal())};
  verdict.require(std::abs(ail(mixed) - 4.0) < 1e-12, "AIL diag(1,4,9) != 4.0");

  // ATE: identical -> 0; constant offset -> 0.3; aligned -> 0
  std::vector<GroundTruthSample> shifted{truth_at(0.0, {0.3, 0, 0}),
                                         truth_at(0.1, {0.3, 0, 0})};
  verdict.require(ate(est, gt) == 0.0, "ATE(est, est) != 0");
  verdict.require(std::abs(ate(est, shifted) - 0.3) < 1e-12, "ATE offset != 0.3");
  AteOptions aligned;
  aligned.align = true;
  verdict.require(ate(est, shifted, aligned) < 1e-9, "aligned ATE != 0");

  // end-to-end coverage membership cases
  std::vector<TrajectoryRecord> loop{record_at(0.0, {0, 0, 0}, eye),
                                     record_at(0.1, {1, 0, 0}, 4.0 * eye)};
  std::vector<GroundTruthSample> loop_gt{truth_at(0.0, {0, 0, 0}),
                                         truth_at(0.1, {0, 0, 0})};
  const EndToEndReport covered = end_to_end_error(loop, loop_gt);
  verdict.require(std::abs(covered.error - 1.0) < 1e-12 && covered.covered,
                  "end-to-end (1,0,0) in 4I should be covered");
  std::vector<TrajectoryRecord> wide{record_at(0.0, {0, 0, 0}, eye),
                                     record_at(0.1, {3, 0, 0}, eye)};
  const EndToEndReport uncovered = end_to_end_error(wide, loop_gt);
  verdict.require(std::abs(uncovered.error - 3.0) < 1e-12 && !uncovered.covered,
                  "end-to-end (3,0,0) in I should not be covered");

  if (verdict.pass) {
    verdict.detail = "all metric example rows exact";
  }
  return verdict;
}

const std::map<int, std::pair<std::string, std::function<Verdict()>>> kCriteria{
    {1, {"coverage: translation CR = 100.0% over 20 seeded 60 s episodes "
         "(adversarial included), <= 2 min each", criterion_1}},
    {2, {"ICP increment Jacobian matches finite-difference re-registration "
         "(rel. error < 1e-4, 50 triples)", criterion_2}},
    {3, {"ICP increment bound contains 500 Monte-Carlo re-registrations "
         "per scene, 5 scenes", criterion_3}},
    {4, {"set algebra containment: Minkowski / intersection / box, 1e5 "
         "samples each, dims 2-6", criterion_4}},
    {5, {"golden-section fusion trace within 1e-6 of 1e4-point grid "
         "search, 100 pairs", criterion_5}},
    {6, {"AIL monotone non-decreasing in the range bound at each bearing "
         "bound", criterion_6}},
    {7, {"AIL insensitive to quadrupling the accelerometer bound (< 10%)",
         criterion_7}},
    {8, {"timing: mean update < 150 ms at ~1500 points, uncertainty + "
         "filter < 30% of it", criterion_8}},
    {9, {"noiseless exactness: ATE < 1e-3 m and floor-scale protection",
         criterion_9}},
    {10, {"metric unit rows: CR 0/50/100%, AIL 1.0/0.6/4.0 m, ATE and "
          "end-to-end cases", criterion_10}},
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  if (argc < 2 || std::string(argv[1]) == "all") {
    for (const auto& [number, entry] : kCriteria) {
      (void)entry;
      selected.push_back(number);
    }
  } else {
    const int n = std::atoi(argv[1]);
    if (kCriteria.find(n) == kCriteria.end()) {
      std::fprintf(stderr, "unknown criterion %s (1-10 or all)\n", argv[1]);
      return 2;
    }
    selected.push_back(n);
  }

  bool all_pass = true;
  for (const int number : selected) {
    const auto& [description, fn] = kCriteria.at(number);
    const auto start = std::chrono::steady_clock::now();
    Verdict verdict;
    try {
      verdict = fn();
    } catch (const std::exception& err) {
      verdict.pass = false;
      verdict.detail = std::string("exception: ") + err.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] criterion %d: %s - %s (%.1f s)\n",
                verdict.pass ? "PASS" : "FAIL", number, description.c_str(),
                verdict.detail.c_str(), seconds);
    std::fflush(stdout);
    all_pass = all_pass && verdict.pass;
  }
  return all_pass ? 0 : 1;
}
