#include "slio/pipeline.hpp"

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <fstream>

#include "slio/filter.hpp"
#include "slio/mapping.hpp"
#include "slio/registration.hpp"
#include "slio/simulation.hpp"

namespace slio {

namespace {

double ms_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   start)
      .count();
}

}  // namespace

Dataset generate_dataset(const RunConfig& config) {
  const TrajectorySpec spec = config.sim.trajectory_spec();
  const std::vector<TruthSample> truth = simulate_trajectory(spec);
  const World world = default_room_world(config.sim.sensor_height);
  const Eigen::Vector3d gravity(0.0, 0.0, -config.filter.gravity);
  const ImuBiases biases{config.sim.accel_bias, config.sim.gyro_bias};

  Dataset data;
  data.imu = synthesize_imu(truth, biases, config.imu.noise_spec(), gravity,
                            config.sim.seed, config.sim.adversarial);

  const double scan_period = 1.0 / config.sim.lidar_rate;
  const auto scan_count =
      static_cast<std::size_t>(std::llround(config.sim.duration * config.sim.lidar_rate));
  const Extrinsics extrinsics;
  std::size_t truth_idx = 0;
  for (std::size_t s = 0; s < scan_count; ++s) {
    const double t = static_cast<double>(s) * scan_period;
    while (truth_idx + 1 < truth.size() &&
           std::abs(truth[truth_idx + 1].state.timestamp - t) <
               std::abs(truth[truth_idx].state.timestamp - t)) {
      ++truth_idx;
    }
    NavState at_scan = truth[truth_idx].state;
    at_scan.timestamp = t;
    data.scans.push_back(synthesize_scan(at_scan, world, config.lidar.noise_spec(),
                                         config.lidar.beams, extrinsics,
                                         config.sim.seed ^ (0x5C4A5ull + s),
                                         config.sim.adversarial));
  }

  data.ground_truth.reserve(truth.size());
  for (const TruthSample& ts : truth) {
    data.ground_truth.push_back(TimedPose{ts.state.timestamp, ts.state.pose()});
  }
  return data;
}

void cmd_simulate(const RunConfig& config, const std::filesystem::path& out_dir) {
  const Dataset data = generate_dataset(config);
  std::error_code ec;
  std::filesystem::create_directories(out_dir / "scans", ec);
  if (ec) {
    throw DataError("cannot create output directory " + (out_dir / "scans").string() +
                    ": " + ec.message());
  }
  write_imu_csv(out_dir / "imu.csv", data.imu);
  for (std::size_t i = 0; i < data.scans.size(); ++i) {
    write_scan_csv(out_dir / "scans" / scan_filename(static_cast<int>(i)),
                   data.scans[i]);
  }
  write_tum(out_dir / "ground_truth.tum", data.ground_truth);
}

RunResult run_pipeline(std::span<const ImuSample> imu, std::span<const Scan> scans,
                       const RunConfig& config) {
  if (imu.size() < 2) {
    throw DataError("IMU stream has fewer than two samples");
  }

  // Static initialization window.
  const double init_end = imu.front().timestamp + config.init.static_duration;
  std::size_t first_live = 0;
  while (first_live < imu.size() && imu[first_live].timestamp < init_end) {
    ++first_live;
  }
  const StaticInitResult init = static_initialize(
      imu.subspan(0, first_live), config.filter.gravity,
      StaticInitParams{config.init.min_samples, config.init.max_accel_std});
  if (first_live >= imu.size()) {
    throw DataError("IMU stream ends inside the static initialization window");
  }

  const ImuNoiseSpec noise = config.imu.noise_spec();
  const ImuBiases biases{init.accel_bias, init.gyro_bias};
  const Eigen::Vector3d gravity = init.gravity_world;

  NavState state;
  state.rotation = init.initial_rotation;
  state.timestamp = imu[first_live].timestamp;
  StateBounds bounds = initial_state_bounds(noise, config.filter.gravity);
  std::vector<LocalMapRecord> history;
  std::optional<CachedTranslationObs> velocity_cache;

  PointMap map(std::max(config.map.voxel_size, config.map.max_corr_dist));
  const LidarNoiseSpec lidar_noise = config.lidar.noise_spec();
  const Extrinsics extrinsics;
  const IcpParams icp_params = config.icp_params();
  const UncertaintyParams unc_params = config.uncertainty_params();
  const UpdateParams update_params = config.update_params();
  const PredictParams predict_params{config.filter.dt_max, kPsdFloor};

  RunResult result;
  bool map_bootstrapped = false;

  const auto emit_record = [&](double t) {
    const ProtectionLevel global = propagate_global(bounds, history);
    TrajectoryRecord rec;
    rec.timestamp = t;
    rec.translation = state.translation;
    rec.rotation = state.rotation;
    rec.protection_translation = global.translation_set.shape();
    rec.protection_rotation = global.rotation_set.shape();
    result.records.push_back(rec);
  };

  const auto process_scan = [&](const Scan& scan) {
    ++result.scans_processed;
    if (scan.points.empty()) {
      ++result.updates_gated;
      emit_record(scan.timestamp);
      return;
    }
    const auto t_start = std::chrono::steady_clock::now();

    std::vector<BoundedPoint> points;
    points.reserve(scan.points.size());
    for (const PointMeasurement& m : scan.points) {
      points.push_back(point_noise_ellipsoid(m, lidar_noise, extrinsics));
    }

    TimingRow timing;
    timing.timestamp = scan.timestamp;

    if (!map_bootstrapped) {
      std::vector<Eigen::Vector3d> world_points;
      world_points.reserve(points.size());
      const Pose pose = state.pose();
      for (const BoundedPoint& bp : points) {
        world_points.push_back(pose * bp.point);
      }
      map.insert_scan(world_points, config.map.voxel_size);
      map.start_new_local_map(state.translation);
      map_bootstrapped = true;
      timing.points = static_cast<int>(points.size());
      timing.total_ms = ms_since(t_start);
      result.timing.push_back(timing);
      emit_record(scan.timestamp);
      return;
    }

    bool accepted = false;
    const auto t_icp = std::chrono::steady_clock::now();
    IcpResult icp;
    try {
      icp = icp_point_to_plane(points, map, state.pose(), icp_params);
      accepted = gate_icp(icp, config.icp.gate_tol);
    } catch (const RegistrationError&) {
      accepted = false;
    }
    timing.icp_ms = ms_since(t_icp);
    timing.points = static_cast<int>(icp.correspondences.size());

    if (accepted) {
      const auto t_unc = std::chrono::steady_clock::now();
      const IcpUncertainty unc = resolve_icp_uncertainty(icp, unc_params);
      timing.uncertainty_ms = ms_since(t_unc);

      const auto t_filter = std::chrono::steady_clock::now();
      std::optional<CachedTranslationObs> previous;
      double dt_obs = 0.0;
      if (velocity_cache.has_value()) {
        dt_obs = scan.timestamp - velocity_cache->timestamp;
        if (dt_obs > 0.0 && dt_obs <= config.filter.velocity_max_gap) {
          previous = velocity_cache;
        }
      }
      const UpdateOutcome outcome = update(state, bounds, icp.pose, unc.shape_xi,
                                           previous, dt_obs, update_params);
      state = outcome.state;
      bounds = outcome.bounds;
      velocity_cache = outcome.observation;
      ++result.updates_accepted;
      timing.filter_ms = ms_since(t_filter);

      std::vector<Eigen::Vector3d> world_points;
      world_points.reserve(points.size());
      const Pose pose = state.pose();
      for (const BoundedPoint& bp : points) {
        world_points.push_back(pose * bp.point);
      }
      map.insert_scan(world_points, config.map.voxel_size);
    } else {
      ++result.updates_gated;
    }

    if (auto record = maybe_close_local_map(state.translation, map.local_map_origin(),
                                            bounds, static_cast<int>(history.size()) + 1,
                                            config.map.local_map_radius)) {
      history.push_back(*record);
      map.start_new_local_map(state.translation);
      ++result.local_maps_closed;
    }

    timing.total_ms = ms_since(t_start);
    result.timing.push_back(timing);
    emit_record(scan.timestamp);
  };

  std::size_t scan_idx = 0;
  while (scan_idx < scans.size() &&
         scans[scan_idx].timestamp < state.timestamp - 1e-9) {
    ++scan_idx;  // scans inside the initialization window
  }

  // Updates fuse at the nearest preceding IMU step: a scan is processed at
  // the last predicted state before its timestamp (exact alignment for the
  // simulator; the alignment rule for recorded datasets).
  for (std::size_t k = first_live; k + 1 < imu.size(); ++k) {
    const double t_next = imu[k + 1].timestamp;
    while (scan_idx < scans.size() && scans[scan_idx].timestamp < t_next - 1e-9) {
      process_scan(scans[scan_idx]);
      ++scan_idx;
    }
    const double dt = t_next - imu[k].timestamp;
    std::tie(state, bounds) =
        predict(state, bounds, imu[k], biases, noise, dt, gravity, predict_params);
  }
  while (scan_idx < scans.size()) {
    process_scan(scans[scan_idx]);
    ++scan_idx;
  }

  result.map_cloud = map.points_snapshot();
  return result;
}

RunResult cmd_run(const std::filesystem::path& dataset_dir, const RunConfig& config,
                  const std::filesystem::path& out_dir) {
  const std::vector<ImuSample> imu = read_imu_csv(dataset_dir / "imu.csv");
  std::vector<Scan> scans;
  for (const auto& file : list_scan_files(dataset_dir / "scans")) {
    scans.push_back(read_scan_csv(file));
  }

  RunResult result = run_pipeline(imu, scans, config);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw DataError("cannot create output directory " + out_dir.string() + ": " +
                    ec.message());
  }

  std::vector<TimedPose> est;
  std::vector<ProtectionRow> protection;
  est.reserve(result.records.size());
  protection.reserve(result.records.size());
  for (const TrajectoryRecord& rec : result.records) {
    est.push_back(TimedPose{rec.timestamp, Pose{rec.rotation, rec.translation}});
    protection.push_back(ProtectionRow{rec.timestamp, rec.protection_translation});
  }
  write_tum(out_dir / "est.tum", est);
  write_protection_csv(out_dir / "protection.csv", protection);
  write_timing_csv(out_dir / "timing.csv", result.timing);

  std::ofstream xyz(out_dir / "map.xyz");
  if (!xyz) {
    throw DataError("cannot write " + (out_dir / "map.xyz").string());
  }
  char line[128];
  for (const Eigen::Vector3d& p : result.map_cloud) {
    std::snprintf(line, sizeof(line), "%.9g %.9g %.9g\n", p.x(), p.y(), p.z());
    xyz << line;
  }
  return result;
}

EvalReport evaluate_records(std::span<const TrajectoryRecord> records,
                            std::span<const GroundTruthSample> truth,
                            const EvalConfig& eval) {
  EvalReport report;
  report.cover_rate_pct = cover_rate(records, truth, eval.assoc_tol);
  report.ail_m = ail(records, eval.ail_mode == "three_sigma" ? AilMode::three_sigma
                                                             : AilMode::deterministic);
  AteOptions ate_options;
  ate_options.align = eval.align;
  ate_options.assoc_tol = eval.assoc_tol;
  report.ate_m = ate(records, truth, ate_options);
  const EndToEndReport loop = end_to_end_error(records, truth, eval.assoc_tol);
  report.end_to_end_m = loop.error;
  report.end_covered = loop.covered;

  std::vector<double> est_times;
  est_times.reserve(records.size());
  for (const TrajectoryRecord& r : records) {
    est_times.push_back(r.timestamp);
  }
  std::vector<double> gt_times;
  gt_times.reserve(truth.size());
  for (const GroundTruthSample& s : truth) {
    gt_times.push_back(s.timestamp);
  }
  const AssociationResult assoc = associate(est_times, gt_times, eval.assoc_tol);
  report.associated = assoc.pairs.size();
  report.dropped = assoc.dropped_estimates;
  return report;
}

std::vector<TrajectoryRecord> load_estimate_records(
    const std::filesystem::path& est_tum, const std::filesystem::path& protection_csv) {
  const std::vector<TimedPose> est = read_tum(est_tum);
  const std::vector<ProtectionRow> protection = read_protection_csv(protection_csv);
  if (est.size() != protection.size()) {
    throw DataError(est_tum.string() + " has " + std::to_string(est.size()) +
                    " rows but " + protection_csv.string() + " has " +
                    std::to_string(protection.size()));
  }
  std::vector<TrajectoryRecord> records;
  records.reserve(est.size());
  for (std::size_t i = 0; i < est.size(); ++i) {
    if (std::abs(est[i].timestamp - protection[i].timestamp) > 1e-6) {
      throw DataError("timestamp mismatch between " + est_tum.string() + " and " +
                      protection_csv.string() + " at row " + std::to_string(i));
    }
    TrajectoryRecord rec;
    rec.timestamp = est[i].timestamp;
    rec.translation = est[i].pose.translation;
    rec.rotation = est[i].pose.rotation;
    rec.protection_translation = protection[i].shape;
    records.push_back(rec);
  }
  return records;
}

EvalReport cmd_eval(const std::filesystem::path& est_tum,
                    const std::filesystem::path& protection_csv,
                    const std::filesystem::path& gt_tum, const EvalConfig& eval,
                    std::ostream& report, const std::filesystem::path& csv_path) {
  const std::vector<TrajectoryRecord> records =
      load_estimate_records(est_tum, protection_csv);
  const std::vector<GroundTruthSample> truth = tum_to_ground_truth(read_tum(gt_tum));

  const EvalReport out = evaluate_records(records, truth, eval);

  char summary[160];
  std::snprintf(summary, sizeof(summary), "CR[%%]=%.3f AIL[m]=%.3f ATE[m]=%.3f",
                out.cover_rate_pct, out.ail_m, out.ate_m);
  report << "records = " << records.size() << '\n'
         << "associated = " << out.associated << '\n'
         << "dropped = " << out.dropped << '\n'
         << "cover_rate_pct = " << format_g9(out.cover_rate_pct) << '\n'
         << "ail_m = " << format_g9(out.ail_m) << '\n'
         << "ate_m = " << format_g9(out.ate_m) << '\n'
         << "end_to_end_m = " << format_g9(out.end_to_end_m) << '\n'
         << "end_covered = " << (out.end_covered ? "true" : "false") << '\n'
         << "summary = " << summary << '\n';

  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) {
      throw DataError("cannot write " + csv_path.string());
    }
    csv << "t,err_x,err_y,err_z,radius_x,radius_y,radius_z,inside\n";
    std::vector<double> gt_times;
    gt_times.reserve(truth.size());
    for (const GroundTruthSample& s : truth) {
      gt_times.push_back(s.timestamp);
    }
    std::vector<double> est_times;
    est_times.reserve(records.size());
    for (const TrajectoryRecord& r : records) {
      est_times.push_back(r.timestamp);
    }
    const AssociationResult assoc = associate(est_times, gt_times, eval.assoc_tol);
    for (const auto& [ei, gi] : assoc.pairs) {
      const TrajectoryRecord& rec = records[ei];
      const Eigen::Vector3d err = truth[gi].translation - rec.translation;
      const double q = err.dot(rec.protection_translation.ldlt().solve(err));
      csv << format_g9(rec.timestamp) << ',' << format_g9(err.x()) << ','
          << format_g9(err.y()) << ',' << format_g9(err.z()) << ','
          << format_g9(std::sqrt(std::max(0.0, rec.protection_translation(0, 0)))) << ','
          << format_g9(std::sqrt(std::max(0.0, rec.protection_translation(1, 1)))) << ','
          << format_g9(std::sqrt(std::max(0.0, rec.protection_translation(2, 2)))) << ','
          << (q <= 1.0 ? 1 : 0) << '\n';
    }
  }
  return out;
}

}  // namespace slio
