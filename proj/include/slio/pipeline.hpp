#pragma once

#include <filesystem>
#include <ostream>
#include <vector>

#include "slio/config.hpp"
#include "slio/evaluation.hpp"
#include "slio/io.hpp"

namespace slio {

/// In-memory dataset: IMU stream, scans, and ground truth at IMU rate.
struct Dataset {
  std::vector<ImuSample> imu;
  std::vector<Scan> scans;
  std::vector<TimedPose> ground_truth;
};

Dataset generate_dataset(const RunConfig& config);

/// Writes imu.csv, scans/NNNNNN.csv and ground_truth.tum under out_dir;
/// byte-identical for identical seeds.
void cmd_simulate(const RunConfig& config, const std::filesystem::path& out_dir);

struct RunResult {
  std::vector<TrajectoryRecord> records;
  std::vector<TimingRow> timing;
  std::vector<Eigen::Vector3d> map_cloud;
  int scans_processed = 0;
  int updates_accepted = 0;
  int updates_gated = 0;
  int local_maps_closed = 0;
};

/// The full odometry loop over in-memory data: static initialization,
/// per-IMU-sample prediction, per-scan registration / uncertainty
/// resolution / filter update, map maintenance, and per-scan protection
/// levels. Scans that fail to register or fail the gate leave both the
/// state and the map untouched.
RunResult run_pipeline(std::span<const ImuSample> imu, std::span<const Scan> scans,
                       const RunConfig& config);

/// Reads a dataset directory, runs the pipeline, and writes est.tum,
/// protection.csv, map.xyz and timing.csv under out_dir.
RunResult cmd_run(const std::filesystem::path& dataset_dir, const RunConfig& config,
                  const std::filesystem::path& out_dir);

struct EvalReport {
  double cover_rate_pct = 0.0;
  double ail_m = 0.0;
  double ate_m = 0.0;
  double end_to_end_m = 0.0;
  bool end_covered = false;
  std::size_t associated = 0;
  std::size_t dropped = 0;
};

EvalReport evaluate_records(std::span<const TrajectoryRecord> records,
                            std::span<const GroundTruthSample> truth,
                            const EvalConfig& eval);

/// Joins est.tum with protection.csv rows (index-aligned, timestamps must
/// agree) into evaluation records.
std::vector<TrajectoryRecord> load_estimate_records(
    const std::filesystem::path& est_tum, const std::filesystem::path& protection_csv);

/// Writes the key = value metrics report to `report` and a per-step CSV
/// (error components, protection radii, membership flag) to csv_path.
EvalReport cmd_eval(const std::filesystem::path& est_tum,
                    const std::filesystem::path& protection_csv,
                    const std::filesystem::path& gt_tum, const EvalConfig& eval,
                    std::ostream& report, const std::filesystem::path& csv_path);

/// Per-axis error / protection-envelope plots plus a top-down trajectory
/// plot as standalone SVG files (error_x.svg, error_y.svg, error_z.svg,
/// trajectory.svg).
void cmd_plot(const std::filesystem::path& est_tum,
              const std::filesystem::path& protection_csv,
              const std::filesystem::path& gt_tum, const EvalConfig& eval,
              const std::filesystem::path& out_dir);

}  // namespace slio
