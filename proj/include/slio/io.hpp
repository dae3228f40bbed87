#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "slio/evaluation.hpp"
#include "slio/sensing.hpp"

namespace slio {

/// Exit code 3: missing or malformed data files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numbers in all emitted files use 9 significant digits.
std::string format_g9(double value);

// imu.csv: header `t,ax,ay,az,gx,gy,gz`, SI units.
void write_imu_csv(const std::filesystem::path& path, std::span<const ImuSample> samples);
std::vector<ImuSample> read_imu_csv(const std::filesystem::path& path);

// scans/NNNNNN.csv: header `t,range,bx,by,bz` (range-bearing, LiDAR frame).
// The reader also accepts `x,y,z` / `t,x,y,z` clouds and recomputes the
// range-bearing decomposition (clouds are assumed pre-deskewed).
void write_scan_csv(const std::filesystem::path& path, const Scan& scan);
Scan read_scan_csv(const std::filesystem::path& path, double fallback_timestamp = 0.0);

std::filesystem::path scan_filename(int index);
std::vector<std::filesystem::path> list_scan_files(const std::filesystem::path& dir);

// TUM trajectory files: `t tx ty tz qx qy qz qw`.
struct TimedPose {
  double timestamp = 0.0;
  Pose pose;
};
void write_tum(const std::filesystem::path& path, std::span<const TimedPose> poses);
std::vector<TimedPose> read_tum(const std::filesystem::path& path);

// protection.csv: header `t,p11,p12,p13,p22,p23,p33` (upper triangle of the
// global translation protection shape).
struct ProtectionRow {
  double timestamp = 0.0;
  Eigen::Matrix3d shape = Eigen::Matrix3d::Identity();
};
void write_protection_csv(const std::filesystem::path& path,
                          std::span<const ProtectionRow> rows);
std::vector<ProtectionRow> read_protection_csv(const std::filesystem::path& path);

// timing.csv: per-scan stage timings in milliseconds.
struct TimingRow {
  double timestamp = 0.0;
  int points = 0;
  double icp_ms = 0.0;
  double uncertainty_ms = 0.0;
  double filter_ms = 0.0;
  double total_ms = 0.0;
};
void write_timing_csv(const std::filesystem::path& path, std::span<const TimingRow> rows);
std::vector<TimingRow> read_timing_csv(const std::filesystem::path& path);

std::vector<GroundTruthSample> tum_to_ground_truth(std::span<const TimedPose> poses);

}  // namespace slio
