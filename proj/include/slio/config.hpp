#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>

#include "slio/evaluation.hpp"
#include "slio/filter.hpp"
#include "slio/mapping.hpp"
#include "slio/registration.hpp"
#include "slio/sensing.hpp"
#include "slio/simulation.hpp"

namespace slio {

/// Exit code 2: malformed or out-of-range configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LidarConfig {
  double range_bound = 0.08;                            // meters
  double bearing_bound_deg = 0.1;                       // degrees
  BeamPattern beams;

  LidarNoiseSpec noise_spec() const {
    return LidarNoiseSpec{range_bound,
                          bearing_bound_deg * std::numbers::pi / 180.0};
  }
};

struct ImuConfig {
  double accel_bound = 0.2;   // m/s^2
  double gyro_bound = 0.07;   // rad/s
  double bias_scale = 0.1;    // bias residual bound / noise bound

  ImuNoiseSpec noise_spec() const {
    return ImuNoiseSpec::with_default_bias_shapes(accel_bound, gyro_bound, bias_scale);
  }
};

struct IcpConfig {
  int max_iterations = 30;
  double converge_tol = 1e-6;
  int min_correspondences = 10;
  double cond_max = 1e8;
  double gate_tol = 1e-3;
  double compensation_bound = 1e-4;  // per twist axis; shape diag(3 b^2)
  bool single_term_compensation = false;
  double residual_cap = 0.4;  // point-to-plane association gate, meters
};

struct MapConfig {
  double voxel_size = 0.5;
  int knn = 5;
  double max_corr_dist = 1.0;
  double plane_tol = 0.05;
  double min_spread = 0.1;
  double local_map_radius = 50.0;
};

struct FilterConfig {
  double dt_max = 0.02;
  std::string disjoint_policy = "skip";  // skip | strict
  double velocity_max_gap = 0.15;        // seconds between chained observations
  double gravity = 9.81;
};

struct InitConfig {
  double static_duration = 1.5;  // seconds of IMU consumed for initialization
  int min_samples = 200;
  double max_accel_std = 0.3;
};

struct SimConfig {
  std::string trajectory = "circle";  // stationary | line | circle | waypoints
  double duration = 30.0;
  double still_time = 2.0;
  double ramp_time = 3.0;
  double imu_rate = 200.0;
  double lidar_rate = 10.0;
  double circle_radius = 4.0;
  double circle_period = 20.0;
  double line_speed = 1.0;
  std::uint64_t seed = 1;
  bool adversarial = false;
  double sensor_height = 1.5;
  Eigen::Vector3d accel_bias = Eigen::Vector3d::Zero();  // injected truth
  Eigen::Vector3d gyro_bias = Eigen::Vector3d::Zero();

  TrajectorySpec trajectory_spec() const;
};

struct EvalConfig {
  double assoc_tol = 0.01;
  std::string ail_mode = "deterministic";  // deterministic | three_sigma
  bool align = false;
};

struct RunConfig {
  LidarConfig lidar;
  ImuConfig imu;
  IcpConfig icp;
  MapConfig map;
  FilterConfig filter;
  InitConfig init;
  SimConfig sim;
  EvalConfig eval;
  int threads = 0;

  IcpParams icp_params() const;
  UncertaintyParams uncertainty_params() const;
  UpdateParams update_params() const;
};

/// Parses the key = value configuration; `name` labels error messages.
/// Unknown sections or keys and malformed values raise ConfigError with the
/// offending line number; out-of-range fields raise ConfigError naming the
/// field.
RunConfig parse_config(std::istream& in, const std::string& name = "<config>");

RunConfig load_config(const std::filesystem::path& path);

/// Range checks every field; throws ConfigError naming the first offender.
void validate_config(const RunConfig& config);

/// The default configuration serialized as parseable text.
std::string default_config_text();

}  // namespace slio
