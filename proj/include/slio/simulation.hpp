#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "slio/filter.hpp"
#include "slio/sensing.hpp"

namespace slio {

/// Bounded planar patch: orthonormal in-plane axes and half extents around
/// the anchor.
struct PlanePatch {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d anchor = Eigen::Vector3d::Zero();
  Eigen::Vector3d axis_u = Eigen::Vector3d::UnitX();
  Eigen::Vector3d axis_v = Eigen::Vector3d::UnitY();
  double half_u = 1.0;
  double half_v = 1.0;
};

struct World {
  std::vector<PlanePatch> patches;
};

/// 20 x 20 m room (floor at -sensor_height so trajectories start at the
/// origin) with four interior panels at mixed orientations; any interior
/// pose sees at least three non-parallel planes.
World default_room_world(double sensor_height = 1.5);

/// Plane z = plane_z only; used by focused tests.
World single_plane_world(double plane_z);

class TrajectoryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class TrajectoryKind { stationary, line, circle, waypoints };

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::circle;
  double duration = 30.0;     // total, seconds
  double still_time = 2.0;    // stationary prefix for static initialization
  double ramp_time = 3.0;     // smooth speed ramp after the still prefix
  double imu_rate = 200.0;    // Hz
  double lidar_rate = 10.0;   // Hz

  // circle: orbit in the z = 0 plane starting at the origin heading +x.
  double circle_radius = 4.0;
  double circle_period = 20.0;

  // line: straight run from the origin.
  Eigen::Vector3d line_direction = Eigen::Vector3d::UnitX();
  double line_speed = 1.0;

  // waypoints: piecewise quintic segments, at rest at every waypoint,
  // constant orientation. First waypoint must be the origin.
  std::vector<Eigen::Vector3d> waypoints;
  double waypoint_segment_time = 5.0;
};

/// Ground truth at one IMU instant: exact state plus the analytic world
/// acceleration and body angular rate.
struct TruthSample {
  NavState state;
  Eigen::Vector3d accel_world = Eigen::Vector3d::Zero();
  Eigen::Vector3d gyro_body = Eigen::Vector3d::Zero();
};

/// Samples a twice-differentiable pose curve at the IMU rate.
/// Throws TrajectoryError on inconsistent specs.
std::vector<TruthSample> simulate_trajectory(const TrajectorySpec& spec);

struct BeamPattern {
  int azimuth_count = 144;
  int elevation_count = 14;
  double elevation_min = -20.0 * std::numbers::pi / 180.0;
  double elevation_max = 20.0 * std::numbers::pi / 180.0;
  double min_range = 0.1;
  double max_range = 120.0;
};

/// Deterministic bounded-noise generator (splitmix64); identical seeds give
/// bitwise-identical streams on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  /// Uniform over the disk of the given radius; boundary = true samples the
  /// circle of exactly that radius (adversarial mode).
  Eigen::Vector2d disk(double radius, bool boundary);
  /// Per-axis uniform in [-bound, bound]; boundary = true samples +/-bound.
  Eigen::Vector3d box3(double bound, bool boundary);

 private:
  std::uint64_t state_;
};

/// IMU stream with injected biases and per-axis noise drawn inside (or, in
/// adversarial mode, on) the declared bounds.
std::vector<ImuSample> synthesize_imu(std::span<const TruthSample> truth,
                                      const ImuBiases& true_biases,
                                      const ImuNoiseSpec& noise,
                                      const Eigen::Vector3d& gravity, std::uint64_t seed,
                                      bool adversarial = false);

/// Casts the beam grid from the true sensor pose, keeps first patch hits,
/// and perturbs range and bearing inside (or on) the declared bounds.
/// Beams that miss every patch are dropped.
Scan synthesize_scan(const NavState& truth, const World& world,
                     const LidarNoiseSpec& noise, const BeamPattern& pattern,
                     const Extrinsics& extrinsics, std::uint64_t seed,
                     bool adversarial = false);

struct RayHit {
  double range = 0.0;
  std::size_t patch_index = 0;
};

std::optional<RayHit> raycast(const World& world, const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& direction, double min_range,
                              double max_range);

}  // namespace slio
