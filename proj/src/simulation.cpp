#include "slio/simulation.hpp"

#include <cmath>

namespace slio {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

PlanePatch make_patch(const Eigen::Vector3d& normal, const Eigen::Vector3d& anchor,
                      const Eigen::Vector3d& axis_u, const Eigen::Vector3d& axis_v,
                      double half_u, double half_v) {
  PlanePatch p;
  p.normal = normal.normalized();
  p.anchor = anchor;
  p.axis_u = axis_u.normalized();
  p.axis_v = axis_v.normalized();
  p.half_u = half_u;
  p.half_v = half_v;
  return p;
}

PlanePatch vertical_panel(double x, double y, double yaw_deg, double half_w,
                          double z_lo, double z_hi) {
  const double yaw = yaw_deg * std::numbers::pi / 180.0;
  const Eigen::Vector3d normal(std::cos(yaw), std::sin(yaw), 0.0);
  const Eigen::Vector3d along(-std::sin(yaw), std::cos(yaw), 0.0);
  const double z_mid = 0.5 * (z_lo + z_hi);
  return make_patch(normal, Eigen::Vector3d(x, y, z_mid), along,
                    Eigen::Vector3d::UnitZ(), half_w, 0.5 * (z_hi - z_lo));
}

// Quintic smoothstep and its derivatives/integral on [0, 1].
double smooth5(double u) { return ((6.0 * u - 15.0) * u + 10.0) * u * u * u; }
double smooth5_d(double u) { return ((30.0 * u - 60.0) * u + 30.0) * u * u; }
double smooth5_dd(double u) { return ((120.0 * u - 180.0) * u + 60.0) * u; }
double smooth5_int(double u) {  // integral of smooth5 from 0 to u
  return ((u - 3.0) * u + 2.5) * u * u * u * u;
}

/// Scalar progress s(t) that is zero until t0, ramps its rate from 0 to
/// `rate` over ramp seconds with a quintic profile, then advances linearly.
struct RampProgress {
  double t0 = 0.0;
  double ramp = 1.0;
  double rate = 1.0;

  double value(double t) const {
    if (t <= t0) {
      return 0.0;
    }
    const double tau = t - t0;
    if (tau < ramp) {
      return rate * ramp * smooth5_int(tau / ramp);
    }
    return rate * ramp * smooth5_int(1.0) + rate * (tau - ramp);
  }
  double deriv(double t) const {
    if (t <= t0) {
      return 0.0;
    }
    const double tau = t - t0;
    return tau < ramp ? rate * smooth5(tau / ramp) : rate;
  }
  double deriv2(double t) const {
    if (t <= t0) {
      return 0.0;
    }
    const double tau = t - t0;
    return tau < ramp ? rate * smooth5_d(tau / ramp) / ramp : 0.0;
  }
};

Rotation yaw_rotation(double yaw) {
  return so3_exp(Eigen::Vector3d(0.0, 0.0, yaw));
}

TruthSample eval_circle(const TrajectorySpec& spec, double t) {
  const double omega = kTau / spec.circle_period;
  const RampProgress progress{spec.still_time, spec.ramp_time, omega};
  const double theta0 = -0.5 * std::numbers::pi;
  const double theta = theta0 + progress.value(t);
  const double theta_d = progress.deriv(t);
  const double theta_dd = progress.deriv2(t);
  const double rad = spec.circle_radius;
  const Eigen::Vector3d center(0.0, rad, 0.0);
  const Eigen::Vector2d dir(std::cos(theta), std::sin(theta));
  const Eigen::Vector2d tangent(-std::sin(theta), std::cos(theta));

  TruthSample s;
  s.state.translation = center + rad * Eigen::Vector3d(dir.x(), dir.y(), 0.0);
  s.state.velocity = rad * theta_d * Eigen::Vector3d(tangent.x(), tangent.y(), 0.0);
  s.accel_world = rad * theta_dd * Eigen::Vector3d(tangent.x(), tangent.y(), 0.0) -
                  rad * theta_d * theta_d * Eigen::Vector3d(dir.x(), dir.y(), 0.0);
  s.state.rotation = yaw_rotation(theta - theta0);
  s.gyro_body = Eigen::Vector3d(0.0, 0.0, theta_d);
  s.state.timestamp = t;
  return s;
}

TruthSample eval_line(const TrajectorySpec& spec, double t) {
  const RampProgress progress{spec.still_time, spec.ramp_time, spec.line_speed};
  const Eigen::Vector3d dir = spec.line_direction.normalized();
  TruthSample s;
  s.state.translation = dir * progress.value(t);
  s.state.velocity = dir * progress.deriv(t);
  s.accel_world = dir * progress.deriv2(t);
  s.state.timestamp = t;
  return s;
}

TruthSample eval_waypoints(const TrajectorySpec& spec, double t) {
  TruthSample s;
  s.state.timestamp = t;
  const double tau = t - spec.still_time;
  const double seg_time = spec.waypoint_segment_time;
  const auto n_segments = spec.waypoints.size() - 1;
  if (tau <= 0.0) {
    s.state.translation = spec.waypoints.front();
    return s;
  }
  const auto seg = static_cast<std::size_t>(tau / seg_time);
  if (seg >= n_segments) {
    s.state.translation = spec.waypoints.back();
    return s;
  }
  const double u = (tau - static_cast<double>(seg) * seg_time) / seg_time;
  const Eigen::Vector3d delta = spec.waypoints[seg + 1] - spec.waypoints[seg];
  s.state.translation = spec.waypoints[seg] + delta * smooth5(u);
  s.state.velocity = delta * smooth5_d(u) / seg_time;
  s.accel_world = delta * smooth5_dd(u) / (seg_time * seg_time);
  return s;
}

}  // namespace

World default_room_world(double sensor_height) {
  const double z_lo = -sensor_height;
  const double z_hi = 5.0 - sensor_height;
  const double z_mid = 0.5 * (z_lo + z_hi);
  const double half_z = 0.5 * (z_hi - z_lo);
  World w;
  w.patches.push_back(make_patch(Eigen::Vector3d::UnitZ(), {0.0, 0.0, z_lo},
                                 Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(),
                                 10.0, 10.0));
  w.patches.push_back(make_patch(-Eigen::Vector3d::UnitZ(), {0.0, 0.0, z_hi},
                                 Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(),
                                 10.0, 10.0));
  w.patches.push_back(make_patch(Eigen::Vector3d::UnitX(), {-10.0, 0.0, z_mid},
                                 Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ(),
                                 10.0, half_z));
  w.patches.push_back(make_patch(-Eigen::Vector3d::UnitX(), {10.0, 0.0, z_mid},
                                 Eigen::Vector3d::UnitY(), Eigen::Vector3d::UnitZ(),
                                 10.0, half_z));
  w.patches.push_back(make_patch(Eigen::Vector3d::UnitY(), {0.0, -10.0, z_mid},
                                 Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitZ(),
                                 10.0, half_z));
  w.patches.push_back(make_patch(-Eigen::Vector3d::UnitY(), {0.0, 10.0, z_mid},
                                 Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitZ(),
                                 10.0, half_z));
  // Interior panels, clear of the default trajectories around the room
  // center, oriented off-axis.
  w.patches.push_back(vertical_panel(7.0, -5.0, 30.0, 1.5, z_lo, z_lo + 4.0));
  w.patches.push_back(vertical_panel(-7.0, -4.0, -50.0, 1.5, z_lo, z_lo + 4.0));
  w.patches.push_back(vertical_panel(6.5, 5.0, 110.0, 1.5, z_lo, z_lo + 4.0));
  w.patches.push_back(vertical_panel(-6.5, 4.5, 75.0, 1.5, z_lo, z_lo + 4.0));
  return w;
}

World single_plane_world(double plane_z) {
  World w;
  w.patches.push_back(make_patch(Eigen::Vector3d::UnitZ(), {0.0, 0.0, plane_z},
                                 Eigen::Vector3d::UnitX(), Eigen::Vector3d::UnitY(),
                                 1e6, 1e6));
  return w;
}

std::vector<TruthSample> simulate_trajectory(const TrajectorySpec& spec) {
  if (spec.duration <= 0.0 || spec.imu_rate <= 0.0 || spec.lidar_rate <= 0.0) {
    throw TrajectoryError("duration and sample rates must be positive");
  }
  if (spec.still_time < 0.0 || spec.ramp_time <= 0.0) {
    throw TrajectoryError("still_time must be >= 0 and ramp_time > 0");
  }
  if (spec.kind == TrajectoryKind::circle &&
      (spec.circle_radius <= 0.0 || spec.circle_period <= 0.0)) {
    throw TrajectoryError("circle radius and period must be positive");
  }
  if (spec.kind == TrajectoryKind::waypoints) {
    if (spec.waypoints.size() < 2) {
      throw TrajectoryError("waypoint trajectory needs at least two waypoints");
    }
    if (spec.waypoints.front().norm() > 1e-9) {
      throw TrajectoryError("waypoint trajectory must start at the origin");
    }
    if (spec.waypoint_segment_time <= 0.0) {
      throw TrajectoryError("waypoint segment time must be positive");
    }
    for (std::size_t i = 1; i < spec.waypoints.size(); ++i) {
      if ((spec.waypoints[i] - spec.waypoints[i - 1]).norm() < 1e-9) {
        throw TrajectoryError("waypoint segment " + std::to_string(i) +
                              " has zero length");
      }
    }
  }

  const auto count = static_cast<std::size_t>(std::llround(spec.duration * spec.imu_rate));
  std::vector<TruthSample> samples;
  samples.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = static_cast<double>(k) / spec.imu_rate;
    switch (spec.kind) {
      case TrajectoryKind::stationary: {
        TruthSample s;
        s.state.timestamp = t;
        samples.push_back(s);
        break;
      }
      case TrajectoryKind::line:
        samples.push_back(eval_line(spec, t));
        break;
      case TrajectoryKind::circle:
        samples.push_back(eval_circle(spec, t));
        break;
      case TrajectoryKind::waypoints:
        samples.push_back(eval_waypoints(spec, t));
        break;
    }
  }
  return samples;
}

std::uint64_t Rng::next() {
  state_ += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double Rng::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + uniform() * (hi - lo);
}

Eigen::Vector2d Rng::disk(double radius, bool boundary) {
  const double angle = kTau * uniform();
  const double r = boundary ? radius : radius * std::sqrt(uniform());
  return {r * std::cos(angle), r * std::sin(angle)};
}

Eigen::Vector3d Rng::box3(double bound, bool boundary) {
  Eigen::Vector3d out;
  for (int i = 0; i < 3; ++i) {
    out(i) = boundary ? (uniform() < 0.5 ? -bound : bound) : uniform(-bound, bound);
  }
  return out;
}

std::vector<ImuSample> synthesize_imu(std::span<const TruthSample> truth,
                                      const ImuBiases& true_biases,
                                      const ImuNoiseSpec& noise,
                                      const Eigen::Vector3d& gravity, std::uint64_t seed,
                                      bool adversarial) {
  Rng rng(seed);
  std::vector<ImuSample> out;
  out.reserve(truth.size());
  for (const TruthSample& s : truth) {
    const Eigen::Matrix3d r_t = s.state.rotation.matrix().transpose();
    ImuSample m;
    m.timestamp = s.state.timestamp;
    m.accel = r_t * (s.accel_world - gravity) + true_biases.accel +
              rng.box3(noise.accel_bound, adversarial);
    m.gyro = s.gyro_body + true_biases.gyro + rng.box3(noise.gyro_bound, adversarial);
    out.push_back(m);
  }
  return out;
}

std::optional<RayHit> raycast(const World& world, const Eigen::Vector3d& origin,
                              const Eigen::Vector3d& direction, double min_range,
                              double max_range) {
  std::optional<RayHit> best;
  for (std::size_t i = 0; i < world.patches.size(); ++i) {
    const PlanePatch& patch = world.patches[i];
    const double denom = direction.dot(patch.normal);
    if (std::abs(denom) < 1e-12) {
      continue;
    }
    const double range = (patch.anchor - origin).dot(patch.normal) / denom;
    if (range < min_range || range > max_range) {
      continue;
    }
    const Eigen::Vector3d local = origin + range * direction - patch.anchor;
    if (std::abs(local.dot(patch.axis_u)) > patch.half_u ||
        std::abs(local.dot(patch.axis_v)) > patch.half_v) {
      continue;
    }
    if (!best || range < best->range) {
      best = RayHit{range, i};
    }
  }
  return best;
}

Scan synthesize_scan(const NavState& truth, const World& world,
                     const LidarNoiseSpec& noise, const BeamPattern& pattern,
                     const Extrinsics& extrinsics, std::uint64_t seed,
                     bool adversarial) {
  Rng rng(seed);
  Scan scan;
  scan.timestamp = truth.timestamp;
  scan.points.reserve(
      static_cast<std::size_t>(pattern.azimuth_count * pattern.elevation_count));

  const Rotation sensor_rot = truth.rotation * extrinsics.rotation;
  const Eigen::Vector3d sensor_origin = truth.rotation * extrinsics.translation +
                                        truth.translation;

  for (int j = 0; j < pattern.elevation_count; ++j) {
    const double el =
        pattern.elevation_count == 1
            ? 0.5 * (pattern.elevation_min + pattern.elevation_max)
            : pattern.elevation_min + (pattern.elevation_max - pattern.elevation_min) *
                                          static_cast<double>(j) /
                                          (pattern.elevation_count - 1);
    for (int i = 0; i < pattern.azimuth_count; ++i) {
      const double az = kTau * static_cast<double>(i) / pattern.azimuth_count;
      const Eigen::Vector3d dir_lidar(std::cos(el) * std::cos(az),
                                      std::cos(el) * std::sin(az), std::sin(el));
      const auto hit = raycast(world, sensor_origin, sensor_rot * dir_lidar,
                               pattern.min_range, pattern.max_range);
      if (!hit) {
        continue;
      }
      const double range_noise = adversarial
                                     ? (rng.uniform() < 0.5 ? -noise.range_bound
                                                            : noise.range_bound)
                                     : rng.uniform(-noise.range_bound, noise.range_bound);
      const Eigen::Vector2d bearing_noise = rng.disk(noise.bearing_bound, adversarial);

      PointMeasurement m;
      m.timestamp = truth.timestamp;
      m.range = hit->range - range_noise;
      m.bearing = (so3_exp(tangent_basis_s2(dir_lidar) * (-bearing_noise)) * dir_lidar)
                      .normalized();
      scan.points.push_back(m);
    }
  }
  return scan;
}

}  // namespace slio
