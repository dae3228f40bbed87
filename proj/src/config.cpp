#include "slio/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace slio {

TrajectorySpec SimConfig::trajectory_spec() const {
  TrajectorySpec spec;
  if (trajectory == "stationary") {
    spec.kind = TrajectoryKind::stationary;
  } else if (trajectory == "line") {
    spec.kind = TrajectoryKind::line;
  } else if (trajectory == "circle") {
    spec.kind = TrajectoryKind::circle;
  } else if (trajectory == "waypoints") {
    spec.kind = TrajectoryKind::waypoints;
  } else {
    throw ConfigError("[sim] trajectory must be one of stationary|line|circle|waypoints, got '" +
                      trajectory + "'");
  }
  spec.duration = duration;
  spec.still_time = still_time;
  spec.ramp_time = ramp_time;
  spec.imu_rate = imu_rate;
  spec.lidar_rate = lidar_rate;
  spec.circle_radius = circle_radius;
  spec.circle_period = circle_period;
  spec.line_speed = line_speed;
  return spec;
}

IcpParams RunConfig::icp_params() const {
  IcpParams params;
  params.max_iterations = icp.max_iterations;
  params.converge_tol = icp.converge_tol;
  params.min_correspondences = icp.min_correspondences;
  params.cond_max = icp.cond_max;
  params.residual_cap = icp.residual_cap;
  params.plane_query.knn = map.knn;
  params.plane_query.max_distance = map.max_corr_dist;
  params.plane_query.plane_tol = map.plane_tol;
  params.plane_query.min_spread = map.min_spread;
  params.threads = threads;
  return params;
}

UncertaintyParams RunConfig::uncertainty_params() const {
  UncertaintyParams params;
  params.compensation = 3.0 * icp.compensation_bound * icp.compensation_bound *
                        Eigen::Matrix<double, 6, 6>::Identity();
  params.single_term = icp.single_term_compensation;
  params.threads = threads;
  return params;
}

UpdateParams RunConfig::update_params() const {
  UpdateParams params;
  params.policy = filter.disjoint_policy == "strict" ? DisjointPolicy::strict
                                                     : DisjointPolicy::skip_component;
  return params;
}

namespace {

struct Cursor {
  std::string file;
  int line = 0;
  [[noreturn]] void fail(const std::string& message) const {
    throw ConfigError(file + ":" + std::to_string(line) + ": " + message);
  }
};

double parse_double(const Cursor& at, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size()) {
      at.fail("trailing characters after number '" + value + "'");
    }
    return out;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    at.fail("expected a number, got '" + value + "'");
  }
}

int parse_int(const Cursor& at, const std::string& value) {
  int out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    at.fail("expected an integer, got '" + value + "'");
  }
  return out;
}

std::uint64_t parse_u64(const Cursor& at, const std::string& value) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    at.fail("expected an unsigned integer, got '" + value + "'");
  }
  return out;
}

bool parse_bool(const Cursor& at, const std::string& value) {
  if (value == "true" || value == "1") {
    return true;
  }
  if (value == "false" || value == "0") {
    return false;
  }
  at.fail("expected true or false, got '" + value + "'");
}

Eigen::Vector3d parse_vec3(const Cursor& at, const std::string& value) {
  std::istringstream stream(value);
  Eigen::Vector3d out;
  if (!(stream >> out.x() >> out.y() >> out.z())) {
    at.fail("expected three space-separated numbers, got '" + value + "'");
  }
  std::string rest;
  if (stream >> rest) {
    at.fail("trailing characters after vector '" + value + "'");
  }
  return out;
}

std::string trimmed(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return "";
  }
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& name) {
  RunConfig config;
  Cursor at{name, 0};
  std::string section;
  std::string raw;

  while (std::getline(in, raw)) {
    ++at.line;
    const auto comment = raw.find('#');
    std::string line = trimmed(comment == std::string::npos ? raw : raw.substr(0, comment));
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        at.fail("unterminated section header '" + line + "'");
      }
      section = line.substr(1, line.size() - 2);
      if (section != "lidar" && section != "imu" && section != "icp" &&
          section != "map" && section != "filter" && section != "init" &&
          section != "sim" && section != "eval" && section != "run") {
        at.fail("unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      at.fail("expected key = value, got '" + line + "'");
    }
    const std::string key = trimmed(line.substr(0, eq));
    const std::string value = trimmed(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      at.fail("empty key or value in '" + line + "'");
    }
    if (section.empty()) {
      at.fail("key '" + key + "' appears before any [section]");
    }

    bool known = true;
    if (section == "lidar") {
      if (key == "range_bound") config.lidar.range_bound = parse_double(at, value);
      else if (key == "bearing_bound_deg") config.lidar.bearing_bound_deg = parse_double(at, value);
      else if (key == "azimuth_count") config.lidar.beams.azimuth_count = parse_int(at, value);
      else if (key == "elevation_count") config.lidar.beams.elevation_count = parse_int(at, value);
      else if (key == "elevation_min_deg") config.lidar.beams.elevation_min = parse_double(at, value) * kDegToRad;
      else if (key == "elevation_max_deg") config.lidar.beams.elevation_max = parse_double(at, value) * kDegToRad;
      else if (key == "min_range") config.lidar.beams.min_range = parse_double(at, value);
      else if (key == "max_range") config.lidar.beams.max_range = parse_double(at, value);
      else known = false;
    } else if (section == "imu") {
      if (key == "accel_bound") config.imu.accel_bound = parse_double(at, value);
      else if (key == "gyro_bound") config.imu.gyro_bound = parse_double(at, value);
      else if (key == "bias_scale") config.imu.bias_scale = parse_double(at, value);
      else known = false;
    } else if (section == "icp") {
      if (key == "max_iterations") config.icp.max_iterations = parse_int(at, value);
      else if (key == "converge_tol") config.icp.converge_tol = parse_double(at, value);
      else if (key == "min_correspondences") config.icp.min_correspondences = parse_int(at, value);
      else if (key == "cond_max") config.icp.cond_max = parse_double(at, value);
      else if (key == "gate_tol") config.icp.gate_tol = parse_double(at, value);
      else if (key == "compensation_bound") config.icp.compensation_bound = parse_double(at, value);
      else if (key == "single_term_compensation") config.icp.single_term_compensation = parse_bool(at, value);
      else if (key == "residual_cap") config.icp.residual_cap = parse_double(at, value);
      else known = false;
    } else if (section == "map") {
      if (key == "voxel_size") config.map.voxel_size = parse_double(at, value);
      else if (key == "knn") config.map.knn = parse_int(at, value);
      else if (key == "max_corr_dist") config.map.max_corr_dist = parse_double(at, value);
      else if (key == "plane_tol") config.map.plane_tol = parse_double(at, value);
      else if (key == "min_spread") config.map.min_spread = parse_double(at, value);
      else if (key == "local_map_radius") config.map.local_map_radius = parse_double(at, value);
      else known = false;
    } else if (section == "filter") {
      if (key == "dt_max") config.filter.dt_max = parse_double(at, value);
      else if (key == "disjoint_policy") config.filter.disjoint_policy = value;
      else if (key == "velocity_max_gap") config.filter.velocity_max_gap = parse_double(at, value);
      else if (key == "gravity") config.filter.gravity = parse_double(at, value);
      else known = false;
    } else if (section == "init") {
      if (key == "static_duration") config.init.static_duration = parse_double(at, value);
      else if (key == "min_samples") config.init.min_samples = parse_int(at, value);
      else if (key == "max_accel_std") config.init.max_accel_std = parse_double(at, value);
      else known = false;
    } else if (section == "sim") {
      if (key == "trajectory") config.sim.trajectory = value;
      else if (key == "duration") config.sim.duration = parse_double(at, value);
      else if (key == "still_time") config.sim.still_time = parse_double(at, value);
      else if (key == "ramp_time") config.sim.ramp_time = parse_double(at, value);
      else if (key == "imu_rate") config.sim.imu_rate = parse_double(at, value);
      else if (key == "lidar_rate") config.sim.lidar_rate = parse_double(at, value);
      else if (key == "circle_radius") config.sim.circle_radius = parse_double(at, value);
      else if (key == "circle_period") config.sim.circle_period = parse_double(at, value);
      else if (key == "line_speed") config.sim.line_speed = parse_double(at, value);
      else if (key == "seed") config.sim.seed = parse_u64(at, value);
      else if (key == "adversarial") config.sim.adversarial = parse_bool(at, value);
      else if (key == "sensor_height") config.sim.sensor_height = parse_double(at, value);
      else if (key == "accel_bias") config.sim.accel_bias = parse_vec3(at, value);
      else if (key == "gyro_bias") config.sim.gyro_bias = parse_vec3(at, value);
      else known = false;
    } else if (section == "eval") {
      if (key == "assoc_tol") config.eval.assoc_tol = parse_double(at, value);
      else if (key == "ail_mode") config.eval.ail_mode = value;
      else if (key == "align") config.eval.align = parse_bool(at, value);
      else known = false;
    } else if (section == "run") {
      if (key == "threads") config.threads = parse_int(at, value);
      else known = false;
    }
    if (!known) {
      at.fail("unknown key '" + key + "' in section [" + section + "]");
    }
  }

  validate_config(config);
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path.string());
  }
  return parse_config(in, path.string());
}

void validate_config(const RunConfig& c) {
  const auto positive = [](double v, const char* field) {
    if (!(v > 0.0)) {
      throw ConfigError(std::string(field) + " must be positive (got " +
                        std::to_string(v) + ")");
    }
  };
  const auto positive_int = [](int v, const char* field) {
    if (v <= 0) {
      throw ConfigError(std::string(field) + " must be a positive integer (got " +
                        std::to_string(v) + ")");
    }
  };

  positive(c.lidar.range_bound, "[lidar] range_bound");
  positive(c.lidar.bearing_bound_deg, "[lidar] bearing_bound_deg");
  positive_int(c.lidar.beams.azimuth_count, "[lidar] azimuth_count");
  positive_int(c.lidar.beams.elevation_count, "[lidar] elevation_count");
  if (c.lidar.beams.elevation_min >= c.lidar.beams.elevation_max) {
    throw ConfigError("[lidar] elevation_min_deg must be below elevation_max_deg");
  }
  positive(c.lidar.beams.min_range, "[lidar] min_range");
  if (c.lidar.beams.max_range <= c.lidar.beams.min_range) {
    throw ConfigError("[lidar] max_range must exceed min_range");
  }

  positive(c.imu.accel_bound, "[imu] accel_bound");
  positive(c.imu.gyro_bound, "[imu] gyro_bound");
  positive(c.imu.bias_scale, "[imu] bias_scale");

  positive_int(c.icp.max_iterations, "[icp] max_iterations");
  positive(c.icp.converge_tol, "[icp] converge_tol");
  positive_int(c.icp.min_correspondences, "[icp] min_correspondences");
  positive(c.icp.cond_max, "[icp] cond_max");
  positive(c.icp.gate_tol, "[icp] gate_tol");
  if (c.icp.compensation_bound < 0.0) {
    throw ConfigError("[icp] compensation_bound must be non-negative (got " +
                      std::to_string(c.icp.compensation_bound) + ")");
  }
  positive(c.icp.residual_cap, "[icp] residual_cap");

  positive(c.map.voxel_size, "[map] voxel_size");
  positive_int(c.map.knn, "[map] knn");
  positive(c.map.max_corr_dist, "[map] max_corr_dist");
  positive(c.map.plane_tol, "[map] plane_tol");
  positive(c.map.min_spread, "[map] min_spread");
  positive(c.map.local_map_radius, "[map] local_map_radius");

  positive(c.filter.dt_max, "[filter] dt_max");
  if (c.filter.disjoint_policy != "skip" && c.filter.disjoint_policy != "strict") {
    throw ConfigError("[filter] disjoint_policy must be skip or strict, got '" +
                      c.filter.disjoint_policy + "'");
  }
  positive(c.filter.velocity_max_gap, "[filter] velocity_max_gap");
  positive(c.filter.gravity, "[filter] gravity");

  positive(c.init.static_duration, "[init] static_duration");
  positive_int(c.init.min_samples, "[init] min_samples");
  positive(c.init.max_accel_std, "[init] max_accel_std");

  if (c.sim.trajectory != "stationary" && c.sim.trajectory != "line" &&
      c.sim.trajectory != "circle" && c.sim.trajectory != "waypoints") {
    throw ConfigError("[sim] trajectory must be one of stationary|line|circle|waypoints, got '" +
                      c.sim.trajectory + "'");
  }
  positive(c.sim.duration, "[sim] duration");
  if (c.sim.still_time < 0.0) {
    throw ConfigError("[sim] still_time must be non-negative (got " +
                      std::to_string(c.sim.still_time) + ")");
  }
  positive(c.sim.ramp_time, "[sim] ramp_time");
  positive(c.sim.imu_rate, "[sim] imu_rate");
  positive(c.sim.lidar_rate, "[sim] lidar_rate");
  positive(c.sim.circle_radius, "[sim] circle_radius");
  positive(c.sim.circle_period, "[sim] circle_period");
  positive(c.sim.line_speed, "[sim] line_speed");
  positive(c.sim.sensor_height, "[sim] sensor_height");

  positive(c.eval.assoc_tol, "[eval] assoc_tol");
  if (c.eval.ail_mode != "deterministic" && c.eval.ail_mode != "three_sigma") {
    throw ConfigError("[eval] ail_mode must be deterministic or three_sigma, got '" +
                      c.eval.ail_mode + "'");
  }

  if (c.threads < 0) {
    throw ConfigError("[run] threads must be non-negative (got " +
                      std::to_string(c.threads) + ")");
  }
}

std::string default_config_text() {
  return R"([lidar]
range_bound = 0.08
bearing_bound_deg = 0.1
azimuth_count = 144
elevation_count = 14
elevation_min_deg = -20
elevation_max_deg = 20
min_range = 0.1
max_range = 120

[imu]
accel_bound = 0.2
gyro_bound = 0.07
bias_scale = 0.1

[icp]
max_iterations = 30
converge_tol = 1e-6
min_correspondences = 10
cond_max = 1e8
gate_tol = 1e-3
compensation_bound = 1e-4
single_term_compensation = false
residual_cap = 0.4

[map]
voxel_size = 0.5
knn = 5
max_corr_dist = 1.0
plane_tol = 0.05
min_spread = 0.1
local_map_radius = 50.0

[filter]
dt_max = 0.02
disjoint_policy = skip
velocity_max_gap = 0.15
gravity = 9.81

[init]
static_duration = 1.5
min_samples = 200
max_accel_std = 0.3

[sim]
trajectory = circle
duration = 30.0
still_time = 2.0
ramp_time = 3.0
imu_rate = 200
lidar_rate = 10
circle_radius = 4.0
circle_period = 20.0
line_speed = 1.0
seed = 1
adversarial = false
sensor_height = 1.5
accel_bias = 0 0 0
gyro_bias = 0 0 0

[eval]
assoc_tol = 0.01
ail_mode = deterministic
align = false

[run]
threads = 0
)";
}

}  // namespace slio
