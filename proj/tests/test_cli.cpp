#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "slio/config.hpp"
#include "slio/io.hpp"
#include "slio/pipeline.hpp"

using namespace slio;
namespace fs = std::filesystem;

namespace {

RunConfig defaults() {
  std::istringstream text(default_config_text());
  return parse_config(text, "<defaults>");
}

RunConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.ini");
}

std::string config_error_for(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& err) {
    return err.what();
  }
  return "";
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "slio_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_CASE("default configuration parses and validates") {
  const RunConfig config = defaults();
  CHECK(config.lidar.range_bound == doctest::Approx(0.08));
  CHECK(config.icp.max_iterations == 30);
  CHECK(config.map.local_map_radius == doctest::Approx(50.0));
  CHECK(config.sim.trajectory == "circle");
}

TEST_CASE("config parser reports precise locations") {
  const std::string bad_key = "[lidar]\nrange_bound = 0.1\nnonsense = 3\n";
  try {
    parse(bad_key);
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    const std::string what = err.what();
    CHECK(what.find("test.ini:3") != std::string::npos);
    CHECK(what.find("nonsense") != std::string::npos);
  }

  CHECK_THROWS_AS(parse("[nowhere]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("key_without_section = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[lidar]\nrange_bound = abc\n"), ConfigError);
  CHECK_THROWS_AS(parse("[lidar]\nrange_bound 0.1\n"), ConfigError);
}

TEST_CASE("every out-of-range field yields a distinct message") {
  const std::vector<std::pair<std::string, std::string>> cases{
      {"[lidar]\nrange_bound = -1\n", "[lidar] range_bound"},
      {"[lidar]\nbearing_bound_deg = 0\n", "[lidar] bearing_bound_deg"},
      {"[lidar]\nazimuth_count = 0\n", "[lidar] azimuth_count"},
      {"[lidar]\nelevation_count = -2\n", "[lidar] elevation_count"},
      {"[lidar]\nelevation_min_deg = 30\nelevation_max_deg = 10\n",
       "elevation_min_deg"},
      {"[lidar]\nmin_range = 0\n", "[lidar] min_range"},
      {"[lidar]\nmax_range = 0.01\n", "[lidar] max_range"},
      {"[imu]\naccel_bound = 0\n", "[imu] accel_bound"},
      {"[imu]\ngyro_bound = -0.1\n", "[imu] gyro_bound"},
      {"[imu]\nbias_scale = 0\n", "[imu] bias_scale"},
      {"[icp]\nmax_iterations = 0\n", "[icp] max_iterations"},
      {"[icp]\nconverge_tol = 0\n", "[icp] converge_tol"},
      {"[icp]\nmin_correspondences = -1\n", "[icp] min_correspondences"},
      {"[icp]\ncond_max = 0\n", "[icp] cond_max"},
      {"[icp]\ngate_tol = 0\n", "[icp] gate_tol"},
      {"[icp]\ncompensation_bound = -1\n", "[icp] compensation_bound"},
      {"[icp]\nresidual_cap = 0\n", "[icp] residual_cap"},
      {"[map]\nvoxel_size = 0\n", "[map] voxel_size"},
      {"[map]\nknn = 0\n", "[map] knn"},
      {"[map]\nmax_corr_dist = -2\n", "[map] max_corr_dist"},
      {"[map]\nplane_tol = 0\n", "[map] plane_tol"},
      {"[map]\nmin_spread = 0\n", "[map] min_spread"},
      {"[map]\nlocal_map_radius = 0\n", "[map] local_map_radius"},
      {"[filter]\ndt_max = 0\n", "[filter] dt_max"},
      {"[filter]\ndisjoint_policy = maybe\n", "disjoint_policy"},
      {"[filter]\nvelocity_max_gap = 0\n", "[filter] velocity_max_gap"},
      {"[filter]\ngravity = -9.81\n", "[filter] gravity"},
      {"[init]\nstatic_duration = 0\n", "[init] static_duration"},
      {"[init]\nmin_samples = 0\n", "[init] min_samples"},
      {"[init]\nmax_accel_std = 0\n", "[init] max_accel_std"},
      {"[sim]\ntrajectory = zigzag\n", "trajectory"},
      {"[sim]\nduration = 0\n", "[sim] duration"},
      {"[sim]\nstill_time = -1\n", "[sim] still_time"},
      {"[sim]\nramp_time = 0\n", "[sim] ramp_time"},
      {"[sim]\nimu_rate = 0\n", "[sim] imu_rate"},
      {"[sim]\nlidar_rate = 0\n", "[sim] lidar_rate"},
      {"[sim]\ncircle_radius = 0\n", "[sim] circle_radius"},
      {"[sim]\ncircle_period = 0\n", "[sim] circle_period"},
      {"[sim]\nline_speed = 0\n", "[sim] line_speed"},
      {"[sim]\nsensor_height = 0\n", "[sim] sensor_height"},
      {"[eval]\nassoc_tol = 0\n", "[eval] assoc_tol"},
      {"[eval]\nail_mode = sometimes\n", "ail_mode"},
      {"[run]\nthreads = -1\n", "[run] threads"},
  };
  std::set<std::string> messages;
  for (const auto& [text, field] : cases) {
    const std::string message = config_error_for(text);
    INFO("config: " << text);
    CHECK(message.find(field) != std::string::npos);
    messages.insert(message);
  }
  CHECK(messages.size() == cases.size());  // all distinct
}

TEST_CASE("imu csv round trip") {
  const fs::path dir = fresh_dir("imu_csv");
  std::vector<ImuSample> samples;
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    samples.push_back(ImuSample{{rng.uniform(-1, 1), rng.uniform(-1, 1), 9.81},
                                {rng.uniform(-0.1, 0.1), 0, 0},
                                i * 0.005});
  }
  write_imu_csv(dir / "imu.csv", samples);
  const auto back = read_imu_csv(dir / "imu.csv");
  REQUIRE(back.size() == samples.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK((back[i].accel - samples[i].accel).norm() < 1e-7);
    CHECK((back[i].gyro - samples[i].gyro).norm() < 1e-7);
  }

  CHECK_THROWS_AS(read_imu_csv(dir / "missing.csv"), DataError);

  std::ofstream bad(dir / "bad.csv");
  bad << "t,ax,ay,az,gx,gy,gz\n0,1,2\n";
  bad.close();
  try {
    read_imu_csv(dir / "bad.csv");
    FAIL("expected DataError");
  } catch (const DataError& err) {
    CHECK(std::string(err.what()).find(":2") != std::string::npos);
  }
}

TEST_CASE("scan csv round trip and xyz conversion") {
  const fs::path dir = fresh_dir("scan_csv");
  Scan scan;
  scan.timestamp = 1.5;
  Rng rng(2);
  for (int i = 0; i < 50; ++i) {
    PointMeasurement m;
    m.timestamp = 1.5;
    m.range = rng.uniform(0.5, 20.0);
    m.bearing = Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1),
                                rng.uniform(-1, 1))
                    .normalized();
    scan.points.push_back(m);
  }
  write_scan_csv(dir / "scan.csv", scan);
  const Scan back = read_scan_csv(dir / "scan.csv");
  CHECK(back.timestamp == doctest::Approx(1.5));
  REQUIRE(back.points.size() == scan.points.size());
  for (std::size_t i = 0; i < back.points.size(); ++i) {
    CHECK(back.points[i].range == doctest::Approx(scan.points[i].range));
    CHECK((back.points[i].bearing - scan.points[i].bearing).norm() < 1e-7);
  }

  // x,y,z clouds are converted to range-bearing on read
  std::ofstream xyz(dir / "cloud.csv");
  xyz << "x,y,z\n3,0,0\n0,4,0\n";
  xyz.close();
  const Scan converted = read_scan_csv(dir / "cloud.csv", 2.0);
  REQUIRE(converted.points.size() == 2);
  CHECK(converted.timestamp == doctest::Approx(2.0));
  CHECK(converted.points[0].range == doctest::Approx(3.0));
  CHECK((converted.points[0].bearing - Eigen::Vector3d(1, 0, 0)).norm() < 1e-12);
  CHECK(converted.points[1].range == doctest::Approx(4.0));

  std::ofstream bad(dir / "bad.csv");
  bad << "r,theta\n1,2\n";
  bad.close();
  CHECK_THROWS_AS(read_scan_csv(dir / "bad.csv"), DataError);
}

TEST_CASE("tum and protection round trips") {
  const fs::path dir = fresh_dir("tum");
  std::vector<TimedPose> poses;
  Rng rng(3);
  for (int i = 0; i < 20; ++i) {
    Pose pose;
    pose.rotation = so3_exp(rng.uniform(0, 2) * Eigen::Vector3d(1, 0, 0));
    pose.translation = Eigen::Vector3d(rng.uniform(-5, 5), 0, 1);
    poses.push_back(TimedPose{i * 0.1, pose});
  }
  write_tum(dir / "traj.tum", poses);
  const auto back = read_tum(dir / "traj.tum");
  REQUIRE(back.size() == poses.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK((back[i].pose.translation - poses[i].pose.translation).norm() < 1e-7);
    CHECK((back[i].pose.rotation.matrix() - poses[i].pose.rotation.matrix())
              .cwiseAbs()
              .maxCoeff() < 1e-7);
  }

  std::vector<ProtectionRow> rows;
  for (int i = 0; i < 10; ++i) {
    Eigen::Matrix3d shape;
    shape << 1.0 + i, 0.1, 0.02,
             0.1, 2.0, 0.05,
             0.02, 0.05, 3.0;
    rows.push_back(ProtectionRow{i * 0.1, shape});
  }
  write_protection_csv(dir / "protection.csv", rows);
  const auto rows_back = read_protection_csv(dir / "protection.csv");
  REQUIRE(rows_back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK((rows_back[i].shape - rows[i].shape).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("simulated datasets are deterministic and correctly sized") {
  RunConfig config = defaults();
  config.sim.duration = 10.0;
  config.lidar.beams.azimuth_count = 8;  // keep the smoke dataset small
  config.lidar.beams.elevation_count = 4;

  const fs::path a = fresh_dir("sim_a");
  const fs::path b = fresh_dir("sim_b");
  cmd_simulate(config, a);
  cmd_simulate(config, b);

  // 10 s at 200 Hz -> 2000 rows (+ header); 10 s at 10 Hz -> 100 scans
  std::ifstream imu(a / "imu.csv");
  std::string line;
  int lines = 0;
  while (std::getline(imu, line)) {
    ++lines;
  }
  CHECK(lines == 2001);
  CHECK(list_scan_files(a / "scans").size() == 100);

  CHECK(slurp(a / "imu.csv") == slurp(b / "imu.csv"));
  CHECK(slurp(a / "ground_truth.tum") == slurp(b / "ground_truth.tum"));
  CHECK(slurp(a / "scans" / "000042.csv") == slurp(b / "scans" / "000042.csv"));
}

TEST_CASE("simulate, run, eval round trip") {
  RunConfig config = defaults();
  config.sim.duration = 6.0;
  config.sim.seed = 11;

  const fs::path dataset = fresh_dir("roundtrip_ds");
  const fs::path out = fresh_dir("roundtrip_out");
  cmd_simulate(config, dataset);
  const RunResult result = cmd_run(dataset, config, out);
  CHECK(result.scans_processed > 30);
  CHECK(result.updates_accepted > 20);

  std::ostringstream report;
  const EvalReport eval = cmd_eval(out / "est.tum", out / "protection.csv",
                                   dataset / "ground_truth.tum", config.eval, report,
                                   out / "eval.csv");
  CHECK(eval.cover_rate_pct == doctest::Approx(100.0));
  CHECK(eval.ate_m < 0.3);
  const std::string text = report.str();
  CHECK(text.find("cover_rate_pct = 100") != std::string::npos);
  CHECK(text.find("summary = CR[%]=100.000") != std::string::npos);

  // gt file with a bogus path fails with a data error naming it
  try {
    cmd_eval(out / "est.tum", out / "protection.csv", dataset / "nope.tum",
             config.eval, report, "");
    FAIL("expected DataError");
  } catch (const DataError& err) {
    CHECK(std::string(err.what()).find("nope.tum") != std::string::npos);
  }
}

TEST_CASE("degenerate scenes gate every update but the run completes") {
  RunConfig config = defaults();
  config.sim.trajectory = "stationary";
  config.sim.duration = 5.0;

  // Scans against a single infinite plane: registration is ill conditioned,
  // every update is gated, and the protection level grows prediction-only.
  const TrajectorySpec spec = config.sim.trajectory_spec();
  const std::vector<TruthSample> truth = simulate_trajectory(spec);
  const Eigen::Vector3d gravity(0, 0, -config.filter.gravity);
  const std::vector<ImuSample> imu = synthesize_imu(
      truth, ImuBiases{}, config.imu.noise_spec(), gravity, 3);

  const World plane = single_plane_world(-config.sim.sensor_height);
  std::vector<Scan> scans;
  for (int s = 0; s < 50; ++s) {
    NavState at_scan = truth[static_cast<std::size_t>(s * 20)].state;
    at_scan.timestamp = 0.1 * s;
    scans.push_back(synthesize_scan(at_scan, plane, config.lidar.noise_spec(),
                                    config.lidar.beams, Extrinsics{}, 11 + s));
  }

  const RunResult result = run_pipeline(imu, scans, config);
  CHECK(result.updates_accepted == 0);
  CHECK(result.updates_gated > 20);
  REQUIRE(result.records.size() > 20);
  double previous = 0.0;
  for (const TrajectoryRecord& rec : result.records) {
    const double trace = rec.protection_translation.trace();
    CHECK(trace >= previous);
    previous = trace;
  }
}

TEST_CASE("plots are emitted with fixed dimensions") {
  const fs::path dir = fresh_dir("plots");

  // tiny fixed input
  std::vector<TimedPose> est;
  std::vector<TimedPose> gt;
  std::vector<ProtectionRow> protection;
  for (int i = 0; i < 5; ++i) {
    Pose pose;
    pose.translation = Eigen::Vector3d(0.1 * i, 0.05 * i, 0);
    est.push_back(TimedPose{i * 0.1, pose});
    Pose gt_pose;
    gt_pose.translation = pose.translation + Eigen::Vector3d(0.01, -0.01, 0.005);
    gt.push_back(TimedPose{i * 0.1, gt_pose});
    protection.push_back(ProtectionRow{i * 0.1, 0.04 * Eigen::Matrix3d::Identity()});
  }
  write_tum(dir / "est.tum", est);
  write_tum(dir / "gt.tum", gt);
  write_protection_csv(dir / "protection.csv", protection);

  cmd_plot(dir / "est.tum", dir / "protection.csv", dir / "gt.tum", EvalConfig{},
           dir / "out");

  const std::vector<std::string> files{"error_x.svg", "error_y.svg", "error_z.svg",
                                       "trajectory.svg"};
  for (const std::string& f : files) {
    CHECK(fs::exists(dir / "out" / f));
  }
  const std::string svg = slurp(dir / "out" / "error_x.svg");
  CHECK(svg.find("width=\"800\" height=\"400\"") != std::string::npos);
  CHECK(svg.find("<svg xmlns") != std::string::npos);
  // error plus the symmetric envelope
  CHECK(std::count(svg.begin(), svg.end(), '\n') > 5);
  const std::string traj = slurp(dir / "out" / "trajectory.svg");
  CHECK(traj.find("width=\"600\" height=\"600\"") != std::string::npos);
}

#ifdef SLIO_CLI_PATH
TEST_CASE("cli exit codes") {
  const fs::path dir = fresh_dir("exit_codes");
  const std::string cli = SLIO_CLI_PATH;

  const auto run = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " > " + (dir / "stdout.txt").string() +
                            " 2> " + (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
  };

  // config error: exit 2
  std::ofstream bad_cfg(dir / "bad.ini");
  bad_cfg << "[lidar]\nrange_bound = -1\n";
  bad_cfg.close();
  CHECK(run("simulate -c " + (dir / "bad.ini").string() + " -o " +
            (dir / "ds").string()) == 2);

  // data error: exit 3, message names the missing path
  CHECK(run("eval --est missing_est.tum --protection missing.csv --gt missing_gt.tum") ==
        3);
  const std::string err = slurp(dir / "stderr.txt");
  CHECK(err.find("missing") != std::string::npos);

  // happy path: exit 0
  std::ofstream ok_cfg(dir / "ok.ini");
  ok_cfg << "[sim]\nduration = 4.0\n[lidar]\nazimuth_count = 16\nelevation_count = 6\n";
  ok_cfg.close();
  CHECK(run("simulate -c " + (dir / "ok.ini").string() + " -o " +
            (dir / "ds").string()) == 0);
  CHECK(run("run -c " + (dir / "ok.ini").string() + " -d " + (dir / "ds").string() +
            " -o " + (dir / "out").string()) == 0);
  CHECK(run("eval -c " + (dir / "ok.ini").string() + " --est " +
            (dir / "out" / "est.tum").string() + " --protection " +
            (dir / "out" / "protection.csv").string() + " --gt " +
            (dir / "ds" / "ground_truth.tum").string() + " --csv " +
            (dir / "out" / "eval.csv").string()) == 0);
}
#endif
