#include "slio/io.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace slio {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  return in;
}

[[noreturn]] void fail_row(const std::filesystem::path& path, int line,
                           const std::string& message) {
  throw DataError(path.string() + ":" + std::to_string(line) + ": " + message);
}

std::vector<double> parse_row(const std::filesystem::path& path, int line,
                              const std::string& text, std::size_t expected) {
  std::vector<double> values;
  values.reserve(expected);
  std::istringstream stream(text);
  std::string field;
  while (std::getline(stream, field, ',')) {
    try {
      values.push_back(std::stod(field));
    } catch (const std::exception&) {
      fail_row(path, line, "expected a number, got '" + field + "'");
    }
  }
  if (values.size() != expected) {
    fail_row(path, line, "expected " + std::to_string(expected) + " fields, got " +
                             std::to_string(values.size()));
  }
  return values;
}

}  // namespace

std::string format_g9(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

void write_imu_csv(const std::filesystem::path& path, std::span<const ImuSample> samples) {
  std::ofstream out = open_out(path);
  out << "t,ax,ay,az,gx,gy,gz\n";
  for (const ImuSample& s : samples) {
    out << format_g9(s.timestamp) << ',' << format_g9(s.accel.x()) << ','
        << format_g9(s.accel.y()) << ',' << format_g9(s.accel.z()) << ','
        << format_g9(s.gyro.x()) << ',' << format_g9(s.gyro.y()) << ','
        << format_g9(s.gyro.z()) << '\n';
  }
}

std::vector<ImuSample> read_imu_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "t,ax,ay,az,gx,gy,gz") {
    fail_row(path, 1, "expected header t,ax,ay,az,gx,gy,gz");
  }
  std::vector<ImuSample> samples;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto v = parse_row(path, line_no, line, 7);
    ImuSample s;
    s.timestamp = v[0];
    s.accel = Eigen::Vector3d(v[1], v[2], v[3]);
    s.gyro = Eigen::Vector3d(v[4], v[5], v[6]);
    if (!samples.empty() && s.timestamp <= samples.back().timestamp) {
      fail_row(path, line_no, "timestamps must be strictly increasing");
    }
    samples.push_back(s);
  }
  return samples;
}

void write_scan_csv(const std::filesystem::path& path, const Scan& scan) {
  std::ofstream out = open_out(path);
  out << "t,range,bx,by,bz\n";
  for (const PointMeasurement& p : scan.points) {
    out << format_g9(p.timestamp) << ',' << format_g9(p.range) << ','
        << format_g9(p.bearing.x()) << ',' << format_g9(p.bearing.y()) << ','
        << format_g9(p.bearing.z()) << '\n';
  }
}

Scan read_scan_csv(const std::filesystem::path& path, double fallback_timestamp) {
  std::ifstream in = open_in(path);
  std::string header;
  if (!std::getline(in, header)) {
    fail_row(path, 1, "empty scan file");
  }

  enum class Layout { range_bearing, txyz, xyz };
  Layout layout;
  std::size_t fields;
  if (header == "t,range,bx,by,bz") {
    layout = Layout::range_bearing;
    fields = 5;
  } else if (header == "t,x,y,z") {
    layout = Layout::txyz;
    fields = 4;
  } else if (header == "x,y,z") {
    layout = Layout::xyz;
    fields = 3;
  } else {
    fail_row(path, 1, "unrecognized scan header '" + header + "'");
  }

  Scan scan;
  scan.timestamp = fallback_timestamp;
  std::string line;
  int line_no = 1;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto v = parse_row(path, line_no, line, fields);
    PointMeasurement m;
    if (layout == Layout::range_bearing) {
      m.timestamp = v[0];
      m.range = v[1];
      m.bearing = Eigen::Vector3d(v[2], v[3], v[4]);
    } else {
      const std::size_t base = layout == Layout::txyz ? 1 : 0;
      const Eigen::Vector3d p(v[base], v[base + 1], v[base + 2]);
      m.timestamp = layout == Layout::txyz ? v[0] : fallback_timestamp;
      m.range = p.norm();
      if (m.range <= 0.0) {
        fail_row(path, line_no, "point at the origin has no bearing");
      }
      m.bearing = p / m.range;
    }
    const double norm = m.bearing.norm();
    if (std::abs(norm - 1.0) > 1e-6) {
      fail_row(path, line_no, "bearing is not a unit vector (|b| = " +
                                  std::to_string(norm) + ")");
    }
    if (m.range <= 0.0) {
      fail_row(path, line_no, "range must be positive");
    }
    if (first) {
      scan.timestamp = m.timestamp;
      first = false;
    }
    scan.points.push_back(m);
  }
  return scan;
}

std::filesystem::path scan_filename(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d.csv", index);
  return buf;
}

std::vector<std::filesystem::path> list_scan_files(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw DataError("scan directory " + dir.string() + " does not exist");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

void write_tum(const std::filesystem::path& path, std::span<const TimedPose> poses) {
  std::ofstream out = open_out(path);
  for (const TimedPose& tp : poses) {
    const Eigen::Quaterniond q(tp.pose.rotation.matrix());
    out << format_g9(tp.timestamp) << ' ' << format_g9(tp.pose.translation.x()) << ' '
        << format_g9(tp.pose.translation.y()) << ' '
        << format_g9(tp.pose.translation.z()) << ' ' << format_g9(q.x()) << ' '
        << format_g9(q.y()) << ' ' << format_g9(q.z()) << ' ' << format_g9(q.w())
        << '\n';
  }
}

std::vector<TimedPose> read_tum(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<TimedPose> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') {
      continue;
    }
    std::istringstream stream(line);
    double t = 0.0;
    Eigen::Vector3d translation;
    double qx = 0.0;
    double qy = 0.0;
    double qz = 0.0;
    double qw = 1.0;
    if (!(stream >> t >> translation.x() >> translation.y() >> translation.z() >> qx >>
          qy >> qz >> qw)) {
      fail_row(path, line_no, "expected 't tx ty tz qx qy qz qw'");
    }
    Eigen::Quaterniond q(qw, qx, qy, qz);
    if (q.norm() < 1e-9) {
      fail_row(path, line_no, "zero quaternion");
    }
    q.normalize();
    poses.push_back(
        TimedPose{t, Pose{Rotation::from_matrix(q.toRotationMatrix()), translation}});
  }
  return poses;
}

void write_protection_csv(const std::filesystem::path& path,
                          std::span<const ProtectionRow> rows) {
  std::ofstream out = open_out(path);
  out << "t,p11,p12,p13,p22,p23,p33\n";
  for (const ProtectionRow& r : rows) {
    out << format_g9(r.timestamp) << ',' << format_g9(r.shape(0, 0)) << ','
        << format_g9(r.shape(0, 1)) << ',' << format_g9(r.shape(0, 2)) << ','
        << format_g9(r.shape(1, 1)) << ',' << format_g9(r.shape(1, 2)) << ','
        << format_g9(r.shape(2, 2)) << '\n';
  }
}

std::vector<ProtectionRow> read_protection_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "t,p11,p12,p13,p22,p23,p33") {
    fail_row(path, 1, "expected header t,p11,p12,p13,p22,p23,p33");
  }
  std::vector<ProtectionRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto v = parse_row(path, line_no, line, 7);
    ProtectionRow r;
    r.timestamp = v[0];
    r.shape << v[1], v[2], v[3],
               v[2], v[4], v[5],
               v[3], v[5], v[6];
    rows.push_back(r);
  }
  return rows;
}

void write_timing_csv(const std::filesystem::path& path, std::span<const TimingRow> rows) {
  std::ofstream out = open_out(path);
  out << "t,points,icp_ms,uncertainty_ms,filter_ms,total_ms\n";
  for (const TimingRow& r : rows) {
    out << format_g9(r.timestamp) << ',' << r.points << ',' << format_g9(r.icp_ms) << ','
        << format_g9(r.uncertainty_ms) << ',' << format_g9(r.filter_ms) << ','
        << format_g9(r.total_ms) << '\n';
  }
}

std::vector<TimingRow> read_timing_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line != "t,points,icp_ms,uncertainty_ms,filter_ms,total_ms") {
    fail_row(path, 1, "expected header t,points,icp_ms,uncertainty_ms,filter_ms,total_ms");
  }
  std::vector<TimingRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto v = parse_row(path, line_no, line, 6);
    rows.push_back(TimingRow{v[0], static_cast<int>(v[1]), v[2], v[3], v[4], v[5]});
  }
  return rows;
}

std::vector<GroundTruthSample> tum_to_ground_truth(std::span<const TimedPose> poses) {
  std::vector<GroundTruthSample> truth;
  truth.reserve(poses.size());
  for (const TimedPose& tp : poses) {
    truth.push_back(GroundTruthSample{tp.timestamp, tp.pose.translation,
                                      tp.pose.rotation});
  }
  return truth;
}

}  // namespace slio
