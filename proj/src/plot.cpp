#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "slio/pipeline.hpp"

namespace slio {

namespace {

constexpr int kPlotWidth = 800;
constexpr int kPlotHeight = 400;
constexpr int kTrajSize = 600;
constexpr double kMargin = 50.0;

struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string color;
  std::string label;
};

struct AxisRange {
  double lo = 0.0;
  double hi = 1.0;
  void expand(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    const double span = hi - lo;
    const double margin = span > 0.0 ? 0.05 * span : 1.0;
    lo -= margin;
    hi += margin;
  }
};

std::string polyline(const Series& s, const AxisRange& xr, const AxisRange& yr,
                     double width, double height) {
  const auto map_x = [&](double v) {
    return kMargin + (v - xr.lo) / (xr.hi - xr.lo) * (width - 2.0 * kMargin);
  };
  const auto map_y = [&](double v) {
    return height - kMargin - (v - yr.lo) / (yr.hi - yr.lo) * (height - 2.0 * kMargin);
  };
  std::string out = "  <polyline fill=\"none\" stroke=\"" + s.color +
                    "\" stroke-width=\"1.2\" points=\"";
  char buf[48];
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", map_x(s.x[i]), map_y(s.y[i]));
    out += buf;
  }
  out += "\"/>\n";
  return out;
}

void write_svg(const std::filesystem::path& path, const std::string& title,
               const std::string& x_label, const std::string& y_label,
               const std::vector<Series>& series, double width, double height) {
  AxisRange xr;
  AxisRange yr;
  bool first = true;
  for (const Series& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        xr.lo = xr.hi = s.x[i];
        yr.lo = yr.hi = s.y[i];
        first = false;
      }
      xr.expand(s.x[i]);
      yr.expand(s.y[i]);
    }
  }
  xr.pad();
  yr.pad();

  std::ofstream out(path);
  if (!out) {
    throw DataError("cannot write " + path.string());
  }
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "  <text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << title << "</text>\n";
  // axes
  out << "  <line x1=\"" << kMargin << "\" y1=\"" << height - kMargin << "\" x2=\""
      << width - kMargin << "\" y2=\"" << height - kMargin
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out << "  <line x1=\"" << kMargin << "\" y1=\"" << kMargin << "\" x2=\"" << kMargin
      << "\" y2=\"" << height - kMargin << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out << "  <text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << x_label << " [" << format_g9(xr.lo) << ", " << format_g9(xr.hi)
      << "]</text>\n";
  out << "  <text x=\"16\" y=\"" << height / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << height / 2 << ")\">" << y_label << " ["
      << format_g9(yr.lo) << ", " << format_g9(yr.hi) << "]</text>\n";

  double legend_y = 40.0;
  for (const Series& s : series) {
    out << polyline(s, xr, yr, width, height);
    if (!s.label.empty()) {
      out << "  <text x=\"" << width - kMargin - 150 << "\" y=\"" << legend_y
          << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << s.color << "\">"
          << s.label << "</text>\n";
      legend_y += 16.0;
    }
  }
  out << "</svg>\n";
}

}  // namespace

void cmd_plot(const std::filesystem::path& est_tum,
              const std::filesystem::path& protection_csv,
              const std::filesystem::path& gt_tum, const EvalConfig& eval,
              const std::filesystem::path& out_dir) {
  const std::vector<TrajectoryRecord> records =
      load_estimate_records(est_tum, protection_csv);
  const std::vector<GroundTruthSample> truth = tum_to_ground_truth(read_tum(gt_tum));

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
  if (assoc.pairs.empty()) {
    throw DataError("no estimate/ground-truth pairs to plot");
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw DataError("cannot create output directory " + out_dir.string());
  }

  const char* axis_names[3] = {"x", "y", "z"};
  for (int axis = 0; axis < 3; ++axis) {
    Series err{{}, {}, "#d62728", "error"};
    Series upper{{}, {}, "#1f77b4", "+protection"};
    Series lower{{}, {}, "#1f77b4", "-protection"};
    for (const auto& [ei, gi] : assoc.pairs) {
      const TrajectoryRecord& rec = records[ei];
      const double t = rec.timestamp;
      const double e = truth[gi].translation(axis) - rec.translation(axis);
      const double radius =
          std::sqrt(std::max(0.0, rec.protection_translation(axis, axis)));
      err.x.push_back(t);
      err.y.push_back(e);
      upper.x.push_back(t);
      upper.y.push_back(radius);
      lower.x.push_back(t);
      lower.y.push_back(-radius);
    }
    write_svg(out_dir / (std::string("error_") + axis_names[axis] + ".svg"),
              std::string("translation error vs protection level, ") + axis_names[axis] +
                  " axis",
              "time [s]", "error [m]", {err, upper, lower}, kPlotWidth, kPlotHeight);
  }

  Series est_xy{{}, {}, "#d62728", "estimate"};
  for (const TrajectoryRecord& r : records) {
    est_xy.x.push_back(r.translation.x());
    est_xy.y.push_back(r.translation.y());
  }
  Series gt_xy{{}, {}, "#2ca02c", "ground truth"};
  for (const GroundTruthSample& s : truth) {
    gt_xy.x.push_back(s.translation.x());
    gt_xy.y.push_back(s.translation.y());
  }
  write_svg(out_dir / "trajectory.svg", "top-down trajectory", "x [m]", "y [m]",
            {gt_xy, est_xy}, kTrajSize, kTrajSize);
}

}  // namespace slio
