#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "slio/config.hpp"
#include "slio/filter.hpp"
#include "slio/io.hpp"
#include "slio/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

slio::RunConfig load_or_default(const std::string& config_path) {
  if (config_path.empty()) {
    std::istringstream defaults(slio::default_config_text());
    return slio::parse_config(defaults, "<defaults>");
  }
  return slio::load_config(config_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"slio: LiDAR-inertial odometry with guaranteed ellipsoidal protection levels"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("-c,--config", config_path, "configuration file (key = value sections)")
      ->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  std::string sim_out = "dataset";
  sim->add_option("-o,--out", sim_out, "output dataset directory")->capture_default_str();

  auto* run = app.add_subcommand("run", "run odometry over a dataset directory");
  std::string run_dataset = "dataset";
  std::string run_out = "output";
  run->add_option("-d,--dataset", run_dataset, "dataset directory")->capture_default_str();
  run->add_option("-o,--out", run_out, "output directory")->capture_default_str();

  auto* eval = app.add_subcommand("eval", "compute metrics against ground truth");
  std::string eval_est = "output/est.tum";
  std::string eval_protection = "output/protection.csv";
  std::string eval_gt = "dataset/ground_truth.tum";
  std::string eval_csv = "output/eval.csv";
  eval->add_option("--est", eval_est, "estimated trajectory (TUM)")->capture_default_str();
  eval->add_option("--protection", eval_protection, "protection-level CSV")
      ->capture_default_str();
  eval->add_option("--gt", eval_gt, "ground-truth trajectory (TUM)")->capture_default_str();
  eval->add_option("--csv", eval_csv, "per-step output CSV")->capture_default_str();

  auto* plot = app.add_subcommand("plot", "emit per-axis protection plots (SVG)");
  std::string plot_est = "output/est.tum";
  std::string plot_protection = "output/protection.csv";
  std::string plot_gt = "dataset/ground_truth.tum";
  std::string plot_out = "plots";
  plot->add_option("--est", plot_est, "estimated trajectory (TUM)")->capture_default_str();
  plot->add_option("--protection", plot_protection, "protection-level CSV")
      ->capture_default_str();
  plot->add_option("--gt", plot_gt, "ground-truth trajectory (TUM)")->capture_default_str();
  plot->add_option("-o,--out", plot_out, "output directory")->capture_default_str();

  auto* convert = app.add_subcommand("convert-scan",
                                     "rewrite an x,y,z cloud as a range-bearing scan");
  std::string convert_in;
  std::string convert_out;
  double convert_t = 0.0;
  convert->add_option("-i,--input", convert_in, "input CSV (x,y,z or t,x,y,z)")->required();
  convert->add_option("-o,--output", convert_out, "output CSV (t,range,bx,by,bz)")
      ->required();
  convert->add_option("-t,--timestamp", convert_t, "timestamp for untimed clouds")
      ->capture_default_str();

  auto* dump = app.add_subcommand("default-config", "print the default configuration");

  CLI11_PARSE(app, argc, argv);

  try {
    const slio::RunConfig config = load_or_default(config_path);
    if (sim->parsed()) {
      slio::cmd_simulate(config, sim_out);
      std::cout << "dataset written to " << sim_out << '\n';
    } else if (run->parsed()) {
      const slio::RunResult result = slio::cmd_run(run_dataset, config, run_out);
      std::cout << "scans = " << result.scans_processed
                << ", updates = " << result.updates_accepted
                << ", gated = " << result.updates_gated
                << ", map points = " << result.map_cloud.size() << '\n'
                << "outputs written to " << run_out << '\n';
    } else if (eval->parsed()) {
      slio::cmd_eval(eval_est, eval_protection, eval_gt, config.eval, std::cout,
                     eval_csv);
    } else if (plot->parsed()) {
      slio::cmd_plot(plot_est, plot_protection, plot_gt, config.eval, plot_out);
      std::cout << "plots written to " << plot_out << '\n';
    } else if (convert->parsed()) {
      const slio::Scan scan = slio::read_scan_csv(convert_in, convert_t);
      slio::write_scan_csv(convert_out, scan);
      std::cout << "wrote " << scan.points.size() << " points to " << convert_out << '\n';
    } else if (dump->parsed()) {
      std::cout << slio::default_config_text();
    }
  } catch (const slio::ConfigError& err) {
    std::cerr << "config error: " << err.what() << '\n';
    return kExitConfig;
  } catch (const slio::DataError& err) {
    std::cerr << "data error: " << err.what() << '\n';
    return kExitData;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
