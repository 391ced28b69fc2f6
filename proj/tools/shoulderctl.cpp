// Command-line front end: rhythm IK queries, steering runs and report export.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "shoulder/angles.hpp"
#include "shoulder/errors.hpp"
#include "shoulder/experiment_config.hpp"
#include "shoulder/harness.hpp"
#include "shoulder/jmm_io.hpp"
#include "shoulder/kinematics.hpp"
#include "shoulder/model_io.hpp"
#include "shoulder/rhythm_ik.hpp"

using namespace shoulder;

namespace {

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    std::size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size()) throw InvalidArgument("not a number: " + cell);
    out.push_back(v);
  }
  return out;
}

RobotModel model_or_default(const std::string& path) {
  return path.empty() || path == "default" ? default_model() : load_model(path);
}

/// Middle of each distal joint's range, scapula neutral.
JointVector ik_start(const RobotModel& model) {
  JointVector q(model);
  for (Side side : kSides)
    for (int j : model.arm(side).distal_joints()) {
      const auto& jt = model.joints[static_cast<std::size_t>(j)];
      q[static_cast<std::size_t>(j)] = 0.5 * (jt.min + jt.max);
    }
  return q;
}

int cmd_ik(const std::string& model_path, const std::string& target_s, const std::string& arm_s, double A,
           bool no_rhythm) {
  const RobotModel model = model_or_default(model_path);
  const auto v = parse_list(target_s);
  if (v.size() != 7) throw InvalidArgument("--target needs x,y,z,qw,qx,qy,qz");
  IkRequest req;
  req.target = Pose(Eigen::Vector3d(v[0], v[1], v[2]), Eigen::Quaterniond(v[3], v[4], v[5], v[6]).normalized());
  req.hand = side_from_string(arm_s);
  req.q_init = ik_start(model);

  JointVector q;
  IkResult last;
  std::vector<double> unclamped;
  if (no_rhythm) {
    last = ik_fixed_scapula(model, req);
    q = last.q;
  } else {
    RhythmParams params{A};
    RhythmIkResult r = scapulohumeral_ik(model, req, params);
    q = r.q;
    last = r.pass2;
    unclamped = r.scapula_unclamped;
  }
  std::printf("%-24s %12s\n", "joint", "angle_deg");
  for (int j : model.arm(req.hand).all_joints())
    std::printf("%-24s %12.4f\n", model.joints[static_cast<std::size_t>(j)].name.c_str(), rad2deg(q[static_cast<std::size_t>(j)]));
  std::printf("position_error_m %.3e\norientation_error_rad %.3e\n", last.position_error, last.orientation_error);
  if (!unclamped.empty())
    std::printf("scapula_unclamped_deg %.4f %.4f\n", rad2deg(unclamped[0]), rad2deg(unclamped[1]));
  return 0;
}

int cmd_steer(const std::string& config_path, const std::string& learning_s, long long seed, const std::string& out,
              const std::string& map_path) {
  ExperimentConfig cfg = config_path.empty() ? default_experiment_config() : load_config(config_path);
  if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
  const bool learning = learning_s == "on";
  const RobotModel model = config_model(cfg);

  PretrainedMap pre;
  if (!map_path.empty() && std::filesystem::exists(map_path)) {
    pre.map = load_map(map_path, model);
    pre.datasets = geometric_datasets(model, cfg.jmm, cfg.seed);
  } else {
    std::cerr << "pre-training the joint-muscle map on geometric samples...\n";
    pre = pretrain_map(model, cfg.jmm, cfg.seed);
    for (std::size_t g = 0; g < pre.validation_rms_deg.size(); ++g)
      std::cerr << "  " << model.groups[g].name << " validation RMS " << pre.validation_rms_deg[g] << " deg\n";
    if (!map_path.empty()) save_map(pre.map, map_path);
  }
  std::filesystem::create_directories(out);
  save_config(cfg, std::filesystem::path(out) / "config.json");
  const RunReport rep = run_steering_experiment(cfg, learning, pre, std::filesystem::path(out));
  std::printf("learning %s\n", learning ? "on" : "off");
  std::printf("grip_loss_events %d (first 20%%: %d, final segment: %d)\n", rep.grip_loss_events,
              rep.grip_loss_first_fraction, rep.grip_loss_final_segment);
  std::printf("max_tracking_error_deg %.3f over %d/%d gripping ticks\n", rep.max_tracking_error_deg, rep.gripping_ticks,
              rep.evaluation_ticks);
  std::printf("learning_rounds %d rollbacks %d teacher_samples %zu\n", rep.learning_rounds, rep.rollbacks,
              rep.teacher_samples_used);
  if (rep.aborted) {
    std::printf("aborted: %s\n", rep.abort_reason.c_str());
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shoulder-complex IK, joint-muscle learning and steering experiment"};
  app.require_subcommand(1);

  std::string model_path, target, arm = "left";
  double A = 1.0 / 2.7;
  bool no_rhythm = false;
  auto* ik = app.add_subcommand("ik", "Solve hand IK and print the joint table in degrees");
  ik->add_option("--model", model_path, "Model JSON (default: built-in)");
  ik->add_option("--target", target, "x,y,z,qw,qx,qy,qz in the body frame")->required();
  ik->add_option("--arm", arm, "left or right")->check(CLI::IsMember({"left", "right"}));
  ik->add_option("--A", A, "Scapulohumeral ratio");
  ik->add_flag("--no-rhythm", no_rhythm, "Keep the scapula fixed");

  std::string config, learning = "on", out, map_path;
  long long seed = -1;
  auto* steer = app.add_subcommand("steer", "Run the steering-wheel experiment");
  steer->add_option("--config", config, "Experiment config JSON (default: built-in)");
  steer->add_option("--learning", learning, "on or off")->check(CLI::IsMember({"on", "off"}));
  steer->add_option("--seed", seed, "Overrides the config seed");
  steer->add_option("--out", out, "Output directory")->required();
  steer->add_option("--map", map_path, "Pre-trained map cache (loaded if present, written otherwise)");

  std::string in_dir, report_out;
  auto* report = app.add_subcommand("report", "Write wheel_angle.csv and grip_error.csv from a run");
  report->add_option("--in", in_dir, "Run directory")->required();
  report->add_option("--out", report_out, "Destination (default: the run directory)");

  std::string export_out;
  auto* exp = app.add_subcommand("export-model", "Write the built-in model as JSON");
  exp->add_option("--out", export_out)->required();

  std::string cfg_out;
  auto* defcfg = app.add_subcommand("default-config", "Write the default experiment config");
  defcfg->add_option("--out", cfg_out)->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*ik) return cmd_ik(model_path, target, arm, A, no_rhythm);
    if (*steer) return cmd_steer(config, learning, seed, out, map_path);
    if (*report) {
      write_report(in_dir, report_out.empty() ? std::nullopt : std::optional<std::filesystem::path>(report_out));
      return 0;
    }
    if (*exp) {
      save_model(default_model(), export_out);
      return 0;
    }
    if (*defcfg) {
      save_config(default_experiment_config(), cfg_out);
      return 0;
    }
  } catch (const NoConvergence& e) {
    std::cerr << "error: " << e.what() << " (final error " << e.final_error() << ")\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
