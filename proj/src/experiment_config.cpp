#include "shoulder/experiment_config.hpp"

#include <fstream>

#include "shoulder/angles.hpp"
#include "shoulder/errors.hpp"
#include "shoulder/model_io.hpp"

namespace shoulder {

using nlohmann::json;

namespace {

json pose_json(const Pose& p) {
  const auto& q = p.orientation();
  return {{"position", {p.position().x(), p.position().y(), p.position().z()}},
          {"quaternion_wxyz", {q.w(), q.x(), q.y(), q.z()}}};
}

Eigen::Quaterniond quat_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw InvalidArgument("quaternion must be [w, x, y, z]");
  const Eigen::Quaterniond q(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>());
  if (!(q.norm() > 0.0)) throw InvalidArgument("quaternion must be non-zero");
  return unit(q);
}

Pose pose_from(const json& j) {
  const json& p = j.at("position");
  if (!p.is_array() || p.size() != 3) throw InvalidArgument("position must have 3 entries");
  return Pose(Eigen::Vector3d(p[0].get<double>(), p[1].get<double>(), p[2].get<double>()),
              quat_from(j.at("quaternion_wxyz")));
}

json quat_json(const Eigen::Quaterniond& q) { return {q.w(), q.x(), q.y(), q.z()}; }

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void ExperimentConfig::validate() const {
  plant.validate();
  noise.validate();
  rhythm.validate();
  wheel.validate();
  if (!(dt > 0.0)) throw InvalidArgument("dt must be > 0");
  if (!(tension_target > 0.0)) throw InvalidArgument("tension_target must be > 0");
  if (!(cocontraction_gain >= 0.0)) throw InvalidArgument("cocontraction_gain must be >= 0");
  if (!(max_command_rate > 0.0)) throw InvalidArgument("max_command_rate must be > 0");
  if (approach_duration < 0.0 || final_segment_duration < 0.0) throw InvalidArgument("durations must be >= 0");
  if (learning.update_every < 1 || learning.online_steps < 0 || learning.buffer_capacity < 1)
    throw InvalidArgument("learning settings out of range");
  if (!(learning.mix_ratio >= 0.0 && learning.mix_ratio <= 1.0)) throw InvalidArgument("mix_ratio must lie in [0, 1]");
  if (learning.phase_duration < 0.0) throw InvalidArgument("learning phase duration must be >= 0");
  if (jmm.hidden < 1 || jmm.batch < 1 || jmm.epochs < 0 || !(jmm.lr > 0.0) || !(jmm.length_jitter >= 0.0))
    throw InvalidArgument("network settings out of range");
}

ExperimentConfig default_experiment_config() {
  ExperimentConfig cfg;
  cfg.hold_posture_deg = {{"l_shoulder_roll", 10.0}, {"l_shoulder_pitch", -30.0}, {"l_elbow", -95.0},
                          {"r_shoulder_roll", 10.0}, {"r_shoulder_pitch", -30.0}, {"r_elbow", -95.0}};
  const RobotModel model = default_model();
  cfg.wheel = wheel_from_posture(model, hold_posture(model, cfg));
  return cfg;
}

JointVector hold_posture(const RobotModel& model, const ExperimentConfig& cfg) {
  JointVector q(model);
  for (const auto& [name, deg] : cfg.hold_posture_deg) q.set(model, name, deg2rad(deg));
  return q;
}

RobotModel config_model(const ExperimentConfig& cfg) {
  return cfg.model_path.empty() ? default_model() : load_model(cfg.model_path);
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["format"] = "steering-experiment";
  j["version"] = 1;
  j["model_path"] = c.model_path;
  j["seed"] = c.seed;
  j["dt"] = c.dt;
  j["tension_target"] = c.tension_target;
  j["cocontraction_gain"] = c.cocontraction_gain;
  j["max_command_rate"] = c.max_command_rate;
  j["approach_duration"] = c.approach_duration;
  j["final_segment_duration"] = c.final_segment_duration;
  j["rhythm_A"] = c.rhythm.A;
  json hold = json::object();
  for (const auto& [name, deg] : c.hold_posture_deg) hold[name] = deg;
  j["hold_posture_deg"] = hold;
  j["plant"] = {{"via_point_noise_sigma", c.plant.via_point_noise_sigma},
                {"stretch_compliance", c.plant.stretch_compliance},
                {"camera_drift_gain", c.plant.camera_drift_gain},
                {"camera_drift_offset", c.plant.camera_drift_offset},
                {"muscle_stiffness", c.plant.muscle_stiffness},
                {"settle_tol", c.plant.settle_tol},
                {"max_joint_speed", c.plant.max_joint_speed},
                {"max_inner_iters", c.plant.max_inner_iters},
                {"seed", c.plant.seed}};
  j["marker_noise"] = {{"sigma_pos", c.noise.sigma_pos}, {"sigma_rot", c.noise.sigma_rot}};
  j["jmm"] = {{"hidden", c.jmm.hidden},
              {"lr", c.jmm.lr},
              {"lr_final", c.jmm.lr_final},
              {"batch", c.jmm.batch},
              {"epochs", c.jmm.epochs},
              {"tension_scale", c.jmm.tension_scale},
              {"length_jitter", c.jmm.length_jitter},
              {"geometric_samples", c.jmm.geometric_samples},
              {"validation_fraction", c.jmm.validation_fraction}};
  j["learning"] = {{"update_every", c.learning.update_every},
                   {"online_steps", c.learning.online_steps},
                   {"buffer_capacity", c.learning.buffer_capacity},
                   {"mix_ratio", c.learning.mix_ratio},
                   {"phase_duration", c.learning.phase_duration},
                   {"update_during_evaluation", c.learning.update_during_evaluation}};
  json seq = json::array();
  for (const auto& [t, a] : c.wheel.angle_sequence) seq.push_back({t, a});
  j["wheel"] = {{"center_pose_body", pose_json(c.wheel.center_pose_body)},
                {"radius", c.wheel.radius},
                {"grip_angles_deg", {rad2deg(c.wheel.grip_angles[0]), rad2deg(c.wheel.grip_angles[1])}},
                {"hand_offsets_wxyz", {quat_json(c.wheel.hand_offsets[0]), quat_json(c.wheel.hand_offsets[1])}},
                {"grip_tolerance", c.wheel.grip_tolerance},
                {"angle_sequence_s_deg", seq}};
  return j;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c = default_experiment_config();
  try {
    read(j, "model_path", c.model_path);
    read(j, "seed", c.seed);
    read(j, "dt", c.dt);
    read(j, "tension_target", c.tension_target);
    read(j, "cocontraction_gain", c.cocontraction_gain);
    read(j, "max_command_rate", c.max_command_rate);
    read(j, "approach_duration", c.approach_duration);
    read(j, "final_segment_duration", c.final_segment_duration);
    read(j, "rhythm_A", c.rhythm.A);
    if (j.contains("hold_posture_deg")) {
      c.hold_posture_deg.clear();
      for (const auto& [name, deg] : j.at("hold_posture_deg").items()) c.hold_posture_deg.emplace_back(name, deg.get<double>());
    }
    if (j.contains("plant")) {
      const json& p = j.at("plant");
      read(p, "via_point_noise_sigma", c.plant.via_point_noise_sigma);
      read(p, "stretch_compliance", c.plant.stretch_compliance);
      read(p, "camera_drift_gain", c.plant.camera_drift_gain);
      read(p, "camera_drift_offset", c.plant.camera_drift_offset);
      read(p, "muscle_stiffness", c.plant.muscle_stiffness);
      read(p, "settle_tol", c.plant.settle_tol);
      read(p, "max_joint_speed", c.plant.max_joint_speed);
      read(p, "max_inner_iters", c.plant.max_inner_iters);
      read(p, "seed", c.plant.seed);
    }
    if (j.contains("marker_noise")) {
      read(j.at("marker_noise"), "sigma_pos", c.noise.sigma_pos);
      read(j.at("marker_noise"), "sigma_rot", c.noise.sigma_rot);
    }
    if (j.contains("jmm")) {
      const json& m = j.at("jmm");
      read(m, "hidden", c.jmm.hidden);
      read(m, "lr", c.jmm.lr);
      read(m, "lr_final", c.jmm.lr_final);
      read(m, "batch", c.jmm.batch);
      read(m, "epochs", c.jmm.epochs);
      read(m, "tension_scale", c.jmm.tension_scale);
      read(m, "length_jitter", c.jmm.length_jitter);
      read(m, "geometric_samples", c.jmm.geometric_samples);
      read(m, "validation_fraction", c.jmm.validation_fraction);
    }
    if (j.contains("learning")) {
      const json& l = j.at("learning");
      read(l, "update_every", c.learning.update_every);
      read(l, "online_steps", c.learning.online_steps);
      read(l, "buffer_capacity", c.learning.buffer_capacity);
      read(l, "mix_ratio", c.learning.mix_ratio);
      read(l, "phase_duration", c.learning.phase_duration);
      read(l, "update_during_evaluation", c.learning.update_during_evaluation);
    }
    if (j.contains("wheel")) {
      const json& w = j.at("wheel");
      if (w.contains("center_pose_body")) c.wheel.center_pose_body = pose_from(w.at("center_pose_body"));
      read(w, "radius", c.wheel.radius);
      read(w, "grip_tolerance", c.wheel.grip_tolerance);
      if (w.contains("grip_angles_deg")) {
        const auto a = w.at("grip_angles_deg").get<std::vector<double>>();
        if (a.size() != 2) throw InvalidArgument("grip_angles_deg must have 2 entries");
        c.wheel.grip_angles = {deg2rad(a[0]), deg2rad(a[1])};
      }
      if (w.contains("hand_offsets_wxyz")) {
        const json& h = w.at("hand_offsets_wxyz");
        if (!h.is_array() || h.size() != 2) throw InvalidArgument("hand_offsets_wxyz must have 2 entries");
        c.wheel.hand_offsets = {quat_from(h[0]), quat_from(h[1])};
      }
      if (w.contains("angle_sequence_s_deg")) {
        c.wheel.angle_sequence.clear();
        for (const auto& e : w.at("angle_sequence_s_deg")) {
          if (!e.is_array() || e.size() != 2) throw InvalidArgument("angle sequence entries must be [time, deg]");
          c.wheel.angle_sequence.emplace_back(e[0].get<double>(), e[1].get<double>());
        }
      }
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open experiment config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidArgument("experiment config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write experiment config " + path.string());
  out << config_to_json(cfg).dump(2) << "\n";
}

}  // namespace shoulder
