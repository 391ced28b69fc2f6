#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "shoulder/jmm.hpp"
#include "shoulder/perception.hpp"
#include "shoulder/plant.hpp"
#include "shoulder/rhythm_ik.hpp"
#include "shoulder/wheel.hpp"

namespace shoulder {

struct LearningSettings {
  int update_every = 25;  ///< control ticks between online updates
  int online_steps = 20;  ///< optimizer steps per update
  std::size_t buffer_capacity = 2000;
  double mix_ratio = 0.2;
  double phase_duration = 40.0;   ///< s of wheel-free motion before the evaluation run
  bool update_during_evaluation = true;
};

struct ExperimentConfig {
  std::string model_path;  ///< empty: built-in default model
  PlantConfig plant;
  MarkerNoise noise;
  JmmConfig jmm;
  LearningSettings learning;
  RhythmParams rhythm;
  WheelSpec wheel;
  std::vector<std::pair<std::string, double>> hold_posture_deg;  ///< joint name, angle
  double tension_target = 39.2;                                  ///< N
  /// m/N per tick; pulls commanded tensions toward tension_target along posture-neutral directions.
  double cocontraction_gain = 1e-5;
  double max_command_rate = 0.05;  ///< m/s, largest change of any commanded muscle length
  double dt = 0.02;                                              ///< s
  double approach_duration = 2.0;  ///< s at wheel angle zero before the hands are placed on the rim
  double final_segment_duration = 10.0;  ///< s at the end of the evaluation run
  std::uint64_t seed = 1;                ///< marker noise, network initialization, minibatches

  void validate() const;
};

/// Built-in model, default perturbations, wheel placed at the default hold posture.
ExperimentConfig default_experiment_config();
JointVector hold_posture(const RobotModel& model, const ExperimentConfig& cfg);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// Missing keys keep their defaults; malformed values throw InvalidArgument.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

/// Model named by the config, or the built-in default.
RobotModel config_model(const ExperimentConfig& cfg);

}  // namespace shoulder
