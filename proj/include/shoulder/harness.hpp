#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shoulder/experiment_config.hpp"
#include "shoulder/jmm.hpp"
#include "shoulder/wheel.hpp"

namespace shoulder {

enum class Phase { Learning = 0, Approach = 1, Evaluation = 2 };

struct StepRecord {
  double time = 0.0;  ///< s since the end of the initial-posture procedure
  Phase phase = Phase::Evaluation;
  double target_deg = 0.0;
  double wheel_deg = 0.0;     ///< NaN unless both hands grip
  std::array<double, 2> grip_error{0.0, 0.0};    ///< m, hand to its rim point (evaluation only)
  std::array<double, 2> target_error{0.0, 0.0};  ///< m, hand to its commanded rim point
  std::array<bool, 2> gripping{false, false};
  int loss_events = 0;
};

struct RunReport {
  std::vector<StepRecord> steps;
  double evaluation_start = 0.0;  ///< s
  double evaluation_end = 0.0;
  double max_tracking_error_deg = 0.0;  ///< over evaluation ticks with both hands gripping
  int grip_loss_events = 0;             ///< evaluation phase
  int grip_loss_first_fraction = 0;     ///< within the first 20% of the evaluation phase
  int grip_loss_final_segment = 0;      ///< within the final segment of the evaluation phase
  int gripping_ticks = 0;
  int evaluation_ticks = 0;
  std::size_t teacher_samples_used = 0;
  int learning_rounds = 0;
  int rollbacks = 0;
  int ik_failures = 0;
  int inversion_failures = 0;
  int estimation_failures = 0;
  bool aborted = false;
  std::string abort_reason;

  /// Mean target error (both hands) over consecutive windows of the learning phase.
  std::vector<double> learning_window_errors(double window) const;
};

/// Per-group geometric datasets and pre-trained map for the config's model.
struct PretrainedMap {
  JointMuscleMap map;
  std::vector<std::vector<JmmSample>> datasets;
  std::vector<double> validation_rms_deg;
};

/// Geometric training sets, one per group, deterministic in `seed`.
std::vector<std::vector<JmmSample>> geometric_datasets(const RobotModel& model, const JmmConfig& cfg, std::uint64_t seed);

PretrainedMap pretrain_map(const RobotModel& model, const JmmConfig& cfg, std::uint64_t seed);

/**
 * Full steering experiment: initial posture, optional wheel-free learning phase,
 * approach, then the evaluation run over the wheel's angle sequence. Writes
 * run.csv, state.csv, teacher.csv, updates.csv and summary.json when `out_dir`
 * is given. A plant blow-up ends the run early with `aborted` set.
 */
RunReport run_steering_experiment(const ExperimentConfig& cfg, bool learning, const PretrainedMap& pretrained,
                                  const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Convenience overload that pre-trains first.
RunReport run_steering_experiment(const ExperimentConfig& cfg, bool learning,
                                  const std::optional<std::filesystem::path>& out_dir = std::nullopt);

/// Reads run.csv from `in_dir` and writes wheel_angle.csv and grip_error.csv next to it (or to `out_dir`).
void write_report(const std::filesystem::path& in_dir, const std::optional<std::filesystem::path>& out_dir = std::nullopt);

}  // namespace shoulder
