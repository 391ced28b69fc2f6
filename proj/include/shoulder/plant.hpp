#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Core>

#include "shoulder/muscle_geometry.hpp"
#include "shoulder/pose.hpp"
#include "shoulder/robot_model.hpp"

namespace shoulder {

struct PlantConfig {
  double via_point_noise_sigma = 0.003;  ///< m, per axis
  double stretch_compliance = 1e-4;      ///< m/N, series elasticity the geometric model ignores
  double camera_drift_gain = 0.2;        ///< rad of camera pitch per rad of scapula deflection
  double camera_drift_offset = 0.02;     ///< m of camera shift per rad of scapula deflection
  double muscle_stiffness = 1e5;    ///< N/m
  double settle_tol = 1e-4;              ///< N*m, projected gradient norm at equilibrium
  double max_joint_speed = 2.0;          ///< rad/s
  int max_inner_iters = 60;
  std::uint64_t seed = 1;

  void validate() const;  ///< throws InvalidArgument
};

struct PlantState {
  double time = 0.0;
  JointVector q_true;
  Eigen::VectorXd l_cmd;
  MuscleState measured;  ///< lengths read at the actuator (= l_cmd), tensions from spring stretch
  Pose camera_pose_true;
  double residual = 0.0;  ///< projected equilibrium gradient norm after the step, N*m
};

/**
 * Quasi-static stand-in for the physical robot: the nominal skeleton with
 * perturbed muscle routing and series-elastic muscles. Each muscle pulls with
 *   t = k_eff * max(0, l_path(q) - l_cmd),  1/k_eff = 1/k + compliance,
 * and the posture settles at the minimum of the stored elastic energy.
 */
class Plant {
public:
  const RobotModel& model() const { return model_; }
  const PlantConfig& config() const { return cfg_; }
  const PlantState& state() const { return state_; }
  double effective_stiffness() const { return k_eff_; }
  /// Lengths recorded by initialize_posture (empty before).
  const Eigen::VectorXd& reference_lengths() const { return reference_lengths_; }

  /// Places the plant at posture q with the given commands (no settling).
  void reset(const JointVector& q, const Eigen::VectorXd& l_cmd);

  double energy(const JointVector& q, const Eigen::VectorXd& l_cmd) const;
  Eigen::VectorXd tensions(const JointVector& q, const Eigen::VectorXd& l_cmd) const;
  /// Energy gradient projected onto the joint-limit box.
  Eigen::VectorXd projected_gradient(const JointVector& q, const Eigen::VectorXd& l_cmd) const;

private:
  friend Plant plant_build(const RobotModel& nominal, const PlantConfig& cfg);
  friend PlantState plant_step(Plant& plant, const Eigen::VectorXd& l_cmd, double dt);
  friend PlantState initialize_posture(Plant& plant, double tension_target, const std::optional<JointVector>& hold,
                                       int max_iterations);

  void refresh_state();

  RobotModel model_;
  PlantConfig cfg_;
  PlantState state_;
  double k_eff_ = 0.0;
  Eigen::VectorXd reference_lengths_;
};

/// Copies the nominal model and perturbs every via point by N(0, sigma) per axis (seeded).
Plant plant_build(const RobotModel& nominal, const PlantConfig& cfg);

/**
 * Moves q_true toward the equilibrium for `l_cmd` by damped Gauss-Newton
 * descent on the elastic energy through the true muscle Jacobian, never
 * moving a joint more than max_joint_speed * dt. Accepted steps never raise
 * the energy. Throws NonFinite (state unchanged) on blow-up.
 */
PlantState plant_step(Plant& plant, const Eigen::VectorXd& l_cmd, double dt);

/**
 * Initial-posture procedure: hold the posture (if given), load every muscle to
 * `tension_target`, release, and correct out-of-band commands until every
 * tension is within +-10% of the target and the posture moves less than
 * 0.01 deg per step. Returns immediately when the current state already
 * satisfies both. Throws InvalidArgument for a non-positive target and
 * NoSettle when the bound is exhausted.
 */
PlantState initialize_posture(Plant& plant, double tension_target = 39.2,
                              const std::optional<JointVector>& hold = std::nullopt, int max_iterations = 200);

/// True head-camera pose: FK of the camera link composed with a drift that grows with scapula deflection.
Pose plant_camera_pose(const Plant& plant);

/// Sum of |scapula angle| over both arms, the deflection that drives camera drift.
double scapula_deflection(const RobotModel& model, const JointVector& q);

}  // namespace shoulder
