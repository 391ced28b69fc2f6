#pragma once

#include <vector>

#include "shoulder/pose.hpp"
#include "shoulder/robot_model.hpp"

namespace shoulder {

struct IkRequest {
  Pose target;  ///< hand pose in the body frame
  Side hand = Side::Left;
  JointVector q_init;
  double position_weight = 1.0;     ///< per meter
  double orientation_weight = 0.3;  ///< per radian
  int max_iters = 300;
  double tol_pos = 1e-3;  ///< m
  double tol_rot = 1e-2;  ///< rad

  void validate(const RobotModel& model) const;  ///< throws InvalidArgument
};

/// Ratio between scapulothoracic and glenohumeral angles.
struct RhythmParams {
  double A = 1.0 / 2.7;

  /// Throws InvalidArgument unless 0 <= A < 1 (A = 0 turns the scapula stage off).
  void validate() const;
};

struct IkResult {
  JointVector q;
  int iterations = 0;
  double position_error = 0.0;     ///< m
  double orientation_error = 0.0;  ///< rad
  /// Weighted error norm after each accepted iteration, starting with the initial error.
  std::vector<double> error_history;
};

/**
 * Damped least squares on the weighted 6-vector pose error, moving only the
 * glenohumeral, elbow and wrist joints of the requested arm. Every other joint,
 * including the scapula, keeps its q_init value. Limits are enforced by clamping
 * each trial step; the damping adapts within [1e-6, 1e2] so the error never
 * increases across accepted steps.
 *
 * Throws NoConvergence (with the final weighted error) when the tolerances are
 * not met within max_iters or the damping saturates.
 */
IkResult ik_fixed_scapula(const RobotModel& model, const IkRequest& req);

struct RhythmIkResult {
  JointVector q;           ///< second-pass solution
  JointVector first_pass;  ///< fixed-scapula solution at the initial scapula
  /// A * first-pass glenohumeral roll/pitch, before clamping to scapula limits.
  std::vector<double> scapula_unclamped;
  std::vector<bool> scapula_clamped;
  IkResult pass1;
  IkResult pass2;
};

/// Sets scapula roll/second DOF to A times glenohumeral roll/pitch of `q`, clamped to limits.
JointVector apply_rhythm(const RobotModel& model, Side side, const JointVector& q, const RhythmParams& params,
                         std::vector<double>* unclamped = nullptr, std::vector<bool>* clamped = nullptr);

/**
 * Scapulohumeral-rhythm IK: solve with the scapula fixed, move the scapula to
 * A times the resulting shoulder roll/pitch, then solve again with the moved
 * scapula fixed. NoConvergence carries pass() == 1 or 2.
 */
RhythmIkResult scapulohumeral_ik(const RobotModel& model, const IkRequest& req, const RhythmParams& params);

}  // namespace shoulder
