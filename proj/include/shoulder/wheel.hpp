#pragma once

#include <array>
#include <utility>
#include <vector>

#include "shoulder/pose.hpp"
#include "shoulder/robot_model.hpp"

namespace shoulder {

/// Kinematic steering wheel. The wheel frame has its z axis along the rotation axis;
/// rim angles are measured about z from the wheel x axis.
struct WheelSpec {
  Pose center_pose_body;
  double radius = 0.2;                          ///< m
  std::array<double, 2> grip_angles{0.0, 0.0};  ///< rad, indexed by side
  /// Hand orientation relative to the rim frame (x radial, y tangent, z axis) at each grip.
  std::array<Eigen::Quaterniond, 2> hand_offsets{Eigen::Quaterniond::Identity(), Eigen::Quaterniond::Identity()};
  double grip_tolerance = 0.025;  ///< m
  /// (time s, wheel angle deg) breakpoints, linearly interpolated, held past the ends.
  std::vector<std::pair<double, double>> angle_sequence;

  void validate() const;  ///< throws InvalidArgument
  double sequence_duration() const;
};

/// Target wheel angle (rad) at time t.
double schedule_angle(const WheelSpec& wheel, double t);

/// Rim point for a hand when the wheel is turned by `wheel_angle`.
Eigen::Vector3d rim_point(const WheelSpec& wheel, Side side, double wheel_angle);

/// Hand targets on the rim (left, right).
std::pair<Pose, Pose> grip_targets(const WheelSpec& wheel, double wheel_angle);

/// Wheel turn implied by a hand position projected into the wheel plane, wrapped near `reference`.
double projected_wheel_angle(const WheelSpec& wheel, Side side, const Eigen::Vector3d& hand, double reference);

/// Wheel placed so that the hands of `model` at posture q lie on the rim at angle zero.
WheelSpec wheel_from_posture(const RobotModel& model, const JointVector& q);

struct WheelState {
  double angle = 0.0;  ///< rad
  std::array<bool, 2> gripping{true, true};
};

struct GripUpdate {
  double angle = 0.0;
  std::array<bool, 2> gripping{true, true};
  std::array<double, 2> grip_error{0.0, 0.0};  ///< m, hand to its rim point at the resulting angle
  bool moved = false;                          ///< both hands gripped and the wheel followed
  int loss_events = 0;                         ///< gripping -> not gripping transitions this update
};

/**
 * Both hands within tolerance of their rim points at the mean projected angle:
 * the wheel turns to that angle. Otherwise the wheel keeps its angle and hands
 * farther than the tolerance from their rim points are flagged as slipping.
 */
GripUpdate wheel_update(const WheelSpec& wheel, WheelState& state, const Pose& left_hand, const Pose& right_hand);

}  // namespace shoulder
