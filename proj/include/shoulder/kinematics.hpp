#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "shoulder/pose.hpp"
#include "shoulder/robot_model.hpp"

namespace shoulder {

using Matrix6X = Eigen::Matrix<double, 6, Eigen::Dynamic>;

/// Poses of every link in the body (root) frame.
std::vector<Pose> link_poses(const RobotModel& model, const JointVector& q);

/// Pose of one link; only the root->link chain is evaluated.
Pose forward_kinematics(const RobotModel& model, const JointVector& q, int link);
Pose forward_kinematics(const RobotModel& model, const JointVector& q, const std::string& link);

Pose hand_pose(const RobotModel& model, const JointVector& q, Side side);

/// World-frame rotation axis and pivot of a joint, given precomputed link poses.
struct JointFrame {
  Eigen::Vector3d axis;
  Eigen::Vector3d origin;
};
JointFrame joint_frame(const RobotModel& model, const std::vector<Pose>& poses, int joint);

/**
 * Spatial Jacobian of a link origin: rows 0-2 linear (m/rad), rows 3-5
 * angular (rad/rad), one column per entry of `active_joints`. Joints that do
 * not move the link contribute a zero column.
 */
Matrix6X link_jacobian(const RobotModel& model, const JointVector& q, int link, const std::vector<int>& active_joints);

Matrix6X hand_jacobian(const RobotModel& model, const JointVector& q, Side side, const std::vector<int>& active_joints);
Matrix6X hand_jacobian(const RobotModel& model, const JointVector& q, Side side,
                       const std::vector<std::string>& active_joints);

}  // namespace shoulder
