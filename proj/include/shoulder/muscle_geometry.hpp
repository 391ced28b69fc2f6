#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "shoulder/robot_model.hpp"

namespace shoulder {

/// Sensor reading of every muscle: lengths (m) and tensions (N), in model muscle order.
struct MuscleState {
  Eigen::VectorXd lengths;
  Eigen::VectorXd tensions;
};

/// One (lengths, tensions, joint angles) triple restricted to a group's muscles and joints.
struct JmmSample {
  Eigen::VectorXd lengths;   ///< m, group muscle order
  Eigen::VectorXd tensions;  ///< N, group muscle order
  Eigen::VectorXd q;         ///< rad, group joint order
};

/// Straight-line path length of every muscle at posture q.
Eigen::VectorXd muscle_lengths(const RobotModel& model, const JointVector& q);

/// Path lengths of the muscles belonging to `group`.
Eigen::VectorXd group_muscle_lengths(const RobotModel& model, const JointVector& q, int group);

/// dl/dq for all muscles over all joints (M x dof), from segment directions and joint axes.
Eigen::MatrixXd muscle_jacobian_full(const RobotModel& model, const JointVector& q);

/// dl/dq for one group's muscles over the group's joints. Throws UnknownGroup.
Eigen::MatrixXd muscle_jacobian(const RobotModel& model, const JointVector& q, int group);

/// Extracts the entries listed in `idx` from a full-length vector.
Eigen::VectorXd gather(const Eigen::VectorXd& full, const std::vector<int>& idx);
void scatter(const Eigen::VectorXd& part, const std::vector<int>& idx, Eigen::VectorXd& full);

/**
 * Samples the geometric model: q uniform within the group's joint limits (other
 * joints at zero), lengths from muscle_lengths, tensions zero.
 */
std::vector<JmmSample> geometric_jmm_dataset(const RobotModel& model, int group, std::size_t n, std::uint64_t seed);

/// CSV with header muscle_*, tension_*, joint_*; lengths in m, tensions in N, angles in degrees.
void save_dataset_csv(const std::vector<JmmSample>& samples, const std::filesystem::path& path);
std::vector<JmmSample> load_dataset_csv(const std::filesystem::path& path);

}  // namespace shoulder
