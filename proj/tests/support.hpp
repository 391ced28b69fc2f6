#pragma once

#include <random>

#include "shoulder/angles.hpp"
#include "shoulder/model_io.hpp"
#include "shoulder/robot_model.hpp"

namespace shoulder::test {

inline const RobotModel& model() {
  static const RobotModel m = default_model();
  return m;
}

/// Uniform posture within limits for the listed joints (others zero, clamped).
inline JointVector random_posture(const RobotModel& m, std::mt19937_64& rng, double margin = 0.0) {
  JointVector q(m);
  for (std::size_t j = 0; j < m.dof(); ++j) {
    const auto& jt = m.joints[j];
    std::uniform_real_distribution<double> u(jt.min + margin, jt.max - margin);
    q[j] = u(rng);
  }
  return q;
}

/// The shoulder-forward posture used to place the wheel.
inline JointVector hold(const RobotModel& m) {
  JointVector q(m);
  for (Side s : kSides) {
    const auto& a = m.arm(s);
    q[static_cast<std::size_t>(a.glenohumeral[0])] = deg2rad(10.0);
    q[static_cast<std::size_t>(a.glenohumeral[1])] = deg2rad(-30.0);
    q[static_cast<std::size_t>(a.elbow[0])] = deg2rad(-95.0);
  }
  return q;
}

/**
 * One hinge about z between a root and a child link, with a flexor and an
 * extensor whose lengths follow the chord formula. Not a full robot: it only
 * passes the kinematic checks.
 */
inline RobotModel hinge_model(double r_root = 0.05, double r_child = 0.04) {
  RobotModel m;
  m.name = "hinge";
  m.links.push_back({"base", -1, Pose(), -1});
  m.links.push_back({"arm", 0, Pose(), 0});
  m.joints.push_back({"hinge", Eigen::Vector3d::UnitZ(), deg2rad(-120.0), deg2rad(120.0), 1});
  MusclePath flexor{"flexor", {{0, Eigen::Vector3d(0.0, r_root, 0.0)}, {1, Eigen::Vector3d(r_child, 0.0, 0.0)}}, 0.0};
  MusclePath extensor{"extensor", {{0, Eigen::Vector3d(0.0, -r_root, 0.0)}, {1, Eigen::Vector3d(r_child, 0.0, 0.0)}}, 0.0};
  m.muscles = {flexor, extensor};
  m.validate_kinematics();
  return m;
}

}  // namespace shoulder::test
