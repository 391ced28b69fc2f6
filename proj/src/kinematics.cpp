#include "shoulder/kinematics.hpp"

#include "shoulder/errors.hpp"

namespace shoulder {

namespace {

Pose local_transform(const RobotModel& model, const JointVector& q, const Link& link) {
  if (link.joint < 0) return link.offset;
  const Joint& j = model.joints[static_cast<std::size_t>(link.joint)];
  return compose(link.offset, Pose::rotation(j.axis, q[static_cast<std::size_t>(link.joint)]));
}

void check_size(const RobotModel& model, const JointVector& q) {
  if (q.size() != model.dof())
    throw DimensionMismatch("joint vector has " + std::to_string(q.size()) + " entries, model has " +
                            std::to_string(model.dof()));
}

}  // namespace

std::vector<Pose> link_poses(const RobotModel& model, const JointVector& q) {
  check_size(model, q);
  std::vector<Pose> poses(model.links.size());
  for (std::size_t i = 0; i < model.links.size(); ++i) {
    const Link& l = model.links[i];
    const Pose local = local_transform(model, q, l);
    poses[i] = l.parent < 0 ? local : compose(poses[static_cast<std::size_t>(l.parent)], local);
  }
  return poses;
}

Pose forward_kinematics(const RobotModel& model, const JointVector& q, int link) {
  check_size(model, q);
  if (link < 0 || link >= static_cast<int>(model.links.size())) throw UnknownLink(std::to_string(link));
  std::vector<int> chain;
  for (int l = link; l >= 0; l = model.links[static_cast<std::size_t>(l)].parent) chain.push_back(l);
  Pose pose;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it)
    pose = compose(pose, local_transform(model, q, model.links[static_cast<std::size_t>(*it)]));
  return pose;
}

Pose forward_kinematics(const RobotModel& model, const JointVector& q, const std::string& link) {
  return forward_kinematics(model, q, model.link_index(link));
}

Pose hand_pose(const RobotModel& model, const JointVector& q, Side side) {
  return forward_kinematics(model, q, model.arm(side).hand_link);
}

JointFrame joint_frame(const RobotModel& model, const std::vector<Pose>& poses, int joint) {
  const Joint& j = model.joints[static_cast<std::size_t>(joint)];
  const Pose& child = poses[static_cast<std::size_t>(j.child_link)];
  return {child.orientation() * j.axis, child.position()};
}

Matrix6X link_jacobian(const RobotModel& model, const JointVector& q, int link, const std::vector<int>& active_joints) {
  const auto poses = link_poses(model, q);
  const Eigen::Vector3d p = poses[static_cast<std::size_t>(link)].position();
  Matrix6X J = Matrix6X::Zero(6, static_cast<Eigen::Index>(active_joints.size()));
  for (std::size_t c = 0; c < active_joints.size(); ++c) {
    const int j = active_joints[c];
    if (j < 0 || j >= static_cast<int>(model.dof())) throw UnknownJoint(std::to_string(j));
    if (!model.joint_moves_link(j, link)) continue;
    const JointFrame f = joint_frame(model, poses, j);
    const auto col = static_cast<Eigen::Index>(c);
    J.block<3, 1>(0, col) = f.axis.cross(p - f.origin);
    J.block<3, 1>(3, col) = f.axis;
  }
  return J;
}

Matrix6X hand_jacobian(const RobotModel& model, const JointVector& q, Side side, const std::vector<int>& active_joints) {
  return link_jacobian(model, q, model.arm(side).hand_link, active_joints);
}

Matrix6X hand_jacobian(const RobotModel& model, const JointVector& q, Side side,
                       const std::vector<std::string>& active_joints) {
  std::vector<int> idx;
  idx.reserve(active_joints.size());
  for (const auto& n : active_joints) idx.push_back(model.joint_index(n));
  return hand_jacobian(model, q, side, idx);
}

}  // namespace shoulder
