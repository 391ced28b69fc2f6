#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "shoulder/pose.hpp"

namespace shoulder {

enum class Side { Left, Right };

constexpr std::array<Side, 2> kSides{Side::Left, Side::Right};

const char* to_string(Side side);
Side side_from_string(const std::string& s);
inline std::size_t side_index(Side side) { return side == Side::Left ? 0 : 1; }

/// Frame attached to its parent by a fixed offset, optionally followed by a
/// revolute joint rotating about `axis` in the offset frame.
struct Link {
  std::string name;
  int parent = -1;  ///< index into RobotModel::links, -1 for the root
  Pose offset;
  int joint = -1;  ///< index into RobotModel::joints, -1 for a rigid attachment
};

struct Joint {
  std::string name;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double min = 0.0;  ///< rad
  double max = 0.0;  ///< rad
  int child_link = -1;
};

struct ViaPoint {
  int link = -1;
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();  ///< m, in the link frame
};

/// Straight-line muscle routed through fixed points on the skeleton.
struct MusclePath {
  std::string name;
  std::vector<ViaPoint> via_points;
  double reference_length = 0.0;  ///< length at the all-zero posture, m
};

/// Functional group of joints and the muscles that drive them.
struct Group {
  std::string name;
  std::vector<int> joints;
  std::vector<int> muscles;
};

struct ArmLayout {
  std::vector<int> scapula;       ///< roll first, then the scaled second DOF
  std::vector<int> glenohumeral;  ///< roll, pitch, yaw
  std::vector<int> elbow;
  std::vector<int> wrist;
  int hand_link = -1;
  int scapula_group = -1;
  int arm_group = -1;

  /// Glenohumeral, elbow and wrist joints: the set moved with the scapula fixed.
  std::vector<int> distal_joints() const;
  std::vector<int> all_joints() const;
};

/**
 * Kinematic tree plus muscle routing for the shoulder-complex model.
 *
 * Immutable once validated; every operation takes it by const reference.
 * Links are stored so that parents precede children.
 */
class RobotModel {
public:
  std::string name;
  std::vector<Link> links;
  std::vector<Joint> joints;
  std::vector<MusclePath> muscles;
  std::vector<Group> groups;
  std::array<ArmLayout, 2> arms;
  int camera_link = -1;

  const ArmLayout& arm(Side side) const { return arms[side_index(side)]; }

  int link_index(const std::string& name) const;    ///< throws UnknownLink
  int joint_index(const std::string& name) const;   ///< throws UnknownJoint
  int muscle_index(const std::string& name) const;  ///< throws ModelError
  int group_index(const std::string& name) const;   ///< throws UnknownGroup

  std::size_t dof() const { return joints.size(); }
  std::size_t muscle_count() const { return muscles.size(); }

  /// True when `joint` moves `link`, i.e. the joint lies on root->link.
  bool joint_moves_link(int joint, int link) const;

  /// Lower and upper joint limits in model order.
  Eigen::VectorXd lower_limits() const;
  Eigen::VectorXd upper_limits() const;

  /// Checks tree shape, references, group partition and arm layout. Throws ModelError.
  void validate() const;
  /// Tree order, joint ownership, unit axes and muscle references only.
  void validate_kinematics() const;

  /// Stable hash of the joint/muscle/group layout, used to tag mapping snapshots.
  std::string layout_hash() const;
};

/// Joint angles in radians, stored in RobotModel joint order.
class JointVector {
public:
  JointVector() = default;
  explicit JointVector(const RobotModel& model) : values_(Eigen::VectorXd::Zero(model.dof())) {}
  explicit JointVector(Eigen::VectorXd values) : values_(std::move(values)) {}

  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }
  double& operator[](std::size_t i) { return values_[static_cast<Eigen::Index>(i)]; }

  double get(const RobotModel& model, const std::string& joint) const;
  void set(const RobotModel& model, const std::string& joint, double value);

  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  /// Clamps every value to its joint limits; returns true if anything moved.
  bool clamp(const RobotModel& model);
  bool within_limits(const RobotModel& model, double slack = 0.0) const;

  friend bool operator==(const JointVector& a, const JointVector& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

private:
  Eigen::VectorXd values_;
};

}  // namespace shoulder
