#include "shoulder/robot_model.hpp"

#include <cstdint>
#include <cstdio>
#include <algorithm>
#include <cmath>
#include <set>

#include "shoulder/errors.hpp"

namespace shoulder {

const char* to_string(Side side) { return side == Side::Left ? "left" : "right"; }

Side side_from_string(const std::string& s) {
  if (s == "left") return Side::Left;
  if (s == "right") return Side::Right;
  throw InvalidArgument("side must be 'left' or 'right', got '" + s + "'");
}

std::vector<int> ArmLayout::distal_joints() const {
  std::vector<int> out = glenohumeral;
  out.insert(out.end(), elbow.begin(), elbow.end());
  out.insert(out.end(), wrist.begin(), wrist.end());
  return out;
}

std::vector<int> ArmLayout::all_joints() const {
  std::vector<int> out = scapula;
  const auto distal = distal_joints();
  out.insert(out.end(), distal.begin(), distal.end());
  return out;
}

int RobotModel::link_index(const std::string& n) const {
  for (std::size_t i = 0; i < links.size(); ++i)
    if (links[i].name == n) return static_cast<int>(i);
  throw UnknownLink(n);
}

int RobotModel::joint_index(const std::string& n) const {
  for (std::size_t i = 0; i < joints.size(); ++i)
    if (joints[i].name == n) return static_cast<int>(i);
  throw UnknownJoint(n);
}

int RobotModel::muscle_index(const std::string& n) const {
  for (std::size_t i = 0; i < muscles.size(); ++i)
    if (muscles[i].name == n) return static_cast<int>(i);
  throw ModelError("unknown muscle: " + n);
}

int RobotModel::group_index(const std::string& n) const {
  for (std::size_t i = 0; i < groups.size(); ++i)
    if (groups[i].name == n) return static_cast<int>(i);
  throw UnknownGroup(n);
}

bool RobotModel::joint_moves_link(int joint, int link) const {
  for (int l = link; l >= 0; l = links[static_cast<std::size_t>(l)].parent)
    if (links[static_cast<std::size_t>(l)].joint == joint) return true;
  return false;
}

Eigen::VectorXd RobotModel::lower_limits() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(joints.size()));
  for (std::size_t i = 0; i < joints.size(); ++i) v[static_cast<Eigen::Index>(i)] = joints[i].min;
  return v;
}

Eigen::VectorXd RobotModel::upper_limits() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(joints.size()));
  for (std::size_t i = 0; i < joints.size(); ++i) v[static_cast<Eigen::Index>(i)] = joints[i].max;
  return v;
}

void RobotModel::validate_kinematics() const {
  const int n_links = static_cast<int>(links.size());
  const int n_joints = static_cast<int>(joints.size());
  if (n_links == 0) throw ModelError("model has no links");

  std::set<std::string> names;
  int roots = 0;
  for (int i = 0; i < n_links; ++i) {
    const Link& l = links[static_cast<std::size_t>(i)];
    if (!names.insert(l.name).second) throw ModelError("duplicate link name: " + l.name);
    if (l.parent < 0) {
      ++roots;
    } else if (l.parent >= i) {
      throw ModelError("link '" + l.name + "' must come after its parent");
    }
    if (l.joint >= n_joints) throw ModelError("link '" + l.name + "' references a missing joint");
    if (!l.offset.is_finite()) throw ModelError("link '" + l.name + "' has a non-finite offset");
  }
  if (roots != 1) throw ModelError("model must have exactly one root link");

  names.clear();
  for (int j = 0; j < n_joints; ++j) {
    const Joint& jt = joints[static_cast<std::size_t>(j)];
    if (!names.insert(jt.name).second) throw ModelError("duplicate joint name: " + jt.name);
    if (jt.child_link < 0 || jt.child_link >= n_links ||
        links[static_cast<std::size_t>(jt.child_link)].joint != j)
      throw ModelError("joint '" + jt.name + "' must own exactly one child link");
    if (std::abs(jt.axis.norm() - 1.0) > 1e-9) throw ModelError("joint '" + jt.name + "' axis is not unit length");
    if (!(jt.min <= jt.max)) throw ModelError("joint '" + jt.name + "' has inverted limits");
  }

  names.clear();
  for (const MusclePath& m : muscles) {
    if (!names.insert(m.name).second) throw ModelError("duplicate muscle name: " + m.name);
    if (m.via_points.size() < 2) throw ModelError("muscle '" + m.name + "' needs at least two via points");
    for (const ViaPoint& v : m.via_points)
      if (v.link < 0 || v.link >= n_links) throw ModelError("muscle '" + m.name + "' references a missing link");
  }

}

void RobotModel::validate() const {
  validate_kinematics();
  const int n_links = static_cast<int>(links.size());
  const int n_joints = static_cast<int>(joints.size());
  const int n_muscles = static_cast<int>(muscles.size());
  if (groups.size() != 4) throw ModelError("model must define exactly 4 groups");
  std::vector<int> joint_owner(static_cast<std::size_t>(n_joints), 0);
  std::vector<int> muscle_owner(static_cast<std::size_t>(n_muscles), 0);
  for (const Group& g : groups) {
    if (g.joints.empty() || g.muscles.empty()) throw ModelError("group '" + g.name + "' is empty");
    for (int j : g.joints) {
      if (j < 0 || j >= n_joints) throw ModelError("group '" + g.name + "' references a missing joint");
      ++joint_owner[static_cast<std::size_t>(j)];
    }
    for (int m : g.muscles) {
      if (m < 0 || m >= n_muscles) throw ModelError("group '" + g.name + "' references a missing muscle");
      ++muscle_owner[static_cast<std::size_t>(m)];
    }
  }
  for (int j = 0; j < n_joints; ++j)
    if (joint_owner[static_cast<std::size_t>(j)] != 1)
      throw ModelError("joint '" + joints[static_cast<std::size_t>(j)].name + "' must belong to exactly one group");
  for (int m = 0; m < n_muscles; ++m)
    if (muscle_owner[static_cast<std::size_t>(m)] != 1)
      throw ModelError("muscle '" + muscles[static_cast<std::size_t>(m)].name + "' must belong to exactly one group");

  for (Side side : kSides) {
    const ArmLayout& a = arm(side);
    const std::string s = to_string(side);
    if (a.scapula.size() < 2) throw ModelError(s + " arm needs at least 2 scapula joints");
    if (a.glenohumeral.size() != 3) throw ModelError(s + " arm needs 3 glenohumeral joints");
    if (a.elbow.empty()) throw ModelError(s + " arm needs an elbow joint");
    if (a.wrist.size() < 2) throw ModelError(s + " arm needs at least 2 wrist joints");
    if (a.hand_link < 0 || a.hand_link >= n_links) throw ModelError(s + " arm has no hand link");
    for (int j : a.all_joints()) {
      if (j < 0 || j >= n_joints) throw ModelError(s + " arm references a missing joint");
      if (!joint_moves_link(j, a.hand_link)) throw ModelError(s + " arm joint is not on the hand chain");
    }
    if (a.scapula_group < 0 || a.scapula_group >= 4 || a.arm_group < 0 || a.arm_group >= 4)
      throw ModelError(s + " arm has invalid group references");
  }
  if (camera_link < 0 || camera_link >= n_links) throw ModelError("model has no camera link");
}

std::string RobotModel::layout_hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  for (const Joint& j : joints) mix("j:" + j.name);
  for (const MusclePath& m : muscles) mix("m:" + m.name);
  for (const Group& g : groups) {
    mix("g:" + g.name);
    for (int j : g.joints) mix(std::to_string(j));
    mix("|");
    for (int m : g.muscles) mix(std::to_string(m));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double JointVector::get(const RobotModel& model, const std::string& joint) const {
  return values_[model.joint_index(joint)];
}

void JointVector::set(const RobotModel& model, const std::string& joint, double value) {
  values_[model.joint_index(joint)] = value;
}

bool JointVector::clamp(const RobotModel& model) {
  bool moved = false;
  for (std::size_t i = 0; i < model.joints.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const double c = std::clamp(values_[k], model.joints[i].min, model.joints[i].max);
    if (c != values_[k]) {
      values_[k] = c;
      moved = true;
    }
  }
  return moved;
}

bool JointVector::within_limits(const RobotModel& model, double slack) const {
  if (size() != model.dof()) return false;
  for (std::size_t i = 0; i < model.joints.size(); ++i) {
    const double v = (*this)[i];
    if (!std::isfinite(v) || v < model.joints[i].min - slack || v > model.joints[i].max + slack) return false;
  }
  return true;
}

}  // namespace shoulder
