#include <string>

#include "shoulder/angles.hpp"
#include "shoulder/model_io.hpp"
#include "shoulder/muscle_geometry.hpp"

namespace shoulder {

namespace {

class Builder {
public:
  explicit Builder(RobotModel& m) : m_(m) {}

  int link(const std::string& name, const std::string& parent, const Eigen::Vector3d& xyz,
           const Eigen::Quaterniond& rot = Eigen::Quaterniond::Identity()) {
    Link l;
    l.name = name;
    l.parent = parent.empty() ? -1 : m_.link_index(parent);
    l.offset = Pose(xyz, rot);
    m_.links.push_back(l);
    return static_cast<int>(m_.links.size()) - 1;
  }

  int joint(const std::string& name, const std::string& parent, const Eigen::Vector3d& xyz,
            const Eigen::Vector3d& axis, double min_deg, double max_deg) {
    const int li = link(name + "_link", parent, xyz);
    Joint j;
    j.name = name;
    j.axis = axis.normalized();
    j.min = deg2rad(min_deg);
    j.max = deg2rad(max_deg);
    j.child_link = li;
    m_.joints.push_back(j);
    const int ji = static_cast<int>(m_.joints.size()) - 1;
    m_.links[static_cast<std::size_t>(li)].joint = ji;
    return ji;
  }

  int muscle(const std::string& name, std::initializer_list<std::pair<std::string, Eigen::Vector3d>> points) {
    MusclePath p;
    p.name = name;
    for (const auto& [ln, off] : points) p.via_points.push_back({m_.link_index(ln), off});
    m_.muscles.push_back(p);
    return static_cast<int>(m_.muscles.size()) - 1;
  }

private:
  RobotModel& m_;
};

void add_arm(RobotModel& m, Builder& b, Side side) {
  const double s = side == Side::Left ? 1.0 : -1.0;
  const std::string p = side == Side::Left ? "l_" : "r_";
  ArmLayout& arm = m.arms[side_index(side)];
  using V = Eigen::Vector3d;

  // Scapulothoracic joint approximated by two stacked revolute DOF pivoting at the medial border.
  arm.scapula.push_back(b.joint(p + "scapula_roll", "trunk", V(-0.03, s * 0.06, 0.42), V(s, 0, 0), -15, 25));
  arm.scapula.push_back(b.joint(p + "scapula_yaw", p + "scapula_roll_link", V::Zero(), V(0, 1, 0), -20, 20));
  const std::string scap = p + "scapula_yaw_link";

  // Glenohumeral ball joint: roll (abduction), pitch (flexion), yaw (axial rotation).
  arm.glenohumeral.push_back(b.joint(p + "shoulder_roll", scap, V(0.02, s * 0.14, 0.0), V(s, 0, 0), -20, 60));
  arm.glenohumeral.push_back(b.joint(p + "shoulder_pitch", p + "shoulder_roll_link", V::Zero(), V(0, 1, 0), -60, 30));
  arm.glenohumeral.push_back(b.joint(p + "shoulder_yaw", p + "shoulder_pitch_link", V::Zero(), V(0, 0, s), -50, 50));
  const std::string upper = p + "shoulder_yaw_link";

  arm.elbow.push_back(b.joint(p + "elbow", upper, V(0, 0, -0.30), V(0, 1, 0), -140, -10));
  const std::string fore = p + "elbow_link";

  arm.wrist.push_back(b.joint(p + "wrist_pitch", fore, V(0, 0, -0.25), V(0, 1, 0), -45, 45));
  arm.wrist.push_back(b.joint(p + "wrist_yaw", p + "wrist_pitch_link", V::Zero(), V(s, 0, 0), -30, 30));
  arm.hand_link = b.link(p + "hand", p + "wrist_yaw_link", V(0, 0, -0.08));

  // Six muscles between trunk and scapula; balanced positive tensions exist over the full scapula range.
  Group sg;
  sg.name = p + "scapula";
  sg.joints = arm.scapula;
  sg.muscles.push_back(b.muscle(p + "scapulothoracic_1", {{"trunk", V(-0.0016, s * 0.083, 0.3884)}, {scap, V(0.0106, s * 0.0214, 0.0342)}}));
  sg.muscles.push_back(b.muscle(p + "scapulothoracic_2", {{"trunk", V(0.0016, s * 0.0559, 0.2732)}, {scap, V(-0.0464, s * 0.0793, 0.018)}}));
  sg.muscles.push_back(b.muscle(p + "scapulothoracic_3", {{"trunk", V(-0.0398, s * 0.0951, 0.6603)}, {scap, V(-0.0174, s * 0.0437, 0.0458)}}));
  sg.muscles.push_back(b.muscle(p + "scapulothoracic_4", {{"trunk", V(-0.033, s * 0.0559, 0.5285)}, {scap, V(-0.0225, s * 0.0681, -0.0498)}}));
  sg.muscles.push_back(b.muscle(p + "scapulothoracic_5", {{"trunk", V(-0.0358, s * 0.1535, 0.3179)}, {scap, V(-0.0067, s * 0.0761, -0.0332)}}));
  sg.muscles.push_back(b.muscle(p + "scapulothoracic_6", {{"trunk", V(-0.0418, s * 0.0359, 0.5369)}, {scap, V(0.0283, s * 0.0973, -0.0289)}}));

  // Seven muscles crossing the glenohumeral joint (five shallow, two deep), then elbow and wrist muscles.
  const V g(0.02, s * 0.14, 0.0);  // glenoid center in the scapula frame
  Group ag;
  ag.name = p + "arm";
  ag.joints = arm.distal_joints();
  ag.muscles.push_back(b.muscle(p + "deltoid_anterior", {{scap, g + V(0.045, s * 0.0, 0.04)}, {upper, V(0.0154, 0, -0.0962)}}));
  ag.muscles.push_back(b.muscle(p + "deltoid_middle", {{scap, g + V(0.0, s * 0.02, 0.05)}, {upper, V(-0.011, s * 0.0271, -0.0973)}}));
  ag.muscles.push_back(b.muscle(p + "deltoid_posterior", {{scap, g + V(-0.045, s * 0.0, 0.04)}, {upper, V(-0.0377, s * 0.0028, -0.0986)}}));
  ag.muscles.push_back(b.muscle(p + "teres_major", {{scap, g + V(-0.03, s * -0.07, -0.07)}, {upper, V(0.0153, s * -0.0256, -0.0781)}}));
  ag.muscles.push_back(b.muscle(p + "biceps_long", {{scap, g + V(0.035, s * 0.0, 0.03)}, {upper, V(0.0319, s * 0.0002, -0.1603)}, {fore, V(0.0333, 0, -0.0233)}}));
  ag.muscles.push_back(b.muscle(p + "supraspinatus", {{scap, g + V(-0.01, s * -0.07, 0.03)}, {upper, V(-0.0158, s * 0.0114, 0.0277)}}));
  ag.muscles.push_back(b.muscle(p + "infraspinatus", {{scap, g + V(-0.05, s * -0.05, -0.02)}, {upper, V(-0.0252, s * 0.0064, -0.0244)}}));
  ag.muscles.push_back(b.muscle(p + "brachialis", {{upper, V(0.0241, 0, -0.1801)}, {fore, V(0.027, 0, -0.0235)}}));
  ag.muscles.push_back(b.muscle(p + "triceps_lateral", {{upper, V(-0.0271, 0, -0.1499)}, {fore, V(-0.0234, 0, 0.0404)}}));
  const std::string wrist = p + "wrist_yaw_link";
  for (double fx : {1.0, -1.0}) {
    for (double fy : {1.0, -1.0}) {
      const std::string n = std::string(fx > 0 ? "flexor" : "extensor") + (fy > 0 ? "_radialis" : "_ulnaris");
      ag.muscles.push_back(b.muscle(p + n, {{fore, V(fx * 0.02, s * fy * 0.02, -0.15)}, {wrist, V(fx * 0.02, s * fy * 0.02, -0.03)}}));
    }
  }

  m.groups.push_back(sg);
  arm.scapula_group = static_cast<int>(m.groups.size()) - 1;
  m.groups.push_back(ag);
  arm.arm_group = static_cast<int>(m.groups.size()) - 1;
}

}  // namespace

RobotModel default_model() {
  RobotModel m;
  m.name = "humanlike-shoulder-complex";
  Builder b(m);
  b.link("trunk", "", Eigen::Vector3d::Zero());
  add_arm(m, b, Side::Left);
  add_arm(m, b, Side::Right);

  // Head camera: optical axis (z) forward and pitched 35 deg down, x to the robot's right.
  const double c = std::cos(deg2rad(35.0)), sn = std::sin(deg2rad(35.0));
  Eigen::Matrix3d R;
  R.col(0) = Eigen::Vector3d(0, -1, 0);
  R.col(2) = Eigen::Vector3d(c, 0, -sn);
  R.col(1) = R.col(2).cross(R.col(0));
  m.camera_link = b.link("head_camera", "trunk", Eigen::Vector3d(0.08, 0.0, 0.62), Eigen::Quaterniond(R));

  const Eigen::VectorXd ref = muscle_lengths(m, JointVector(m));
  for (std::size_t i = 0; i < m.muscles.size(); ++i) m.muscles[i].reference_length = ref[static_cast<Eigen::Index>(i)];
  m.validate();
  return m;
}

}  // namespace shoulder
