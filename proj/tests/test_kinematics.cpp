#include <doctest.h>

#include <random>
#include <set>

#include "shoulder/errors.hpp"
#include "shoulder/kinematics.hpp"
#include "shoulder/model_io.hpp"
#include "shoulder/muscle_geometry.hpp"
#include "support.hpp"

using namespace shoulder;
using shoulder::test::model;

namespace {

// Independent chain evaluation with 4x4 matrices built from raw link data.
Eigen::Matrix4d matrix_fk(const RobotModel& m, const JointVector& q, int link) {
  std::vector<int> chain;
  for (int l = link; l >= 0; l = m.links[static_cast<std::size_t>(l)].parent) chain.push_back(l);
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const Link& L = m.links[static_cast<std::size_t>(*it)];
    Eigen::Matrix4d off = Eigen::Matrix4d::Identity();
    off.topLeftCorner<3, 3>() = L.offset.orientation().toRotationMatrix();
    off.topRightCorner<3, 1>() = L.offset.position();
    Eigen::Matrix4d rot = Eigen::Matrix4d::Identity();
    if (L.joint >= 0) {
      const Joint& J = m.joints[static_cast<std::size_t>(L.joint)];
      rot.topLeftCorner<3, 3>() = Eigen::AngleAxisd(q[static_cast<std::size_t>(L.joint)], J.axis).toRotationMatrix();
    }
    T = T * off * rot;
  }
  return T;
}

}  // namespace

TEST_SUITE("kinematics") {
  TEST_CASE("default model topology") {
    const RobotModel& m = model();
    CHECK(m.dof() == 16);
    CHECK(m.groups.size() == 4);
    JointVector q(m);
    for (Side s : kSides) {
      const ArmLayout& a = m.arm(s);
      CHECK(a.scapula.size() == 2);
      CHECK(a.glenohumeral.size() == 3);
      CHECK(a.elbow.size() >= 1);
      CHECK(a.wrist.size() >= 2);
      CHECK(m.groups[static_cast<std::size_t>(a.scapula_group)].muscles.size() == 6);
      // Muscles whose length depends on a glenohumeral joint.
      const Eigen::MatrixXd J = muscle_jacobian_full(m, test::hold(m));
      int crossing = 0;
      for (Eigen::Index i = 0; i < J.rows(); ++i) {
        bool c = false;
        for (int j : a.glenohumeral) c = c || std::abs(J(i, j)) > 1e-9;
        crossing += c;
      }
      CHECK(crossing == 7);
    }
  }

  TEST_CASE("forward kinematics matches the homogeneous-matrix chain") {
    const RobotModel& m = model();
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
      const JointVector q = test::random_posture(m, rng);
      const auto poses = link_poses(m, q);
      for (std::size_t l = 0; l < m.links.size(); ++l) {
        const Eigen::Matrix4d T = matrix_fk(m, q, static_cast<int>(l));
        CHECK((poses[l].matrix() - T).norm() < 1e-12);
        CHECK((forward_kinematics(m, q, static_cast<int>(l)).matrix() - T).norm() < 1e-12);
      }
    }
  }

  TEST_CASE("hand Jacobian matches central differences") {
    const RobotModel& m = model();
    std::mt19937_64 rng(12);
    const double h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
      const JointVector q = test::random_posture(m, rng, 0.01);
      for (Side s : kSides) {
        const auto active = m.arm(s).all_joints();
        const Matrix6X J = hand_jacobian(m, q, s, active);
        const Pose p0 = hand_pose(m, q, s);
        for (std::size_t c = 0; c < active.size(); ++c) {
          JointVector qp = q, qm = q;
          qp[static_cast<std::size_t>(active[c])] += h;
          qm[static_cast<std::size_t>(active[c])] -= h;
          const Pose pp = hand_pose(m, qp, s), pm = hand_pose(m, qm, s);
          const Eigen::Vector3d dv = (pp.position() - pm.position()) / (2 * h);
          const Eigen::Vector3d dw =
              (orientation_error(pp.orientation(), p0.orientation()) - orientation_error(pm.orientation(), p0.orientation())) /
              (2 * h);
          CHECK((J.block<3, 1>(0, static_cast<Eigen::Index>(c)) - dv).norm() < 1e-5);
          CHECK((J.block<3, 1>(3, static_cast<Eigen::Index>(c)) - dw).norm() < 1e-5);
        }
      }
    }
  }

  TEST_CASE("joints off the chain give zero columns") {
    const RobotModel& m = model();
    const JointVector q = test::hold(m);
    const Matrix6X J = hand_jacobian(m, q, Side::Left, m.arm(Side::Right).all_joints());
    CHECK(J.norm() == 0.0);
    CHECK_THROWS_AS(hand_jacobian(m, q, Side::Left, std::vector<int>{99}), UnknownJoint);
    CHECK_THROWS_AS(hand_jacobian(m, q, Side::Left, std::vector<std::string>{"no_such_joint"}), UnknownJoint);
  }

  TEST_CASE("unknown names are reported") {
    const RobotModel& m = model();
    CHECK_THROWS_AS(forward_kinematics(m, JointVector(m), "no_such_link"), UnknownLink);
    CHECK_THROWS_AS(m.joint_index("nope"), UnknownJoint);
    CHECK_THROWS_AS(m.group_index("nope"), UnknownGroup);
  }

  TEST_CASE("JSON round trip preserves geometry and layout") {
    const RobotModel& m = model();
    const RobotModel r = model_from_json(model_to_json(m));
    CHECK(r.layout_hash() == m.layout_hash());
    std::mt19937_64 rng(13);
    for (int i = 0; i < 10; ++i) {
      const JointVector q = test::random_posture(m, rng);
      for (Side s : kSides) CHECK((hand_pose(r, q, s).matrix() - hand_pose(m, q, s).matrix()).norm() < 1e-12);
      CHECK((muscle_lengths(r, q) - muscle_lengths(m, q)).norm() < 1e-12);
    }
  }

  TEST_CASE("malformed models are rejected") {
    RobotModel bad = model();
    bad.joints[0].axis = Eigen::Vector3d(1.0, 1.0, 0.0);
    CHECK_THROWS_AS(bad.validate(), ModelError);
    RobotModel dup = model();
    dup.groups[1].joints.push_back(dup.groups[0].joints.front());
    CHECK_THROWS_AS(dup.validate(), ModelError);
    RobotModel three = model();
    three.groups.pop_back();
    CHECK_THROWS_AS(three.validate(), ModelError);
    CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(R"({"links": 3})")), ModelError);
  }

  TEST_CASE("joint vector clamps to limits") {
    const RobotModel& m = model();
    JointVector q(m);
    q.set(m, "l_elbow", deg2rad(10.0));
    CHECK_FALSE(q.within_limits(m));
    CHECK(q.clamp(m));
    CHECK(q.get(m, "l_elbow") == doctest::Approx(m.joints[static_cast<std::size_t>(m.joint_index("l_elbow"))].max));
    CHECK(q.within_limits(m));
    CHECK_FALSE(q.clamp(m));
  }
}
