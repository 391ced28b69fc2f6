#include <doctest.h>

#include <random>

#include "shoulder/errors.hpp"
#include "shoulder/kinematics.hpp"
#include "shoulder/rhythm_ik.hpp"
#include "support.hpp"

using namespace shoulder;

namespace {

// Posture with the scapula at zero and distal joints drawn from a moderate box.
JointVector reachable(const RobotModel& m, Side s, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  JointVector q = test::hold(m);
  const auto& a = m.arm(s);
  for (int j : a.distal_joints()) {
    const Joint& jt = m.joints[static_cast<std::size_t>(j)];
    const double mid = 0.5 * (jt.min + jt.max), half = 0.5 * (jt.max - jt.min);
    q[static_cast<std::size_t>(j)] = mid + 0.5 * half * u(rng);
  }
  return q;
}

JointVector seed_for(const RobotModel& m) {
  JointVector q = test::hold(m);
  for (Side s : kSides)
    for (int j : m.arm(s).scapula) q[static_cast<std::size_t>(j)] = 0.0;
  return q;
}

}  // namespace

TEST_SUITE("rhythm_ik") {
  TEST_CASE("fixed-scapula IK reaches poses generated by forward kinematics") {
    const RobotModel& m = test::model();
    std::mt19937_64 rng(31);
    int solved = 0;
    for (int trial = 0; trial < 40; ++trial) {
      const Side s = trial % 2 ? Side::Right : Side::Left;
      const JointVector truth = reachable(m, s, rng);
      IkRequest req;
      req.hand = s;
      req.target = hand_pose(m, truth, s);
      req.q_init = seed_for(m);
      const IkResult r = ik_fixed_scapula(m, req);
      ++solved;
      const Pose got = hand_pose(m, r.q, s);
      CHECK((got.position() - req.target.position()).norm() <= req.tol_pos);
      CHECK(rotation_distance(got.orientation(), req.target.orientation()) <= req.tol_rot);
      CHECK(r.q.within_limits(m));
      for (int j : m.arm(s).scapula) CHECK(r.q[static_cast<std::size_t>(j)] == req.q_init[static_cast<std::size_t>(j)]);
      for (int j : m.arm(s == Side::Left ? Side::Right : Side::Left).all_joints())
        CHECK(r.q[static_cast<std::size_t>(j)] == req.q_init[static_cast<std::size_t>(j)]);
      for (std::size_t k = 1; k < r.error_history.size(); ++k) CHECK(r.error_history[k] <= r.error_history[k - 1]);
    }
    CHECK(solved == 40);
  }

  TEST_CASE("second pass uses exactly A times the first-pass shoulder angles") {
    const RobotModel& m = test::model();
    std::mt19937_64 rng(32);
    const RhythmParams params{0.3704};
    for (int trial = 0; trial < 20; ++trial) {
      const Side s = trial % 2 ? Side::Right : Side::Left;
      IkRequest req;
      req.hand = s;
      req.target = hand_pose(m, reachable(m, s, rng), s);
      req.q_init = seed_for(m);
      const RhythmIkResult r = scapulohumeral_ik(m, req, params);
      const auto& a = m.arm(s);
      for (std::size_t k = 0; k < 2; ++k) {
        const double expected = params.A * r.first_pass[static_cast<std::size_t>(a.glenohumeral[k])];
        CHECK(r.scapula_unclamped[k] == expected);
        if (!r.scapula_clamped[k]) CHECK(r.q[static_cast<std::size_t>(a.scapula[k])] == expected);
      }
      CHECK((hand_pose(m, r.q, s).position() - req.target.position()).norm() <= req.tol_pos);
    }
  }

  TEST_CASE("scapula angles are clamped to their limits") {
    const RobotModel& m = test::model();
    JointVector q(m);
    const auto& a = m.arm(Side::Left);
    q[static_cast<std::size_t>(a.glenohumeral[0])] = m.joints[static_cast<std::size_t>(a.glenohumeral[0])].max;
    std::vector<double> raw;
    std::vector<bool> clamped;
    const JointVector out = apply_rhythm(m, Side::Left, q, RhythmParams{0.99}, &raw, &clamped);
    const Joint& sj = m.joints[static_cast<std::size_t>(a.scapula[0])];
    if (raw[0] > sj.max) {
      CHECK(clamped[0]);
      CHECK(out[static_cast<std::size_t>(a.scapula[0])] == sj.max);
    } else {
      CHECK_FALSE(clamped[0]);
    }
  }

  TEST_CASE("A = 0 leaves the scapula at zero") {
    const RobotModel& m = test::model();
    std::mt19937_64 rng(33);
    IkRequest req;
    req.target = hand_pose(m, reachable(m, Side::Left, rng), Side::Left);
    req.q_init = seed_for(m);
    const RhythmIkResult r = scapulohumeral_ik(m, req, RhythmParams{0.0});
    for (int j : m.arm(Side::Left).scapula) CHECK(r.q[static_cast<std::size_t>(j)] == 0.0);
  }

  TEST_CASE("invalid inputs") {
    const RobotModel& m = test::model();
    IkRequest req;
    req.target = hand_pose(m, test::hold(m), Side::Left);
    req.q_init = seed_for(m);
    CHECK_THROWS_AS(scapulohumeral_ik(m, req, RhythmParams{1.0}), InvalidArgument);
    CHECK_THROWS_AS(scapulohumeral_ik(m, req, RhythmParams{-0.1}), InvalidArgument);
    IkRequest short_seed = req;
    short_seed.q_init = JointVector(Eigen::VectorXd::Zero(3));
    CHECK_THROWS_AS(ik_fixed_scapula(m, short_seed), DimensionMismatch);
    IkRequest bad_tol = req;
    bad_tol.tol_pos = 0.0;
    CHECK_THROWS_AS(ik_fixed_scapula(m, bad_tol), InvalidArgument);
  }

  TEST_CASE("unreachable target fails in pass 1") {
    const RobotModel& m = test::model();
    IkRequest req;
    req.target = Pose::translation(Eigen::Vector3d(3.0, 0.0, 0.0));
    req.q_init = seed_for(m);
    req.max_iters = 50;
    try {
      scapulohumeral_ik(m, req, RhythmParams{});
      FAIL("expected NoConvergence");
    } catch (const NoConvergence& e) {
      CHECK(e.pass() == 1);
      CHECK(e.final_error() > 1.0);
    }
  }
}
