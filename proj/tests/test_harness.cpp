#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "shoulder/errors.hpp"
#include "shoulder/harness.hpp"
#include "shoulder/kinematics.hpp"
#include "support.hpp"

using namespace shoulder;

namespace {

const WheelSpec& wheel() {
  static const WheelSpec w = default_experiment_config().wheel;
  return w;
}

double wheel_plane_angle(const WheelSpec& w, const Eigen::Vector3d& p) {
  const Eigen::Vector3d local = inverse(w.center_pose_body).transform_point(p);
  return std::atan2(local.y(), local.x());
}

Pose hand_at(const WheelSpec& w, Side s, double angle, const Eigen::Vector3d& shift = Eigen::Vector3d::Zero()) {
  const auto [l, r] = grip_targets(w, angle);
  const Pose& p = s == Side::Left ? l : r;
  return Pose(p.position() + shift, p.orientation());
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Short schedule so whole runs stay fast.
ExperimentConfig short_config() {
  ExperimentConfig c = default_experiment_config();
  c.wheel.angle_sequence = {{0.0, 0.0}, {2.0, 5.0}, {4.0, 5.0}, {6.0, -5.0}, {8.0, 0.0}};
  c.learning.phase_duration = 4.0;
  c.approach_duration = 1.0;
  c.final_segment_duration = 2.0;
  return c;
}

const PretrainedMap& pretrained() {
  static const PretrainedMap p = [] {
    const ExperimentConfig c = default_experiment_config();
    return pretrain_map(config_model(c), c.jmm, c.seed);
  }();
  return p;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("grip targets sit on the rim at the grip angles") {
    const WheelSpec& w = wheel();
    const auto [l0, r0] = grip_targets(w, 0.0);
    CHECK(wheel_plane_angle(w, l0.position()) == doctest::Approx(w.grip_angles[0]).epsilon(1e-12));
    CHECK(std::remainder(wheel_plane_angle(w, r0.position()) - w.grip_angles[1], 2 * std::numbers::pi) ==
          doctest::Approx(0.0).epsilon(1e-12));
    for (double deg : {-25.0, -10.0, 0.0, 10.0, 33.0}) {
      const auto [l, r] = grip_targets(w, deg2rad(deg));
      CHECK((l.position() - w.center_pose_body.position()).norm() == doctest::Approx(w.radius).epsilon(1e-12));
      CHECK((r.position() - w.center_pose_body.position()).norm() == doctest::Approx(w.radius).epsilon(1e-12));
      const Eigen::Vector3d axis = w.center_pose_body.rotation_matrix().col(2);
      CHECK(std::abs((l.position() - w.center_pose_body.position()).dot(axis)) < 1e-12);
    }
  }

  TEST_CASE("ten degrees of turn moves each grip along the rim by the arc length") {
    const WheelSpec& w = wheel();
    const auto [l0, r0] = grip_targets(w, 0.0);
    const auto [l1, r1] = grip_targets(w, deg2rad(10.0));
    const double arc = w.radius * 10.0 * std::numbers::pi / 180.0;
    for (const auto& [a, b] : {std::pair{l0, l1}, std::pair{r0, r1}}) {
      const Eigen::Vector3d ca = a.position() - w.center_pose_body.position();
      const Eigen::Vector3d cb = b.position() - w.center_pose_body.position();
      const double angle = std::atan2(ca.cross(cb).norm(), ca.dot(cb));
      CHECK(w.radius * angle == doctest::Approx(arc).epsilon(1e-12));
    }
  }

  TEST_CASE("hand orientation targets follow the wheel") {
    const WheelSpec& w = wheel();
    const auto [l0, r0] = grip_targets(w, 0.0);
    const auto [l1, r1] = grip_targets(w, deg2rad(10.0));
    CHECK(rotation_distance(l0.orientation(), l1.orientation()) == doctest::Approx(deg2rad(10.0)));
    CHECK(rotation_distance(r0.orientation(), r1.orientation()) == doctest::Approx(deg2rad(10.0)));
  }

  TEST_CASE("both hands on the rim turn the wheel") {
    const WheelSpec& w = wheel();
    WheelState st;
    const double a = deg2rad(10.0);
    const GripUpdate u = wheel_update(w, st, hand_at(w, Side::Left, a), hand_at(w, Side::Right, a));
    CHECK(u.moved);
    CHECK(rad2deg(u.angle) == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(st.angle == u.angle);
    CHECK(u.gripping[0]);
    CHECK(u.gripping[1]);
    CHECK(u.loss_events == 0);
  }

  TEST_CASE("wheel angle is the mean of the two projected hand angles") {
    const WheelSpec& w = wheel();
    WheelState st;
    const GripUpdate u =
        wheel_update(w, st, hand_at(w, Side::Left, deg2rad(10.0)), hand_at(w, Side::Right, deg2rad(12.0)));
    CHECK(rad2deg(u.angle) == doctest::Approx(11.0).epsilon(1e-9));
    CHECK(u.gripping[0]);
    CHECK(u.gripping[1]);
  }

  TEST_CASE("a hand twice the tolerance away loses the grip and freezes the wheel") {
    const WheelSpec& w = wheel();
    WheelState st;
    st.angle = deg2rad(3.0);
    const Eigen::Vector3d away(0.0, 0.0, 2.0 * w.grip_tolerance);
    const GripUpdate u = wheel_update(w, st, hand_at(w, Side::Left, deg2rad(3.0), away), hand_at(w, Side::Right, deg2rad(3.0)));
    CHECK_FALSE(u.moved);
    CHECK(st.angle == deg2rad(3.0));
    CHECK_FALSE(u.gripping[0]);
    CHECK(u.gripping[1]);
    CHECK(u.loss_events == 1);
    CHECK(u.grip_error[0] == doctest::Approx(2.0 * w.grip_tolerance));
    // Staying off the rim is not a new event; returning restores the grip.
    CHECK(wheel_update(w, st, hand_at(w, Side::Left, deg2rad(3.0), away), hand_at(w, Side::Right, deg2rad(3.0))).loss_events == 0);
    const GripUpdate back = wheel_update(w, st, hand_at(w, Side::Left, deg2rad(3.0)), hand_at(w, Side::Right, deg2rad(3.0)));
    CHECK(back.gripping[0]);
    CHECK(back.moved);
  }

  TEST_CASE("schedule interpolates and holds") {
    const WheelSpec& w = wheel();
    CHECK(schedule_angle(w, -1.0) == 0.0);
    const auto& seq = w.angle_sequence;
    for (std::size_t i = 0; i < seq.size(); ++i) CHECK(rad2deg(schedule_angle(w, seq[i].first)) == doctest::Approx(seq[i].second));
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      const double mid = 0.5 * (seq[i].first + seq[i + 1].first);
      CHECK(rad2deg(schedule_angle(w, mid)) == doctest::Approx(0.5 * (seq[i].second + seq[i + 1].second)));
    }
    CHECK(rad2deg(schedule_angle(w, seq.back().first + 5.0)) == doctest::Approx(seq.back().second));
    double lo = 0.0, hi = 0.0;
    for (const auto& [t, a] : seq) lo = std::min(lo, a), hi = std::max(hi, a);
    CHECK(lo == -10.0);
    CHECK(hi == 10.0);
  }

  TEST_CASE("wheel validation") {
    WheelSpec w = wheel();
    w.radius = 0.0;
    CHECK_THROWS_AS(w.validate(), InvalidArgument);
    w = wheel();
    w.grip_angles = {0.5, 0.5};
    CHECK_THROWS_AS(w.validate(), InvalidArgument);
    w = wheel();
    w.angle_sequence = {{1.0, 0.0}, {1.0, 5.0}};
    CHECK_THROWS_AS(w.validate(), InvalidArgument);
  }

  TEST_CASE("the default wheel is reachable at the hold posture") {
    const ExperimentConfig c = default_experiment_config();
    const RobotModel m = config_model(c);
    const JointVector q = hold_posture(m, c);
    const auto [l, r] = grip_targets(c.wheel, 0.0);
    CHECK((hand_pose(m, q, Side::Left).position() - l.position()).norm() < 1e-9);
    CHECK((hand_pose(m, q, Side::Right).position() - r.position()).norm() < 1e-9);
    CHECK(rotation_distance(hand_pose(m, q, Side::Left).orientation(), l.orientation()) < 1e-9);
  }

  TEST_CASE("experiment config round trips through JSON") {
    ExperimentConfig c = default_experiment_config();
    c.seed = 17;
    c.learning.update_every = 7;
    c.plant.via_point_noise_sigma = 0.004;
    c.rhythm.A = 0.25;
    const auto path = std::filesystem::temp_directory_path() / "shoulder_config_roundtrip.json";
    save_config(c, path);
    const ExperimentConfig back = load_config(path);
    std::filesystem::remove(path);
    CHECK(config_to_json(back) == config_to_json(c));
    CHECK(back.seed == 17);
    CHECK(back.wheel.angle_sequence == c.wheel.angle_sequence);
    const ExperimentConfig partial = config_from_json(nlohmann::json::parse(R"({"seed": 5})"));
    CHECK(partial.seed == 5);
    CHECK(partial.dt == c.dt);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"dt": "fast"})")), InvalidArgument);
    CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"wheel": {"grip_angles_deg": [1]}})")), InvalidArgument);
  }

  TEST_CASE("zero-perturbation plant tracks without learning") {
    ExperimentConfig c = default_experiment_config();
    c.plant.via_point_noise_sigma = 0.0;
    c.plant.stretch_compliance = 0.0;
    c.plant.camera_drift_gain = 0.0;
    c.plant.camera_drift_offset = 0.0;
    const RunReport r = run_steering_experiment(c, false, pretrained());
    CHECK_FALSE(r.aborted);
    CHECK(r.grip_loss_events == 0);
    CHECK(r.gripping_ticks == r.evaluation_ticks);
    CHECK(r.max_tracking_error_deg <= 2.0);
  }

  TEST_CASE("learning-phase window errors shrink") {
    const RunReport r = run_steering_experiment(default_experiment_config(), true, pretrained());
    const std::vector<double> w = r.learning_window_errors(10.0);
    REQUIRE(w.size() >= 2);
    std::size_t down = 0;
    for (std::size_t i = 1; i < w.size(); ++i) down += w[i] <= w[i - 1];
    CHECK(static_cast<double>(down) >= 0.8 * static_cast<double>(w.size() - 1));
    CHECK(w.back() < w.front());
  }

  TEST_CASE("learning windows bucket by elapsed time") {
    RunReport r;
    for (int k = 1; k <= 30; ++k) {
      StepRecord s;
      s.time = 0.5 * k;
      s.phase = k <= 24 ? Phase::Learning : Phase::Evaluation;
      s.target_error = {static_cast<double>(k), static_cast<double>(k)};
      r.steps.push_back(s);
    }
    const std::vector<double> w = r.learning_window_errors(5.0);
    REQUIRE(w.size() == 3);
    CHECK(w[0] == doctest::Approx(5.5));
    CHECK(w[1] == doctest::Approx(15.5));
    CHECK(w[2] == doctest::Approx(22.5));
    CHECK_THROWS_AS(r.learning_window_errors(0.0), InvalidArgument);
  }

  TEST_CASE("achieved angle is undefined while a hand slips") {
    const RunReport r = run_steering_experiment(short_config(), false, pretrained());
    int counted = 0;
    for (const auto& s : r.steps) {
      if (s.phase != Phase::Evaluation) continue;
      const bool both = s.gripping[0] && s.gripping[1];
      CHECK(both == !std::isnan(s.wheel_deg));
      counted += both;
    }
    CHECK(counted == r.gripping_ticks);
  }

  TEST_CASE("runs are reproducible and the report is derived from the log") {
    const auto dir = std::filesystem::temp_directory_path() / "shoulder_harness_repeat";
    std::filesystem::remove_all(dir);
    const ExperimentConfig c = short_config();
    const RunReport a = run_steering_experiment(c, true, pretrained(), dir / "a");
    const RunReport b = run_steering_experiment(c, true, pretrained(), dir / "b");
    CHECK(a.learning_rounds > 0);
    for (const char* f : {"run.csv", "state.csv", "updates.csv", "teacher.csv", "summary.json"})
      CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    CHECK(a.max_tracking_error_deg == b.max_tracking_error_deg);

    write_report(dir / "a");
    std::ifstream wheel_csv(dir / "a" / "wheel_angle.csv");
    std::string line;
    std::getline(wheel_csv, line);
    CHECK(line == "time,phase,target_deg,wheel_deg,error_deg");
    std::size_t rows = 0;
    while (std::getline(wheel_csv, line)) ++rows;
    CHECK(rows == a.steps.size());
    CHECK(std::filesystem::exists(dir / "a" / "grip_error.csv"));
    CHECK_THROWS(write_report(dir / "missing"));
    std::filesystem::remove_all(dir);
  }
}
