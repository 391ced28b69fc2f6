#include <doctest.h>

#include <filesystem>
#include <random>

#include "shoulder/errors.hpp"
#include "shoulder/jmm.hpp"
#include "shoulder/jmm_io.hpp"
#include "support.hpp"

using namespace shoulder;

namespace {

JmmConfig small_config() {
  JmmConfig c;
  c.hidden = 32;
  c.batch = 32;
  return c;
}

struct Trained {
  JointMuscleMap map;
  int group;
  std::vector<JmmSample> data;
};

// Scapula-group map fitted briefly to geometric samples; shared by several cases.
const Trained& trained() {
  static const Trained t = [] {
    const RobotModel& m = test::model();
    Trained r{JointMuscleMap::create(m, small_config(), 5), m.group_index("l_scapula"), {}};
    r.data = geometric_jmm_dataset(m, r.group, 1500, 41);
    jmm_pretrain(r.map, r.group, r.data, 60, 3e-3, 9);
    return r;
  }();
  return t;
}

}  // namespace

TEST_SUITE("jmm") {
  TEST_CASE("pre-training reduces the joint error") {
    const RobotModel& m = test::model();
    JointMuscleMap map = JointMuscleMap::create(m, small_config(), 5);
    const int g = m.group_index("r_scapula");
    const auto data = geometric_jmm_dataset(m, g, 1000, 42);
    const TrainingReport rep = jmm_pretrain(map, g, data, 40, 3e-3, 1);
    REQUIRE(rep.epoch_rms_deg.size() == 40);
    CHECK(rep.epoch_rms_deg.back() < 0.25 * rep.epoch_rms_deg.front());
    CHECK(rep.validation_size == 100);
    CHECK(rep.validation_rms_deg < 2.0);
  }

  TEST_CASE("length Jacobian matches central differences") {
    const Trained& t = trained();
    const GroupNetwork& net = t.map.group(t.group);
    const double h = 1e-7;
    for (std::size_t s = 0; s < 10; ++s) {
      const JmmSample& smp = t.data[s * 37];
      const Eigen::MatrixXd J = net.length_jacobian(smp.lengths, smp.tensions);
      for (Eigen::Index i = 0; i < smp.lengths.size(); ++i) {
        Eigen::VectorXd lp = smp.lengths, lm = smp.lengths;
        lp[i] += h;
        lm[i] -= h;
        const Eigen::VectorXd fd = (net.forward(lp, smp.tensions) - net.forward(lm, smp.tensions)) / (2 * h);
        const double scale = std::max(1.0, fd.norm());
        CHECK((J.col(i) - fd).norm() / scale < 1e-4);
      }
    }
  }

  TEST_CASE("snapshot round trip is bit-identical") {
    const Trained& t = trained();
    const RobotModel& m = test::model();
    const auto path = std::filesystem::temp_directory_path() / "shoulder_map_roundtrip.json";
    save_map(t.map, path);
    const JointMuscleMap back = load_map(path, m);
    std::filesystem::remove(path);
    for (std::size_t g = 0; g < m.groups.size(); ++g) CHECK(back.groups[g].same_weights(t.map.groups[g]));
    for (std::size_t s = 0; s < 20; ++s) {
      const JmmSample& smp = t.data[s];
      CHECK(jmm_predict(back, t.group, smp.lengths, smp.tensions).q == jmm_predict(t.map, t.group, smp.lengths, smp.tensions).q);
    }
  }

  TEST_CASE("snapshot for another layout is rejected") {
    const Trained& t = trained();
    RobotModel other = test::model();
    std::swap(other.groups[0].muscles[0], other.groups[0].muscles[1]);
    CHECK_THROWS_AS(map_from_json(map_to_json(t.map), other), LayoutMismatch);
  }

  TEST_CASE("prediction checks dimensions and clamps to limits") {
    const Trained& t = trained();
    const GroupNetwork& net = t.map.group(t.group);
    CHECK_THROWS_AS(jmm_predict(t.map, t.group, Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)), DimensionMismatch);
    CHECK_THROWS_AS(jmm_predict(t.map, 9, t.data[0].lengths, t.data[0].tensions), UnknownGroup);
    const Eigen::VectorXd far = t.data[0].lengths.array() + 0.5;
    const Prediction p = jmm_predict(t.map, t.group, far, t.data[0].tensions);
    CHECK((p.q.array() >= net.lower.array()).all());
    CHECK((p.q.array() <= net.upper.array()).all());
  }

  TEST_CASE("online update touches only its own group") {
    const RobotModel& m = test::model();
    JointMuscleMap map = trained().map;
    const JointMuscleMap before = map;
    const int g = trained().group;
    ReplayBuffer buf(100, 0.2, geometric_jmm_dataset(m, g, 50, 1));
    std::vector<TeacherSample> fresh;
    for (std::size_t i = 0; i < 10; ++i) fresh.push_back({trained().data[i], 0.02 * static_cast<double>(i)});
    std::mt19937_64 rng(3);
    map.config.lr = 1e-4;
    const UpdateReport rep = jmm_update_online(map, g, buf, fresh, 5, rng);
    CHECK(rep.steps == 5);
    for (std::size_t k = 0; k < m.groups.size(); ++k)
      if (static_cast<int>(k) != g) CHECK(map.groups[k].same_weights(before.groups[k]));
    if (!rep.rolled_back) CHECK_FALSE(map.groups[static_cast<std::size_t>(g)].same_weights(before.groups[static_cast<std::size_t>(g)]));
  }

  TEST_CASE("replay buffer evicts the oldest samples") {
    ReplayBuffer buf(3, 0.0, {});
    for (int i = 0; i < 5; ++i) buf.push({JmmSample{}, static_cast<double>(i)});
    REQUIRE(buf.size() == 3);
    CHECK(buf.samples().front().timestamp == 2.0);
    CHECK(buf.samples().back().timestamp == 4.0);
    CHECK_THROWS_AS(ReplayBuffer(0, 0.0, {}), InvalidArgument);
    CHECK_THROWS_AS(ReplayBuffer(3, 0.5, {}), InvalidArgument);
  }

  TEST_CASE("online learning absorbs a constant length offset") {
    const RobotModel& m = test::model();
    JointMuscleMap map = trained().map;
    const int g = trained().group;
    const auto geo = geometric_jmm_dataset(m, g, 500, 2);
    auto shifted = geometric_jmm_dataset(m, g, 400, 3);
    for (auto& s : shifted) s.lengths.array() += 0.005;
    const std::vector<JmmSample> held(shifted.begin() + 300, shifted.end());
    const double rms_before = jmm_rms_deg(map, g, held);
    ReplayBuffer buf(1000, 0.2, geo);
    std::mt19937_64 rng(4);
    int accepted = 0;
    for (int round = 0; round < 60; ++round) {
      std::vector<TeacherSample> fresh;
      for (int i = 0; i < 5; ++i) fresh.push_back({shifted[static_cast<std::size_t>((round * 5 + i) % 300)], 0.0});
      const UpdateReport rep = jmm_update_online(map, g, buf, fresh, 20, rng);
      if (!rep.rolled_back) {
        ++accepted;
        CHECK(rep.loss_new_after <= rep.loss_new_before);
        CHECK(rep.loss_mix_after <= 1.2 * rep.loss_mix_before);
      }
    }
    CHECK(accepted > 0);
    CHECK(jmm_rms_deg(map, g, held) < 0.5 * rms_before);
  }

  TEST_CASE("a diverging update is rolled back") {
    const RobotModel& m = test::model();
    JointMuscleMap map = trained().map;
    const JointMuscleMap before = map;
    const int g = trained().group;
    map.config.lr = 50.0;
    ReplayBuffer buf(100, 0.2, geometric_jmm_dataset(m, g, 50, 1));
    std::vector<TeacherSample> fresh;
    for (std::size_t i = 0; i < 10; ++i) fresh.push_back({trained().data[i], 0.0});
    std::mt19937_64 rng(5);
    bool rolled = false;
    try {
      rolled = jmm_update_online(map, g, buf, fresh, 20, rng).rolled_back;
    } catch (const NonFinite&) {
      rolled = true;
    }
    CHECK(rolled);
    CHECK(map.groups[static_cast<std::size_t>(g)].same_weights(before.groups[static_cast<std::size_t>(g)]));
  }

  TEST_CASE("inversion reproduces the target posture") {
    const Trained& t = trained();
    for (std::size_t s = 0; s < 10; ++s) {
      const JmmSample& goal = t.data[100 + s];
      const JmmSample& start = t.data[200 + s];
      const InversionResult r = jmm_invert(t.map, t.group, goal.q, goal.tensions, start.lengths);
      const Eigen::VectorXd q = t.map.group(t.group).forward(r.lengths, goal.tensions);
      CHECK(rad2deg((q - goal.q).cwiseAbs().maxCoeff()) <= 0.5);
      CHECK(r.residual_deg <= 0.5);
    }
  }

  TEST_CASE("inversion rejects targets outside the limits") {
    const Trained& t = trained();
    Eigen::VectorXd q = t.map.group(t.group).upper;
    q[0] += 0.1;
    CHECK_THROWS_AS(jmm_invert(t.map, t.group, q, t.data[0].tensions, t.data[0].lengths), InvalidArgument);
  }
}
