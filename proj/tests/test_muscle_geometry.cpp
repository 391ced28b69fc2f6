#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "shoulder/errors.hpp"
#include "shoulder/muscle_geometry.hpp"
#include "support.hpp"

using namespace shoulder;

namespace {

// Chord between two points at radii r1, r2 separated by angle theta + offset.
double chord(double r1, double r2, double angle) { return std::sqrt(r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * std::cos(angle)); }
double chord_derivative(double r1, double r2, double angle) { return r1 * r2 * std::sin(angle) / chord(r1, r2, angle); }

}  // namespace

TEST_SUITE("muscle_geometry") {
  TEST_CASE("hinge lengths follow the chord formula") {
    const double r1 = 0.05, r2 = 0.04;
    RobotModel m = test::hinge_model(r1, r2);
    const double half_pi = std::numbers::pi / 2.0;
    for (double deg = -120.0; deg <= 120.0; deg += 7.5) {
      JointVector q(m);
      q[0] = deg2rad(deg);
      const Eigen::VectorXd l = muscle_lengths(m, q);
      CHECK(l[0] == doctest::Approx(chord(r1, r2, q[0] - half_pi)).epsilon(1e-12));
      CHECK(l[1] == doctest::Approx(chord(r1, r2, q[0] + half_pi)).epsilon(1e-12));
      const Eigen::MatrixXd J = muscle_jacobian_full(m, q);
      CHECK(J(0, 0) == doctest::Approx(chord_derivative(r1, r2, q[0] - half_pi)).epsilon(1e-10));
      CHECK(J(1, 0) == doctest::Approx(chord_derivative(r1, r2, q[0] + half_pi)).epsilon(1e-10));
    }
  }

  TEST_CASE("muscle Jacobian matches central differences") {
    const RobotModel& m = test::model();
    std::mt19937_64 rng(21);
    const double h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
      const JointVector q = test::random_posture(m, rng, 0.01);
      const Eigen::MatrixXd J = muscle_jacobian_full(m, q);
      REQUIRE(J.rows() == static_cast<Eigen::Index>(m.muscle_count()));
      for (std::size_t j = 0; j < m.dof(); ++j) {
        JointVector qp = q, qm = q;
        qp[j] += h;
        qm[j] -= h;
        const Eigen::VectorXd fd = (muscle_lengths(m, qp) - muscle_lengths(m, qm)) / (2 * h);
        CHECK((J.col(static_cast<Eigen::Index>(j)) - fd).cwiseAbs().maxCoeff() < 1e-5);
      }
    }
  }

  TEST_CASE("group Jacobian is the matching block of the full one") {
    const RobotModel& m = test::model();
    const JointVector q = test::hold(m);
    const Eigen::MatrixXd full = muscle_jacobian_full(m, q);
    for (std::size_t g = 0; g < m.groups.size(); ++g) {
      const Group& G = m.groups[g];
      const Eigen::MatrixXd Jg = muscle_jacobian(m, q, static_cast<int>(g));
      for (std::size_t i = 0; i < G.muscles.size(); ++i)
        for (std::size_t j = 0; j < G.joints.size(); ++j)
          CHECK(Jg(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == full(G.muscles[i], G.joints[j]));
      CHECK((group_muscle_lengths(m, q, static_cast<int>(g)) - gather(muscle_lengths(m, q), G.muscles)).norm() == 0.0);
    }
    CHECK_THROWS_AS(muscle_jacobian(m, q, 4), UnknownGroup);
    CHECK_THROWS_AS(group_muscle_lengths(m, q, -1), UnknownGroup);
  }

  TEST_CASE("reference lengths match the zero posture") {
    const RobotModel& m = test::model();
    const Eigen::VectorXd l0 = muscle_lengths(m, JointVector(m));
    for (std::size_t i = 0; i < m.muscle_count(); ++i) CHECK(m.muscles[i].reference_length == doctest::Approx(l0[static_cast<Eigen::Index>(i)]));
  }

  TEST_CASE("geometric dataset is seeded and consistent") {
    const RobotModel& m = test::model();
    const int g = m.group_index("l_arm");
    const auto a = geometric_jmm_dataset(m, g, 50, 7);
    const auto b = geometric_jmm_dataset(m, g, 50, 7);
    const auto c = geometric_jmm_dataset(m, g, 50, 8);
    REQUIRE(a.size() == 50);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].q == b[i].q);
      CHECK(a[i].lengths == b[i].lengths);
      differs = differs || a[i].q != c[i].q;
      CHECK(a[i].tensions.isZero());
      JointVector q(m);
      scatter(a[i].q, m.groups[static_cast<std::size_t>(g)].joints, q.values());
      for (int j : m.groups[static_cast<std::size_t>(g)].joints) {
        const Joint& jt = m.joints[static_cast<std::size_t>(j)];
        CHECK(q[static_cast<std::size_t>(j)] >= jt.min);
        CHECK(q[static_cast<std::size_t>(j)] <= jt.max);
      }
      CHECK((group_muscle_lengths(m, q, g) - a[i].lengths).norm() < 1e-15);
    }
    CHECK(differs);
    CHECK_THROWS_AS(geometric_jmm_dataset(m, g, 0, 1), InvalidArgument);
  }

  TEST_CASE("dataset CSV round trip") {
    const RobotModel& m = test::model();
    const auto data = geometric_jmm_dataset(m, m.group_index("r_scapula"), 20, 3);
    const auto path = std::filesystem::temp_directory_path() / "shoulder_dataset_roundtrip.csv";
    save_dataset_csv(data, path);
    const auto back = load_dataset_csv(path);
    std::filesystem::remove(path);
    REQUIRE(back.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
      CHECK((back[i].lengths - data[i].lengths).norm() < 1e-12);
      CHECK((back[i].q - data[i].q).norm() < 1e-12);
      CHECK((back[i].tensions - data[i].tensions).norm() < 1e-12);
    }
  }
}
