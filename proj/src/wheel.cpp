#include "shoulder/wheel.hpp"

#include <cmath>
#include <numbers>

#include "shoulder/angles.hpp"
#include "shoulder/errors.hpp"
#include "shoulder/kinematics.hpp"

namespace shoulder {

namespace {

double wrap_near(double a, double reference) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return a - two_pi * std::round((a - reference) / two_pi);
}

Eigen::Matrix3d rot_z(double a) { return Eigen::AngleAxisd(a, Eigen::Vector3d::UnitZ()).toRotationMatrix(); }

}  // namespace

void WheelSpec::validate() const {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("wheel radius must be > 0");
  if (!(grip_tolerance > 0.0) || !std::isfinite(grip_tolerance)) throw InvalidArgument("grip tolerance must be > 0");
  if (!std::isfinite(grip_angles[0]) || !std::isfinite(grip_angles[1]) ||
      std::abs(wrap_near(grip_angles[0] - grip_angles[1], 0.0)) < 1e-9)
    throw InvalidArgument("grip angles must be finite and distinct");
  if (!center_pose_body.is_finite()) throw InvalidArgument("wheel pose is not finite");
  for (std::size_t i = 0; i < angle_sequence.size(); ++i) {
    const auto& [t, a] = angle_sequence[i];
    if (!std::isfinite(t) || !std::isfinite(a)) throw InvalidArgument("wheel angle sequence has non-finite entries");
    if (i > 0 && !(t > angle_sequence[i - 1].first))
      throw InvalidArgument("wheel angle sequence times must increase strictly");
  }
}

double WheelSpec::sequence_duration() const { return angle_sequence.empty() ? 0.0 : angle_sequence.back().first; }

double schedule_angle(const WheelSpec& wheel, double t) {
  const auto& seq = wheel.angle_sequence;
  if (seq.empty()) return 0.0;
  if (t <= seq.front().first) return deg2rad(seq.front().second);
  for (std::size_t i = 1; i < seq.size(); ++i) {
    if (t <= seq[i].first) {
      const double u = (t - seq[i - 1].first) / (seq[i].first - seq[i - 1].first);
      return deg2rad(seq[i - 1].second + u * (seq[i].second - seq[i - 1].second));
    }
  }
  return deg2rad(seq.back().second);
}

Eigen::Vector3d rim_point(const WheelSpec& wheel, Side side, double wheel_angle) {
  const double a = wheel.grip_angles[side_index(side)] + wheel_angle;
  return wheel.center_pose_body.transform_point(Eigen::Vector3d(wheel.radius * std::cos(a), wheel.radius * std::sin(a), 0.0));
}

std::pair<Pose, Pose> grip_targets(const WheelSpec& wheel, double wheel_angle) {
  auto target = [&](Side side) {
    const std::size_t s = side_index(side);
    Eigen::Quaterniond rim(wheel.center_pose_body.rotation_matrix() * rot_z(wheel.grip_angles[s] + wheel_angle));
    return Pose(rim_point(wheel, side, wheel_angle), rim * wheel.hand_offsets[s]);
  };
  return {target(Side::Left), target(Side::Right)};
}

double projected_wheel_angle(const WheelSpec& wheel, Side side, const Eigen::Vector3d& hand, double reference) {
  const Eigen::Vector3d v =
      wheel.center_pose_body.rotation_matrix().transpose() * (hand - wheel.center_pose_body.position());
  return wrap_near(std::atan2(v.y(), v.x()) - wheel.grip_angles[side_index(side)], reference);
}

WheelSpec wheel_from_posture(const RobotModel& model, const JointVector& q) {
  const Pose left = hand_pose(model, q, Side::Left);
  const Pose right = hand_pose(model, q, Side::Right);
  const Eigen::Vector3d across = left.position() - right.position();
  if (across.norm() < 1e-6) throw InvalidArgument("hands coincide; no wheel fits this posture");

  WheelSpec w;
  w.radius = 0.5 * across.norm();
  const Eigen::Vector3d x = across.normalized();
  // Axis points back toward the body and slightly up, like a car's steering column.
  Eigen::Vector3d z = Eigen::Vector3d(-1.0, 0.0, 0.5);
  z = (z - z.dot(x) * x).normalized();
  const Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d R;
  R << x, y, z;
  w.center_pose_body = Pose(0.5 * (left.position() + right.position()), Eigen::Quaterniond(R));
  w.grip_angles = {0.0, std::numbers::pi};
  for (Side side : kSides) {
    const std::size_t s = side_index(side);
    const Pose& hand = side == Side::Left ? left : right;
    Eigen::Quaterniond rim(R * rot_z(w.grip_angles[s]));
    w.hand_offsets[s] = (rim.inverse() * hand.orientation()).normalized();
  }
  w.angle_sequence = {{0.0, 0.0},   {8.0, 0.0},   {10.0, 10.0}, {18.0, 10.0}, {20.0, -10.0},
                      {28.0, -10.0}, {30.0, 10.0}, {38.0, 10.0}, {40.0, 0.0},  {50.0, 0.0}};
  return w;
}

GripUpdate wheel_update(const WheelSpec& wheel, WheelState& state, const Pose& left_hand, const Pose& right_hand) {
  const std::array<Eigen::Vector3d, 2> p{left_hand.position(), right_hand.position()};
  const double cand = 0.5 * (projected_wheel_angle(wheel, Side::Left, p[0], state.angle) +
                             projected_wheel_angle(wheel, Side::Right, p[1], state.angle));
  std::array<double, 2> e_cand{};
  for (Side side : kSides) e_cand[side_index(side)] = (p[side_index(side)] - rim_point(wheel, side, cand)).norm();

  GripUpdate out;
  const std::array<bool, 2> before = state.gripping;
  if (e_cand[0] <= wheel.grip_tolerance && e_cand[1] <= wheel.grip_tolerance) {
    state.angle = cand;
    state.gripping = {true, true};
    out.grip_error = e_cand;
    out.moved = true;
  } else {
    for (Side side : kSides) {
      const std::size_t s = side_index(side);
      out.grip_error[s] = (p[s] - rim_point(wheel, side, state.angle)).norm();
      state.gripping[s] = out.grip_error[s] <= wheel.grip_tolerance;
    }
    if (state.gripping[0] && state.gripping[1]) state.gripping[e_cand[0] >= e_cand[1] ? 0 : 1] = false;
  }
  for (std::size_t s = 0; s < 2; ++s)
    if (before[s] && !state.gripping[s]) ++out.loss_events;
  out.angle = state.angle;
  out.gripping = state.gripping;
  return out;
}

}  // namespace shoulder
