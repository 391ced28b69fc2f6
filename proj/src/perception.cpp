#include "shoulder/perception.hpp"

#include <cmath>
#include <random>

#include "shoulder/angles.hpp"
#include "shoulder/errors.hpp"
#include "shoulder/kinematics.hpp"

namespace shoulder {

const std::string& hand_marker(Side side) { return side == Side::Left ? kMarkerHandLeft : kMarkerHandRight; }

void MarkerNoise::validate() const {
  if (!(sigma_pos >= 0.0) || !(sigma_rot >= 0.0) || !std::isfinite(sigma_pos) || !std::isfinite(sigma_rot))
    throw InvalidArgument("marker noise sigmas must be finite and >= 0");
}

std::vector<MarkerObservation> observe_markers(const Plant& plant, const Pose& wheel_pose_body, const MarkerNoise& noise,
                                               std::uint64_t seed) {
  noise.validate();
  const RobotModel& m = plant.model();
  const JointVector& q = plant.state().q_true;
  const Pose eye_inv = inverse(plant.state().camera_pose_true);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);

  std::vector<std::pair<std::string, Pose>> truth{
      {kMarkerHandLeft, hand_pose(m, q, Side::Left)},
      {kMarkerHandRight, hand_pose(m, q, Side::Right)},
      {kMarkerWheelCenter, wheel_pose_body},
  };
  std::vector<MarkerObservation> out;
  for (const auto& [id, body] : truth) {
    MarkerObservation o;
    o.marker_id = id;
    o.noise_sigma_pos = noise.sigma_pos;
    o.noise_sigma_rot = noise.sigma_rot;
    Pose in_eye = compose(eye_inv, body);
    // Draw noise for every marker so the stream does not depend on visibility.
    Eigen::Vector3d dp(n01(rng), n01(rng), n01(rng));
    Eigen::Vector3d dr(n01(rng), n01(rng), n01(rng));
    o.pose_in_eye = Pose(in_eye.position() + noise.sigma_pos * dp,
                         quaternion_from_rotvec(noise.sigma_rot * dr) * in_eye.orientation());
    o.visible = in_eye.position().z() > 0.0 && o.pose_in_eye.is_finite();
    out.push_back(std::move(o));
  }
  return out;
}

const MarkerObservation& find_marker(const std::vector<MarkerObservation>& obs, const std::string& id) {
  for (const auto& o : obs)
    if (o.marker_id == id) {
      if (!o.visible) throw MarkerNotVisible(id);
      return o;
    }
  throw MarkerNotVisible(id);
}

Pose hand_pose_from_object(const MarkerObservation& obs_wheel, const MarkerObservation& obs_hand,
                           const Pose& wheel_pose_body) {
  if (!obs_wheel.visible) throw MarkerNotVisible(obs_wheel.marker_id);
  if (!obs_hand.visible) throw MarkerNotVisible(obs_hand.marker_id);
  return compose(wheel_pose_body, compose(inverse(obs_wheel.pose_in_eye), obs_hand.pose_in_eye));
}

Pose hand_pose_from_camera(const MarkerObservation& obs_hand, const Pose& camera_nominal_body) {
  if (!obs_hand.visible) throw MarkerNotVisible(obs_hand.marker_id);
  return compose(camera_nominal_body, obs_hand.pose_in_eye);
}

Pose nominal_camera_pose(const RobotModel& model) {
  return forward_kinematics(model, JointVector(model), model.camera_link);
}

JointVector estimate_joint_angles(const RobotModel& model, const Pose& hand_pose_body, Side side,
                                  const JointVector& q_seed, const RhythmParams& params) {
  if (!hand_pose_body.is_finite()) throw InvalidArgument("estimate_joint_angles: hand pose is not finite");
  IkRequest req;
  req.target = hand_pose_body;
  req.hand = side;
  req.q_init = q_seed;
  return scapulohumeral_ik(model, req, params).q;
}

TeacherLog::TeacherLog(const std::filesystem::path& path, const RobotModel& model) : writer_(path) {
  std::vector<std::string> cols{"time", "marker_vis"};
  for (const auto& mu : model.muscles) cols.push_back("l_" + mu.name);
  for (const auto& mu : model.muscles) cols.push_back("t_" + mu.name);
  for (const auto& j : model.joints) cols.push_back("q_" + j.name);
  writer_.header(cols);
}

void TeacherLog::append(double time, bool markers_visible, const MuscleState& measured, const JointVector& q_est) {
  std::vector<double> row{time, markers_visible ? 1.0 : 0.0};
  for (Eigen::Index i = 0; i < measured.lengths.size(); ++i) row.push_back(measured.lengths[i]);
  for (Eigen::Index i = 0; i < measured.tensions.size(); ++i) row.push_back(measured.tensions[i]);
  for (std::size_t j = 0; j < q_est.size(); ++j) row.push_back(rad2deg(q_est[j]));
  writer_.row(row);
}

}  // namespace shoulder
