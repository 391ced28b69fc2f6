#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "shoulder/csv.hpp"
#include "shoulder/muscle_geometry.hpp"
#include "shoulder/plant.hpp"
#include "shoulder/pose.hpp"
#include "shoulder/rhythm_ik.hpp"

namespace shoulder {

inline const std::string kMarkerHandLeft = "hand-left";
inline const std::string kMarkerHandRight = "hand-right";
inline const std::string kMarkerWheelCenter = "wheel-center";

const std::string& hand_marker(Side side);

struct MarkerNoise {
  double sigma_pos = 0.002;  ///< m, per axis
  double sigma_rot = 0.005;  ///< rad, per axis of a rotation-vector perturbation

  void validate() const;
};

struct MarkerObservation {
  std::string marker_id;
  Pose pose_in_eye;  ///< marker pose in the (true, drifted) camera frame
  double noise_sigma_pos = 0.0;
  double noise_sigma_rot = 0.0;
  bool visible = false;
};

/// Hand markers and the wheel-centre marker seen from the plant's drifted camera.
/// Markers with non-positive depth along the optical (z) axis are not visible.
std::vector<MarkerObservation> observe_markers(const Plant& plant, const Pose& wheel_pose_body, const MarkerNoise& noise,
                                               std::uint64_t seed);

/// Throws MarkerNotVisible when `id` is absent or hidden.
const MarkerObservation& find_marker(const std::vector<MarkerObservation>& obs, const std::string& id);

/// Hand pose in the body frame via the object: wheel_body * inv(eye->wheel) * (eye->hand).
Pose hand_pose_from_object(const MarkerObservation& obs_wheel, const MarkerObservation& obs_hand,
                           const Pose& wheel_pose_body);

/// Camera-frame estimate that trusts the nominal camera pose: camera_nominal * (eye->hand).
Pose hand_pose_from_camera(const MarkerObservation& obs_hand, const Pose& camera_nominal_body);

/// Nominal head-camera pose from the robot model.
Pose nominal_camera_pose(const RobotModel& model);

/// Teacher joint angles: the same rhythm IK used to generate commands, on the nominal model.
JointVector estimate_joint_angles(const RobotModel& model, const Pose& hand_pose_body, Side side,
                                  const JointVector& q_seed, const RhythmParams& params);

/// CSV log with columns time, marker_vis, l_*, t_*, q_* (lengths m, tensions N, angles deg).
class TeacherLog {
public:
  TeacherLog(const std::filesystem::path& path, const RobotModel& model);
  void append(double time, bool markers_visible, const MuscleState& measured, const JointVector& q_est);

private:
  CsvWriter writer_;
};

}  // namespace shoulder
