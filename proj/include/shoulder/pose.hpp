#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace shoulder {

/**
 * Rigid transform: position in meters plus a unit quaternion.
 *
 * The quaternion is kept normalized with w >= 0 so that every rotation has a
 * single stored representation.
 */
class Pose {
public:
  Pose();
  Pose(const Eigen::Vector3d& position, const Eigen::Quaterniond& orientation);

  static Pose identity() { return Pose(); }
  static Pose translation(const Eigen::Vector3d& p);
  static Pose rotation(const Eigen::Vector3d& axis, double angle);
  static Pose from_matrix(const Eigen::Matrix4d& T);

  const Eigen::Vector3d& position() const { return position_; }
  const Eigen::Quaterniond& orientation() const { return orientation_; }
  Eigen::Matrix3d rotation_matrix() const { return orientation_.toRotationMatrix(); }
  Eigen::Matrix4d matrix() const;

  /// Maps a point expressed in this frame into the parent frame.
  Eigen::Vector3d transform_point(const Eigen::Vector3d& p) const;

  bool is_finite() const;

private:
  Eigen::Vector3d position_;
  Eigen::Quaterniond orientation_;
};

/// a∘b: b expressed in a's frame, result in a's parent frame.
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

/// Angle of the relative rotation between two orientations (rad, in [0, pi]).
double rotation_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

/// Rotation vector (axis * angle) of `target * current^-1`, expressed in the parent frame.
Eigen::Vector3d orientation_error(const Eigen::Quaterniond& target, const Eigen::Quaterniond& current);

/// Quaternion from a rotation vector.
Eigen::Quaterniond quaternion_from_rotvec(const Eigen::Vector3d& v);

/// Normalized copy; a quaternion already unit to rounding is returned unchanged.
Eigen::Quaterniond unit(const Eigen::Quaterniond& q);

/// Unit quaternion with w >= 0.
Eigen::Quaterniond canonical(const Eigen::Quaterniond& q);

}  // namespace shoulder
