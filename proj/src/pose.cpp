#include "shoulder/pose.hpp"

#include <cmath>
#include <limits>

namespace shoulder {

Eigen::Quaterniond unit(const Eigen::Quaterniond& q) {
  if (std::abs(q.squaredNorm() - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon()) return q;
  return q.normalized();
}

Eigen::Quaterniond canonical(const Eigen::Quaterniond& q) {
  Eigen::Quaterniond n = unit(q);
  if (n.w() < 0.0) n.coeffs() *= -1.0;
  return n;
}

Pose::Pose() : position_(Eigen::Vector3d::Zero()), orientation_(Eigen::Quaterniond::Identity()) {}

Pose::Pose(const Eigen::Vector3d& position, const Eigen::Quaterniond& orientation)
    : position_(position), orientation_(canonical(orientation)) {}

Pose Pose::translation(const Eigen::Vector3d& p) { return Pose(p, Eigen::Quaterniond::Identity()); }

Pose Pose::rotation(const Eigen::Vector3d& axis, double angle) {
  return Pose(Eigen::Vector3d::Zero(), Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.normalized())));
}

Pose Pose::from_matrix(const Eigen::Matrix4d& T) {
  Eigen::Matrix3d R = T.block<3, 3>(0, 0);
  return Pose(T.block<3, 1>(0, 3), Eigen::Quaterniond(R));
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  T.block<3, 3>(0, 0) = rotation_matrix();
  T.block<3, 1>(0, 3) = position_;
  return T;
}

Eigen::Vector3d Pose::transform_point(const Eigen::Vector3d& p) const {
  return position_ + orientation_ * p;
}

bool Pose::is_finite() const {
  return position_.allFinite() && orientation_.coeffs().allFinite();
}

Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.position() + a.orientation() * b.position(), a.orientation() * b.orientation());
}

Pose inverse(const Pose& p) {
  const Eigen::Quaterniond qi = p.orientation().conjugate();
  return Pose(-(qi * p.position()), qi);
}

double rotation_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  return a.angularDistance(b);
}

Eigen::Vector3d orientation_error(const Eigen::Quaterniond& target, const Eigen::Quaterniond& current) {
  Eigen::Quaterniond d = canonical(target * current.conjugate());
  const double s = d.vec().norm();
  if (s < 1e-12) return 2.0 * d.vec();
  const double angle = 2.0 * std::atan2(s, d.w());
  return d.vec() * (angle / s);
}

Eigen::Quaterniond quaternion_from_rotvec(const Eigen::Vector3d& v) {
  const double angle = v.norm();
  if (angle < 1e-15) return Eigen::Quaterniond::Identity();
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, v / angle));
}

}  // namespace shoulder
