#include "gc4d/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace gc4d {

SE3 SE3::from_quaternion(const Eigen::Quaterniond& q, const Vec3& t) {
  return SE3{q.normalized().toRotationMatrix(), t};
}

SE3 SE3::from_axis_angle(const Vec3& omega, const Vec3& t) {
  return SE3{rotation_from_axis_angle(omega), t};
}

Vec3 se3_apply(const SE3& T, const Vec3& p) { return T.rotation * p + T.translation; }

SE3 se3_compose(const SE3& a, const SE3& b) {
  return SE3{a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

SE3 se3_invert(const SE3& T) {
  const Mat3 Rt = T.rotation.transpose();
  return SE3{Rt, -(Rt * T.translation)};
}

Vec3 sim3_apply(const SIM3& T, const Vec3& p) {
  return T.scale * (T.rotation * p) + T.translation;
}

SIM3 sim3_compose(const SIM3& a, const SIM3& b) {
  return SIM3{a.scale * b.scale, a.rotation * b.rotation,
              a.scale * (a.rotation * b.translation) + a.translation};
}

SIM3 sim3_invert(const SIM3& T) {
  const Mat3 Rt = T.rotation.transpose();
  const double inv_s = 1.0 / T.scale;
  return SIM3{inv_s, Rt, -inv_s * (Rt * T.translation)};
}

void sim3_apply_inplace(const SIM3& T, std::span<Vec3> points) {
  for (auto& p : points) p = sim3_apply(T, p);
}

Mat3 rotation_from_axis_angle(const Vec3& omega) {
  const double angle = omega.norm();
  if (angle == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, omega / angle).toRotationMatrix();
}

double rotation_angle(const Mat3& R) {
  // Quaternion route: 2 atan2(|v|, |w|) keeps full precision at small angles,
  // unlike acos((tr R - 1) / 2).
  const Eigen::Quaterniond q(R);
  return 2.0 * std::atan2(q.vec().norm(), std::abs(q.w()));
}

double orthonormality_error(const Mat3& R) {
  const double ortho = (R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(R.determinant() - 1.0));
}

}  // namespace gc4d
