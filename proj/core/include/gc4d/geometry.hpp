#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <span>
#include <vector>

namespace gc4d {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using PointCloud = std::vector<Vec3>;

/// Rigid transform p -> R p + t.
struct SE3 {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static SE3 identity() { return {}; }
  static SE3 from_quaternion(const Eigen::Quaterniond& q, const Vec3& t);
  /// Rotation by the axis-angle vector `omega` (radians * unit axis).
  static SE3 from_axis_angle(const Vec3& omega, const Vec3& t);
};

/// Similarity transform p -> s R p + t.
struct SIM3 {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static SIM3 identity() { return {}; }
};

Vec3 se3_apply(const SE3& T, const Vec3& p);
SE3 se3_compose(const SE3& a, const SE3& b);  // a ∘ b: apply b first
SE3 se3_invert(const SE3& T);

Vec3 sim3_apply(const SIM3& T, const Vec3& p);
SIM3 sim3_compose(const SIM3& a, const SIM3& b);
SIM3 sim3_invert(const SIM3& T);

void sim3_apply_inplace(const SIM3& T, std::span<Vec3> points);

/// Rotation matrix from axis-angle via Rodrigues' formula.
Mat3 rotation_from_axis_angle(const Vec3& omega);

/// Geodesic angle of a rotation matrix in radians, accurate near zero.
double rotation_angle(const Mat3& R);

/// max |RᵀR - I| and |det R - 1|; used to check orthonormality invariants.
double orthonormality_error(const Mat3& R);

}  // namespace gc4d
