#pragma once

// Rigid-body helpers written once for double and Dual scalars.

#include <cmath>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "dawnik/dual.hpp"

namespace dawnik {

template <typename T>
using Vec3 = Eigen::Matrix<T, 3, 1>;
template <typename T>
using Mat3 = Eigen::Matrix<T, 3, 3>;
// Quaternion coefficients stored as (w, x, y, z).
template <typename T>
using Quat4 = Eigen::Matrix<T, 4, 1>;

template <typename T>
struct RigidTransform {
  Mat3<T> rotation = Mat3<T>::Identity();
  Vec3<T> translation = Vec3<T>::Zero();

  RigidTransform operator*(const RigidTransform& rhs) const {
    RigidTransform out;
    out.rotation = rotation * rhs.rotation;
    out.translation = rotation * rhs.translation + translation;
    return out;
  }

  Vec3<T> apply(const Vec3<T>& p) const { return rotation * p + translation; }

  template <typename U>
  Vec3<U> apply(const Eigen::Vector3d& p) const {
    return rotation * p.cast<U>() + translation;
  }

  RigidTransform inverse() const {
    RigidTransform out;
    out.rotation = rotation.transpose();
    out.translation = -(out.rotation * translation);
    return out;
  }

  template <typename U>
  RigidTransform<U> cast() const {
    RigidTransform<U> out;
    out.rotation = rotation.template cast<U>();
    out.translation = translation.template cast<U>();
    return out;
  }
};

using Transform = RigidTransform<double>;

// Fixed-axis roll, pitch, yaw: R = Rz(yaw) * Ry(pitch) * Rx(roll).
inline Eigen::Matrix3d rpy_to_rotation(double roll, double pitch, double yaw) {
  return (Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

inline Transform make_transform(const Eigen::Vector3d& xyz, const Eigen::Vector3d& rpy) {
  Transform t;
  t.rotation = rpy_to_rotation(rpy.x(), rpy.y(), rpy.z());
  t.translation = xyz;
  return t;
}

// Rodrigues rotation about a unit axis.
template <typename T>
Mat3<T> axis_angle_rotation(const Eigen::Vector3d& axis, const T& angle) {
  using std::cos;
  using std::sin;
  const T s = sin(angle);
  const T c1 = T(1.0) - cos(angle);
  Eigen::Matrix3d k;
  k << 0.0, -axis.z(), axis.y(), axis.z(), 0.0, -axis.x(), -axis.y(), axis.x(), 0.0;
  const Eigen::Matrix3d k2 = k * k;
  Mat3<T> r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r(i, j) = (i == j ? T(1.0) : T(0.0)) + s * k(i, j) + c1 * k2(i, j);
  return r;
}

// Shepperd's method; result has non-negative scalar part.
template <typename T>
Quat4<T> rotation_to_quaternion(const Mat3<T>& m) {
  using std::sqrt;
  const T trace = m(0, 0) + m(1, 1) + m(2, 2);
  Quat4<T> q;
  if (trace > 0.0) {
    const T s = sqrt(trace + 1.0) * 2.0;
    q << 0.25 * s, (m(2, 1) - m(1, 2)) / s, (m(0, 2) - m(2, 0)) / s, (m(1, 0) - m(0, 1)) / s;
  } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
    const T s = sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;
    q << (m(2, 1) - m(1, 2)) / s, 0.25 * s, (m(0, 1) + m(1, 0)) / s, (m(0, 2) + m(2, 0)) / s;
  } else if (m(1, 1) > m(2, 2)) {
    const T s = sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;
    q << (m(0, 2) - m(2, 0)) / s, (m(0, 1) + m(1, 0)) / s, 0.25 * s, (m(1, 2) + m(2, 1)) / s;
  } else {
    const T s = sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;
    q << (m(1, 0) - m(0, 1)) / s, (m(0, 2) + m(2, 0)) / s, (m(1, 2) + m(2, 1)) / s, 0.25 * s;
  }
  if (q(0) < 0.0) q = -q;
  return q;
}

// Rotation vector (axis * angle) of a unit quaternion, angle in [0, pi].
template <typename T>
Vec3<T> quaternion_log(Quat4<T> q) {
  using std::atan2;
  using std::sqrt;
  if (q(0) < 0.0) q = -q;
  const Vec3<T> v = q.template tail<3>();
  const T w = q(0);
  const T n2 = v.squaredNorm();
  if (value_of(n2) < 1e-16) {
    // 2*atan(n/w)/n expanded around n = 0.
    const T factor = (2.0 / w) * (1.0 - n2 / (3.0 * w * w));
    return v * factor;
  }
  const T n = sqrt(n2);
  const T factor = 2.0 * atan2(n, w) / n;
  return v * factor;
}

// Rotation vector of R_des * R_cur^T, the rotation taking the current
// orientation onto the desired one.
template <typename T>
Vec3<T> orientation_error(const Eigen::Matrix3d& desired, const Mat3<T>& current) {
  const Mat3<T> err = desired.cast<T>() * current.transpose();
  return quaternion_log<T>(rotation_to_quaternion<T>(err));
}

// Canonical quaternion with w >= 0.
inline Eigen::Quaterniond hemisphere_normalized(Eigen::Quaterniond q) {
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  Pose() = default;
  Pose(const Eigen::Vector3d& p, const Eigen::Quaterniond& q)
      : position(p), orientation(hemisphere_normalized(q)) {}

  static Pose from_transform(const Transform& t) {
    return Pose(t.translation, Eigen::Quaterniond(t.rotation));
  }
  Transform to_transform() const {
    Transform t;
    t.rotation = orientation.toRotationMatrix();
    t.translation = position;
    return t;
  }
};

// Rotation vector of q_des * q_cur^-1.
inline Eigen::Vector3d orientation_error(const Eigen::Quaterniond& desired,
                                         const Eigen::Quaterniond& current) {
  const Eigen::Quaterniond e = hemisphere_normalized(desired * current.conjugate());
  return quaternion_log<double>(Quat4<double>(e.w(), e.x(), e.y(), e.z()));
}

}  // namespace dawnik
