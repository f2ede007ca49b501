#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <cmath>
#include <numbers>

#include "calib/error.hpp"
#include "calib/frame.hpp"

namespace calib {

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Quaternion (unit) from a rotation vector angle*axis.
inline Eigen::Quaterniond quaternion_from_rotation_vector(
    const Eigen::Vector3d& w) {
  const double angle = w.norm();
  if (angle < 1e-12) {
    Eigen::Quaterniond q(1.0, 0.5 * w.x(), 0.5 * w.y(), 0.5 * w.z());
    return q.normalized();
  }
  return Eigen::Quaterniond(Eigen::AngleAxisd(angle, w / angle));
}

/// Rotation vector (angle*axis, angle in [0, pi]) of a unit quaternion.
inline Eigen::Vector3d rotation_vector(const Eigen::Quaterniond& q) {
  Eigen::Quaterniond qc = q;
  if (qc.w() < 0.0) qc.coeffs() = -qc.coeffs();
  const double vnorm = qc.vec().norm();
  if (vnorm < 1e-12) return 2.0 * qc.vec();
  const double angle = 2.0 * std::atan2(vnorm, qc.w());
  return (angle / vnorm) * qc.vec();
}

/// Rigid-body transform with explicit frame labels.
///
/// A transform with destination frame `dst` and source frame `src` maps
/// point coordinates expressed in `src` to coordinates in `dst`:
///
///   p_dst = R * p_src + t
///
/// Composition reads right to left: compose(a, b) applies b first, so the
/// frames must chain as a.src == b.dst. The rotation is stored as a unit
/// quaternion, renormalized and canonicalized to w >= 0 on construction.
class RigidTransform {
 public:
  RigidTransform()
      : rotation_(Eigen::Quaterniond::Identity()),
        translation_(Eigen::Vector3d::Zero()) {}

  RigidTransform(const Eigen::Quaterniond& rotation,
                 const Eigen::Vector3d& translation, FrameId dst, FrameId src)
      : rotation_(rotation), translation_(translation), dst_(dst), src_(src) {
    const double n = rotation_.norm();
    if (!(n > 1e-12) || !std::isfinite(n)) {
      throw Error(ErrorCode::NumericalFailure,
                  "rotation quaternion has near-zero or non-finite norm");
    }
    rotation_.coeffs() /= n;
    if (rotation_.w() < 0.0) rotation_.coeffs() = -rotation_.coeffs();
  }

  static RigidTransform identity(FrameId frame) {
    return identity(frame, frame);
  }

  /// Identity values between two (possibly different) frame labels.
  static RigidTransform identity(FrameId dst, FrameId src) {
    return RigidTransform(Eigen::Quaterniond::Identity(),
                          Eigen::Vector3d::Zero(), dst, src);
  }

  static RigidTransform from_matrix(const Eigen::Matrix4d& m, FrameId dst,
                                    FrameId src) {
    Eigen::Quaterniond q(m.topLeftCorner<3, 3>());
    return RigidTransform(q, m.topRightCorner<3, 1>(), dst, src);
  }

  const Eigen::Quaterniond& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }
  FrameId dst() const { return dst_; }
  FrameId src() const { return src_; }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation_.toRotationMatrix();
    m.topRightCorner<3, 1>() = translation_;
    return m;
  }

  /// p_dst = R * p_src + t.
  Eigen::Vector3d apply(const Eigen::Vector3d& p_src) const {
    return rotation_ * p_src + translation_;
  }

  /// Rotation angle in [0, pi].
  double rotation_angle() const {
    return 2.0 * std::atan2(rotation_.vec().norm(), rotation_.w());
  }

  /// Unit rotation axis; undefined for near-identity rotations.
  Eigen::Vector3d rotation_axis() const {
    const double vnorm = rotation_.vec().norm();
    if (vnorm < 1e-12) {
      throw Error(ErrorCode::DegenerateMotion,
                  "rotation axis undefined for near-identity rotation");
    }
    return rotation_.vec() / vnorm;
  }

  /// angle*axis log map of the rotation part.
  Eigen::Vector3d rotation_log() const { return rotation_vector(rotation_); }

  /// Same values with different frame labels.
  RigidTransform relabeled(FrameId dst, FrameId src) const {
    return RigidTransform(rotation_, translation_, dst, src);
  }

 private:
  Eigen::Quaterniond rotation_;
  Eigen::Vector3d translation_;
  FrameId dst_;
  FrameId src_;
};

/// a after b: frames must chain as a.src == b.dst.
inline RigidTransform compose(const RigidTransform& a,
                              const RigidTransform& b) {
  if (a.src() != b.dst()) {
    throw Error(ErrorCode::FrameMismatch,
                "cannot compose (" + a.dst().name() + "<-" + a.src().name() +
                    ") with (" + b.dst().name() + "<-" + b.src().name() + ")");
  }
  return RigidTransform(a.rotation() * b.rotation(),
                        a.rotation() * b.translation() + a.translation(),
                        a.dst(), b.src());
}

inline RigidTransform invert(const RigidTransform& t) {
  const Eigen::Quaterniond qi = t.rotation().conjugate();
  return RigidTransform(qi, -(qi * t.translation()), t.src(), t.dst());
}

inline RigidTransform operator*(const RigidTransform& a,
                                const RigidTransform& b) {
  return compose(a, b);
}

/// Left-multiplicative retraction: applies a tangent step
/// delta = (rotation vector; translation) in the destination frame.
inline RigidTransform apply_tangent_step(const RigidTransform& x,
                                         const Eigen::Matrix<double, 6, 1>& d) {
  const RigidTransform step(quaternion_from_rotation_vector(d.head<3>()),
                            d.tail<3>(), x.dst(), x.dst());
  return compose(step, x);
}

}  // namespace calib
