#pragma once

#include <Eigen/Dense>

#include "calib/transform.hpp"

namespace calib {

/// Chasles screw parameters: rotation by `angle` about the line with unit
/// direction `axis` and moment `moment` (= point_on_axis x axis), plus a
/// `pitch` translation along the axis.
struct ScrewParameters {
  Eigen::Vector3d axis;
  Eigen::Vector3d moment;
  double angle = 0.0;  // radians, in [0, pi]
  double pitch = 0.0;  // meters
};

/// Decomposes a rigid motion into screw parameters. The axis is undefined
/// for near-identity rotations.
inline ScrewParameters screw_decompose(const RigidTransform& t) {
  const double angle = t.rotation_angle();
  if (angle < 1e-6) {
    throw Error(ErrorCode::DegenerateMotion,
                "rotation angle below 1e-6 rad, screw axis undefined");
  }
  ScrewParameters s;
  s.angle = angle;
  s.axis = t.rotation_axis();
  s.pitch = s.axis.dot(t.translation());
  const Eigen::Vector3d t_perp = t.translation() - s.pitch * s.axis;
  // Point c on the axis solves (I - R) c = t_perp with c orthogonal to the
  // axis; adding axis*axis^T makes the system nonsingular without moving
  // the solution off the c . axis = 0 plane.
  const Eigen::Matrix3d R = t.rotation().toRotationMatrix();
  const Eigen::Matrix3d A =
      Eigen::Matrix3d::Identity() - R + s.axis * s.axis.transpose();
  const Eigen::Vector3d c = A.colPivHouseholderQr().solve(t_perp);
  s.moment = c.cross(s.axis);
  return s;
}

/// Rebuilds the rigid motion encoded by screw parameters.
inline RigidTransform transform_from_screw(const ScrewParameters& s,
                                           FrameId dst, FrameId src) {
  const Eigen::Quaterniond q(Eigen::AngleAxisd(s.angle, s.axis.normalized()));
  const Eigen::Matrix3d R = q.toRotationMatrix();
  const Eigen::Vector3d c = s.axis.cross(s.moment);
  const Eigen::Vector3d t =
      (Eigen::Matrix3d::Identity() - R) * c + s.pitch * s.axis;
  return RigidTransform(q, t, dst, src);
}

}  // namespace calib
