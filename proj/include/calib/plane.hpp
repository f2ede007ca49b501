#pragma once

#include <Eigen/Dense>

#include "calib/transform.hpp"

namespace calib {

/// Calibration-plate plane in camera coordinates, encoded by the vector n
/// from the camera origin to the closest point of the plane. A point x lies
/// on the plane iff n . x = |n|^2, equivalently nhat . x = |n|.
class Plane {
 public:
  explicit Plane(const Eigen::Vector3d& n) : n_(n) {
    if (!(n_.norm() > 1e-9)) {
      throw Error(ErrorCode::DegeneratePlane,
                  "plane vector has near-zero norm (plane through origin)");
    }
  }

  const Eigen::Vector3d& n() const { return n_; }
  double distance() const { return n_.norm(); }
  Eigen::Vector3d unit_normal() const { return n_ / n_.norm(); }

  /// Signed point-to-plane distance in meters (0 on the plane, negative on
  /// the camera side).
  double signed_distance(const Eigen::Vector3d& x) const {
    return unit_normal().dot(x) - distance();
  }

 private:
  Eigen::Vector3d n_;
};

/// Plane of the calibration plate from a pattern detection pose
/// (camera <- pattern). The plate is the z = 0 plane of the pattern frame;
/// the result is oriented so its distance is positive.
inline Plane plane_from_pattern_pose(const RigidTransform& detection) {
  if (detection.dst() != FrameId::camera() ||
      detection.src() != FrameId::pattern()) {
    throw Error(ErrorCode::FrameMismatch,
                "pattern detection must map pattern -> camera, got (" +
                    detection.dst().name() + "<-" + detection.src().name() +
                    ")");
  }
  Eigen::Vector3d u = detection.rotation() * Eigen::Vector3d::UnitZ();
  double d = u.dot(detection.translation());
  if (d < 0.0) {
    u = -u;
    d = -d;
  }
  if (d < 1e-6) {
    throw Error(ErrorCode::DegeneratePlane,
                "calibration plane passes through the camera origin");
  }
  return Plane(d * u);
}

}  // namespace calib
