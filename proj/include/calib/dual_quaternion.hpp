#pragma once

#include <Eigen/Geometry>

#include "calib/transform.hpp"

namespace calib {

/// Unit dual quaternion real + eps*dual encoding a rigid motion. The real
/// part is the rotation quaternion q, the dual part is (1/2)*(0, t)*q, so
/// rigid-motion composition is plain dual quaternion multiplication.
struct DualQuaternion {
  Eigen::Quaterniond real;
  Eigen::Quaterniond dual;

  static DualQuaternion from_transform(const RigidTransform& t) {
    const Eigen::Quaterniond q = t.rotation();
    const Eigen::Quaterniond tq(0.0, t.translation().x(), t.translation().y(),
                                t.translation().z());
    Eigen::Quaterniond d = tq * q;
    d.coeffs() *= 0.5;
    return DualQuaternion{q, d};
  }

  /// Frame labels are not stored in the dual quaternion; the caller
  /// supplies them to get back to a transform.
  RigidTransform to_transform(FrameId dst, FrameId src) const {
    Eigen::Quaterniond q = real;
    Eigen::Quaterniond d = dual;
    const double n = q.norm();
    q.coeffs() /= n;
    d.coeffs() /= n;
    const Eigen::Quaterniond tq = d * q.conjugate();
    return RigidTransform(q, 2.0 * tq.vec(), dst, src);
  }

  DualQuaternion operator*(const DualQuaternion& o) const {
    Eigen::Quaterniond r = real * o.real;
    Eigen::Quaterniond d1 = real * o.dual;
    Eigen::Quaterniond d2 = dual * o.real;
    d1.coeffs() += d2.coeffs();
    return DualQuaternion{r, d1};
  }

  DualQuaternion conjugate() const {
    return DualQuaternion{real.conjugate(), dual.conjugate()};
  }

  double real_norm() const { return real.norm(); }

  /// Orthogonality defect real . dual; zero for a unit dual quaternion.
  double real_dual_dot() const { return real.coeffs().dot(dual.coeffs()); }
};

inline DualQuaternion to_dual_quaternion(const RigidTransform& t) {
  return DualQuaternion::from_transform(t);
}

}  // namespace calib
