#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "calib/detail/damped_lsq.hpp"
#include "calib/dual_quaternion.hpp"
#include "calib/transform.hpp"

namespace calib {

/// One pose-capture sample: the pattern detection reported by the camera
/// (camera <- pattern) and the inverse TCP pose from forward kinematics
/// (tcp <- world).
struct HandEyeSample {
  RigidTransform detection;
  RigidTransform tcp_pose_inv;
  int index = 0;
};

enum class PairStrategy { AllPairs, Consecutive };

struct PairOptions {
  PairStrategy strategy = PairStrategy::AllPairs;
  /// Pairs whose motions rotate less than this are dropped (axis undefined).
  double min_motion_angle = deg2rad(1.0);
  /// Camera and TCP motion must agree on the rotation angle (screw
  /// congruence); larger mismatch marks the pair as an outlier.
  double max_angle_mismatch = deg2rad(2.0);
  /// All pairs grow as C(N,2); beyond this cap the largest-angle pairs win.
  int max_pairs = 200;
};

/// Relative-motion pair: camera_motion * X = X * tcp_motion.
struct MotionPair {
  RigidTransform camera_motion;  // A_ij, camera-relative
  RigidTransform tcp_motion;     // B_ij, TCP-relative
  std::pair<int, int> source_indices;
};

namespace detail {

inline void check_handeye_frames(std::span<const HandEyeSample> samples) {
  for (const HandEyeSample& s : samples) {
    if (s.detection.dst() != FrameId::camera() ||
        s.detection.src() != FrameId::pattern()) {
      throw Error(ErrorCode::FrameMismatch,
                  "detection must be (camera<-pattern)");
    }
    if (s.tcp_pose_inv.dst() != FrameId::tcp() ||
        s.tcp_pose_inv.src() != FrameId::world()) {
      throw Error(ErrorCode::FrameMismatch,
                  "tcp_pose_inv must be (tcp<-world)");
    }
  }
}

}  // namespace detail

/// Builds relative-motion pairs from pose samples. The solver consumes
/// A_k as the inverse of the emitted detection, so users hand in raw
/// detections and never deal with that subtlety.
inline std::vector<MotionPair> make_motion_pairs(
    std::span<const HandEyeSample> samples, const PairOptions& options = {}) {
  if (samples.size() < 3) {
    throw Error(ErrorCode::NotEnoughSamples,
                "hand-eye calibration needs at least 3 samples, got " +
                    std::to_string(samples.size()));
  }
  detail::check_handeye_frames(samples);

  std::vector<std::pair<int, int>> index_pairs;
  const int n = static_cast<int>(samples.size());
  if (options.strategy == PairStrategy::Consecutive) {
    for (int i = 0; i + 1 < n; ++i) index_pairs.emplace_back(i, i + 1);
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) index_pairs.emplace_back(i, j);
  }

  std::vector<MotionPair> pairs;
  for (const auto& [i, j] : index_pairs) {
    const RigidTransform a_i = invert(samples[i].detection);
    const RigidTransform a_j = invert(samples[j].detection);
    const RigidTransform b_i = samples[i].tcp_pose_inv;
    const RigidTransform b_j = samples[j].tcp_pose_inv;
    MotionPair pair{compose(invert(a_j), a_i), compose(b_j, invert(b_i)),
                    {samples[i].index, samples[j].index}};
    const double angle_a = pair.camera_motion.rotation_angle();
    const double angle_b = pair.tcp_motion.rotation_angle();
    if (angle_a < options.min_motion_angle ||
        angle_b < options.min_motion_angle) {
      continue;
    }
    if (std::abs(angle_a - angle_b) > options.max_angle_mismatch) continue;
    pairs.push_back(std::move(pair));
  }
  if (pairs.empty()) {
    throw Error(ErrorCode::NoValidPairs,
                "no motion pair passed the angle screening");
  }
  if (static_cast<int>(pairs.size()) > options.max_pairs) {
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const MotionPair& lhs, const MotionPair& rhs) {
                       return lhs.camera_motion.rotation_angle() >
                              rhs.camera_motion.rotation_angle();
                     });
    pairs.resize(options.max_pairs);
  }
  return pairs;
}

struct DqOptions {
  /// At least two motions must have rotation axes separated by this much.
  double min_axis_angle = deg2rad(5.0);
  /// The 6th singular value of the stacked system must stay above this
  /// fraction of the largest, otherwise the motion set is rank deficient.
  double sv_gap = 1e-6;
};

namespace detail {

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

/// Max pairwise angle between motion rotation axes, treating axes as lines.
inline double motion_axis_spread(std::span<const MotionPair> pairs) {
  std::vector<Eigen::Vector3d> axes;
  for (const MotionPair& p : pairs) axes.push_back(p.camera_motion.rotation_axis());
  double spread = 0.0;
  for (size_t i = 0; i < axes.size(); ++i) {
    for (size_t j = i + 1; j < axes.size(); ++j) {
      const double c = std::clamp(std::abs(axes[i].dot(axes[j])), 0.0, 1.0);
      spread = std::max(spread, std::acos(c));
    }
  }
  return spread;
}

}  // namespace detail

/// Closed-form hand-eye solve from motion pairs via unit dual quaternions.
///
/// Each pair contributes a 6x8 block in the unknown dual quaternion of X;
/// the solution lives in the two right singular vectors of smallest
/// singular value, combined by the scalar quadratic that restores the
/// unit-norm and orthogonality constraints. Returns X as (camera <- tcp).
inline RigidTransform solve_dq(std::span<const MotionPair> pairs,
                               const DqOptions& options = {}) {
  if (pairs.size() < 2) {
    throw Error(ErrorCode::DegenerateMotionSet,
                "need at least 2 motion pairs, got " +
                    std::to_string(pairs.size()));
  }
  if (detail::motion_axis_spread(pairs) < options.min_axis_angle) {
    throw Error(ErrorCode::DegenerateMotionSet,
                "all motion rotation axes are nearly parallel");
  }

  Eigen::MatrixXd M(6 * pairs.size(), 8);
  for (size_t k = 0; k < pairs.size(); ++k) {
    const DualQuaternion a = to_dual_quaternion(pairs[k].camera_motion);
    const DualQuaternion b = to_dual_quaternion(pairs[k].tcp_motion);
    const Eigen::Vector3d av = a.real.vec(), bv = b.real.vec();
    const Eigen::Vector3d apv = a.dual.vec(), bpv = b.dual.vec();
    Eigen::Matrix<double, 6, 8> blk = Eigen::Matrix<double, 6, 8>::Zero();
    blk.block<3, 1>(0, 0) = av - bv;
    blk.block<3, 3>(0, 1) = detail::skew(av + bv);
    blk.block<3, 1>(3, 0) = apv - bpv;
    blk.block<3, 3>(3, 1) = detail::skew(apv + bpv);
    blk.block<3, 1>(3, 4) = av - bv;
    blk.block<3, 3>(3, 5) = detail::skew(av + bv);
    M.middleRows<6>(6 * static_cast<Eigen::Index>(k)) = blk;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv(5) < options.sv_gap * sv(0)) {
    throw Error(ErrorCode::DegenerateMotionSet,
                "stacked motion system is rank deficient (singular values "
                "not separated)");
  }
  const Eigen::Matrix<double, 8, 1> v7 = svd.matrixV().col(6);
  const Eigen::Matrix<double, 8, 1> v8 = svd.matrixV().col(7);
  const Eigen::Vector4d u1 = v7.head<4>(), w1 = v7.tail<4>();
  const Eigen::Vector4d u2 = v8.head<4>(), w2 = v8.tail<4>();

  // lambda1*v7 + lambda2*v8 with |real| = 1 and real . dual = 0. With
  // s = lambda1/lambda2: c2 s^2 + c1 s + c0 = 0 restores orthogonality.
  const double c2 = u1.dot(w1);
  const double c1 = u1.dot(w2) + u2.dot(w1);
  const double c0 = u2.dot(w2);

  std::vector<Eigen::Matrix<double, 8, 1>> candidates;
  auto push_candidate = [&](double s) {
    const double val = s * s * u1.dot(u1) + 2.0 * s * u1.dot(u2) + u2.dot(u2);
    if (val > 1e-14) {
      const double l2 = 1.0 / std::sqrt(val);
      candidates.push_back(s * l2 * v7 + l2 * v8);
    }
  };
  const double scale = c1 * c1 + std::abs(4.0 * c2 * c0);
  if (std::abs(c2) > 1e-14) {
    double disc = c1 * c1 - 4.0 * c2 * c0;
    if (disc < 0.0 && disc > -1e-9 * std::max(scale, 1e-30)) disc = 0.0;
    if (disc < 0.0) {
      throw Error(ErrorCode::NumericalFailure,
                  "constraint quadratic has no real root");
    }
    const double root = std::sqrt(disc);
    push_candidate((-c1 + root) / (2.0 * c2));
    push_candidate((-c1 - root) / (2.0 * c2));
  } else {
    if (std::abs(c1) > 1e-14) push_candidate(-c0 / c1);
    if (u1.dot(u1) > 1e-14 && std::abs(c2) <= 1e-14) {
      candidates.push_back(v7 / std::sqrt(u1.dot(u1)));  // lambda2 = 0 branch
    }
  }
  if (candidates.empty()) {
    throw Error(ErrorCode::NumericalFailure,
                "no admissible combination of the null-space vectors");
  }

  Eigen::Matrix<double, 8, 1> best = candidates.front();
  double best_residual = (M * best).norm();
  for (size_t i = 1; i < candidates.size(); ++i) {
    const double res = (M * candidates[i]).norm();
    if (res < best_residual) {
      best_residual = res;
      best = candidates[i];
    }
  }

  const DualQuaternion q{
      Eigen::Quaterniond(best(0), best(1), best(2), best(3)),
      Eigen::Quaterniond(best(4), best(5), best(6), best(7))};
  return q.to_transform(FrameId::camera(), FrameId::tcp());
}

struct RefineOptions {
  int max_iters = 100;
  /// Weight applied to the rotation-log rows relative to translation rows.
  double rotation_weight = 1.0;
  double initial_damping = 1e-3;
  double step_tol = 1e-12;
};

/// Calibration result: X = (camera <- tcp) plus residual statistics over
/// the motion pairs that produced it.
struct HandEyeResult {
  RigidTransform camera_from_tcp;
  double rotation_rms = 0.0;     // radians
  double translation_rms = 0.0;  // meters
  int pairs_used = 0;
  bool refined = false;
  bool converged = true;
};

namespace detail {

inline Eigen::VectorXd handeye_residuals(const RigidTransform& x,
                                         std::span<const MotionPair> pairs,
                                         double rotation_weight) {
  Eigen::VectorXd r(6 * pairs.size());
  for (size_t k = 0; k < pairs.size(); ++k) {
    const RigidTransform lhs = compose(pairs[k].camera_motion, x);
    const RigidTransform rhs = compose(x, pairs[k].tcp_motion);
    const Eigen::Quaterniond dq = lhs.rotation() * rhs.rotation().conjugate();
    r.segment<3>(6 * k) = rotation_weight * rotation_vector(dq);
    r.segment<3>(6 * k + 3) = lhs.translation() - rhs.translation();
  }
  return r;
}

inline void fill_pair_rms(HandEyeResult& result,
                          std::span<const MotionPair> pairs) {
  double rot_sq = 0.0, trans_sq = 0.0;
  for (const MotionPair& p : pairs) {
    const RigidTransform lhs = compose(p.camera_motion, result.camera_from_tcp);
    const RigidTransform rhs = compose(result.camera_from_tcp, p.tcp_motion);
    const Eigen::Quaterniond dq = lhs.rotation() * rhs.rotation().conjugate();
    rot_sq += rotation_vector(dq).squaredNorm();
    trans_sq += (lhs.translation() - rhs.translation()).squaredNorm();
  }
  result.pairs_used = static_cast<int>(pairs.size());
  result.rotation_rms = std::sqrt(rot_sq / pairs.size());
  result.translation_rms = std::sqrt(trans_sq / pairs.size());
}

}  // namespace detail

/// Total refinement cost (squared residual norm) of X over the pairs;
/// exposed so callers can compare solver stages.
inline double handeye_cost(const RigidTransform& x,
                           std::span<const MotionPair> pairs,
                           double rotation_weight = 1.0) {
  return detail::handeye_residuals(x, pairs, rotation_weight).squaredNorm();
}

/// Frobenius norm of matrix(A*X) - matrix(X*B), maximized over pairs.
inline double max_pair_residual(const RigidTransform& x,
                                std::span<const MotionPair> pairs) {
  double worst = 0.0;
  for (const MotionPair& p : pairs) {
    const Eigen::Matrix4d d = compose(p.camera_motion, x).matrix() -
                              compose(x, p.tcp_motion).matrix();
    worst = std::max(worst, d.norm());
  }
  return worst;
}

/// Iterative nonlinear least-squares refinement of an initial X. Steps are
/// accepted only when they lower the cost, so the result never gets worse
/// than the input. On hitting the iteration cap while still improving, the
/// best iterate is returned with converged = false.
inline HandEyeResult refine(const RigidTransform& x0,
                            std::span<const MotionPair> pairs,
                            const RefineOptions& options = {}) {
  if (pairs.empty()) {
    throw Error(ErrorCode::NoValidPairs, "refine called with no motion pairs");
  }
  if (x0.dst() != FrameId::camera() || x0.src() != FrameId::tcp()) {
    throw Error(ErrorCode::FrameMismatch, "x0 must be (camera<-tcp)");
  }
  detail::DampedLsqOptions lmopts;
  lmopts.max_iters = options.max_iters;
  lmopts.initial_damping = options.initial_damping;
  lmopts.step_tol = options.step_tol;
  const auto [x, report] = detail::DampedLsq::minimize(
      x0,
      [&](const RigidTransform& x_iter) {
        return detail::handeye_residuals(x_iter, pairs,
                                         options.rotation_weight);
      },
      lmopts);
  HandEyeResult result;
  result.camera_from_tcp = x;
  result.refined = true;
  result.converged = report.converged;
  detail::fill_pair_rms(result, pairs);
  return result;
}

struct HandEyeOptions {
  PairOptions pairs;
  DqOptions dq;
  RefineOptions refine;
  bool run_refine = true;
};

/// One-call pipeline: motion pairs -> closed-form dual quaternion solve ->
/// nonlinear refinement.
inline HandEyeResult calibrate_handeye(std::span<const HandEyeSample> samples,
                                       const HandEyeOptions& options = {}) {
  const std::vector<MotionPair> pairs =
      make_motion_pairs(samples, options.pairs);
  const RigidTransform x0 = solve_dq(pairs, options.dq);
  if (options.run_refine) return refine(x0, pairs, options.refine);
  HandEyeResult result;
  result.camera_from_tcp = x0;
  detail::fill_pair_rms(result, pairs);
  return result;
}

}  // namespace calib
