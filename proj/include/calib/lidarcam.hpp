#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "calib/detail/damped_lsq.hpp"
#include "calib/plane.hpp"
#include "calib/transform.hpp"

namespace calib {

/// One 2D LIDAR sweep; points are (x, y) in meters in the LIDAR data frame
/// (the scan plane is z = 0), stored in scan order.
struct LidarScan {
  std::vector<Eigen::Vector2d> points;
};

/// Contiguous run of scan points on the calibration plate, with its total
/// least-squares line fit.
struct ScanSegment {
  std::vector<Eigen::Vector2d> points;
  Eigen::Vector2d line_direction = Eigen::Vector2d::UnitX();
  Eigen::Vector2d line_point = Eigen::Vector2d::Zero();
  double inlier_rms = 0.0;
  int position_index = 0;
  /// Indices of the member points in the originating scan.
  std::vector<int> source_indices;
};

/// Plate plane seen by the camera paired with the LIDAR points on it.
struct PlaneCorrespondence {
  Plane plane;
  ScanSegment segment;
};

struct SegmentParams {
  double inlier_tol = 0.01;        // max line-fit rms, meters
  int min_points = 8;
  double length_tolerance = 0.30;  // accepted chord vs expected, relative
  double gap_threshold = 0.15;     // cluster break distance, meters
  double ambiguity_ratio = 0.05;   // inlier-count margin for ambiguity
  double merge_angle = deg2rad(2.0);
  bool assume_ordered = true;
  bool ransac_fallback = true;
  int ransac_iters = 300;
  uint64_t ransac_seed = 0x5eed;
};

namespace detail {

struct LineFit {
  Eigen::Vector2d direction;
  Eigen::Vector2d centroid;
  double rms = 0.0;
  double max_deviation = 0.0;
  int max_deviation_index = 0;
};

inline LineFit fit_line(std::span<const Eigen::Vector2d> pts) {
  LineFit fit;
  fit.centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) fit.centroid += p;
  fit.centroid /= static_cast<double>(pts.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& p : pts) {
    const Eigen::Vector2d d = p - fit.centroid;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  fit.direction = eig.eigenvectors().col(1);  // largest eigenvalue
  const Eigen::Vector2d normal(-fit.direction.y(), fit.direction.x());
  double sq = 0.0;
  for (size_t i = 0; i < pts.size(); ++i) {
    const double d = std::abs(normal.dot(pts[i] - fit.centroid));
    sq += d * d;
    if (d > fit.max_deviation) {
      fit.max_deviation = d;
      fit.max_deviation_index = static_cast<int>(i);
    }
  }
  fit.rms = std::sqrt(sq / pts.size());
  return fit;
}

struct SegmentCandidate {
  std::vector<int> indices;  // into the scan
  LineFit fit;
  double chord = 0.0;
};

inline SegmentCandidate make_candidate(const LidarScan& scan,
                                       std::vector<int> indices) {
  SegmentCandidate c;
  c.indices = std::move(indices);
  std::vector<Eigen::Vector2d> pts;
  pts.reserve(c.indices.size());
  for (int i : c.indices) pts.push_back(scan.points[i]);
  c.fit = fit_line(pts);
  double lo = 0.0, hi = 0.0;
  for (const auto& p : pts) {
    const double s = c.fit.direction.dot(p - c.fit.centroid);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  c.chord = hi - lo;
  return c;
}

/// Recursive split at the point of maximum deviation until every piece
/// fits a line within tol.
inline void split_recursive(const LidarScan& scan, int begin, int end,
                            double tol, int min_points,
                            std::vector<std::pair<int, int>>& out) {
  const int n = end - begin;
  if (n < 2) return;
  std::vector<Eigen::Vector2d> pts(scan.points.begin() + begin,
                                   scan.points.begin() + end);
  const LineFit fit = fit_line(pts);
  if (fit.max_deviation <= tol || n <= min_points) {
    out.emplace_back(begin, end);
    return;
  }
  const int k = begin + fit.max_deviation_index;
  if (k <= begin || k >= end - 1) {
    out.emplace_back(begin, end);
    return;
  }
  split_recursive(scan, begin, k + 1, tol, min_points, out);
  split_recursive(scan, k + 1, end, tol, min_points, out);
}

inline std::vector<SegmentCandidate> split_and_merge(
    const LidarScan& scan, const SegmentParams& params) {
  // Contiguous clusters in scan order.
  std::vector<std::pair<int, int>> clusters;
  int start = 0;
  const int n = static_cast<int>(scan.points.size());
  for (int i = 1; i < n; ++i) {
    if ((scan.points[i] - scan.points[i - 1]).norm() > params.gap_threshold) {
      clusters.emplace_back(start, i);
      start = i;
    }
  }
  clusters.emplace_back(start, n);

  std::vector<std::pair<int, int>> pieces;
  for (const auto& [b, e] : clusters) {
    if (e - b >= 2) {
      split_recursive(scan, b, e, 1.5 * params.inlier_tol, 2, pieces);
    }
  }

  // Merge adjacent collinear pieces.
  std::vector<std::pair<int, int>> merged;
  for (const auto& piece : pieces) {
    if (!merged.empty() && merged.back().second == piece.first) {
      const auto& prev = merged.back();
      std::vector<Eigen::Vector2d> a(scan.points.begin() + prev.first,
                                     scan.points.begin() + prev.second);
      std::vector<Eigen::Vector2d> b(scan.points.begin() + piece.first,
                                     scan.points.begin() + piece.second);
      if (a.size() >= 2 && b.size() >= 2) {
        const LineFit fa = fit_line(a), fb = fit_line(b);
        const double cosang =
            std::clamp(std::abs(fa.direction.dot(fb.direction)), 0.0, 1.0);
        std::vector<Eigen::Vector2d> joint(
            scan.points.begin() + prev.first,
            scan.points.begin() + piece.second);
        const LineFit fj = fit_line(joint);
        if (std::acos(cosang) < params.merge_angle &&
            fj.max_deviation <= 1.5 * params.inlier_tol) {
          merged.back().second = piece.second;
          continue;
        }
      }
    }
    merged.push_back(piece);
  }

  std::vector<SegmentCandidate> candidates;
  for (const auto& [b, e] : merged) {
    if (e - b < params.min_points) continue;
    std::vector<int> idx(e - b);
    for (int i = b; i < e; ++i) idx[i - b] = i;
    candidates.push_back(make_candidate(scan, std::move(idx)));
  }
  return candidates;
}

inline std::vector<SegmentCandidate> ransac_segments(
    const LidarScan& scan, const SegmentParams& params) {
  const int n = static_cast<int>(scan.points.size());
  std::mt19937_64 rng(params.ransac_seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<SegmentCandidate> candidates;
  for (int iter = 0; iter < params.ransac_iters; ++iter) {
    const int i = pick(rng), j = pick(rng);
    if (i == j) continue;
    const Eigen::Vector2d d = scan.points[j] - scan.points[i];
    if (d.norm() < 1e-9) continue;
    const Eigen::Vector2d dir = d.normalized();
    const Eigen::Vector2d normal(-dir.y(), dir.x());
    std::vector<std::pair<double, int>> inliers;  // (projection, index)
    for (int k = 0; k < n; ++k) {
      const Eigen::Vector2d r = scan.points[k] - scan.points[i];
      if (std::abs(normal.dot(r)) <= params.inlier_tol) {
        inliers.emplace_back(dir.dot(r), k);
      }
    }
    if (static_cast<int>(inliers.size()) < params.min_points) continue;
    std::sort(inliers.begin(), inliers.end());
    // Contiguity along the line.
    size_t run_start = 0;
    for (size_t k = 1; k <= inliers.size(); ++k) {
      const bool brk = k == inliers.size() ||
                       inliers[k].first - inliers[k - 1].first >
                           params.gap_threshold;
      if (!brk) continue;
      if (k - run_start >= static_cast<size_t>(params.min_points)) {
        std::vector<int> idx;
        for (size_t m = run_start; m < k; ++m) idx.push_back(inliers[m].second);
        std::sort(idx.begin(), idx.end());
        candidates.push_back(make_candidate(scan, std::move(idx)));
      }
      run_start = k;
    }
  }
  // Drop near-duplicates (keep the larger, then lower-rms, candidate).
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const SegmentCandidate& a, const SegmentCandidate& b) {
                     if (a.indices.size() != b.indices.size())
                       return a.indices.size() > b.indices.size();
                     return a.fit.rms < b.fit.rms;
                   });
  std::vector<SegmentCandidate> unique;
  for (auto& c : candidates) {
    bool dup = false;
    for (const auto& u : unique) {
      std::vector<int> common;
      std::set_intersection(c.indices.begin(), c.indices.end(),
                            u.indices.begin(), u.indices.end(),
                            std::back_inserter(common));
      if (common.size() * 2 > std::min(c.indices.size(), u.indices.size())) {
        dup = true;
        break;
      }
    }
    if (!dup) unique.push_back(std::move(c));
  }
  return unique;
}

}  // namespace detail

/// Finds the scan segment that belongs to the calibration plate: a
/// contiguous run whose line fit is tight and whose chord length matches
/// the expected plate width within the length tolerance. Scan-ordered data
/// is segmented by split-and-merge; unordered data falls back to RANSAC.
inline ScanSegment extract_plate_segment(const LidarScan& scan,
                                         double expected_length,
                                         const SegmentParams& params = {}) {
  if (scan.points.empty()) {
    throw Error(ErrorCode::NoSegmentFound, "scan is empty");
  }
  if (!(expected_length > 0.0)) {
    throw Error(ErrorCode::NoSegmentFound, "expected plate length must be > 0");
  }

  std::vector<detail::SegmentCandidate> candidates;
  if (params.assume_ordered) candidates = detail::split_and_merge(scan, params);
  auto gate = [&](const detail::SegmentCandidate& c) {
    return static_cast<int>(c.indices.size()) >= params.min_points &&
           c.fit.rms <= params.inlier_tol &&
           c.chord >= (1.0 - params.length_tolerance) * expected_length &&
           c.chord <= (1.0 + params.length_tolerance) * expected_length;
  };
  std::vector<detail::SegmentCandidate> passed;
  for (auto& c : candidates)
    if (gate(c)) passed.push_back(std::move(c));

  if (passed.empty() && params.ransac_fallback) {
    for (auto& c : detail::ransac_segments(scan, params))
      if (gate(c)) passed.push_back(std::move(c));
  }
  if (passed.empty()) {
    throw Error(ErrorCode::NoSegmentFound,
                "no contiguous line segment matches the expected plate "
                "length");
  }

  std::stable_sort(passed.begin(), passed.end(),
                   [](const detail::SegmentCandidate& a,
                      const detail::SegmentCandidate& b) {
                     if (a.indices.size() != b.indices.size())
                       return a.indices.size() > b.indices.size();
                     if (a.fit.rms != b.fit.rms) return a.fit.rms < b.fit.rms;
                     return a.indices.front() < b.indices.front();
                   });
  if (passed.size() >= 2) {
    const double best = static_cast<double>(passed[0].indices.size());
    const double second = static_cast<double>(passed[1].indices.size());
    if (second >= (1.0 - params.ambiguity_ratio) * best) {
      throw Error(ErrorCode::AmbiguousSegment,
                  "two candidate segments have nearly equal support (" +
                      std::to_string(passed[0].indices.size()) + " vs " +
                      std::to_string(passed[1].indices.size()) +
                      " points); disambiguate by region of interest");
    }
  }

  const detail::SegmentCandidate& win = passed.front();
  ScanSegment seg;
  seg.source_indices = win.indices;
  for (int i : win.indices) seg.points.push_back(scan.points[i]);
  seg.line_direction = win.fit.direction;
  seg.line_point = win.fit.centroid;
  seg.inlier_rms = win.fit.rms;
  return seg;
}

struct LinearOptions {
  /// Plane normals must not be parallel or coplanar; this is the minimum
  /// pairwise angle driving the scatter threshold.
  double min_normal_angle = deg2rad(5.0);
  /// Numerical-rank cutoff on the design matrix singular values.
  double rank_tol = 1e-10;
};

/// Result of the LIDAR-camera stage: the fixed extrinsic transform
/// (lidar <- camera) plus the point-to-plane residual statistics.
struct LidarCamResult {
  RigidTransform lidar_from_camera;
  double plane_rms = 0.0;  // meters
  int correspondences_used = 0;
  double condition_hint = 0.0;
  bool converged = true;
};

/// Point-to-plane rms (meters) of a candidate (lidar <- camera) transform.
inline double plane_rms(const RigidTransform& lidar_from_camera,
                        std::span<const PlaneCorrespondence> corrs) {
  const RigidTransform cam_from_lidar = invert(lidar_from_camera);
  double sq = 0.0;
  size_t count = 0;
  for (const PlaneCorrespondence& c : corrs) {
    for (const Eigen::Vector2d& p : c.segment.points) {
      const Eigen::Vector3d q = cam_from_lidar.apply({p.x(), p.y(), 0.0});
      const double d = c.plane.signed_distance(q);
      sq += d * d;
      ++count;
    }
  }
  return count == 0 ? 0.0 : std::sqrt(sq / count);
}

namespace detail {

struct LinearCandidate {
  Eigen::Matrix3d R;
  Eigen::Vector3d t;
  double rms = 0.0;
  bool visible = false;  // LIDAR origin on the camera side of every plate
};

inline Eigen::Matrix3d orthonormalize_pair(const Eigen::Vector3d& r1,
                                           const Eigen::Vector3d& r2) {
  Eigen::Matrix<double, 3, 2> m;
  m.col(0) = r1;
  m.col(1) = r2;
  Eigen::JacobiSVD<Eigen::Matrix<double, 3, 2>> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix<double, 3, 2> on =
      svd.matrixU().leftCols<2>() * svd.matrixV().transpose();
  Eigen::Matrix3d R;
  R.col(0) = on.col(0);
  R.col(1) = on.col(1);
  R.col(2) = on.col(0).cross(on.col(1));
  return R;
}

/// Root-finding for the rank-deficient case: within the affine solution
/// family u0 + W*lambda, restore |r1| = |r2| = 1 and r1 . r2 = 0 by
/// Gauss-Newton from a deterministic set of starts.
inline std::vector<Eigen::VectorXd> null_space_roots(
    const Eigen::VectorXd& u0, const Eigen::MatrixXd& W) {
  const int k = static_cast<int>(W.cols());
  auto constraints = [&](const Eigen::VectorXd& lam, Eigen::Vector3d& h,
                         Eigen::Matrix<double, 3, Eigen::Dynamic>& J) {
    const Eigen::VectorXd u = u0 + W * lam;
    const Eigen::Vector3d r1 = u.segment<3>(0), r2 = u.segment<3>(3);
    h << r1.dot(r1) - 1.0, r2.dot(r2) - 1.0, r1.dot(r2);
    J.resize(3, k);
    for (int j = 0; j < k; ++j) {
      const Eigen::Vector3d w1 = W.col(j).segment<3>(0);
      const Eigen::Vector3d w2 = W.col(j).segment<3>(3);
      J(0, j) = 2.0 * r1.dot(w1);
      J(1, j) = 2.0 * r2.dot(w2);
      J(2, j) = r1.dot(w2) + r2.dot(w1);
    }
  };

  std::vector<Eigen::VectorXd> starts;
  starts.push_back(Eigen::VectorXd::Zero(k));
  const double scale = std::max(1.0, u0.norm());
  for (int j = 0; j < k; ++j) {
    for (double s : {0.5, 1.0, 2.0}) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(k);
      v(j) = s * scale;
      starts.push_back(v);
      starts.push_back(-v);
    }
  }
  std::mt19937_64 rng(0xCA11B);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int m = 0; m < 60; ++m) {
    Eigen::VectorXd v(k);
    for (int j = 0; j < k; ++j) v(j) = gauss(rng) * scale;
    starts.push_back(v);
  }

  std::vector<Eigen::VectorXd> roots;
  for (const Eigen::VectorXd& s0 : starts) {
    Eigen::VectorXd lam = s0;
    Eigen::Vector3d h;
    Eigen::Matrix<double, 3, Eigen::Dynamic> J;
    bool ok = false;
    for (int it = 0; it < 200; ++it) {
      constraints(lam, h, J);
      const Eigen::VectorXd step =
          J.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(-h);
      lam += step;
      if (step.norm() < 1e-14) {
        ok = true;
        break;
      }
    }
    if (!ok) constraints(lam, h, J);
    constraints(lam, h, J);
    if (h.cwiseAbs().maxCoeff() < 1e-9) {
      const Eigen::VectorXd u = u0 + W * lam;
      bool dup = false;
      for (const Eigen::VectorXd& r : roots) {
        if ((r - u).norm() < 1e-6) {
          dup = true;
          break;
        }
      }
      if (!dup) roots.push_back(u);
    }
  }
  return roots;
}

}  // namespace detail

/// Linear extrinsic solve from point-on-plane constraints. Scan points have
/// z = 0, so only the first two rotation columns and the translation are
/// observable: each point contributes one row in those 9 unknowns. The
/// stacked system is solved by SVD; with fewer than five plates the scan
/// segments leave a null space, which is resolved by restoring the
/// rotation-column constraints within the solution family. Among exact
/// candidates, solutions placing the LIDAR on the camera side of every
/// plate are preferred, then smaller residual, then smaller translation.
/// Returns (lidar <- camera).
inline RigidTransform solve_linear(std::span<const PlaneCorrespondence> corrs,
                                   const LinearOptions& options = {}) {
  if (corrs.size() < 3) {
    throw Error(ErrorCode::DegenerateGeometry,
                "need at least 3 plane correspondences, got " +
                    std::to_string(corrs.size()));
  }
  size_t rows = 0;
  for (const PlaneCorrespondence& c : corrs) rows += c.segment.points.size();
  if (rows < 9) {
    throw Error(ErrorCode::DegenerateGeometry,
                "need at least 9 constraint rows, got " +
                    std::to_string(rows));
  }

  // Normal coverage: parallel or coplanar normals leave a translation
  // direction unobservable.
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const PlaneCorrespondence& c : corrs) {
    const Eigen::Vector3d n = c.plane.unit_normal();
    scatter += n * n.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  const double spread_floor =
      std::sin(options.min_normal_angle / 2.0) *
      std::sin(options.min_normal_angle / 2.0) * corrs.size();
  if (eig.eigenvalues()(0) < spread_floor) {
    throw Error(ErrorCode::DegenerateGeometry,
                "plate normals are nearly parallel or coplanar");
  }

  Eigen::MatrixXd A(rows, 9);
  Eigen::VectorXd b(rows);
  size_t row = 0;
  for (const PlaneCorrespondence& c : corrs) {
    const Eigen::Vector3d n = c.plane.unit_normal();
    const double d = c.plane.distance();
    for (const Eigen::Vector2d& p : c.segment.points) {
      A.row(row).segment<3>(0) = p.x() * n;
      A.row(row).segment<3>(3) = p.y() * n;
      A.row(row).segment<3>(6) = n;
      b(row) = d;
      ++row;
    }
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      A, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > options.rank_tol * sv(0)) ++rank;
  }
  if (rank < 6) {
    throw Error(ErrorCode::DegenerateGeometry,
                "design matrix rank " + std::to_string(rank) +
                    " leaves the pose underdetermined");
  }

  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(9);
  for (int i = 0; i < rank; ++i) {
    u0 += (svd.matrixU().col(i).dot(b) / sv(i)) * svd.matrixV().col(i);
  }

  std::vector<Eigen::VectorXd> solutions;
  if (rank >= 9) {
    solutions.push_back(u0);
  } else {
    const Eigen::MatrixXd W = svd.matrixV().rightCols(9 - rank);
    solutions = detail::null_space_roots(u0, W);
    if (solutions.empty()) solutions.push_back(u0);
  }

  std::vector<detail::LinearCandidate> candidates;
  for (const Eigen::VectorXd& u : solutions) {
    detail::LinearCandidate cand;
    cand.R = detail::orthonormalize_pair(u.segment<3>(0), u.segment<3>(3));
    cand.t = u.segment<3>(6);
    const RigidTransform cam_from_lidar(Eigen::Quaterniond(cand.R), cand.t,
                                        FrameId::camera(), FrameId::lidar());
    cand.rms = plane_rms(invert(cam_from_lidar), corrs);
    cand.visible = true;
    for (const PlaneCorrespondence& c : corrs) {
      if (c.plane.signed_distance(cand.t) >= 0.0) {
        cand.visible = false;
        break;
      }
    }
    candidates.push_back(std::move(cand));
  }

  const bool any_visible =
      std::any_of(candidates.begin(), candidates.end(),
                  [](const detail::LinearCandidate& c) { return c.visible; });
  std::stable_sort(
      candidates.begin(), candidates.end(),
      [&](const detail::LinearCandidate& a, const detail::LinearCandidate& b) {
        if (any_visible && a.visible != b.visible) return a.visible;
        if (std::abs(a.rms - b.rms) > 1e-12) return a.rms < b.rms;
        return a.t.norm() < b.t.norm();
      });

  const detail::LinearCandidate& best = candidates.front();
  const RigidTransform cam_from_lidar(Eigen::Quaterniond(best.R), best.t,
                                      FrameId::camera(), FrameId::lidar());
  return invert(cam_from_lidar);
}

/// Nonlinear refinement of the extrinsic transform, minimizing squared
/// point-to-plane distances (per-plane normalization makes the residuals
/// metric). Same damped scheme and monotone-acceptance contract as the
/// hand-eye refinement.
inline LidarCamResult refine_nonlinear(const RigidTransform& c0,
                                       std::span<const PlaneCorrespondence> corrs,
                                       const RefineOptions& options = {}) {
  if (c0.dst() != FrameId::lidar() || c0.src() != FrameId::camera()) {
    throw Error(ErrorCode::FrameMismatch, "c0 must be (lidar<-camera)");
  }
  if (corrs.empty()) {
    throw Error(ErrorCode::DegenerateGeometry,
                "refine called with no correspondences");
  }
  size_t count = 0;
  for (const PlaneCorrespondence& c : corrs) count += c.segment.points.size();

  auto residuals = [&](const RigidTransform& cam_from_lidar) {
    Eigen::VectorXd r(count);
    size_t row = 0;
    for (const PlaneCorrespondence& c : corrs) {
      for (const Eigen::Vector2d& p : c.segment.points) {
        const Eigen::Vector3d q = cam_from_lidar.apply({p.x(), p.y(), 0.0});
        r(row++) = c.plane.signed_distance(q);
      }
    }
    return r;
  };

  detail::DampedLsqOptions lmopts;
  lmopts.max_iters = options.max_iters;
  lmopts.initial_damping = options.initial_damping;
  lmopts.step_tol = options.step_tol;
  const auto [cam_from_lidar, report] =
      detail::DampedLsq::minimize(invert(c0), residuals, lmopts);

  LidarCamResult result;
  result.lidar_from_camera = invert(cam_from_lidar);
  result.plane_rms = std::sqrt(report.final_cost / count);
  result.correspondences_used = static_cast<int>(corrs.size());
  result.converged = report.converged;

  // Conditioning of the 6-dof problem at the solution.
  Eigen::MatrixXd J(count, 6);
  const double h = lmopts.fd_step;
  for (int j = 0; j < 6; ++j) {
    Eigen::Matrix<double, 6, 1> d = Eigen::Matrix<double, 6, 1>::Zero();
    d(j) = h;
    const Eigen::VectorXd rp = residuals(apply_tangent_step(cam_from_lidar, d));
    d(j) = -h;
    const Eigen::VectorXd rm = residuals(apply_tangent_step(cam_from_lidar, d));
    J.col(j) = (rp - rm) / (2.0 * h);
  }
  const Eigen::VectorXd jsv =
      J.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).singularValues();
  result.condition_hint =
      jsv(5) > 0.0 ? jsv(0) / jsv(5) : std::numeric_limits<double>::max();
  return result;
}

struct LidarCamOptions {
  LinearOptions linear;
  RefineOptions refine;
  bool run_refine = true;
};

/// One-call pipeline: linear point-on-plane solve, then nonlinear
/// refinement.
inline LidarCamResult calibrate_lidar_camera(
    std::span<const PlaneCorrespondence> corrs,
    const LidarCamOptions& options = {}) {
  const RigidTransform c0 = solve_linear(corrs, options.linear);
  if (options.run_refine) return refine_nonlinear(c0, corrs, options.refine);
  LidarCamResult result;
  result.lidar_from_camera = c0;
  result.plane_rms = plane_rms(c0, corrs);
  result.correspondences_used = static_cast<int>(corrs.size());
  return result;
}

}  // namespace calib
