#pragma once

#include <Eigen/Dense>
#include <functional>

#include "calib/transform.hpp"

namespace calib::detail {

struct DampedLsqOptions {
  int max_iters = 100;
  double initial_damping = 1e-3;
  double step_tol = 1e-12;
  double rel_decrease_tol = 1e-9;
  double fd_step = 1e-7;
};

struct DampedLsqReport {
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double last_rel_decrease = 0.0;
  bool converged = true;
};

/// Damped Gauss-Newton over SE(3) with a left-multiplicative tangent-space
/// parameterization. Steps are accepted only if they decrease the cost
/// (sum of squared residuals); damping grows x10 on rejection and shrinks
/// /10 on acceptance. The Jacobian is evaluated by central differences in
/// the 6 tangent coordinates.
class DampedLsq {
 public:
  using ResidualFn = std::function<Eigen::VectorXd(const RigidTransform&)>;

  static std::pair<RigidTransform, DampedLsqReport> minimize(
      RigidTransform x, const ResidualFn& f, const DampedLsqOptions& opts) {
    using Vec6 = Eigen::Matrix<double, 6, 1>;
    DampedLsqReport report;
    Eigen::VectorXd r = f(x);
    double cost = r.squaredNorm();
    report.initial_cost = cost;
    double damping = opts.initial_damping;

    for (int iter = 0; iter < opts.max_iters; ++iter) {
      report.iterations = iter + 1;
      if (cost < 1e-32) break;

      Eigen::MatrixXd J(r.size(), 6);
      for (int j = 0; j < 6; ++j) {
        Vec6 d = Vec6::Zero();
        d(j) = opts.fd_step;
        const Eigen::VectorXd rp = f(apply_tangent_step(x, d));
        d(j) = -opts.fd_step;
        const Eigen::VectorXd rm = f(apply_tangent_step(x, d));
        J.col(j) = (rp - rm) / (2.0 * opts.fd_step);
      }
      const Eigen::Matrix<double, 6, 6> H = J.transpose() * J;
      const Vec6 g = J.transpose() * r;

      bool accepted = false;
      Vec6 step = Vec6::Zero();
      while (damping < 1e15) {
        Eigen::Matrix<double, 6, 6> Hd = H;
        for (int j = 0; j < 6; ++j) {
          Hd(j, j) += damping * std::max(H(j, j), 1e-12);
        }
        step = Hd.ldlt().solve(-g);
        const RigidTransform x_new = apply_tangent_step(x, step);
        const Eigen::VectorXd r_new = f(x_new);
        const double cost_new = r_new.squaredNorm();
        if (cost_new < cost) {
          report.last_rel_decrease = (cost - cost_new) / std::max(cost, 1e-300);
          x = x_new;
          r = r_new;
          cost = cost_new;
          damping = std::max(damping / 10.0, 1e-12);
          accepted = true;
          break;
        }
        damping *= 10.0;
      }
      if (!accepted) {
        // No damping level improves the cost: stationary to machine noise.
        report.last_rel_decrease = 0.0;
        break;
      }
      if (step.norm() < opts.step_tol) break;
    }

    report.final_cost = cost;
    report.converged = cost < 1e-30 ||
                       !(report.iterations >= opts.max_iters &&
                         report.last_rel_decrease > opts.rel_decrease_tol);
    return {x, report};
  }
};

}  // namespace calib::detail
