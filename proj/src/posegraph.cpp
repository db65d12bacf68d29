#include "lgc/posegraph.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <unordered_map>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "lgc/error.hpp"

namespace lgc {
namespace {

void require_spd(const Mat6& cov, const std::string& what) {
  Eigen::LLT<Mat6> llt(cov);
  if (llt.info() != Eigen::Success) {
    fail(Errc::kInvalidArgument, what + ": covariance is not positive definite");
  }
}

double weighted_sq(const Twist& e, const Mat6& cov) {
  return e.dot(cov.llt().solve(e));
}

}  // namespace

void PoseGraphWindow::validate() const {
  if (odometry.empty()) fail(Errc::kInvalidArgument, "PoseGraphWindow: no odometry edges");
  if (poses.size() != odometry.size() + 1) {
    fail(Errc::kInvalidArgument, "PoseGraphWindow: need delta_p + 1 poses");
  }
  if (odometry_cov.size() != odometry.size()) {
    fail(Errc::kInvalidArgument, "PoseGraphWindow: one covariance per odometry edge required");
  }
  for (std::size_t i = 0; i < odometry_cov.size(); ++i) {
    require_spd(odometry_cov[i], "PoseGraphWindow edge " + std::to_string(i));
  }
  if (correction) require_spd(correction_cov, "PoseGraphWindow correction edge");
}

Twist pose_error(const Transform& measured, const Transform& t1, const Transform& t2) {
  return se3_log(measured * t2 * t1.inverse());
}

PoseErrorJacobians pose_error_jacobians(const Transform& measured, const Transform& t1,
                                        const Transform& t2) {
  const Transform x = measured * t2 * t1.inverse();
  const Twist e = se3_log(x);
  const Mat6 j_inv = se3_left_jacobian_inv(e);
  return {-j_inv * adjoint(x), j_inv * adjoint(measured)};
}

double total_cost(const PoseGraphWindow& window) { return total_cost(window, window.poses); }

double total_cost(const PoseGraphWindow& window, std::span<const Transform> poses) {
  double cost = 0.0;
  for (int i = 0; i < window.delta_p(); ++i) {
    cost += weighted_sq(pose_error(window.odometry[i], poses[i], poses[i + 1]),
                        window.odometry_cov[i]);
  }
  if (window.correction) {
    cost += weighted_sq(pose_error(*window.correction, poses.front(), poses.back()),
                        window.correction_cov);
  }
  return cost;
}

std::vector<Transform> chain_odometry(const Transform& anchor,
                                      std::span<const Transform> odometry) {
  // T_{i,i+1} = T_i T_{i+1}^-1  =>  T_{i+1} = T_{i,i+1}^-1 T_i
  std::vector<Transform> poses{anchor};
  for (const auto& edge : odometry) {
    poses.push_back((edge.inverse() * poses.back()).renormalized());
  }
  return poses;
}

RelaxResult relax(const PoseGraphWindow& window, const RelaxOptions& options) {
  window.validate();
  const int dp = window.delta_p();
  const int dim = 6 * dp;

  std::vector<Mat6> odo_info(dp);
  for (int i = 0; i < dp; ++i) odo_info[i] = window.odometry_cov[i].inverse();
  const Mat6 corr_info = window.correction ? Mat6(window.correction_cov.inverse()) : Mat6::Zero();

  RelaxResult res;
  res.poses = window.poses;
  double cost = total_cost(window, res.poses);
  res.initial_cost = cost;
  res.cost_history.push_back(cost);

  MatX h(dim, dim);
  VecX b(dim);
  auto add_edge = [&](const Transform& meas, const Mat6& info, int a, int c) {
    const auto jac = pose_error_jacobians(meas, res.poses[a], res.poses[c]);
    const Twist e = pose_error(meas, res.poses[a], res.poses[c]);
    // Pose 0 is the gauge anchor and has no block.
    const int ia = a - 1;
    const int ic = c - 1;
    if (ia >= 0) {
      h.block<6, 6>(6 * ia, 6 * ia) += jac.wrt_first.transpose() * info * jac.wrt_first;
      b.segment<6>(6 * ia) += jac.wrt_first.transpose() * info * e;
    }
    if (ic >= 0) {
      h.block<6, 6>(6 * ic, 6 * ic) += jac.wrt_second.transpose() * info * jac.wrt_second;
      b.segment<6>(6 * ic) += jac.wrt_second.transpose() * info * e;
    }
    if (ia >= 0 && ic >= 0) {
      const Mat6 cross = jac.wrt_first.transpose() * info * jac.wrt_second;
      h.block<6, 6>(6 * ia, 6 * ic) += cross;
      h.block<6, 6>(6 * ic, 6 * ia) += cross.transpose();
    }
  };

  bool converged = false;
  for (int it = 0; it < options.max_iterations; ++it) {
    h.setZero();
    b.setZero();
    for (int i = 0; i < dp; ++i) add_edge(window.odometry[i], odo_info[i], i, i + 1);
    if (window.correction) add_edge(*window.correction, corr_info, 0, dp);

    Eigen::SelfAdjointEigenSolver<MatX> eig(h, Eigen::EigenvaluesOnly);
    const double max_eig = eig.eigenvalues().maxCoeff();
    if (!(eig.eigenvalues().minCoeff() > 1e-14 * max_eig)) {
      fail(Errc::kRankDeficient, "relax: normal equations are rank deficient");
    }
    VecX step = h.ldlt().solve(-b);
    ++res.iterations;
    if (step.norm() < options.update_tol) {
      converged = true;
      break;
    }

    auto apply = [&](const VecX& s) {
      std::vector<Transform> out = res.poses;
      for (int i = 1; i <= dp; ++i) {
        out[i] = (se3_exp(Twist(s.segment<6>(6 * (i - 1)))) * out[i]).renormalized();
      }
      return out;
    };
    std::vector<Transform> trial = apply(step);
    double trial_cost = total_cost(window, trial);
    for (int k = 0; k < options.max_halvings && !(trial_cost <= cost); ++k) {
      step *= 0.5;
      trial = apply(step);
      trial_cost = total_cost(window, trial);
    }
    if (!(trial_cost <= cost)) {
      converged = true;
      break;
    }
    const double decrease = cost - trial_cost;
    res.poses = std::move(trial);
    cost = trial_cost;
    res.cost_history.push_back(cost);
    if (decrease < options.cost_decrease_tol * std::max(1.0, cost)) {
      converged = true;
      break;
    }
  }
  res.final_cost = cost;
  if (!converged) {
    fail(Errc::kNotConverged, "relax: no convergence in " +
                                  std::to_string(options.max_iterations) +
                                  " iterations (initial cost " +
                                  std::to_string(res.initial_cost) + ", final cost " +
                                  std::to_string(cost) + ")");
  }
  return res;
}

Mat6 isotropic_covariance(double sigma_translation, double sigma_rotation) {
  Vec6 d;
  const double vt = sigma_translation * sigma_translation;
  const double vr = sigma_rotation * sigma_rotation;
  d << vt, vt, vt, vr, vr, vr;
  return d.asDiagonal();
}

Trajectory fuse_trajectory(const Trajectory& odometry,
                           std::span<const CorrectionRecord> corrections,
                           const FuseOptions& options) {
  const std::size_t n = odometry.size();
  if (!options.edge_covariances.empty() && options.edge_covariances.size() + 1 != n) {
    fail(Errc::kInvalidArgument, "fuse_trajectory: need one covariance per odometry edge");
  }
  std::unordered_map<int, std::size_t> position;
  for (std::size_t i = 0; i < n; ++i) position[odometry.frame(i)] = i;

  // Resolve and validate windows before doing any work.
  struct Window {
    std::size_t start, end;
    const CorrectionRecord* record;
  };
  std::vector<Window> windows;
  for (std::size_t k = 0; k < corrections.size(); ++k) {
    const auto& c = corrections[k];
    if (c.frame_end <= c.frame_start) {
      fail(Errc::kInvalidArgument, "fuse_trajectory: correction " + std::to_string(k) +
                                       " has frame_end <= frame_start");
    }
    const auto s = position.find(c.frame_start);
    const auto e = position.find(c.frame_end);
    if (s == position.end() || e == position.end()) {
      fail(Errc::kInvalidArgument, "fuse_trajectory: correction " + std::to_string(k) +
                                       " refers to frames outside the trajectory");
    }
    if (!windows.empty() && s->second < windows.back().end) {
      fail(Errc::kInvalidArgument, "fuse_trajectory: correction " + std::to_string(k) +
                                       " overlaps or precedes the previous one");
    }
    windows.push_back({s->second, e->second, &c});
  }

  auto edge_cov = [&](std::size_t i) -> const Mat6& {
    return options.edge_covariances.empty() ? options.odometry_cov : options.edge_covariances[i];
  };

  std::vector<Transform> out(odometry.poses());
  std::size_t next_window = 0;
  bool anchored = false;  // true once a window has moved the trajectory
  for (std::size_t i = 0; i + 1 < n;) {
    if (next_window < windows.size() && windows[next_window].start == i) {
      const Window& w = windows[next_window++];
      PoseGraphWindow pg;
      for (std::size_t k = w.start; k < w.end; ++k) {
        pg.odometry.push_back(odometry.relative(k, k + 1));
        pg.odometry_cov.push_back(edge_cov(k));
      }
      pg.poses = chain_odometry(out[w.start].inverse(), pg.odometry);
      pg.correction = se3_exp(w.record->xi) * odometry.relative(w.start, w.end);
      pg.correction_cov = w.record->covariance.value_or(options.correction_cov);
      const RelaxResult r = relax(pg, options.relax);
      for (std::size_t k = 1; k < r.poses.size(); ++k) out[w.start + k] = r.poses[k].inverse();
      anchored = true;
      i = w.end;
      continue;
    }
    if (anchored) {
      out[i + 1] = (out[i] * odometry.relative(i, i + 1)).renormalized();
    }
    ++i;
  }
  return Trajectory(std::move(out), odometry.frames());
}

}  // namespace lgc
