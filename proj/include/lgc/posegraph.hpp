#pragma once

// Windowed pose-graph relaxation fusing high-rate odometry edges with one
// low-rate correction edge spanning the window.
//
// Window poses are T_{t_i,n} (navigation frame into frame t_i). An edge
// measurement T_{1,2} between poses T_1, T_2 has error
//   e = log(T_{1,2} T_2 T_1^-1),
// and the window cost is sum e^T Sigma_v^-1 e + e_c^T Sigma_c^-1 e_c.

#include <optional>
#include <span>
#include <vector>

#include "lgc/liegroups.hpp"
#include "lgc/trajectory.hpp"

namespace lgc {

struct PoseGraphWindow {
  std::vector<Transform> poses;     // delta_p + 1 initial poses T_{t_i,n}
  std::vector<Transform> odometry;  // delta_p edges T_{t_i,t_{i+1}}
  std::vector<Mat6> odometry_cov;   // Sigma_v per edge
  std::optional<Transform> correction;  // corrected T_{t_0,t_dp}; omitted = no edge
  Mat6 correction_cov = Mat6::Identity();

  int delta_p() const { return static_cast<int>(odometry.size()); }
  void validate() const;
};

Twist pose_error(const Transform& measured, const Transform& t1, const Transform& t2);

/// d e / d delta for left perturbations T_1 <- exp(delta) T_1 and
/// T_2 <- exp(delta) T_2.
struct PoseErrorJacobians {
  Mat6 wrt_first;
  Mat6 wrt_second;
};
PoseErrorJacobians pose_error_jacobians(const Transform& measured, const Transform& t1,
                                        const Transform& t2);

double total_cost(const PoseGraphWindow& window);
double total_cost(const PoseGraphWindow& window, std::span<const Transform> poses);

/// Poses obtained by chaining the odometry edges from `anchor`.
std::vector<Transform> chain_odometry(const Transform& anchor,
                                      std::span<const Transform> odometry);

struct RelaxOptions {
  int max_iterations = 100;
  double cost_decrease_tol = 1e-12;
  double update_tol = 1e-10;
  int max_halvings = 10;
};

struct RelaxResult {
  std::vector<Transform> poses;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  std::vector<double> cost_history;
};

/// Gauss-Newton over left perturbations of poses 1..delta_p; pose 0 is held
/// fixed to remove the gauge freedom.
RelaxResult relax(const PoseGraphWindow& window, const RelaxOptions& options = {});

// --- Trajectory fusion -----------------------------------------------------

/// One low-rate correction: xi is applied on the left of the estimated
/// relative transform over [frame_start, frame_end].
struct CorrectionRecord {
  int frame_start = 0;
  int frame_end = 0;
  Twist xi = Twist::Zero();
  std::optional<Mat6> covariance;
};

/// Isotropic block-diagonal edge covariance.
Mat6 isotropic_covariance(double sigma_translation, double sigma_rotation);

struct FuseOptions {
  Mat6 odometry_cov = isotropic_covariance(0.05, 0.01);
  std::vector<Mat6> edge_covariances;  // per odometry edge; overrides odometry_cov
  Mat6 correction_cov = Mat6::Identity();  // for records without a covariance
  RelaxOptions relax;
};

/// Relaxes each correction window in order, anchoring it at the previous
/// window's corrected terminal pose. Frames outside any window follow the
/// odometry from the latest corrected pose. Corrections must be sorted and
/// non-overlapping.
Trajectory fuse_trajectory(const Trajectory& odometry,
                           std::span<const CorrectionRecord> corrections,
                           const FuseOptions& options = {});

}  // namespace lgc
