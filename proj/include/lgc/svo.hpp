#pragma once

// Frame-to-frame sparse stereo visual odometry on rectified keypoint tracks.
//
// For a track observed at frames t and t+1 the estimator models
//   e = y_{t+1} - pi(T_{t+1,t} pi^-1(y_t)) ~ N(0, Sigma_im)
// and solves for T_{t+1,t} by 3-point RANSAC followed by Gauss-Newton.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lgc/config.hpp"
#include "lgc/kernels.hpp"
#include "lgc/liegroups.hpp"
#include "lgc/trajectory.hpp"

namespace lgc {

struct StereoCamera {
  double fu = 1.0;
  double fv = 1.0;
  double cu = 0.0;
  double cv = 0.0;
  double baseline = 1.0;        // meters
  Mat3 obs_cov = Mat3::Identity();  // pixels^2, over (u_l, v_l, u_r)
  int width = 0;                // image size; 0 when unknown
  int height = 0;

  void validate() const;
  kernels::StereoIntrinsics intrinsics() const { return {fu, fv, cu, cv, baseline}; }

  /// Keys: fu fv cu cv baseline [width height sigma_u sigma_v sigma_ur].
  static StereoCamera from_config(const KeyValueConfig& cfg);
  KeyValueConfig to_config() const;
};

struct StereoObservation {
  double u_l = 0.0;
  double v_l = 0.0;
  double u_r = 0.0;

  double disparity() const { return u_l - u_r; }
  Vec3 vec() const { return {u_l, v_l, u_r}; }
  static StereoObservation from_vec(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
};

struct Correspondence {
  StereoObservation prev;
  StereoObservation next;
};

using FrameCorrespondences = std::vector<Correspondence>;

inline constexpr double kMinDisparity = 0.1;

StereoObservation stereo_project(const StereoCamera& cam, const Vec3& p);
Vec3 stereo_triangulate(const StereoCamera& cam, const StereoObservation& obs,
                        double min_disparity = kMinDisparity);
/// next - pi(T pi^-1(prev)), T mapping frame-t points into frame t+1.
Vec3 reprojection_error(const StereoCamera& cam, const Transform& t,
                        const StereoObservation& prev, const StereoObservation& next);

/// Least-squares rigid alignment with dst ~ R src + t (SVD of the
/// cross-covariance, reflection corrected). Throws Errc::kDegenerate when the
/// source points are collinear.
Transform align_3pt(std::span<const Vec3> src, std::span<const Vec3> dst);
std::optional<Transform> try_align(std::span<const Vec3> src, std::span<const Vec3> dst);

struct RansacOptions {
  int iterations = 200;
  double inlier_threshold_px = 1.5;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double min_disparity = kMinDisparity;
  /// Gauss-Newton iterations polishing each 3-point hypothesis on its own
  /// reprojection errors before scoring; 0 scores the raw alignment.
  int hypothesis_refinement_iterations = 10;
};

struct RansacResult {
  std::vector<std::uint8_t> inliers;
  Transform motion;
  int num_inliers = 0;
  double inlier_error = 0.0;  // summed reprojection-error norms over inliers
  std::vector<int> hypothesis_inlier_counts;  // per non-degenerate hypothesis
};

RansacResult ransac(const StereoCamera& cam, std::span<const Correspondence> tracks,
                    const RansacOptions& options = {});

struct GaussNewtonOptions {
  int max_iterations = 100;
  double cost_decrease_tol = 1e-12;
  double update_tol = 1e-10;
  int max_halvings = 10;
};

struct VoEstimate {
  Transform motion;    // T_{t+1,t}
  Mat6 covariance;     // inverse Gauss-Newton Hessian, left perturbation
  int iterations = 0;
  std::vector<double> cost_history;  // accepted costs, starting at T_init
};

VoEstimate gauss_newton_vo(const StereoCamera& cam, std::span<const Correspondence> tracks,
                           std::span<const std::uint8_t> inliers, const Transform& t_init,
                           const GaussNewtonOptions& options = {});

/// Sum of e^T Sigma_im^-1 e over the flagged tracks.
double vo_cost(const StereoCamera& cam, std::span<const Correspondence> tracks,
               std::span<const std::uint8_t> inliers, const Transform& t);

/// Inlier mask of ||reprojection_error|| < threshold under motion t.
std::vector<std::uint8_t> classify_inliers(const StereoCamera& cam,
                                           std::span<const Correspondence> tracks,
                                           const Transform& t, double threshold_px,
                                           double min_disparity = kMinDisparity);

struct PipelineOptions {
  RansacOptions ransac;
  GaussNewtonOptions gauss_newton;
  /// After Gauss-Newton, inliers are re-classified under the refined motion
  /// and the fit repeated, up to this many times or until the mask is stable.
  int inlier_refinements = 3;
};

struct PipelineResult {
  Trajectory trajectory;
  /// Covariance of each pose-graph edge T_{k,k+1} (left perturbation).
  std::vector<Mat6> edge_covariances;
};

/// Frame k of `frames` holds tracks between frames k and k+1. RANSAC for
/// frame k draws from stream k of options.ransac.seed.
PipelineResult run_pipeline(const StereoCamera& cam, std::span<const FrameCorrespondences> frames,
                            const PipelineOptions& options = {});

}  // namespace lgc
