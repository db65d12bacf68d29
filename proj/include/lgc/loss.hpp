#pragma once

// Correction targets, geodesic correction losses and their gradients.
//
// A correction xi is applied on the left of an estimate: T' = exp(xi) T_est.
// The residual g(xi) = log(exp(xi) T*^-1) measures the remaining geodesic
// offset from the target correction T*, and the loss is 1/2 g^T Sigma^-1 g.

#include <span>
#include <utility>

#include "lgc/liegroups.hpp"
#include "lgc/types.hpp"

namespace lgc {

struct CorrectionSample {
  int frame_start = 0;
  int frame_end = 0;
  Transform estimated;          // estimated relative transform over the window
  Transform target_correction;  // T_gt * T_est^-1

  int delta_p() const { return frame_end - frame_start; }
};

/// Regularizer added to an empirical covariance whose spectrum is not
/// strictly positive.
inline constexpr double kCovarianceEpsilon = 1e-10;

/// How the residual Jacobian dg/dxi is formed.
///  kMethodI:  J^-1(-xi*), assumes the prediction is small.
///  kMethodII: J^-1(g(xi)) J(xi), valid for any target.
enum class GradientMethod { kMethodI, kMethodII };

Transform target_correction(const Transform& t_gt, const Transform& t_est);
Transform apply_correction(const Twist& xi, const Transform& t_est);

struct TwistStatistics {
  Twist mean;
  Mat6 covariance;
};

/// Mean and 1/(N-1) covariance of log(target_correction) over the samples.
/// Needs at least two samples.
TwistStatistics empirical_covariance(std::span<const CorrectionSample> samples);

/// Generic form over already-extracted coordinate vectors (any dimension).
/// Adds kCovarianceEpsilon * I when the smallest eigenvalue is <= 0.
std::pair<VecX, MatX> empirical_covariance(std::span<const VecX> coords);

// --- SE(3) -----------------------------------------------------------------

Twist se3_residual(const Twist& xi, const Transform& target);
double se3_loss(const Twist& xi, const Transform& target, const Mat6& cov);
/// dg/dxi for the chosen derivation.
Mat6 se3_residual_jacobian(const Twist& xi, const Transform& target,
                           GradientMethod method = GradientMethod::kMethodII);
Twist se3_loss_gradient(const Twist& xi, const Transform& target, const Mat6& cov,
                        GradientMethod method = GradientMethod::kMethodII);

// --- SO(3) -----------------------------------------------------------------

RotVec so3_residual(const RotVec& phi, const Rotation& target);
double so3_loss(const RotVec& phi, const Rotation& target, const Mat3& cov);
Mat3 so3_residual_jacobian(const RotVec& phi, const Rotation& target,
                           GradientMethod method = GradientMethod::kMethodII);
RotVec so3_loss_gradient(const RotVec& phi, const Rotation& target, const Mat3& cov,
                         GradientMethod method = GradientMethod::kMethodII);

// --- Yaw -------------------------------------------------------------------

/// Rotation about the camera's vertical (y) axis: atan2(R02, R22).
double yaw_extract(const Transform& t);
double yaw_extract(const Rotation& r);
/// Wraps to (-pi, pi].
double wrap_angle(double angle);
/// Squared wrapped angle difference.
double yaw_loss(double psi, double target_psi);

}  // namespace lgc
