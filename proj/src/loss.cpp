#include "lgc/loss.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "lgc/error.hpp"

namespace lgc {
namespace {

template <int N>
Eigen::Matrix<double, N, 1> solve_spd(const Eigen::Matrix<double, N, N>& cov,
                                      const Eigen::Matrix<double, N, 1>& rhs,
                                      const char* who) {
  Eigen::LLT<Eigen::Matrix<double, N, N>> llt(cov);
  if (llt.info() != Eigen::Success) {
    fail(Errc::kInvalidArgument, std::string(who) + ": covariance is not positive definite");
  }
  return llt.solve(rhs);
}

}  // namespace

Transform target_correction(const Transform& t_gt, const Transform& t_est) {
  return t_gt * t_est.inverse();
}

Transform apply_correction(const Twist& xi, const Transform& t_est) {
  return se3_exp(xi) * t_est;
}

std::pair<VecX, MatX> empirical_covariance(std::span<const VecX> coords) {
  if (coords.size() < 2) {
    fail(Errc::kInvalidArgument, "empirical_covariance: need at least 2 samples");
  }
  const Eigen::Index dim = coords.front().size();
  VecX mean = VecX::Zero(dim);
  for (const auto& c : coords) {
    if (c.size() != dim) fail(Errc::kInvalidArgument, "empirical_covariance: ragged samples");
    mean += c;
  }
  mean /= static_cast<double>(coords.size());

  MatX cov = MatX::Zero(dim, dim);
  for (const auto& c : coords) {
    const VecX d = c - mean;
    cov.noalias() += d * d.transpose();
  }
  cov /= static_cast<double>(coords.size() - 1);
  cov = 0.5 * (cov + cov.transpose());

  Eigen::SelfAdjointEigenSolver<MatX> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 0.0) {
    cov += kCovarianceEpsilon * MatX::Identity(dim, dim);
  }
  return {mean, cov};
}

TwistStatistics empirical_covariance(std::span<const CorrectionSample> samples) {
  std::vector<VecX> coords;
  coords.reserve(samples.size());
  for (const auto& s : samples) coords.emplace_back(se3_log(s.target_correction));
  auto [mean, cov] = empirical_covariance(coords);
  return {Twist(mean), Mat6(cov)};
}

// --- SE(3) -----------------------------------------------------------------

Twist se3_residual(const Twist& xi, const Transform& target) {
  return se3_log(between(se3_exp(xi), target));
}

double se3_loss(const Twist& xi, const Transform& target, const Mat6& cov) {
  const Twist g = se3_residual(xi, target);
  return 0.5 * g.dot(solve_spd<6>(cov, g, "se3_loss"));
}

Mat6 se3_residual_jacobian(const Twist& xi, const Transform& target,
                           GradientMethod method) {
  if (method == GradientMethod::kMethodI) {
    return se3_left_jacobian_inv(-se3_log(target));
  }
  return se3_left_jacobian_inv(se3_residual(xi, target)) * se3_left_jacobian(xi);
}

Twist se3_loss_gradient(const Twist& xi, const Transform& target, const Mat6& cov,
                        GradientMethod method) {
  const Twist g = se3_residual(xi, target);
  const Twist weighted = solve_spd<6>(cov, g, "se3_loss_gradient");
  // (g^T Sigma^-1 dg/dxi)^T
  return se3_residual_jacobian(xi, target, method).transpose() * weighted;
}

// --- SO(3) -----------------------------------------------------------------

RotVec so3_residual(const RotVec& phi, const Rotation& target) {
  return so3_log(between(so3_exp(phi), target));
}

double so3_loss(const RotVec& phi, const Rotation& target, const Mat3& cov) {
  const RotVec g = so3_residual(phi, target);
  return 0.5 * g.dot(solve_spd<3>(cov, g, "so3_loss"));
}

Mat3 so3_residual_jacobian(const RotVec& phi, const Rotation& target,
                           GradientMethod method) {
  if (method == GradientMethod::kMethodI) {
    return so3_left_jacobian_inv(-so3_log(target));
  }
  return so3_left_jacobian_inv(so3_residual(phi, target)) * so3_left_jacobian(phi);
}

RotVec so3_loss_gradient(const RotVec& phi, const Rotation& target, const Mat3& cov,
                         GradientMethod method) {
  const RotVec g = so3_residual(phi, target);
  const RotVec weighted = solve_spd<3>(cov, g, "so3_loss_gradient");
  return so3_residual_jacobian(phi, target, method).transpose() * weighted;
}

// --- Yaw -------------------------------------------------------------------

double yaw_extract(const Rotation& r) {
  return std::atan2(r.matrix()(0, 2), r.matrix()(2, 2));
}

double yaw_extract(const Transform& t) { return yaw_extract(t.rotation()); }

double wrap_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double wrapped = std::remainder(angle, kTwoPi);  // [-pi, pi]
  if (wrapped <= -std::numbers::pi) wrapped += kTwoPi;
  return wrapped;
}

double yaw_loss(double psi, double target_psi) {
  const double d = wrap_angle(psi - target_psi);
  return d * d;
}

}  // namespace lgc
