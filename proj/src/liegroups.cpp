#include "lgc/liegroups.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "lgc/error.hpp"
#include "lgc/textio.hpp"

namespace lgc {
namespace {

void require_finite(const auto& v, const char* what) {
  if (!v.allFinite()) fail(Errc::kInvalidArgument, std::string(what) + ": non-finite input");
}

// Coefficients A = (1 - cos t)/t^2, B = (t - sin t)/t^3 shared by the
// exponential map and the left Jacobian.
struct RodriguesCoeffs {
  double a;
  double b;
};

RodriguesCoeffs rodrigues_coeffs(double theta, double series_threshold) {
  const double t2 = theta * theta;
  if (theta < series_threshold) {
    return {0.5 - t2 / 24.0 + t2 * t2 / 720.0,
            1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0};
  }
  const double half_sin = std::sin(0.5 * theta);
  return {2.0 * half_sin * half_sin / t2, (theta - std::sin(theta)) / (t2 * theta)};
}

}  // namespace

// --- Rotation / Transform --------------------------------------------------

Rotation Rotation::from_matrix(const Mat3& m) {
  require_finite(m, "Rotation");
  const double err = (m.transpose() * m - Mat3::Identity()).norm();
  if (err > kRotationTolerance) {
    fail(Errc::kInvalidArgument,
         "Rotation: matrix not orthonormal (error " + text::format_double(err) + ")");
  }
  if (std::abs(m.determinant() - 1.0) > kRotationTolerance) {
    fail(Errc::kInvalidArgument, "Rotation: determinant is not +1");
  }
  return Rotation(m);
}

Rotation Rotation::nearest(const Mat3& m) {
  require_finite(m, "Rotation::nearest");
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  d(2, 2) = (svd.matrixU() * svd.matrixV().transpose()).determinant() < 0 ? -1.0 : 1.0;
  return Rotation(svd.matrixU() * d * svd.matrixV().transpose());
}

Rotation Rotation::about_y(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 m;
  m << c, 0, s,
       0, 1, 0,
      -s, 0, c;
  return Rotation(m);
}

double Rotation::orthonormality_error() const {
  return (matrix_.transpose() * matrix_ - Mat3::Identity()).norm();
}

Rotation Rotation::renormalized() const {
  if (orthonormality_error() <= kRotationTolerance) return *this;
  return nearest(matrix_);
}

Transform Transform::from_matrix(const Mat4& m) {
  require_finite(m, "Transform");
  if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0) {
    fail(Errc::kInvalidArgument, "Transform: bottom row must be (0,0,0,1)");
  }
  return Transform(Rotation::from_matrix(m.topLeftCorner<3, 3>()),
                   m.topRightCorner<3, 1>());
}

Rotation between(const Rotation& a, const Rotation& b) {
  if (a.matrix() == b.matrix()) return Rotation();
  return a * b.inverse();
}

Transform between(const Transform& a, const Transform& b) {
  if (a.rotation().matrix() == b.rotation().matrix()) {
    return Transform(Rotation(), a.translation() - b.translation());
  }
  return a * b.inverse();
}

Mat4 Transform::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation_.matrix();
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Transform Transform::inverse() const {
  const Rotation rt = rotation_.inverse();
  return Transform(rt, -(rt * translation_));
}

Transform Transform::operator*(const Transform& other) const {
  return Transform(rotation_ * other.rotation_,
                   rotation_ * other.translation_ + translation_);
}

// --- hat / vee -------------------------------------------------------------

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
      -v.y(), v.x(), 0.0;
  return m;
}

Mat4 hat(const Twist& xi) {
  Mat4 m = Mat4::Zero();
  m.topLeftCorner<3, 3>() = hat(Vec3(phi(xi)));
  m.topRightCorner<3, 1>() = rho(xi);
  return m;
}

Vec3 vee(const Mat3& m) { return Vec3(m(2, 1), m(0, 2), m(1, 0)); }

Twist vee(const Mat4& m) {
  return make_twist(m.topRightCorner<3, 1>(), vee(Mat3(m.topLeftCorner<3, 3>())));
}

MatX hat(const VecX& v) {
  if (v.size() == 3) return hat(Vec3(v));
  if (v.size() == 6) return hat(Twist(v));
  fail(Errc::kInvalidArgument, "hat: expected a 3- or 6-vector, got size " +
                                   std::to_string(v.size()));
}

VecX vee(const MatX& m) {
  if (m.rows() == 3 && m.cols() == 3) return vee(Mat3(m));
  if (m.rows() == 4 && m.cols() == 4) return vee(Mat4(m));
  fail(Errc::kInvalidArgument, "vee: expected a 3x3 or 4x4 matrix");
}

// --- SO(3) -----------------------------------------------------------------

Rotation so3_exp(const RotVec& phi) {
  require_finite(phi, "so3_exp");
  const double theta = phi.norm();
  const Mat3 phi_hat = hat(phi);
  if (theta < kExpLogSeriesThreshold) {
    return Rotation::unchecked(Mat3::Identity() + phi_hat + 0.5 * phi_hat * phi_hat);
  }
  const double s = std::sin(theta) / theta;
  const double half_sin = std::sin(0.5 * theta);
  const double a = 2.0 * half_sin * half_sin / (theta * theta);
  return Rotation::unchecked(Mat3::Identity() + s * phi_hat + a * phi_hat * phi_hat);
}

RotVec so3_log(const Mat3& r) { return so3_log(Rotation::from_matrix(r)); }

RotVec so3_log(const Rotation& rotation) {
  const Mat3& r = rotation.matrix();
  // w = sin(theta) * axis, exact for any rotation.
  const Vec3 w = 0.5 * vee(Mat3(r - r.transpose()));
  const double cos_theta = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  const double sin_theta = w.norm();
  const double theta = std::atan2(sin_theta, cos_theta);

  if (theta < kExpLogSeriesThreshold) {
    return w * (1.0 + theta * theta / 6.0);
  }
  if (std::numbers::pi - theta > 1e-3) {
    return w * (theta / sin_theta);
  }
  // Near the antipode sin(theta) carries no usable precision; recover the axis
  // from the symmetric part (R + R^T)/2 = cos(theta) I + (1 - cos(theta)) a a^T
  // using its largest-diagonal column.
  const Mat3 aat = (0.5 * (r + r.transpose()) - cos_theta * Mat3::Identity()) /
                   (1.0 - cos_theta);
  Eigen::Index k = 0;
  aat.diagonal().maxCoeff(&k);
  Vec3 axis = aat.col(k) / std::sqrt(aat(k, k));
  if (axis.dot(w) < 0.0) axis = -axis;
  return theta * axis.normalized();
}

Mat3 so3_left_jacobian(const RotVec& phi) {
  require_finite(phi, "so3_left_jacobian");
  const double theta = phi.norm();
  const Mat3 phi_hat = hat(phi);
  const auto c = rodrigues_coeffs(theta, kJacobianSeriesThreshold);
  return Mat3::Identity() + c.a * phi_hat + c.b * phi_hat * phi_hat;
}

Mat3 so3_left_jacobian_inv(const RotVec& phi) {
  require_finite(phi, "so3_left_jacobian_inv");
  const double theta = phi.norm();
  const double t2 = theta * theta;
  const Mat3 phi_hat = hat(phi);
  double c;
  if (theta < kJacobianSeriesThreshold) {
    c = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
  } else {
    const double half = 0.5 * theta;
    c = (1.0 - half * std::cos(half) / std::sin(half)) / t2;
  }
  return Mat3::Identity() - 0.5 * phi_hat + c * phi_hat * phi_hat;
}

// --- SE(3) -----------------------------------------------------------------

Transform se3_exp(const Twist& xi) {
  require_finite(xi, "se3_exp");
  const Vec3 p = phi(xi);
  return Transform(so3_exp(p), so3_left_jacobian(p) * rho(xi));
}

Twist se3_log(const Transform& t) {
  const Vec3 p = so3_log(t.rotation());
  return make_twist(so3_left_jacobian_inv(p) * t.translation(), p);
}

Mat3 se3_q_block(const Vec3& rho, const Vec3& phi) {
  const double theta = phi.norm();
  const double t2 = theta * theta;
  const double t4 = t2 * t2;
  double c1, c2, c3;
  if (theta < kJacobianSeriesThreshold) {
    c1 = 1.0 / 6.0 - t2 / 120.0 + t4 / 5040.0;
    c2 = 1.0 / 24.0 - t2 / 720.0 + t4 / 40320.0;
    c3 = 1.0 / 120.0 - t2 / 2520.0 + t4 / 120960.0;
  } else {
    const double s = std::sin(theta);
    const double c = std::cos(theta);
    c1 = (theta - s) / (t2 * theta);
    // t^2 + 2 cos t - 2 written as a difference of squares to avoid
    // cancellation in 2 cos t - 2.
    const double two_half_sin = 2.0 * std::sin(0.5 * theta);
    c2 = (theta - two_half_sin) * (theta + two_half_sin) / (2.0 * t4);
    c3 = (2.0 * theta - 3.0 * s + theta * c) / (2.0 * t4 * theta);
  }
  const Mat3 rx = hat(rho);
  const Mat3 px = hat(phi);
  const Mat3 pxrx = px * rx;
  const Mat3 rxpx = rx * px;
  const Mat3 pxrxpx = pxrx * px;
  return 0.5 * rx + c1 * (pxrx + rxpx + pxrxpx) +
         c2 * (px * pxrx + rxpx * px - 3.0 * pxrxpx) +
         c3 * (pxrxpx * px + px * pxrxpx);
}

Mat6 se3_left_jacobian(const Twist& xi) {
  require_finite(xi, "se3_left_jacobian");
  const Mat3 j = so3_left_jacobian(phi(xi));
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = j;
  out.bottomRightCorner<3, 3>() = j;
  out.topRightCorner<3, 3>() = se3_q_block(rho(xi), phi(xi));
  return out;
}

Mat6 se3_left_jacobian_inv(const Twist& xi) {
  require_finite(xi, "se3_left_jacobian_inv");
  const Mat3 j_inv = so3_left_jacobian_inv(phi(xi));
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = j_inv;
  out.bottomRightCorner<3, 3>() = j_inv;
  out.topRightCorner<3, 3>() = -j_inv * se3_q_block(rho(xi), phi(xi)) * j_inv;
  return out;
}

Mat6 adjoint(const Transform& t) {
  const Mat3& r = t.rotation().matrix();
  Mat6 out = Mat6::Zero();
  out.topLeftCorner<3, 3>() = r;
  out.bottomRightCorner<3, 3>() = r;
  out.topRightCorner<3, 3>() = hat(t.translation()) * r;
  return out;
}

}  // namespace lgc
