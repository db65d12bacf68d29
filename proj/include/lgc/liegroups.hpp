#pragma once

// SO(3) / SE(3) group and algebra operations.
//
// Conventions: twists are [rho; phi] (translation first); all Jacobians are
// *left* Jacobians, so exp(xi + d) ~= exp(J(xi) d) exp(xi) to first order.

#include <Eigen/Core>

#include "lgc/types.hpp"

namespace lgc {

/// Orthonormality tolerance (Frobenius norm of R^T R - I) for validated input.
inline constexpr double kRotationTolerance = 1e-9;

// Small-angle thresholds below which truncated series replace closed forms.
inline constexpr double kExpLogSeriesThreshold = 1e-8;
inline constexpr double kJacobianSeriesThreshold = 1e-6;

class Rotation {
 public:
  Rotation() : matrix_(Mat3::Identity()) {}

  /// Validates orthonormality and det = +1 to kRotationTolerance.
  static Rotation from_matrix(const Mat3& m);
  /// Trusts the caller; used for matrices produced by exact constructions.
  static Rotation unchecked(const Mat3& m) { return Rotation(m); }
  /// Nearest rotation in the Frobenius sense (SVD projection).
  static Rotation nearest(const Mat3& m);
  static Rotation about_y(double angle);

  const Mat3& matrix() const { return matrix_; }

  Rotation inverse() const { return Rotation(matrix_.transpose()); }
  Rotation operator*(const Rotation& other) const {
    return Rotation(matrix_ * other.matrix_);
  }
  Vec3 operator*(const Vec3& p) const { return matrix_ * p; }

  /// ||R^T R - I||_F.
  double orthonormality_error() const;
  /// Re-projects onto SO(3) when drift exceeds kRotationTolerance.
  Rotation renormalized() const;

 private:
  explicit Rotation(const Mat3& m) : matrix_(m) {}
  Mat3 matrix_;
};

class Transform {
 public:
  Transform() : translation_(Vec3::Zero()) {}
  Transform(const Rotation& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  /// Validates the rotation block and the homogeneous bottom row.
  static Transform from_matrix(const Mat4& m);
  static Transform pure_translation(const Vec3& t) {
    return Transform(Rotation(), t);
  }

  const Rotation& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Mat4 matrix() const;

  Transform inverse() const;
  Transform operator*(const Transform& other) const;
  Vec3 operator*(const Vec3& p) const {
    return rotation_ * p + translation_;
  }

  Transform renormalized() const {
    return Transform(rotation_.renormalized(), translation_);
  }

 private:
  Rotation rotation_;
  Vec3 translation_;
};

inline Transform compose(const Transform& a, const Transform& b) {
  return a * b;
}
inline Transform inverse(const Transform& t) { return t.inverse(); }

/// a * b^-1, exactly the identity when a and b are bitwise equal.
Rotation between(const Rotation& a, const Rotation& b);
Transform between(const Transform& a, const Transform& b);

// --- hat / vee -------------------------------------------------------------

Mat3 hat(const Vec3& v);
Mat4 hat(const Twist& xi);
Vec3 vee(const Mat3& m);
Twist vee(const Mat4& m);

/// Runtime-arity variants: 3-vectors map to 3x3, 6-vectors to 4x4; anything
/// else throws Errc::kInvalidArgument.
MatX hat(const VecX& v);
VecX vee(const MatX& m);

// --- SO(3) -----------------------------------------------------------------

Rotation so3_exp(const RotVec& phi);
/// Canonical coordinates with ||phi|| <= pi. Rejects non-orthonormal input.
RotVec so3_log(const Rotation& r);
RotVec so3_log(const Mat3& r);
Mat3 so3_left_jacobian(const RotVec& phi);
Mat3 so3_left_jacobian_inv(const RotVec& phi);

// --- SE(3) -----------------------------------------------------------------

Transform se3_exp(const Twist& xi);
Twist se3_log(const Transform& t);
/// The off-diagonal block of the SE(3) left Jacobian.
Mat3 se3_q_block(const Vec3& rho, const Vec3& phi);
Mat6 se3_left_jacobian(const Twist& xi);
Mat6 se3_left_jacobian_inv(const Twist& xi);

/// Ad(T) with Ad(T) xi = vee(T hat(xi) T^-1).
Mat6 adjoint(const Transform& t);

}  // namespace lgc
