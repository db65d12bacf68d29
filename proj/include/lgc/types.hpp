#pragma once

#include <Eigen/Core>

namespace lgc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

// Axis-angle coordinates of so(3), radians.
using RotVec = Vec3;

// se(3) coordinates ordered [rho; phi]: translation block (meters) first,
// rotation block (radians) second.
using Twist = Vec6;

inline auto rho(const Twist& xi) { return xi.head<3>(); }
inline auto phi(const Twist& xi) { return xi.tail<3>(); }

inline Twist make_twist(const Vec3& rho, const Vec3& phi) {
  Twist xi;
  xi << rho, phi;
  return xi;
}

}  // namespace lgc
