#include <Eigen/LU>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "lgc/error.hpp"
#include "lgc/liegroups.hpp"
#include "test_util.hpp"

using namespace lgc;
using lgc::test::random_transform;
using lgc::test::random_twist;
using lgc::test::random_vec3;

constexpr double kPi = std::numbers::pi;

TEST(So3Exp, ZeroIsIdentity) {
  EXPECT_EQ(so3_exp(Vec3::Zero()).matrix(), Mat3::Identity());
}

TEST(So3Exp, QuarterTurnAboutZ) {
  const Vec3 y = so3_exp(Vec3(0, 0, kPi / 2)) * Vec3(1, 0, 0);
  EXPECT_NEAR((y - Vec3(0, 1, 0)).norm(), 0.0, 1e-15);
}

TEST(So3Exp, MatchesPowerSeriesAndRoundTrips) {
  const Vec3 v(0.1, -0.2, 0.3);
  const Mat3 oracle = test::series_exp(Mat3(hat(v)));
  EXPECT_LT((so3_exp(v).matrix() - oracle).norm(), 1e-14);
  EXPECT_LT((so3_log(so3_exp(v)) - v).norm(), 1e-12);
}

TEST(So3Exp, SeriesBranchAgreesWithPowerSeries) {
  for (const double s : {1e-12, 5e-9, 2e-8}) {
    const Vec3 v = Vec3(0.3, -0.5, 0.8).normalized() * s;
    EXPECT_LT((so3_exp(v).matrix() - test::series_exp(Mat3(hat(v)))).norm(), 1e-16);
  }
}

TEST(So3Exp, RejectsNonFinite) {
  EXPECT_THROW(so3_exp(Vec3(NAN, 0, 0)), Error);
}

TEST(So3Log, IdentityIsZero) { EXPECT_EQ(so3_log(Rotation()), Vec3::Zero()); }

TEST(So3Log, HalfTurnAboutX) {
  const Vec3 phi = so3_log(Mat3(Vec3(1, -1, -1).asDiagonal()));
  EXPECT_NEAR(std::abs(phi.x()), kPi, 1e-15);
  EXPECT_EQ(phi.y(), 0.0);
  EXPECT_EQ(phi.z(), 0.0);
}

TEST(So3Log, RandomRoundTrip) {
  CounterRng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 v = random_vec3(rng, kPi - 0.1);
    ASSERT_LT((so3_log(so3_exp(v)) - v).norm(), 1e-10) << v.transpose();
  }
}

TEST(So3Log, NearAntipodeBranch) {
  CounterRng rng(2);
  for (int i = 0; i < 200; ++i) {
    const Vec3 axis = random_vec3(rng, 1.0).normalized();
    const double theta = kPi - std::pow(10.0, -rng.uniform(3.5, 8.0));
    const Vec3 v = axis * theta;
    const Vec3 back = so3_log(so3_exp(v));
    ASSERT_LE(back.norm(), kPi + 1e-12);
    ASSERT_LT((so3_exp(back).matrix() - so3_exp(v).matrix()).norm(), 1e-12);
    ASSERT_LT((back - v).norm(), 1e-6);
  }
}

TEST(So3Log, RejectsNonOrthonormal) {
  Mat3 m = Mat3::Identity();
  m(0, 1) = 1e-6;
  EXPECT_THROW(so3_log(m), Error);
  EXPECT_THROW(so3_log(Mat3(-Mat3::Identity())), Error);
}

TEST(So3Jacobian, ZeroIsIdentity) {
  EXPECT_EQ(so3_left_jacobian(Vec3::Zero()), Mat3::Identity());
  EXPECT_EQ(so3_left_jacobian_inv(Vec3::Zero()), Mat3::Identity());
}

TEST(So3Jacobian, MatchesSeriesOracleAndInverse) {
  CounterRng rng(3);
  for (int i = 0; i < 500; ++i) {
    const Vec3 phi = random_vec3(rng, kPi - 0.1);
    const Mat3 j = so3_left_jacobian(phi);
    ASSERT_LT((j - test::series_left_jacobian(Mat3(hat(phi)))).norm(), 1e-12);
    ASSERT_LT((j * so3_left_jacobian_inv(phi) - Mat3::Identity()).norm(), 1e-10);
  }
}

TEST(So3Jacobian, DirectionalDerivative) {
  CounterRng rng(4);
  const double h = 1e-6;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 phi = random_vec3(rng, kPi - 0.1);
    const Vec3 v = random_vec3(rng, 1.0).normalized();
    const Vec3 fd = so3_log(so3_exp(phi + h * v) * so3_exp(phi).inverse()) / h;
    const Vec3 an = so3_left_jacobian(phi) * v;
    ASSERT_LT((fd - an).norm() / an.norm(), 1e-4);
  }
}

TEST(So3Jacobian, BranchesAgreeAtThreshold) {
  const Vec3 dir = Vec3(0.2, -0.7, 0.4).normalized();
  const Vec3 below = dir * kJacobianSeriesThreshold * (1 - 1e-9);
  const Vec3 above = dir * kJacobianSeriesThreshold * (1 + 1e-9);
  EXPECT_LT((so3_left_jacobian(below) - so3_left_jacobian(above)).norm(), 1e-9);
  EXPECT_LT((so3_left_jacobian_inv(below) - so3_left_jacobian_inv(above)).norm(), 1e-9);
  EXPECT_LT((so3_left_jacobian(above) - test::series_left_jacobian(Mat3(hat(above)))).norm(),
            1e-15);
}

TEST(Se3Exp, ZeroAndPureTranslation) {
  EXPECT_EQ(se3_exp(Twist::Zero()).matrix(), Mat4::Identity());
  Twist xi;
  xi << 1.5, -2.0, 0.25, 0, 0, 0;
  const Transform t = se3_exp(xi);
  EXPECT_EQ(t.rotation().matrix(), Mat3::Identity());
  EXPECT_EQ(t.translation(), Vec3(1.5, -2.0, 0.25));
}

TEST(Se3Exp, QuarterTurnTranslation) {
  Twist xi;
  xi << 1, 0, 0, 0, 0, kPi / 2;
  const Vec3 t = se3_exp(xi).translation();
  EXPECT_NEAR(t.x(), 2 / kPi, 1e-15);
  EXPECT_NEAR(t.y(), 2 / kPi, 1e-15);
  EXPECT_NEAR(t.z(), 0.0, 1e-15);
}

TEST(Se3Exp, MatchesMatrixExponentialSeries) {
  CounterRng rng(5);
  for (int i = 0; i < 200; ++i) {
    const Twist xi = random_twist(rng, 3.0, 2.0);
    ASSERT_LT((se3_exp(xi).matrix() - test::series_exp(Mat4(hat(xi)), 60)).norm(), 1e-12);
  }
}

TEST(Se3Log, RandomRoundTrip) {
  CounterRng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const Twist xi = random_twist(rng, 10.0, kPi - 0.1);
    ASSERT_LT((se3_log(se3_exp(xi)) - xi).norm(), 1e-9);
  }
}

TEST(Se3Jacobian, ZeroIsIdentity) {
  EXPECT_EQ(se3_left_jacobian(Twist::Zero()), Mat6::Identity());
  EXPECT_EQ(se3_left_jacobian_inv(Twist::Zero()), Mat6::Identity());
}

TEST(Se3Jacobian, MatchesSeriesOracleAndInverse) {
  CounterRng rng(7);
  for (int i = 0; i < 500; ++i) {
    const Twist xi = random_twist(rng, 3.0, kPi - 0.1);
    const Mat6 j = se3_left_jacobian(xi);
    ASSERT_LT((j - test::series_left_jacobian(test::algebra_adjoint(xi), 60)).norm(), 1e-11);
    ASSERT_LT((j * se3_left_jacobian_inv(xi) - Mat6::Identity()).norm(), 1e-9);
  }
}

TEST(Se3Jacobian, DirectionalDerivative) {
  CounterRng rng(8);
  const double h = 1e-6;
  for (int i = 0; i < 1000; ++i) {
    const Twist xi = random_twist(rng, 3.0, kPi - 0.1);
    Twist v = random_twist(rng, 1.0, 1.0).normalized();
    const Twist fd = se3_log(se3_exp(xi + h * v) * se3_exp(xi).inverse()) / h;
    const Twist an = se3_left_jacobian(xi) * v;
    ASSERT_LT((fd - an).norm() / an.norm(), 1e-4);
  }
}

TEST(Se3Jacobian, BranchesAgreeAtThreshold) {
  Twist below, above;
  const Vec3 dir = Vec3(0.6, 0.3, -0.2).normalized();
  below << 0.4, -1.2, 2.0, dir * kJacobianSeriesThreshold * (1 - 1e-9);
  above << 0.4, -1.2, 2.0, dir * kJacobianSeriesThreshold * (1 + 1e-9);
  EXPECT_LT((se3_left_jacobian(below) - se3_left_jacobian(above)).norm(), 1e-9);
  EXPECT_LT((se3_left_jacobian_inv(below) - se3_left_jacobian_inv(above)).norm(), 1e-9);
  EXPECT_LT((se3_left_jacobian(above) -
             test::series_left_jacobian(test::algebra_adjoint(above)))
                .norm(),
            1e-9);
}

TEST(HatVee, InverseMaps) {
  CounterRng rng(9);
  const Vec3 v = random_vec3(rng, 2.0);
  const Twist xi = random_twist(rng, 2.0, 2.0);
  EXPECT_EQ(vee(hat(v)), v);
  EXPECT_EQ(vee(hat(xi)), xi);
  EXPECT_EQ(vee(hat(VecX(xi))), VecX(xi));
  EXPECT_EQ(vee(hat(VecX(v))), VecX(v));
}

TEST(HatVee, WrongArityRejected) {
  EXPECT_THROW(hat(VecX(VecX::Zero(4))), Error);
  EXPECT_THROW(vee(MatX(MatX::Zero(5, 5))), Error);
  EXPECT_THROW(vee(MatX(MatX::Zero(3, 4))), Error);
}

TEST(Adjoint, IdentityAndConjugation) {
  EXPECT_EQ(adjoint(Transform()), Mat6::Identity());
  CounterRng rng(10);
  for (int i = 0; i < 1000; ++i) {
    const Transform t = random_transform(rng);
    const Twist xi = random_twist(rng, 2.0, 2.0);
    const Twist lhs = adjoint(t) * xi;
    const Twist rhs = vee(Mat4(t.matrix() * hat(xi) * t.inverse().matrix()));
    ASSERT_LT((lhs - rhs).norm(), 1e-10);
  }
}

TEST(Transform, AssociativityAndInverse) {
  CounterRng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Transform a = random_transform(rng), b = random_transform(rng), c = random_transform(rng);
    ASSERT_LT(test::max_abs_diff((a * b) * c, a * (b * c)), 1e-12);
    ASSERT_LT(test::max_abs_diff(inverse(a) * a, Transform()), 1e-12);
    ASSERT_EQ(compose(a, b).matrix(), (a * b).matrix());
  }
}

TEST(Transform, BottomRowAndValidation) {
  const Mat4 m = se3_exp(Twist::Constant(0.3)).matrix();
  EXPECT_EQ(m.row(3), Eigen::RowVector4d(0, 0, 0, 1));
  Mat4 bad = m;
  bad(3, 0) = 1e-3;
  EXPECT_THROW(Transform::from_matrix(bad), Error);
  EXPECT_NO_THROW(Transform::from_matrix(m));
}

TEST(Rotation, RenormalizationAfterLongChain) {
  CounterRng rng(12);
  Mat3 m = Mat3::Identity();
  for (int i = 0; i < 100000; ++i) m = m * so3_exp(random_vec3(rng, 0.5)).matrix();
  const Rotation r = Rotation::unchecked(m).renormalized();
  EXPECT_LT(r.orthonormality_error(), 1e-12);
  EXPECT_NEAR(r.matrix().determinant(), 1.0, 1e-12);
  EXPECT_THROW(Rotation::from_matrix(2.0 * Mat3::Identity()), Error);
}

TEST(Between, ExactIdentityForEqualOperands) {
  CounterRng rng(13);
  const Transform a = se3_exp(random_twist(rng, 3.0, 2.0));
  const Transform e = between(a, a);
  EXPECT_EQ(e.rotation().matrix(), Mat3::Identity());
  EXPECT_EQ(e.translation(), Vec3::Zero());
  EXPECT_EQ(se3_log(e), Twist::Zero());

  const Transform shifted(a.rotation(), a.translation() + Vec3(1, 2, 3));
  EXPECT_EQ(between(shifted, a).rotation().matrix(), Mat3::Identity());
  EXPECT_LT((between(shifted, a).translation() - Vec3(1, 2, 3)).norm(), 1e-14);

  const Transform b = se3_exp(random_twist(rng, 3.0, 2.0));
  EXPECT_LT((between(a, b).matrix() - (a * b.inverse()).matrix()).norm(), 1e-15);
}
