#include <Eigen/LU>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "lgc/error.hpp"
#include "lgc/loss.hpp"
#include "lgc/posegraph.hpp"
#include "test_util.hpp"

using namespace lgc;
using lgc::test::max_abs_diff;
using lgc::test::random_transform;
using lgc::test::random_twist;

namespace {

// Consistent window: edges T_i T_{i+1}^-1 between random poses.
PoseGraphWindow consistent_window(CounterRng& rng, int dp) {
  PoseGraphWindow w;
  w.poses.push_back(random_transform(rng, 3.0, 1.0));
  for (int i = 0; i < dp; ++i) {
    w.poses.push_back(se3_exp(random_twist(rng, 1.0, 0.2)) * w.poses.back());
  }
  for (int i = 0; i < dp; ++i) {
    w.odometry.push_back(w.poses[i] * w.poses[i + 1].inverse());
    w.odometry_cov.push_back(Mat6::Identity());
  }
  w.correction = w.poses.front() * w.poses.back().inverse();
  return w;
}

PoseGraphWindow noisy_window(CounterRng& rng, int dp) {
  PoseGraphWindow w = consistent_window(rng, dp);
  for (auto& e : w.odometry) e = se3_exp(random_twist(rng, 0.05, 0.02)) * e;
  w.correction = se3_exp(random_twist(rng, 0.1, 0.05)) * *w.correction;
  w.poses = chain_odometry(w.poses.front(), w.odometry);
  for (auto& c : w.odometry_cov) c = test::random_spd6(rng);
  w.correction_cov = test::random_spd6(rng);
  return w;
}

}  // namespace

TEST(PoseError, Examples) {
  CounterRng rng(1);
  const Transform t1 = random_transform(rng), t2 = random_transform(rng);
  EXPECT_LT(pose_error(t1 * t2.inverse(), t1, t2).norm(), 1e-12);
  const Twist eps = random_twist(rng, 0.3, 0.3);
  EXPECT_LT((pose_error(se3_exp(eps) * t1 * t2.inverse(), t1, t2) - eps).norm(), 1e-12);
  const Transform m = random_transform(rng);
  const Mat4 oracle = m.matrix() * t2.matrix() * t1.matrix().inverse();
  EXPECT_LT((pose_error(m, t1, t2) - se3_log(Transform::from_matrix(oracle))).norm(), 1e-10);
}

TEST(PoseError, JacobiansMatchFiniteDifferences) {
  CounterRng rng(2);
  const double h = 1e-6;
  for (int trial = 0; trial < 100; ++trial) {
    const Transform t1 = random_transform(rng, 3.0, 1.0);
    const Transform t2 = se3_exp(random_twist(rng, 1.0, 0.3)) * t1;
    const Transform m = se3_exp(random_twist(rng, 0.5, 0.5)) * t1 * t2.inverse();
    const auto jac = pose_error_jacobians(m, t1, t2);
    Mat6 fd1, fd2;
    for (int i = 0; i < 6; ++i) {
      Twist d = Twist::Zero();
      d(i) = h;
      fd1.col(i) = (pose_error(m, se3_exp(d) * t1, t2) - pose_error(m, se3_exp(-d) * t1, t2)) /
                   (2 * h);
      fd2.col(i) = (pose_error(m, t1, se3_exp(d) * t2) - pose_error(m, t1, se3_exp(-d) * t2)) /
                   (2 * h);
    }
    ASSERT_LT((jac.wrt_first - fd1).norm() / fd1.norm(), 1e-6);
    ASSERT_LT((jac.wrt_second - fd2).norm() / fd2.norm(), 1e-6);
  }
}

TEST(TotalCost, Examples) {
  CounterRng rng(3);
  PoseGraphWindow w = consistent_window(rng, 4);
  EXPECT_LT(total_cost(w), 1e-20);

  const Twist eps = random_twist(rng, 0.1, 0.1);
  w.odometry[2] = se3_exp(eps) * w.odometry[2];
  EXPECT_NEAR(total_cost(w), eps.squaredNorm(), 1e-12);

  PoseGraphWindow n = noisy_window(rng, 5);
  n.poses[3] = se3_exp(random_twist(rng, 0.2, 0.1)) * n.poses[3];
  double oracle = 0;
  for (int i = 0; i < 5; ++i) {
    const Twist e = pose_error(n.odometry[i], n.poses[i], n.poses[i + 1]);
    oracle += e.dot(n.odometry_cov[i].inverse() * e);
  }
  const Twist ec = pose_error(*n.correction, n.poses[0], n.poses[5]);
  oracle += ec.dot(n.correction_cov.inverse() * ec);
  EXPECT_NEAR(total_cost(n), oracle, 1e-10 * oracle);

  n.odometry_cov[1].setZero();
  EXPECT_THROW(relax(n), Error);
}

TEST(Relax, NoiselessWindowIsFixedPoint) {
  CounterRng rng(4);
  const PoseGraphWindow w = consistent_window(rng, 4);
  const RelaxResult r = relax(w);
  EXPECT_LE(r.iterations, 2);
  EXPECT_LT(r.final_cost, 1e-12);
  for (std::size_t i = 0; i < w.poses.size(); ++i) {
    EXPECT_LT(max_abs_diff(r.poses[i], w.poses[i]), 1e-9);
  }
}

TEST(Relax, ReachesZeroCostFromPerturbedStart) {
  CounterRng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    PoseGraphWindow w = consistent_window(rng, 3 + trial % 3);
    for (std::size_t i = 1; i < w.poses.size(); ++i) {
      w.poses[i] = se3_exp(random_twist(rng, 0.2, 0.1)) * w.poses[i];
    }
    const RelaxResult r = relax(w);
    ASSERT_LT(r.final_cost, 1e-12);
    ASSERT_LE(r.iterations, 5);
  }
}

TEST(Relax, CostIsMonotoneAndGaugeIsFixed) {
  CounterRng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    PoseGraphWindow w = noisy_window(rng, 4);
    for (std::size_t i = 1; i < w.poses.size(); ++i) {
      w.poses[i] = se3_exp(random_twist(rng, 0.5, 0.3)) * w.poses[i];
    }
    const RelaxResult r = relax(w);
    for (std::size_t k = 1; k < r.cost_history.size(); ++k) {
      ASSERT_LE(r.cost_history[k], r.cost_history[k - 1]);
    }
    ASSERT_LE(r.final_cost, r.initial_cost);
    ASSERT_EQ(r.poses.front().matrix(), w.poses.front().matrix());
  }
}

TEST(Relax, DominantCorrectionFixesEndpoint) {
  CounterRng rng(7);
  PoseGraphWindow w = consistent_window(rng, 4);
  const Transform truth_end = w.poses.back();
  // Biased odometry; the correction edge carries the truth.
  const Twist bias = (Twist() << 0.05, 0.0, 0.02, 0.0, 0.01, 0.0).finished();
  for (auto& e : w.odometry) e = se3_exp(bias) * e;
  w.poses = chain_odometry(w.poses.front(), w.odometry);
  w.correction_cov = 1e-12 * Mat6::Identity();
  const RelaxResult r = relax(w);
  EXPECT_LT(max_abs_diff(r.poses.back(), truth_end), 1e-6);
  EXPECT_LT(max_abs_diff(r.poses.back(), w.correction->inverse() * r.poses.front()), 1e-6);
}

TEST(Relax, WithoutCorrectionEdgeKeepsChainedOdometry) {
  CounterRng rng(8);
  PoseGraphWindow w = noisy_window(rng, 4);
  w.correction.reset();
  const RelaxResult r = relax(w);
  EXPECT_LT(r.final_cost, 1e-12);
  for (std::size_t i = 0; i < w.poses.size(); ++i) {
    EXPECT_LT(max_abs_diff(r.poses[i], w.poses[i]), 1e-9);
  }
}

TEST(Relax, RejectsMalformedWindows) {
  CounterRng rng(9);
  PoseGraphWindow w = consistent_window(rng, 3);
  w.poses.pop_back();
  EXPECT_THROW(relax(w), Error);
  PoseGraphWindow empty;
  EXPECT_THROW(relax(empty), Error);
}

TEST(Relax, ReportsNonConvergenceWithCosts) {
  CounterRng rng(10);
  PoseGraphWindow w = noisy_window(rng, 4);
  RelaxOptions opts;
  opts.max_iterations = 1;
  opts.cost_decrease_tol = 0.0;
  opts.update_tol = 0.0;
  try {
    relax(w, opts);
    FAIL() << "expected non-convergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kNotConverged);
    EXPECT_NE(std::string(e.what()).find("initial cost"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("final cost"), std::string::npos);
  }
}

TEST(ChainOdometry, InvertsEdges) {
  CounterRng rng(11);
  const PoseGraphWindow w = consistent_window(rng, 6);
  const auto chained = chain_odometry(w.poses.front(), w.odometry);
  for (std::size_t i = 0; i < w.poses.size(); ++i) {
    EXPECT_LT(max_abs_diff(chained[i], w.poses[i]), 1e-12);
  }
}

namespace {

Trajectory random_trajectory(CounterRng& rng, int n) {
  std::vector<Transform> poses{Transform()};
  for (int i = 1; i < n; ++i) {
    poses.push_back(poses.back() * se3_exp(random_twist(rng, 1.0, 0.05)));
  }
  return Trajectory(poses);
}

}  // namespace

TEST(Fuse, ZeroCorrectionsReturnInput) {
  CounterRng rng(12);
  const Trajectory odo = random_trajectory(rng, 30);
  const Trajectory out = fuse_trajectory(odo, {});
  ASSERT_EQ(out.size(), odo.size());
  for (std::size_t i = 0; i < odo.size(); ++i) {
    EXPECT_EQ(out.pose(i).matrix(), odo.pose(i).matrix());
  }
}

TEST(Fuse, IdentityCorrectionsKeepTrajectory) {
  CounterRng rng(13);
  const Trajectory odo = random_trajectory(rng, 21);
  std::vector<CorrectionRecord> recs;
  for (int s = 0; s + 4 <= 20; s += 4) recs.push_back({s, s + 4, Twist::Zero(), std::nullopt});
  const Trajectory out = fuse_trajectory(odo, recs);
  for (std::size_t i = 0; i < odo.size(); ++i) {
    EXPECT_LT(max_abs_diff(out.pose(i), odo.pose(i)), 1e-9);
  }
}

TEST(Fuse, RemovesConstantBiasAndTailFollowsOdometry) {
  CounterRng rng(14);
  const Trajectory gt = random_trajectory(rng, 23);
  const Twist bias = (Twist() << 0.02, -0.01, 0.03, 0.0, 0.005, 0.0).finished();
  std::vector<Transform> est{Transform()};
  for (std::size_t i = 0; i + 1 < gt.size(); ++i) {
    est.push_back(est.back() * se3_exp(bias) * gt.relative(i, i + 1));
  }
  const Trajectory odo(est);
  std::vector<CorrectionRecord> recs;
  for (int s = 0; s + 4 <= 22; s += 4) {
    CorrectionRecord r{s, s + 4, Twist::Zero(), 1e-12 * Mat6::Identity()};
    r.xi = se3_log(target_correction(gt.relative(s, s + 4), odo.relative(s, s + 4)));
    recs.push_back(r);
  }
  const Trajectory out = fuse_trajectory(odo, recs);
  ASSERT_EQ(out.size(), gt.size());
  for (int k = 0; k <= 20; k += 4) EXPECT_LT(max_abs_diff(out.pose(k), gt.pose(k)), 1e-5);
  // Frames 21 and 22 are outside every window and follow the odometry.
  for (std::size_t i = 20; i + 1 < out.size(); ++i) {
    EXPECT_LT(max_abs_diff(out.relative(i, i + 1), odo.relative(i, i + 1)), 1e-12);
  }
}

TEST(Fuse, RejectsOverlapsAndBadRecords) {
  CounterRng rng(15);
  const Trajectory odo = random_trajectory(rng, 20);
  const std::vector<CorrectionRecord> overlap{{0, 4, Twist::Zero(), std::nullopt},
                                              {3, 7, Twist::Zero(), std::nullopt}};
  EXPECT_THROW(fuse_trajectory(odo, overlap), Error);
  const std::vector<CorrectionRecord> order{{8, 12, Twist::Zero(), std::nullopt},
                                            {0, 4, Twist::Zero(), std::nullopt}};
  EXPECT_THROW(fuse_trajectory(odo, order), Error);
  const std::vector<CorrectionRecord> backwards{{4, 4, Twist::Zero(), std::nullopt}};
  EXPECT_THROW(fuse_trajectory(odo, backwards), Error);
  const std::vector<CorrectionRecord> outside{{16, 24, Twist::Zero(), std::nullopt}};
  EXPECT_THROW(fuse_trajectory(odo, outside), Error);
}
