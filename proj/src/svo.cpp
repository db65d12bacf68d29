#include "lgc/svo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "lgc/error.hpp"
#include "lgc/parallel.hpp"
#include "lgc/rng.hpp"
#include "lgc/textio.hpp"

namespace lgc {

void StereoCamera::validate() const {
  if (!(fu > 0.0) || !(fv > 0.0) || !(baseline > 0.0)) {
    fail(Errc::kInvalidArgument, "StereoCamera: fu, fv and baseline must be positive");
  }
  Eigen::LLT<Mat3> llt(obs_cov);
  if (llt.info() != Eigen::Success || !obs_cov.isApprox(obs_cov.transpose())) {
    fail(Errc::kInvalidArgument, "StereoCamera: observation covariance not positive definite");
  }
}

StereoCamera StereoCamera::from_config(const KeyValueConfig& cfg) {
  StereoCamera cam;
  cam.fu = cfg.get_double("fu");
  cam.fv = cfg.get_double("fv");
  cam.cu = cfg.get_double("cu");
  cam.cv = cfg.get_double("cv");
  cam.baseline = cfg.get_double("baseline");
  cam.width = static_cast<int>(cfg.get_int("width", 0));
  cam.height = static_cast<int>(cfg.get_int("height", 0));
  const double su = cfg.get_double("sigma_u", 1.0);
  const double sv = cfg.get_double("sigma_v", 1.0);
  const double sr = cfg.get_double("sigma_ur", 1.0);
  cam.obs_cov = Vec3(su * su, sv * sv, sr * sr).asDiagonal();
  cam.validate();
  return cam;
}

KeyValueConfig StereoCamera::to_config() const {
  const auto fmt = text::format_double;
  KeyValueConfig cfg;
  cfg.set("fu", fmt(fu));
  cfg.set("fv", fmt(fv));
  cfg.set("cu", fmt(cu));
  cfg.set("cv", fmt(cv));
  cfg.set("baseline", fmt(baseline));
  cfg.set("width", std::to_string(width));
  cfg.set("height", std::to_string(height));
  cfg.set("sigma_u", fmt(std::sqrt(obs_cov(0, 0))));
  cfg.set("sigma_v", fmt(std::sqrt(obs_cov(1, 1))));
  cfg.set("sigma_ur", fmt(std::sqrt(obs_cov(2, 2))));
  return cfg;
}

StereoObservation stereo_project(const StereoCamera& cam, const Vec3& p) {
  if (!(p.z() > 0.0)) fail(Errc::kDomain, "stereo_project: point has non-positive depth");
  return {cam.fu * p.x() / p.z() + cam.cu, cam.fv * p.y() / p.z() + cam.cv,
          cam.fu * (p.x() - cam.baseline) / p.z() + cam.cu};
}

Vec3 stereo_triangulate(const StereoCamera& cam, const StereoObservation& obs,
                        double min_disparity) {
  const double d = obs.disparity();
  if (!(d > min_disparity)) {
    fail(Errc::kDomain, "stereo_triangulate: disparity " + std::to_string(d) +
                            " at or below threshold");
  }
  const double z = cam.fu * cam.baseline / d;
  return {(obs.u_l - cam.cu) * z / cam.fu, (obs.v_l - cam.cv) * z / cam.fv, z};
}

Vec3 reprojection_error(const StereoCamera& cam, const Transform& t,
                        const StereoObservation& prev, const StereoObservation& next) {
  const Vec3 p = stereo_triangulate(cam, prev);
  return next.vec() - stereo_project(cam, t * p).vec();
}

std::optional<Transform> try_align(std::span<const Vec3> src, std::span<const Vec3> dst) {
  if (src.size() != dst.size() || src.size() < 3) {
    fail(Errc::kInvalidArgument, "align_3pt: need matching sets of at least 3 points");
  }
  const double n = static_cast<double>(src.size());
  Vec3 cs = Vec3::Zero();
  Vec3 cd = Vec3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    cs += src[i];
    cd += dst[i];
  }
  cs /= n;
  cd /= n;
  Eigen::Matrix3Xd centered(3, src.size());
  Mat3 cross = Mat3::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    centered.col(i) = src[i] - cs;
    cross += (dst[i] - cd) * centered.col(i).transpose();
  }
  // Rank-2 spread is the most a 3-point set can have once centered.
  Eigen::JacobiSVD<Eigen::Matrix3Xd> spread(centered);
  if (!(spread.singularValues()(1) > 1e-9)) return std::nullopt;

  Eigen::JacobiSVD<Mat3> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const Rotation r = Rotation::nearest(svd.matrixU() * d * svd.matrixV().transpose());
  return Transform(r, cd - r * cs);
}

Transform align_3pt(std::span<const Vec3> src, std::span<const Vec3> dst) {
  auto t = try_align(src, dst);
  if (!t) fail(Errc::kDegenerate, "align_3pt: source points are collinear");
  return *t;
}

namespace {

kernels::RigidMotion to_motion(const Transform& t) {
  kernels::RigidMotion m{};
  const Mat3& r = t.rotation().matrix();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m.r[3 * i + j] = r(i, j);
    m.t[i] = t.translation()(i);
  }
  return m;
}

// Structure-of-arrays view of the triangulable tracks used for scoring.
struct ScoringSet {
  std::vector<std::size_t> index;  // into the track list
  std::vector<double> px, py, pz, ul, vl, ur;
};

}  // namespace

RansacResult ransac(const StereoCamera& cam, std::span<const Correspondence> tracks,
                    const RansacOptions& options) {
  if (tracks.size() < 3) {
    fail(Errc::kInvalidArgument, "ransac: need at least 3 correspondences, got " +
                                     std::to_string(tracks.size()));
  }
  ScoringSet set;
  std::vector<Vec3> prev_pts;
  std::vector<Vec3> next_pts;
  std::vector<std::size_t> sampleable;  // positions in `set`
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const auto& tr = tracks[i];
    if (!(tr.prev.disparity() > options.min_disparity)) continue;
    const Vec3 p = stereo_triangulate(cam, tr.prev, options.min_disparity);
    set.index.push_back(i);
    set.px.push_back(p.x());
    set.py.push_back(p.y());
    set.pz.push_back(p.z());
    set.ul.push_back(tr.next.u_l);
    set.vl.push_back(tr.next.v_l);
    set.ur.push_back(tr.next.u_r);
    prev_pts.push_back(p);
    if (tr.next.disparity() > options.min_disparity) {
      next_pts.push_back(stereo_triangulate(cam, tr.next, options.min_disparity));
      sampleable.push_back(set.index.size() - 1);
    } else {
      next_pts.push_back(Vec3::Zero());
    }
  }
  if (sampleable.size() < 3) {
    fail(Errc::kDegenerate, "ransac: fewer than 3 triangulable correspondences");
  }

  const auto& kern = kernels::active_kernels();
  const auto intr = cam.intrinsics();
  const double thresh_sq = options.inlier_threshold_px * options.inlier_threshold_px;
  const std::size_t n = set.index.size();
  std::vector<double> sq(n);
  CounterRng rng(options.seed, options.stream);

  RansacResult best;
  best.num_inliers = -1;
  std::vector<double> best_sq;
  for (int it = 0; it < options.iterations; ++it) {
    std::size_t pick[3];
    pick[0] = rng.below(sampleable.size());
    do { pick[1] = rng.below(sampleable.size()); } while (pick[1] == pick[0]);
    do { pick[2] = rng.below(sampleable.size()); } while (pick[2] == pick[0] || pick[2] == pick[1]);
    const Vec3 src[3] = {prev_pts[sampleable[pick[0]]], prev_pts[sampleable[pick[1]]],
                         prev_pts[sampleable[pick[2]]]};
    const Vec3 dst[3] = {next_pts[sampleable[pick[0]]], next_pts[sampleable[pick[1]]],
                         next_pts[sampleable[pick[2]]]};
    auto hyp = try_align(src, dst);
    if (!hyp) continue;
    if (options.hypothesis_refinement_iterations > 0) {
      const Correspondence sample[3] = {tracks[set.index[sampleable[pick[0]]]],
                                        tracks[set.index[sampleable[pick[1]]]],
                                        tracks[set.index[sampleable[pick[2]]]]};
      const std::uint8_t all[3] = {1, 1, 1};
      GaussNewtonOptions polish;
      polish.max_iterations = options.hypothesis_refinement_iterations;
      try {
        hyp = gauss_newton_vo(cam, sample, all, *hyp, polish).motion;
      } catch (const Error&) {
        // Keep the closed-form alignment when the minimal problem is ill-posed.
      }
    }

    kern.stereo_sq_residuals(intr, to_motion(*hyp), set.px.data(), set.py.data(), set.pz.data(),
                             set.ul.data(), set.vl.data(), set.ur.data(), sq.data(), n);
    int count = 0;
    double err = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (sq[j] < thresh_sq) {
        ++count;
        err += std::sqrt(sq[j]);
      }
    }
    best.hypothesis_inlier_counts.push_back(count);
    if (count > best.num_inliers || (count == best.num_inliers && err < best.inlier_error)) {
      best.num_inliers = count;
      best.inlier_error = err;
      best.motion = *hyp;
      best_sq = sq;
    }
  }
  if (best.num_inliers < 3) {
    fail(Errc::kDegenerate, "ransac: no hypothesis with at least 3 inliers");
  }
  best.inliers.assign(tracks.size(), 0);
  for (std::size_t j = 0; j < n; ++j) {
    if (best_sq[j] < thresh_sq) best.inliers[set.index[j]] = 1;
  }
  return best;
}

namespace {

struct LinearizedPoint {
  Vec3 residual;
  Eigen::Matrix<double, 3, 6> jacobian;
};

// e = y - pi(q), q = T p; de/d(delta) for T <- exp(delta) T.
std::optional<LinearizedPoint> linearize(const StereoCamera& cam, const Transform& t,
                                         const Vec3& p, const StereoObservation& next) {
  const Vec3 q = t * p;
  if (!(q.z() > 0.0)) return std::nullopt;
  const double iz = 1.0 / q.z();
  const double iz2 = iz * iz;
  Eigen::Matrix3d dpi;
  dpi << cam.fu * iz, 0.0, -cam.fu * q.x() * iz2,
         0.0, cam.fv * iz, -cam.fv * q.y() * iz2,
         cam.fu * iz, 0.0, -cam.fu * (q.x() - cam.baseline) * iz2;
  Eigen::Matrix<double, 3, 6> dq;
  dq << Mat3::Identity(), -hat(q);
  LinearizedPoint lp;
  lp.residual = next.vec() - stereo_project(cam, q).vec();
  lp.jacobian = -dpi * dq;
  return lp;
}

}  // namespace

double vo_cost(const StereoCamera& cam, std::span<const Correspondence> tracks,
               std::span<const std::uint8_t> inliers, const Transform& t) {
  const Mat3 w = cam.obs_cov.inverse();
  double cost = 0.0;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (!inliers[i]) continue;
    const Vec3 q = t * stereo_triangulate(cam, tracks[i].prev);
    if (!(q.z() > 0.0)) return std::numeric_limits<double>::infinity();
    const Vec3 e = tracks[i].next.vec() - stereo_project(cam, q).vec();
    cost += e.dot(w * e);
  }
  return cost;
}

VoEstimate gauss_newton_vo(const StereoCamera& cam, std::span<const Correspondence> tracks,
                           std::span<const std::uint8_t> inliers, const Transform& t_init,
                           const GaussNewtonOptions& options) {
  if (inliers.size() != tracks.size()) {
    fail(Errc::kInvalidArgument, "gauss_newton_vo: inlier mask size mismatch");
  }
  std::vector<Vec3> points;
  std::vector<const StereoObservation*> obs;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (!inliers[i]) continue;
    points.push_back(stereo_triangulate(cam, tracks[i].prev));
    obs.push_back(&tracks[i].next);
  }
  if (points.size() < 3) {
    fail(Errc::kInvalidArgument, "gauss_newton_vo: need at least 3 inliers");
  }
  const Mat3 w = cam.obs_cov.inverse();

  auto build = [&](const Transform& t, Mat6& h, Vec6& b) {
    h.setZero();
    b.setZero();
    double cost = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto lp = linearize(cam, t, points[i], *obs[i]);
      if (!lp) continue;
      const Eigen::Matrix<double, 6, 3> jtw = lp->jacobian.transpose() * w;
      h.noalias() += jtw * lp->jacobian;
      b.noalias() += jtw * lp->residual;
      cost += lp->residual.dot(w * lp->residual);
    }
    return cost;
  };
  auto cost_at = [&](const Transform& t) {
    double cost = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const Vec3 q = t * points[i];
      if (!(q.z() > 0.0)) return std::numeric_limits<double>::infinity();
      const Vec3 e = obs[i]->vec() - stereo_project(cam, q).vec();
      cost += e.dot(w * e);
    }
    return cost;
  };

  VoEstimate est;
  est.motion = t_init;
  Mat6 h;
  Vec6 b;
  double cost = build(est.motion, h, b);
  est.cost_history.push_back(cost);
  bool converged = false;
  for (int it = 0; it < options.max_iterations; ++it) {
    Eigen::SelfAdjointEigenSolver<Mat6> eig(h, Eigen::EigenvaluesOnly);
    if (!(eig.eigenvalues()(0) > 1e-12 * eig.eigenvalues()(5))) {
      fail(Errc::kRankDeficient, "gauss_newton_vo: normal equations are rank deficient");
    }
    Vec6 step = h.ldlt().solve(-b);
    ++est.iterations;
    if (step.norm() < options.update_tol) {
      converged = true;
      break;
    }
    Transform trial = (se3_exp(step) * est.motion).renormalized();
    double trial_cost = cost_at(trial);
    for (int halving = 0; halving < options.max_halvings && !(trial_cost <= cost); ++halving) {
      step *= 0.5;
      trial = (se3_exp(step) * est.motion).renormalized();
      trial_cost = cost_at(trial);
    }
    if (!(trial_cost <= cost)) {
      converged = true;  // no descent direction left at this precision
      break;
    }
    const double decrease = cost - trial_cost;
    est.motion = trial;
    cost = build(est.motion, h, b);
    est.cost_history.push_back(cost);
    if (decrease < options.cost_decrease_tol * std::max(1.0, cost)) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    fail(Errc::kNotConverged, "gauss_newton_vo: no convergence in " +
                                  std::to_string(options.max_iterations) +
                                  " iterations (initial cost " +
                                  std::to_string(est.cost_history.front()) + ", final cost " +
                                  std::to_string(cost) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Mat6> eig(h, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues()(0) > 1e-12 * eig.eigenvalues()(5))) {
    fail(Errc::kRankDeficient, "gauss_newton_vo: normal equations are rank deficient");
  }
  est.covariance = h.ldlt().solve(Mat6::Identity());
  est.covariance = 0.5 * (est.covariance + est.covariance.transpose());
  return est;
}

std::vector<std::uint8_t> classify_inliers(const StereoCamera& cam,
                                           std::span<const Correspondence> tracks,
                                           const Transform& t, double threshold_px,
                                           double min_disparity) {
  std::vector<std::uint8_t> out(tracks.size(), 0);
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (!(tracks[i].prev.disparity() > min_disparity)) continue;
    out[i] = reprojection_error(cam, t, tracks[i].prev, tracks[i].next).norm() < threshold_px;
  }
  return out;
}

PipelineResult run_pipeline(const StereoCamera& cam, std::span<const FrameCorrespondences> frames,
                            const PipelineOptions& options) {
  cam.validate();
  std::vector<VoEstimate> estimates(frames.size());
  parallel_for(frames.size(), [&](std::size_t k) {
    try {
      if (frames[k].size() < 3) {
        fail(Errc::kInvalidArgument, "only " + std::to_string(frames[k].size()) +
                                         " correspondences");
      }
      RansacOptions ro = options.ransac;
      ro.stream = k;
      const RansacResult rr = ransac(cam, frames[k], ro);
      std::vector<std::uint8_t> inliers = rr.inliers;
      VoEstimate est = gauss_newton_vo(cam, frames[k], inliers, rr.motion, options.gauss_newton);
      for (int r = 0; r < options.inlier_refinements; ++r) {
        auto refreshed = classify_inliers(cam, frames[k], est.motion, ro.inlier_threshold_px,
                                          ro.min_disparity);
        if (refreshed == inliers) break;
        if (std::count(refreshed.begin(), refreshed.end(), 1) < 3) break;
        inliers = std::move(refreshed);
        est = gauss_newton_vo(cam, frames[k], inliers, est.motion, options.gauss_newton);
      }
      estimates[k] = std::move(est);
    } catch (const Error& e) {
      fail(e.code(), "frame " + std::to_string(k) + ": " + e.what());
    }
  });

  std::vector<Transform> poses;
  poses.reserve(frames.size() + 1);
  poses.emplace_back();
  PipelineResult out;
  out.edge_covariances.reserve(frames.size());
  for (const auto& est : estimates) {
    const Transform edge = est.motion.inverse();  // T_{k,k+1}
    poses.push_back((poses.back() * edge).renormalized());
    const Mat6 ad = adjoint(edge);
    out.edge_covariances.push_back(ad * est.covariance * ad.transpose());
  }
  out.trajectory = Trajectory(std::move(poses));
  return out;
}

}  // namespace lgc
