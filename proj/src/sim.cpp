#include "lgc/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lgc/error.hpp"
#include "lgc/parallel.hpp"
#include "lgc/rng.hpp"

namespace lgc {
namespace {

constexpr std::uint64_t kLandmarkStream = 0;
constexpr std::uint64_t kObserveStreamBase = 1ULL << 32;

bool in_image(const StereoCamera& cam, double u, double v) {
  return u >= 0.0 && u <= cam.width - 1.0 && v >= 0.0 && v <= cam.height - 1.0;
}

// Applies the radial model to one camera's pixel coordinates.
void distort_pixel(const DistortionModel& m, const StereoCamera& cam, double& u, double& v) {
  const Vec2 xd = distort_normalized(m, Vec2((u - cam.cu) / cam.fu, (v - cam.cv) / cam.fv));
  u = cam.fu * xd.x() + cam.cu;
  v = cam.fv * xd.y() + cam.cv;
}

StereoObservation distort_observation(const DistortionModel& m, const StereoCamera& cam,
                                      const StereoObservation& o) {
  StereoObservation out = o;
  double v_r = o.v_l;
  distort_pixel(m, cam, out.u_l, out.v_l);
  distort_pixel(m, cam, out.u_r, v_r);
  return out;
}

}  // namespace

const char* to_string(PathShape s) {
  switch (s) {
    case PathShape::kLine: return "line";
    case PathShape::kArc: return "arc";
    case PathShape::kFigure8: return "figure8";
  }
  return "?";
}

PathShape parse_path_shape(const std::string& name) {
  if (name == "line") return PathShape::kLine;
  if (name == "arc") return PathShape::kArc;
  if (name == "figure8") return PathShape::kFigure8;
  fail(Errc::kInvalidArgument, "unknown trajectory '" + name + "' (line, arc, figure8)");
}

void WorldConfig::validate() const {
  if (!(length_m > 0.0)) fail(Errc::kInvalidArgument, "length_m must be positive");
  if (!(frame_spacing_m > 0.0) || frame_spacing_m > length_m) {
    fail(Errc::kInvalidArgument, "frame_spacing_m must be in (0, length_m]");
  }
  if (shape == PathShape::kArc && !(arc_radius_m > 0.0)) {
    fail(Errc::kInvalidArgument, "arc_radius_m must be positive");
  }
  if (landmark_count < 3) fail(Errc::kInvalidArgument, "landmark_count must be at least 3");
  if (!(depth_min_m > 0.0) || !(depth_max_m > depth_min_m)) {
    fail(Errc::kInvalidArgument, "need 0 < depth_min_m < depth_max_m");
  }
}

Transform path_pose(PathShape shape, double s, double total_length, double arc_radius) {
  // Heading psi turns the forward axis (0,0,1) into (sin psi, 0, cos psi).
  double psi = 0.0;
  Vec3 p = Vec3::Zero();
  switch (shape) {
    case PathShape::kLine:
      p.z() = s;
      break;
    case PathShape::kArc:
      psi = s / arc_radius;
      p << arc_radius * (1.0 - std::cos(psi)), 0.0, arc_radius * std::sin(psi);
      break;
    case PathShape::kFigure8: {
      // Two tangent circles traversed in opposite senses, meeting at the origin.
      const double r = total_length / (4.0 * std::numbers::pi);
      const double lobe = 2.0 * std::numbers::pi * r;
      if (s <= lobe) {
        psi = s / r;
        p << r * (1.0 - std::cos(psi)), 0.0, r * std::sin(psi);
      } else {
        psi = -(s - lobe) / r;
        p << -r * (1.0 - std::cos(psi)), 0.0, -r * std::sin(psi);
      }
      break;
    }
  }
  return Transform(Rotation::about_y(psi), p);
}

World generate_world(const WorldConfig& config, const StereoCamera& cam) {
  config.validate();
  cam.validate();
  if (cam.width <= 0 || cam.height <= 0) {
    fail(Errc::kInvalidArgument, "generate_world: camera needs width and height");
  }
  const auto frames = static_cast<std::size_t>(
      std::floor(config.length_m / config.frame_spacing_m + 1e-9)) + 1;
  std::vector<Transform> poses(frames);
  std::vector<int> ids(frames);
  std::vector<double> arclength(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    const double s = static_cast<double>(k) * config.frame_spacing_m;
    poses[k] = path_pose(config.shape, s, config.length_m, config.arc_radius_m);
    ids[k] = static_cast<int>(k);
    arclength[k] = s;
  }

  // Landmarks are seeded inside the view frustum of a random point on the path.
  CounterRng rng(config.seed, kLandmarkStream);
  const double half_u = 0.9 * (cam.width / 2.0) / cam.fu;
  const double half_v = 0.9 * (cam.height / 2.0) / cam.fv;
  std::vector<Vec3> landmarks(config.landmark_count);
  for (auto& lm : landmarks) {
    const double s = rng.uniform(0.0, config.length_m);
    const double z = rng.uniform(config.depth_min_m, config.depth_max_m);
    const double x = rng.uniform(-half_u, half_u) * z;
    const double y = rng.uniform(-half_v, half_v) * z;
    lm = path_pose(config.shape, s, config.length_m, config.arc_radius_m) * Vec3(x, y, z);
  }
  return {Trajectory(std::move(poses), std::move(ids), std::move(arclength)),
          std::move(landmarks)};
}

void ObserveConfig::validate() const {
  if (!(sigma_px >= 0.0)) fail(Errc::kInvalidArgument, "sigma_px must be non-negative");
  if (!(outlier_rate >= 0.0 && outlier_rate < 1.0)) {
    fail(Errc::kInvalidArgument, "outlier_rate must be in [0, 1)");
  }
  if (max_tracks < 0) fail(Errc::kInvalidArgument, "max_tracks must be non-negative");
  if (!(min_disparity_px > 0.0)) fail(Errc::kInvalidArgument, "min_disparity_px must be positive");
}

Observations observe(const World& world, const StereoCamera& cam, const ObserveConfig& config) {
  config.validate();
  cam.validate();
  const std::size_t n = world.gt.size();
  if (n < 2) fail(Errc::kInvalidArgument, "observe: need at least two frames");
  Observations out;
  out.tracks.resize(n - 1);
  out.labels.resize(n - 1);

  auto visible = [&](const Vec3& p, StereoObservation& o) {
    if (!(p.z() > 0.0)) return false;
    o = stereo_project(cam, p);
    return in_image(cam, o.u_l, o.v_l) && in_image(cam, o.u_r, o.v_l) &&
           o.disparity() >= config.min_disparity_px;
  };

  parallel_for(n - 1, [&](std::size_t k) {
    CounterRng rng(config.seed, kObserveStreamBase + k);
    const Transform to_prev = world.gt.pose(k).inverse();
    const Transform to_next = world.gt.pose(k + 1).inverse();
    FrameCorrespondences tracks;
    for (const auto& lm : world.landmarks) {
      Correspondence c;
      if (visible(to_prev * lm, c.prev) && visible(to_next * lm, c.next)) tracks.push_back(c);
    }
    if (tracks.size() < 3) {
      fail(Errc::kInvalidArgument, "observe: frame " + std::to_string(k) + " has only " +
                                       std::to_string(tracks.size()) +
                                       " co-visible landmarks");
    }
    if (config.max_tracks > 0 && tracks.size() > static_cast<std::size_t>(config.max_tracks)) {
      // Partial Fisher-Yates keeps a uniformly random subset in original order.
      std::vector<std::size_t> idx(tracks.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      for (int i = 0; i < config.max_tracks; ++i) {
        const std::size_t j = i + rng.below(idx.size() - i);
        std::swap(idx[i], idx[j]);
      }
      idx.resize(config.max_tracks);
      std::sort(idx.begin(), idx.end());
      FrameCorrespondences kept;
      for (const auto i : idx) kept.push_back(tracks[i]);
      tracks = std::move(kept);
    }

    FrameLabels labels(tracks.size(), 0);
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      Correspondence& c = tracks[i];
      if (config.miscalibration) {
        c.prev = distort_observation(*config.miscalibration, cam, c.prev);
        c.next = distort_observation(*config.miscalibration, cam, c.next);
      }
      if (config.sigma_px > 0.0) {
        for (StereoObservation* o : {&c.prev, &c.next}) {
          o->u_l += config.sigma_px * rng.normal();
          o->v_l += config.sigma_px * rng.normal();
          o->u_r += config.sigma_px * rng.normal();
        }
      }
      if (config.outlier_rate > 0.0 && rng.uniform() < config.outlier_rate) {
        // Gross mismatch: the next observation is replaced by a random in-image one.
        const double u = rng.uniform(0.0, cam.width - 1.0);
        const double v = rng.uniform(0.0, cam.height - 1.0);
        const double d = rng.uniform(config.min_disparity_px, std::min(100.0, u + 1.0));
        c.next = {u, v, u - d};
        labels[i] = 1;
      }
    }
    out.tracks[k] = std::move(tracks);
    out.labels[k] = std::move(labels);
  });
  return out;
}

Trajectory inject_bias(const Trajectory& trajectory, const Twist& bias) {
  if (!bias.allFinite()) fail(Errc::kInvalidArgument, "inject_bias: non-finite bias");
  if (trajectory.empty()) return trajectory;
  const Transform b = se3_exp(bias);
  std::vector<Transform> poses{trajectory.pose(0)};
  for (std::size_t k = 0; k + 1 < trajectory.size(); ++k) {
    poses.push_back((poses.back() * (b * trajectory.relative(k, k + 1))).renormalized());
  }
  return Trajectory(std::move(poses), trajectory.frames());
}

StereoCamera default_sim_camera() {
  StereoCamera cam;
  cam.fu = 718.856;
  cam.fv = 718.856;
  cam.cu = 607.1928;
  cam.cv = 185.2157;
  cam.baseline = 0.537;
  cam.width = 1241;
  cam.height = 376;
  return cam;
}

SimulationConfig SimulationConfig::from_config(const KeyValueConfig& cfg) {
  SimulationConfig s;
  auto& w = s.world;
  w.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
  w.shape = parse_path_shape(cfg.get_string("trajectory", "line"));
  w.length_m = cfg.get_double("length_m", w.length_m);
  w.frame_spacing_m = cfg.get_double("frame_spacing_m", w.frame_spacing_m);
  w.arc_radius_m = cfg.get_double("arc_radius_m", w.arc_radius_m);
  w.landmark_count = static_cast<int>(cfg.get_int("landmark_count", w.landmark_count));
  w.depth_min_m = cfg.get_double("depth_min_m", w.depth_min_m);
  w.depth_max_m = cfg.get_double("depth_max_m", w.depth_max_m);

  auto& o = s.observe;
  o.seed = w.seed;
  o.sigma_px = cfg.get_double("sigma_px", 0.0);
  o.outlier_rate = cfg.get_double("outlier_rate", 0.0);
  o.max_tracks = static_cast<int>(cfg.get_int("max_tracks", 0));
  o.min_disparity_px = cfg.get_double("min_disparity_px", o.min_disparity_px);
  if (cfg.has("kappa")) {
    const auto k = cfg.get_doubles("kappa");
    if (k.size() != 3) fail(Errc::kInvalidArgument, "kappa needs 3 values");
    o.miscalibration = DistortionModel(k[0], k[1], k[2]);
  }

  if (cfg.has("fu")) {
    s.camera = StereoCamera::from_config(cfg);
  } else {
    s.camera = default_sim_camera();
  }
  cfg.require_all_used();
  w.validate();
  o.validate();
  return s;
}

}  // namespace lgc
