#pragma once

// Deterministic synthetic worlds: closed-form ground-path trajectories,
// landmarks, stereo keypoint tracks with noise, labeled outliers and optional
// lens mis-calibration, plus constant per-frame odometry bias.
//
// The camera looks along +z with y down; the vehicle drives in the x-z plane
// and turns about y.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lgc/config.hpp"
#include "lgc/distortion.hpp"
#include "lgc/io.hpp"
#include "lgc/svo.hpp"
#include "lgc/trajectory.hpp"

namespace lgc {

enum class PathShape { kLine, kArc, kFigure8 };

const char* to_string(PathShape s);
PathShape parse_path_shape(const std::string& name);

struct WorldConfig {
  std::uint64_t seed = 0;
  PathShape shape = PathShape::kLine;
  double length_m = 100.0;
  double frame_spacing_m = 1.0;
  double arc_radius_m = 100.0;  // kArc only; figure8 uses length / (4 pi)
  int landmark_count = 2000;
  double depth_min_m = 5.0;
  double depth_max_m = 40.0;

  void validate() const;
};

struct World {
  Trajectory gt;
  std::vector<Vec3> landmarks;  // frame-0 coordinates
};

/// Pose at path length s (frame s into frame 0).
Transform path_pose(PathShape shape, double s, double total_length, double arc_radius);

World generate_world(const WorldConfig& config, const StereoCamera& cam);

struct ObserveConfig {
  std::uint64_t seed = 0;
  double sigma_px = 0.0;
  double outlier_rate = 0.0;
  int max_tracks = 0;  // per frame pair; 0 keeps all
  double min_disparity_px = 1.0;
  std::optional<DistortionModel> miscalibration;

  void validate() const;
};

struct Observations {
  std::vector<FrameCorrespondences> tracks;  // frame k: tracks between k and k+1
  std::vector<FrameLabels> labels;           // 1 = outlier
};

/// Projects landmarks co-visible in frames k and k+1. Throws naming the frame
/// when fewer than 3 are co-visible.
Observations observe(const World& world, const StereoCamera& cam, const ObserveConfig& config);

/// Each odometry edge T_{k,k+1} of `trajectory` becomes exp(bias) T_{k,k+1};
/// the result is re-chained from the first pose.
Trajectory inject_bias(const Trajectory& trajectory, const Twist& bias);

/// Complete simulation setup read from one key = value file.
struct SimulationConfig {
  WorldConfig world;
  ObserveConfig observe;
  StereoCamera camera;

  /// Keys: seed trajectory length_m frame_spacing_m arc_radius_m
  /// landmark_count depth_min_m depth_max_m sigma_px outlier_rate max_tracks
  /// kappa (3 values) and the camera keys. Unknown keys are rejected.
  static SimulationConfig from_config(const KeyValueConfig& cfg);
};

/// Default camera resembling a forward-facing automotive stereo rig.
StereoCamera default_sim_camera();

}  // namespace lgc
