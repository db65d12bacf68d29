#pragma once

// Dataset file formats and correction-sample assembly.
//
// Pose file: one pose per line, 12 reals, row-major 3x4 [R | t] mapping the
// pose frame into frame 0.
// Tracks file: `frame k` headers, each followed by rows of
// `u_l v_l u_r u_l' v_l' u_r'` for tracks between frames k and k+1.
// Labels file: same headers, one 0/1 outlier flag per track row.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lgc/loss.hpp"
#include "lgc/svo.hpp"
#include "lgc/trajectory.hpp"

namespace lgc {

/// Gate on ||R^T R - I||_F before projecting onto SO(3).
inline constexpr double kPoseFileOrthoTolerance = 1e-6;

Trajectory parse_poses(const std::string& text, const std::string& origin = "<string>");
Trajectory read_pose_file(const std::filesystem::path& path);
std::string format_poses(const Trajectory& trajectory);
void write_pose_file(const std::filesystem::path& path, const Trajectory& trajectory);

/// For each delta_p and each start i in [0, M - delta_p): relative transforms
/// over [i, i + delta_p] and their target correction.
std::vector<CorrectionSample> build_correction_samples(const Trajectory& gt,
                                                       const Trajectory& est,
                                                       std::span<const int> delta_p_set);

std::vector<FrameCorrespondences> parse_tracks(const std::string& text,
                                               const std::string& origin = "<string>");
std::vector<FrameCorrespondences> read_tracks(const std::filesystem::path& path);
std::string format_tracks(std::span<const FrameCorrespondences> frames);

using FrameLabels = std::vector<std::uint8_t>;  // 1 = outlier

std::vector<FrameLabels> parse_labels(const std::string& text,
                                      const std::string& origin = "<string>");
std::vector<FrameLabels> read_labels(const std::filesystem::path& path);
std::string format_labels(std::span<const FrameLabels> labels);

/// CSV: `edge` then the 21 upper-triangular entries of each 6x6 covariance.
std::string format_edge_covariances(std::span<const Mat6> covs);
std::vector<Mat6> parse_edge_covariances(const std::string& text,
                                         const std::string& origin = "<string>");
std::vector<Mat6> read_edge_covariances(const std::filesystem::path& path);

}  // namespace lgc
