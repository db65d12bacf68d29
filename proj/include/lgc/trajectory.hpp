#pragma once

#include <cstddef>
#include <vector>

#include "lgc/liegroups.hpp"

namespace lgc {

// Time-ordered poses in a shared navigation frame (frame 0).
//
// poses[p] maps frame-p coordinates into frame-0 coordinates, so its
// translation is the camera position. This is the layout of the established
// 12-number pose-line format.
class Trajectory {
 public:
  Trajectory() = default;
  /// Frames 0..N-1; arclength accumulated from consecutive positions.
  explicit Trajectory(std::vector<Transform> poses);
  Trajectory(std::vector<Transform> poses, std::vector<int> frames);
  /// Validates: equal lengths, strictly increasing frames, non-decreasing
  /// arclength.
  Trajectory(std::vector<Transform> poses, std::vector<int> frames,
             std::vector<double> arclength);

  std::size_t size() const { return poses_.size(); }
  bool empty() const { return poses_.empty(); }

  const Transform& pose(std::size_t i) const { return poses_[i]; }
  int frame(std::size_t i) const { return frames_[i]; }
  double arclength(std::size_t i) const { return arclength_[i]; }
  Vec3 position(std::size_t i) const { return poses_[i].translation(); }

  const std::vector<Transform>& poses() const { return poses_; }
  const std::vector<int>& frames() const { return frames_; }
  const std::vector<double>& arclengths() const { return arclength_; }

  /// Transform mapping frame-b coordinates into frame-a coordinates.
  Transform relative(std::size_t a, std::size_t b) const {
    return poses_[a].inverse() * poses_[b];
  }

 private:
  std::vector<Transform> poses_;
  std::vector<int> frames_;
  std::vector<double> arclength_;
};

std::vector<double> accumulate_arclength(const std::vector<Transform>& poses);

}  // namespace lgc
