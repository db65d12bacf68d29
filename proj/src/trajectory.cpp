#include "lgc/trajectory.hpp"

#include <string>
#include <utility>

#include "lgc/error.hpp"

namespace lgc {

std::vector<double> accumulate_arclength(const std::vector<Transform>& poses) {
  std::vector<double> s(poses.size(), 0.0);
  for (std::size_t i = 1; i < poses.size(); ++i) {
    s[i] = s[i - 1] + (poses[i].translation() - poses[i - 1].translation()).norm();
  }
  return s;
}

namespace {

std::vector<int> iota_frames(std::size_t n) {
  std::vector<int> frames(n);
  for (std::size_t i = 0; i < n; ++i) frames[i] = static_cast<int>(i);
  return frames;
}

}  // namespace

Trajectory::Trajectory(std::vector<Transform> poses)
    : Trajectory(poses, iota_frames(poses.size())) {}

Trajectory::Trajectory(std::vector<Transform> poses, std::vector<int> frames)
    : Trajectory(poses, std::move(frames), accumulate_arclength(poses)) {}

Trajectory::Trajectory(std::vector<Transform> poses, std::vector<int> frames,
                       std::vector<double> arclength)
    : poses_(std::move(poses)), frames_(std::move(frames)), arclength_(std::move(arclength)) {
  if (frames_.size() != poses_.size() || arclength_.size() != poses_.size()) {
    fail(Errc::kInvalidArgument, "Trajectory: poses, frames and arclength differ in length");
  }
  for (std::size_t i = 1; i < poses_.size(); ++i) {
    if (frames_[i] <= frames_[i - 1]) {
      fail(Errc::kInvalidArgument,
           "Trajectory: frame indices not strictly increasing at position " + std::to_string(i));
    }
    if (arclength_[i] < arclength_[i - 1]) {
      fail(Errc::kInvalidArgument,
           "Trajectory: arclength decreases at position " + std::to_string(i));
    }
  }
}

}  // namespace lgc
