#include "lgc/io.hpp"

#include <sstream>

#include <Eigen/LU>

#include "lgc/error.hpp"
#include "lgc/fileutil.hpp"
#include "lgc/textio.hpp"

namespace lgc {
namespace {

// Calls `row(frame, tokens, where)` for every data row under a `frame k`
// header; headers must count up from 0 without gaps.
template <typename Row>
std::size_t parse_framed(const std::string& content, const std::string& origin, Row&& row) {
  std::size_t frames = 0;
  bool open = false;
  const auto ls = text::lines(content);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const auto body = text::strip(ls[i]);
    if (body.empty()) continue;
    const std::string where = text::location(origin, i + 1);
    const auto tok = text::split(body);
    if (tok[0] == "frame") {
      if (tok.size() != 2) fail(Errc::kParse, where + ": expected 'frame <k>'");
      const long long k = text::parse_int(tok[1], where);
      if (k != static_cast<long long>(frames)) {
        fail(Errc::kParse, where + ": frame " + std::to_string(frames) +
                               " missing (found frame " + std::to_string(k) + ")");
      }
      ++frames;
      open = true;
      continue;
    }
    if (!open) fail(Errc::kParse, where + ": data before the first 'frame' header");
    row(frames - 1, tok, where);
  }
  return frames;
}

}  // namespace

Trajectory parse_poses(const std::string& content, const std::string& origin) {
  std::vector<Transform> poses;
  const auto ls = text::lines(content);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const auto body = text::strip(ls[i]);
    if (body.empty()) continue;
    const std::string where = text::location(origin, i + 1);
    const auto tok = text::split(body);
    if (tok.size() != 12) {
      fail(Errc::kParse, where + ": expected 12 numbers, got " + std::to_string(tok.size()));
    }
    Mat3 r;
    Vec3 t;
    for (int row = 0; row < 3; ++row) {
      for (int c = 0; c < 3; ++c) r(row, c) = text::parse_double(tok[4 * row + c], where);
      t(row) = text::parse_double(tok[4 * row + 3], where);
    }
    const double ortho = (r.transpose() * r - Mat3::Identity()).norm();
    if (ortho > kPoseFileOrthoTolerance || r.determinant() < 0.0) {
      fail(Errc::kParse, where + ": rotation block is not orthonormal (error " +
                             std::to_string(ortho) + ")");
    }
    poses.emplace_back(ortho > 1e-12 ? Rotation::nearest(r) : Rotation::unchecked(r), t);
  }
  return Trajectory(std::move(poses));
}

Trajectory read_pose_file(const std::filesystem::path& path) {
  return parse_poses(read_text_file(path), path.string());
}

std::string format_poses(const Trajectory& trajectory) {
  std::string out;
  for (const auto& p : trajectory.poses()) {
    const Mat3& r = p.rotation().matrix();
    for (int row = 0; row < 3; ++row) {
      for (int c = 0; c < 4; ++c) {
        const double v = c < 3 ? r(row, c) : p.translation()(row);
        if (row + c > 0) out += ' ';
        out += text::format_double(v);
      }
    }
    out += '\n';
  }
  return out;
}

void write_pose_file(const std::filesystem::path& path, const Trajectory& trajectory) {
  write_file_atomic(path, format_poses(trajectory));
}

std::vector<CorrectionSample> build_correction_samples(const Trajectory& gt,
                                                       const Trajectory& est,
                                                       std::span<const int> delta_p_set) {
  if (gt.size() != est.size() || gt.frames() != est.frames()) {
    fail(Errc::kInvalidArgument, "build_correction_samples: trajectories are not aligned");
  }
  std::vector<CorrectionSample> out;
  const std::size_t m = gt.size();
  for (const int dp : delta_p_set) {
    if (dp < 1) fail(Errc::kInvalidArgument, "build_correction_samples: delta_p must be >= 1");
    for (std::size_t i = 0; i + dp < m; ++i) {
      const std::size_t e = i + dp;
      const Transform t_est = est.relative(i, e);
      out.push_back({gt.frame(i), gt.frame(e), t_est, target_correction(gt.relative(i, e), t_est)});
    }
  }
  return out;
}

std::vector<FrameCorrespondences> parse_tracks(const std::string& content,
                                               const std::string& origin) {
  std::vector<FrameCorrespondences> frames;
  const std::size_t n = parse_framed(content, origin, [&](std::size_t k, const auto& tok,
                                                          const std::string& where) {
    if (tok.size() != 6) fail(Errc::kParse, where + ": expected 6 numbers per track");
    double v[6];
    for (int j = 0; j < 6; ++j) v[j] = text::parse_double(tok[j], where);
    frames.resize(k + 1);
    frames[k].push_back({{v[0], v[1], v[2]}, {v[3], v[4], v[5]}});
  });
  frames.resize(n);
  return frames;
}

std::vector<FrameCorrespondences> read_tracks(const std::filesystem::path& path) {
  return parse_tracks(read_text_file(path), path.string());
}

std::string format_tracks(std::span<const FrameCorrespondences> frames) {
  std::string out;
  for (std::size_t k = 0; k < frames.size(); ++k) {
    out += "frame " + std::to_string(k) + "\n";
    for (const auto& c : frames[k]) {
      const double v[6] = {c.prev.u_l, c.prev.v_l, c.prev.u_r, c.next.u_l, c.next.v_l, c.next.u_r};
      for (int j = 0; j < 6; ++j) {
        if (j) out += ' ';
        out += text::format_double(v[j]);
      }
      out += '\n';
    }
  }
  return out;
}

std::vector<FrameLabels> parse_labels(const std::string& content, const std::string& origin) {
  std::vector<FrameLabels> frames;
  const std::size_t n = parse_framed(content, origin, [&](std::size_t k, const auto& tok,
                                                          const std::string& where) {
    if (tok.size() != 1 || (tok[0] != "0" && tok[0] != "1")) {
      fail(Errc::kParse, where + ": expected a single 0 or 1");
    }
    frames.resize(k + 1);
    frames[k].push_back(tok[0] == "1" ? 1 : 0);
  });
  frames.resize(n);
  return frames;
}

std::vector<FrameLabels> read_labels(const std::filesystem::path& path) {
  return parse_labels(read_text_file(path), path.string());
}

std::string format_labels(std::span<const FrameLabels> labels) {
  std::string out;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    out += "frame " + std::to_string(k) + "\n";
    for (const auto l : labels[k]) out += l ? "1\n" : "0\n";
  }
  return out;
}

std::string format_edge_covariances(std::span<const Mat6> covs) {
  std::string out = "edge";
  for (int r = 0; r < 6; ++r) {
    for (int c = r; c < 6; ++c) out += ",c" + std::to_string(r) + std::to_string(c);
  }
  out += '\n';
  for (std::size_t k = 0; k < covs.size(); ++k) {
    out += std::to_string(k);
    for (int r = 0; r < 6; ++r) {
      for (int c = r; c < 6; ++c) out += "," + text::format_double(covs[k](r, c));
    }
    out += '\n';
  }
  return out;
}

std::vector<Mat6> parse_edge_covariances(const std::string& content, const std::string& origin) {
  std::vector<Mat6> out;
  const auto ls = text::lines(content);
  for (std::size_t i = 1; i < ls.size(); ++i) {
    if (ls[i].empty()) continue;
    const std::string where = text::location(origin, i + 1);
    std::vector<std::string_view> f;
    std::size_t start = 0;
    for (;;) {
      const auto comma = ls[i].find(',', start);
      f.push_back(ls[i].substr(start, comma == std::string_view::npos ? ls[i].npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (f.size() != 22) fail(Errc::kParse, where + ": expected 22 fields");
    if (text::parse_int(f[0], where) != static_cast<long long>(out.size())) {
      fail(Errc::kParse, where + ": edges out of order");
    }
    Mat6 cov;
    std::size_t k = 1;
    for (int r = 0; r < 6; ++r) {
      for (int c = r; c < 6; ++c) cov(r, c) = cov(c, r) = text::parse_double(f[k++], where);
    }
    out.push_back(cov);
  }
  return out;
}

std::vector<Mat6> read_edge_covariances(const std::filesystem::path& path) {
  return parse_edge_covariances(read_text_file(path), path.string());
}

}  // namespace lgc
