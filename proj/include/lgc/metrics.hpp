#pragma once

// Trajectory error metrics in a shared navigation frame: mean and cumulative
// absolute trajectory error, fixed-length segment errors, and report output.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lgc/trajectory.hpp"

namespace lgc {

struct ErrorNorms {
  double translation = 0.0;  // meters
  double rotation = 0.0;     // radians
};

/// Per-pose error E_p = est_p^-1 gt_p: translation norm of E_p and the
/// rotation angle ||so3_log(R(E_p))||.
std::vector<ErrorNorms> pose_errors(const Trajectory& est, const Trajectory& gt);

ErrorNorms m_ate(const Trajectory& est, const Trajectory& gt);
/// Sum of the first q per-pose errors, q in [0, N].
ErrorNorms c_ate(const Trajectory& est, const Trajectory& gt, std::size_t q);
/// c_ate for q = 1..N.
std::vector<ErrorNorms> c_ate_series(const Trajectory& est, const Trajectory& gt);

struct SegmentSpec {
  std::vector<double> lengths{100, 200, 300, 400, 500, 600, 700, 800};
  int stride = 1;

  void validate() const;
};

struct SegmentError {
  double length = 0.0;
  int count = 0;               // admissible segments; 0 means omitted
  double trans_percent = 0.0;  // mean of 100 * ||t_err|| / length
  double rot_rad_per_m = 0.0;  // mean of ||phi_err|| / length

  bool admissible() const { return count > 0; }
  double rot_millideg_per_m() const;
};

/// Segment end is the first pose whose ground-truth arclength from the start
/// is at least the segment length. Lengths with no admissible segment are
/// returned with count == 0.
std::vector<SegmentError> segment_errors(const Trajectory& est, const Trajectory& gt,
                                         const SegmentSpec& spec = {});

struct SegmentMeans {
  double trans_percent = 0.0;
  double rot_millideg_per_m = 0.0;
};
/// Mean over admissible lengths; nullopt when none is admissible.
std::optional<SegmentMeans> mean_segment_errors(std::span<const SegmentError> errors);

// --- Reports ---------------------------------------------------------------

struct ReportRow {
  std::string sequence;
  std::string estimator;
  std::string correction_type = "---";
  std::optional<double> ate_trans_m;
  std::optional<double> ate_rot_deg;
  std::optional<double> seg_trans_percent;
  std::optional<double> seg_rot_millideg_per_m;
};

ReportRow make_report_row(std::string sequence, std::string estimator,
                          std::string correction_type, const Trajectory& est,
                          const Trajectory& gt, const SegmentSpec& spec = {});

/// Markdown table, two decimals, '-' for missing values.
std::string render_row(const ReportRow& row);
std::string render_report(std::span<const ReportRow> rows);

inline constexpr const char* kSegmentCsvHeader = "length_m,trans_percent,rot_millideg_per_m";
/// Admissible lengths only.
std::string render_segment_csv(std::span<const SegmentError> errors);
std::vector<SegmentError> parse_segment_csv(const std::string& text);

}  // namespace lgc
