#include "lgc/metrics.hpp"

#include <cstdio>
#include <numbers>
#include <sstream>

#include "lgc/error.hpp"
#include "lgc/parallel.hpp"
#include "lgc/textio.hpp"

namespace lgc {
namespace {

ErrorNorms error_norms(const Transform& est, const Transform& gt) {
  // est^-1 gt; a shared rotation block gives an exactly zero rotation error.
  const Rotation r = between(est.rotation().inverse(), gt.rotation().inverse());
  const Vec3 t = est.rotation().inverse() * (gt.translation() - est.translation());
  return {t.norm(), so3_log(r).norm()};
}

void require_matching(const Trajectory& est, const Trajectory& gt, const char* who) {
  if (est.size() != gt.size()) {
    fail(Errc::kInvalidArgument, std::string(who) + ": trajectories differ in length (" +
                                     std::to_string(est.size()) + " vs " +
                                     std::to_string(gt.size()) + ")");
  }
  if (est.frames() != gt.frames()) {
    fail(Errc::kInvalidArgument, std::string(who) + ": frame indices differ");
  }
}

std::string fixed2(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", *v);
  return buf;
}

}  // namespace

std::vector<ErrorNorms> pose_errors(const Trajectory& est, const Trajectory& gt) {
  require_matching(est, gt, "pose_errors");
  std::vector<ErrorNorms> out(est.size());
  for (std::size_t p = 0; p < est.size(); ++p) out[p] = error_norms(est.pose(p), gt.pose(p));
  return out;
}

ErrorNorms m_ate(const Trajectory& est, const Trajectory& gt) {
  if (est.empty()) fail(Errc::kInvalidArgument, "m_ate: empty trajectory");
  ErrorNorms sum = c_ate(est, gt, est.size());
  const double n = static_cast<double>(est.size());
  return {sum.translation / n, sum.rotation / n};
}

ErrorNorms c_ate(const Trajectory& est, const Trajectory& gt, std::size_t q) {
  require_matching(est, gt, "c_ate");
  if (q > est.size()) {
    fail(Errc::kInvalidArgument, "c_ate: q = " + std::to_string(q) + " exceeds trajectory length");
  }
  ErrorNorms sum;
  for (std::size_t p = 0; p < q; ++p) {
    const ErrorNorms e = error_norms(est.pose(p), gt.pose(p));
    sum.translation += e.translation;
    sum.rotation += e.rotation;
  }
  return sum;
}

std::vector<ErrorNorms> c_ate_series(const Trajectory& est, const Trajectory& gt) {
  std::vector<ErrorNorms> out;
  ErrorNorms sum;
  for (const auto& e : pose_errors(est, gt)) {
    sum.translation += e.translation;
    sum.rotation += e.rotation;
    out.push_back(sum);
  }
  return out;
}

void SegmentSpec::validate() const {
  if (lengths.empty()) fail(Errc::kInvalidArgument, "SegmentSpec: no lengths");
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (!(lengths[i] > 0.0)) fail(Errc::kInvalidArgument, "SegmentSpec: lengths must be positive");
    if (i > 0 && !(lengths[i] > lengths[i - 1])) {
      fail(Errc::kInvalidArgument, "SegmentSpec: lengths must be increasing");
    }
  }
  if (stride < 1) fail(Errc::kInvalidArgument, "SegmentSpec: stride must be >= 1");
}

double SegmentError::rot_millideg_per_m() const {
  return rot_rad_per_m * (180.0 / std::numbers::pi) * 1000.0;
}

std::vector<SegmentError> segment_errors(const Trajectory& est, const Trajectory& gt,
                                         const SegmentSpec& spec) {
  require_matching(est, gt, "segment_errors");
  spec.validate();
  const std::size_t n = gt.size();
  std::vector<SegmentError> out(spec.lengths.size());
  parallel_for(spec.lengths.size(), [&](std::size_t li) {
    const double s = spec.lengths[li];
    SegmentError& r = out[li];
    r.length = s;
    double trans = 0.0;
    double rot = 0.0;
    std::size_t end = 0;
    for (std::size_t p = 0; p < n; p += spec.stride) {
      if (end < p) end = p;
      while (end < n && gt.arclength(end) - gt.arclength(p) < s) ++end;
      if (end >= n) break;
      const ErrorNorms e = error_norms(est.relative(p, end), gt.relative(p, end));
      trans += e.translation / s;
      rot += e.rotation / s;
      ++r.count;
    }
    if (r.count > 0) {
      r.trans_percent = 100.0 * trans / r.count;
      r.rot_rad_per_m = rot / r.count;
    }
  });
  return out;
}

std::optional<SegmentMeans> mean_segment_errors(std::span<const SegmentError> errors) {
  SegmentMeans m;
  int k = 0;
  for (const auto& e : errors) {
    if (!e.admissible()) continue;
    m.trans_percent += e.trans_percent;
    m.rot_millideg_per_m += e.rot_millideg_per_m();
    ++k;
  }
  if (k == 0) return std::nullopt;
  m.trans_percent /= k;
  m.rot_millideg_per_m /= k;
  return m;
}

ReportRow make_report_row(std::string sequence, std::string estimator,
                          std::string correction_type, const Trajectory& est,
                          const Trajectory& gt, const SegmentSpec& spec) {
  ReportRow row;
  row.sequence = std::move(sequence);
  row.estimator = std::move(estimator);
  row.correction_type = std::move(correction_type);
  const ErrorNorms ate = m_ate(est, gt);
  row.ate_trans_m = ate.translation;
  row.ate_rot_deg = ate.rotation * 180.0 / std::numbers::pi;
  const auto seg = segment_errors(est, gt, spec);
  if (const auto means = mean_segment_errors(seg)) {
    row.seg_trans_percent = means->trans_percent;
    row.seg_rot_millideg_per_m = means->rot_millideg_per_m;
  }
  return row;
}

std::string render_row(const ReportRow& row) {
  return "| " + row.sequence + " | " + row.estimator + " | " + row.correction_type + " | " +
         fixed2(row.ate_trans_m) + " | " + fixed2(row.ate_rot_deg) + " | " +
         fixed2(row.seg_trans_percent) + " | " + fixed2(row.seg_rot_millideg_per_m) + " |";
}

std::string render_report(std::span<const ReportRow> rows) {
  std::string out =
      "| Sequence | Estimator | Corr. Type | m-ATE Translation (m) | m-ATE Rotation (deg) | "
      "Segment Translation (%) | Segment Rotation (millideg/m) |\n"
      "|---|---|---|---|---|---|---|\n";
  for (const auto& r : rows) out += render_row(r) + "\n";
  return out;
}

std::string render_segment_csv(std::span<const SegmentError> errors) {
  std::string out = std::string(kSegmentCsvHeader) + "\n";
  for (const auto& e : errors) {
    if (!e.admissible()) continue;
    out += text::format_double(e.length) + "," + text::format_double(e.trans_percent) + "," +
           text::format_double(e.rot_millideg_per_m()) + "\n";
  }
  return out;
}

std::vector<SegmentError> parse_segment_csv(const std::string& content) {
  const auto ls = text::lines(content);
  if (ls.empty() || ls[0] != kSegmentCsvHeader) {
    fail(Errc::kParse, "segment CSV: missing or wrong header");
  }
  std::vector<SegmentError> out;
  for (std::size_t i = 1; i < ls.size(); ++i) {
    if (ls[i].empty()) continue;
    const std::string where = "segment CSV line " + std::to_string(i + 1);
    std::vector<std::string_view> f;
    std::size_t start = 0;
    for (;;) {
      const auto comma = ls[i].find(',', start);
      f.push_back(ls[i].substr(start, comma == std::string_view::npos ? ls[i].npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (f.size() != 3) fail(Errc::kParse, where + ": expected 3 fields");
    SegmentError e;
    e.length = text::parse_double(f[0], where);
    e.trans_percent = text::parse_double(f[1], where);
    e.rot_rad_per_m = text::parse_double(f[2], where) / 1000.0 * std::numbers::pi / 180.0;
    e.count = 1;
    out.push_back(e);
  }
  return out;
}

}  // namespace lgc
