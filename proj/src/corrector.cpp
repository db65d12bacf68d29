#include "lgc/corrector.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "lgc/error.hpp"
#include "lgc/fileutil.hpp"
#include "lgc/rng.hpp"
#include "lgc/textio.hpp"

namespace lgc {
namespace {

constexpr int kCovEntries = 21;

template <typename M>
void append_upper(std::ostringstream& out, const M& cov) {
  for (Eigen::Index r = 0; r < cov.rows(); ++r) {
    for (Eigen::Index c = r; c < cov.cols(); ++c) out << ' ' << text::format_double(cov(r, c));
  }
}

MatX read_upper(std::span<const std::string_view> tokens, int dim, const std::string& where) {
  MatX cov(dim, dim);
  std::size_t k = 0;
  for (int r = 0; r < dim; ++r) {
    for (int c = r; c < dim; ++c) {
      cov(r, c) = cov(c, r) = text::parse_double(tokens[k++], where);
    }
  }
  return cov;
}

}  // namespace

const char* to_string(CorrectionVariant v) {
  switch (v) {
    case CorrectionVariant::kSE3: return "se3";
    case CorrectionVariant::kSO3: return "so3";
    case CorrectionVariant::kYaw: return "yaw";
  }
  return "?";
}

CorrectionVariant parse_variant(const std::string& name) {
  if (name == "se3") return CorrectionVariant::kSE3;
  if (name == "so3") return CorrectionVariant::kSO3;
  if (name == "yaw") return CorrectionVariant::kYaw;
  fail(Errc::kInvalidArgument, "unknown correction variant '" + name + "' (se3, so3, yaw)");
}

int variant_dimension(CorrectionVariant v) {
  switch (v) {
    case CorrectionVariant::kSE3: return 6;
    case CorrectionVariant::kSO3: return 3;
    case CorrectionVariant::kYaw: return 1;
  }
  return 0;
}

VecX project_target(CorrectionVariant v, const Transform& target) {
  switch (v) {
    case CorrectionVariant::kSE3: return se3_log(target);
    case CorrectionVariant::kSO3: return so3_log(target.rotation());
    case CorrectionVariant::kYaw: return VecX::Constant(1, yaw_extract(target));
  }
  return {};
}

Twist embed_twist(CorrectionVariant v, const VecX& coords) {
  if (coords.size() != variant_dimension(v)) {
    fail(Errc::kInvalidArgument, "embed_twist: coordinate count does not match variant");
  }
  Twist xi = Twist::Zero();
  switch (v) {
    case CorrectionVariant::kSE3: xi = coords; break;
    case CorrectionVariant::kSO3: xi.tail<3>() = coords; break;
    case CorrectionVariant::kYaw: xi(kYawTwistIndex) = coords(0); break;
  }
  return xi;
}

Mat6 embed_covariance(CorrectionVariant v, const MatX& cov) {
  const int d = variant_dimension(v);
  if (cov.rows() != d || cov.cols() != d) {
    fail(Errc::kInvalidArgument, "embed_covariance: covariance size does not match variant");
  }
  Mat6 out = Mat6::Identity() * kUnconstrainedVariance;
  switch (v) {
    case CorrectionVariant::kSE3: out = cov; break;
    case CorrectionVariant::kSO3:
      out.block<3, 3>(3, 0).setZero();
      out.block<3, 3>(0, 3).setZero();
      out.block<3, 3>(3, 3) = cov;
      break;
    case CorrectionVariant::kYaw: out(kYawTwistIndex, kYawTwistIndex) = cov(0, 0); break;
  }
  return out;
}

BiasCorrectorModel fit_bias(std::span<const CorrectionSample> training,
                            CorrectionVariant variant) {
  std::map<int, std::vector<VecX>> grouped;
  for (const auto& s : training) {
    if (s.delta_p() < 1) fail(Errc::kInvalidArgument, "fit_bias: sample with delta_p < 1");
    grouped[s.delta_p()].push_back(project_target(variant, s.target_correction));
  }
  BiasCorrectorModel model;
  model.variant = variant;
  for (const auto& [dp, coords] : grouped) {
    if (coords.size() < 2) {
      fail(Errc::kInvalidArgument,
           "fit_bias: need at least 2 samples for delta_p = " + std::to_string(dp));
    }
    auto [mean, cov] = empirical_covariance(coords);
    model.entries[dp] = {std::move(mean), std::move(cov)};
  }
  if (model.entries.empty()) fail(Errc::kInvalidArgument, "fit_bias: no training samples");
  return model;
}

Prediction predict(const BiasCorrectorModel& model, int delta_p) {
  const auto it = model.entries.find(delta_p);
  if (it == model.entries.end()) {
    fail(Errc::kInvalidArgument, "predict: model has no entry for delta_p = " +
                                     std::to_string(delta_p));
  }
  return {embed_twist(model.variant, it->second.mean),
          embed_covariance(model.variant, it->second.covariance)};
}

std::vector<CorrectionRecord> predict_corrections(const BiasCorrectorModel& model,
                                                  const Trajectory& odometry, int delta_p) {
  if (delta_p < 1) fail(Errc::kInvalidArgument, "predict_corrections: delta_p must be >= 1");
  const Prediction p = predict(model, delta_p);
  std::vector<CorrectionRecord> out;
  for (std::size_t s = 0; s + delta_p < odometry.size(); s += delta_p) {
    out.push_back({odometry.frame(s), odometry.frame(s + delta_p), p.xi, p.covariance});
  }
  return out;
}

std::vector<CorrectionRecord> oracle_corrections(const Trajectory& gt, const Trajectory& est,
                                                 int delta_p, double noise_sigma,
                                                 std::uint64_t seed) {
  if (gt.size() != est.size()) {
    fail(Errc::kInvalidArgument, "oracle_corrections: trajectory lengths differ");
  }
  if (delta_p < 1) fail(Errc::kInvalidArgument, "oracle_corrections: delta_p must be >= 1");
  CounterRng rng(seed);
  std::vector<CorrectionRecord> out;
  for (std::size_t s = 0; s + delta_p < gt.size(); s += delta_p) {
    const std::size_t e = s + delta_p;
    Twist xi = se3_log(target_correction(gt.relative(s, e), est.relative(s, e)));
    if (noise_sigma > 0.0) {
      for (int k = 0; k < 6; ++k) xi(k) += noise_sigma * rng.normal();
    }
    out.push_back({est.frame(s), est.frame(e), xi, std::nullopt});
  }
  return out;
}

// --- Files -----------------------------------------------------------------

std::vector<CorrectionRecord> parse_corrections(const std::string& content,
                                                const std::string& origin) {
  std::vector<CorrectionRecord> out;
  const auto ls = text::lines(content);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const auto body = text::strip(ls[i]);
    if (body.empty()) continue;
    const std::string where = text::location(origin, i + 1);
    const auto tok = text::split(body);
    if (tok.size() != 8 && tok.size() != 8 + kCovEntries) {
      fail(Errc::kParse, where + ": expected 8 or 29 fields, got " + std::to_string(tok.size()));
    }
    CorrectionRecord r;
    r.frame_start = static_cast<int>(text::parse_int(tok[0], where));
    r.frame_end = static_cast<int>(text::parse_int(tok[1], where));
    if (r.frame_end <= r.frame_start) {
      fail(Errc::kParse, where + ": frame_end must exceed frame_start");
    }
    if (!out.empty() && r.frame_start < out.back().frame_start) {
      fail(Errc::kParse, where + ": records are not in increasing frame order");
    }
    for (int k = 0; k < 6; ++k) r.xi(k) = text::parse_double(tok[2 + k], where);
    if (tok.size() > 8) {
      r.covariance = Mat6(read_upper(std::span(tok).subspan(8), 6, where));
    }
    out.push_back(r);
  }
  return out;
}

std::vector<CorrectionRecord> load_corrections(const std::filesystem::path& path) {
  return parse_corrections(read_text_file(path), path.string());
}

std::string format_corrections(std::span<const CorrectionRecord> records) {
  std::ostringstream out;
  for (const auto& r : records) {
    out << r.frame_start << ' ' << r.frame_end;
    for (int k = 0; k < 6; ++k) out << ' ' << text::format_double(r.xi(k));
    if (r.covariance) append_upper(out, *r.covariance);
    out << '\n';
  }
  return out.str();
}

void save_corrections(const std::filesystem::path& path,
                      std::span<const CorrectionRecord> records) {
  write_file_atomic(path, format_corrections(records));
}

BiasCorrectorModel parse_model(const std::string& content, const std::string& origin) {
  BiasCorrectorModel model;
  bool have_variant = false;
  const auto ls = text::lines(content);
  for (std::size_t i = 0; i < ls.size(); ++i) {
    const auto body = text::strip(ls[i]);
    if (body.empty()) continue;
    const std::string where = text::location(origin, i + 1);
    const auto tok = text::split(body);
    if (tok[0] == "variant") {
      if (tok.size() != 2 || have_variant) fail(Errc::kParse, where + ": bad variant line");
      model.variant = parse_variant(std::string(tok[1]));
      have_variant = true;
      continue;
    }
    if (tok[0] != "dp" || !have_variant) {
      fail(Errc::kParse, where + ": expected 'variant' then 'dp' lines");
    }
    const int d = variant_dimension(model.variant);
    const std::size_t want = 2 + d + d * (d + 1) / 2;
    if (tok.size() != want) {
      fail(Errc::kParse, where + ": expected " + std::to_string(want) + " fields");
    }
    const int dp = static_cast<int>(text::parse_int(tok[1], where));
    if (dp < 1 || model.covers(dp)) fail(Errc::kParse, where + ": bad or duplicate delta_p");
    BiasEntry e;
    e.mean.resize(d);
    for (int k = 0; k < d; ++k) e.mean(k) = text::parse_double(tok[2 + k], where);
    e.covariance = read_upper(std::span(tok).subspan(2 + d), d, where);
    if (Eigen::LLT<MatX>(e.covariance).info() != Eigen::Success) {
      fail(Errc::kParse, where + ": covariance is not positive definite");
    }
    model.entries[dp] = std::move(e);
  }
  if (!have_variant || model.entries.empty()) fail(Errc::kParse, origin + ": empty model");
  return model;
}

BiasCorrectorModel load_model(const std::filesystem::path& path) {
  return parse_model(read_text_file(path), path.string());
}

std::string format_model(const BiasCorrectorModel& model) {
  std::ostringstream out;
  out << "variant " << to_string(model.variant) << '\n';
  for (const auto& [dp, e] : model.entries) {
    out << "dp " << dp;
    for (Eigen::Index k = 0; k < e.mean.size(); ++k) out << ' ' << text::format_double(e.mean(k));
    append_upper(out, e.covariance);
    out << '\n';
  }
  return out.str();
}

void save_model(const std::filesystem::path& path, const BiasCorrectorModel& model) {
  write_file_atomic(path, format_model(model));
}

}  // namespace lgc
