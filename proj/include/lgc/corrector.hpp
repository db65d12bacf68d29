#pragma once

// Low-rate correction sources: a constant-bias model fitted per window
// length, a ground-truth oracle, and the corrections text format through
// which an external model can supply its own predictions.

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lgc/loss.hpp"
#include "lgc/posegraph.hpp"
#include "lgc/trajectory.hpp"

namespace lgc {

enum class CorrectionVariant { kSE3, kSO3, kYaw };

const char* to_string(CorrectionVariant v);
CorrectionVariant parse_variant(const std::string& name);
/// Coordinate count of the variant: 6, 3 or 1.
int variant_dimension(CorrectionVariant v);

/// Variance given to twist directions a reduced variant does not constrain.
inline constexpr double kUnconstrainedVariance = 1e6;

/// Index of the yaw-generating coordinate in a twist (rotation about y).
inline constexpr int kYawTwistIndex = 4;

/// Variant coordinates of a target correction: the full twist, the rotation
/// vector, or the yaw angle.
VecX project_target(CorrectionVariant v, const Transform& target);
/// Twist whose exponential realizes the variant coordinates.
Twist embed_twist(CorrectionVariant v, const VecX& coords);
/// 6x6 covariance with `cov` on the constrained block and
/// kUnconstrainedVariance elsewhere.
Mat6 embed_covariance(CorrectionVariant v, const MatX& cov);

struct BiasEntry {
  VecX mean;
  MatX covariance;
};

struct BiasCorrectorModel {
  CorrectionVariant variant = CorrectionVariant::kSE3;
  std::map<int, BiasEntry> entries;  // keyed by delta_p

  bool covers(int delta_p) const { return entries.count(delta_p) != 0; }
};

BiasCorrectorModel fit_bias(std::span<const CorrectionSample> training,
                            CorrectionVariant variant);

struct Prediction {
  Twist xi;
  Mat6 covariance;  // embedded to 6x6
};

Prediction predict(const BiasCorrectorModel& model, int delta_p);

/// Corrections for consecutive windows [k dp, (k+1) dp] of `odometry`;
/// trailing frames that do not fill a window are left uncorrected.
std::vector<CorrectionRecord> predict_corrections(const BiasCorrectorModel& model,
                                                  const Trajectory& odometry, int delta_p);

/// Ground-truth-derived corrections over the same windows, optionally with
/// N(0, sigma^2 I) noise added to each twist.
std::vector<CorrectionRecord> oracle_corrections(const Trajectory& gt, const Trajectory& est,
                                                 int delta_p, double noise_sigma = 0.0,
                                                 std::uint64_t seed = 0);

// --- Files -----------------------------------------------------------------

/// One record per line: `frame_start frame_end xi1..xi6 [21 upper-triangular
/// covariance entries]`; `#` comments allowed.
std::vector<CorrectionRecord> parse_corrections(const std::string& text,
                                                const std::string& origin = "<string>");
std::vector<CorrectionRecord> load_corrections(const std::filesystem::path& path);
std::string format_corrections(std::span<const CorrectionRecord> records);
void save_corrections(const std::filesystem::path& path, std::span<const CorrectionRecord> records);

/// `variant <name>` followed by `dp <k> <mean> <upper-triangular cov>` lines.
BiasCorrectorModel parse_model(const std::string& text, const std::string& origin = "<string>");
BiasCorrectorModel load_model(const std::filesystem::path& path);
std::string format_model(const BiasCorrectorModel& model);
void save_model(const std::filesystem::path& path, const BiasCorrectorModel& model);

}  // namespace lgc
