#pragma once

// Plumb-bob radial distortion in normalized image coordinates:
//   x_d = (1 + k1 r^2 + k2 r^4 + k3 r^6) x_n,   r = |x_n|.

#include <filesystem>
#include <limits>
#include <span>
#include <vector>

#include "lgc/kernels.hpp"
#include "lgc/types.hpp"

namespace lgc {

class DistortionModel {
 public:
  /// Radius up to which monotonicity of r -> r (1 + k1 r^2 + ...) is searched.
  static constexpr double kSearchRadius = 4.0;

  DistortionModel() : DistortionModel(0.0, 0.0, 0.0) {}
  DistortionModel(double k1, double k2, double k3);

  double k1() const { return coeffs_.k1; }
  double k2() const { return coeffs_.k2; }
  double k3() const { return coeffs_.k3; }
  const kernels::RadialCoeffs& coeffs() const { return coeffs_; }
  bool is_identity() const { return k1() == 0.0 && k2() == 0.0 && k3() == 0.0; }

  /// First radius where the forward radial map stops increasing, or +inf if
  /// it is monotone on [0, kSearchRadius].
  double max_radius() const { return r_max_; }
  /// Distorted radius at max_radius(); inputs at or beyond it have no inverse.
  double max_distorted_radius() const { return rd_max_; }

  double radial_factor(double r2) const {
    return 1.0 + r2 * (coeffs_.k1 + r2 * (coeffs_.k2 + r2 * coeffs_.k3));
  }

 private:
  kernels::RadialCoeffs coeffs_;
  double r_max_ = std::numeric_limits<double>::infinity();
  double rd_max_ = std::numeric_limits<double>::infinity();
};

struct UndistortOptions {
  double tol = 1e-10;
  int max_iter = 50;
};

Vec2 distort_normalized(const DistortionModel& model, const Vec2& xn);
/// Throws Errc::kDomain beyond the fold-over radius and Errc::kNotConverged
/// when the fixed-point iteration stalls.
Vec2 undistort_normalized(const DistortionModel& model, const Vec2& xd,
                          const UndistortOptions& options = {});

/// Batch forms over structure-of-arrays coordinates; dispatched to the active
/// kernel table. `ok[i]` reports success of point i (no exceptions).
void distort_normalized(const DistortionModel& model, std::span<const double> x,
                        std::span<const double> y, std::span<double> xd, std::span<double> yd);
void undistort_normalized(const DistortionModel& model, std::span<const double> xd,
                          std::span<const double> yd, std::span<double> x, std::span<double> y,
                          std::span<std::uint8_t> ok, const UndistortOptions& options = {});

// --- Images ----------------------------------------------------------------

/// Planar, row-major intensities in [0, 1] with a per-pixel validity mask.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> samples;     // channels * height * width
  std::vector<std::uint8_t> mask;  // height * width, 1 = valid

  static Image filled(int width, int height, int channels, double value);

  std::size_t plane_size() const { return static_cast<std::size_t>(width) * height; }
  double& at(int c, int x, int y) { return samples[c * plane_size() + y * width + x]; }
  double at(int c, int x, int y) const { return samples[c * plane_size() + y * width + x]; }
  const double* plane(int c) const { return samples.data() + c * plane_size(); }
  double* plane(int c) { return samples.data() + c * plane_size(); }
  bool valid(int x, int y) const { return mask[static_cast<std::size_t>(y) * width + x] != 0; }
};

struct Intrinsics {
  double fu = 1.0;
  double fv = 1.0;
  double cu = 0.0;
  double cv = 0.0;
};

/// Distorts an image by inverse warping: each output pixel is treated as a
/// distorted coordinate, undistorted iteratively, and the source is sampled
/// bilinearly there. Pixels whose source falls outside the image are zeroed
/// and marked invalid.
Image warp_image(const Image& image, const Intrinsics& intrinsics,
                 const DistortionModel& model);

struct PixelRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;

  long long area() const { return static_cast<long long>(width) * height; }
  bool operator==(const PixelRect&) const = default;
};

/// Largest axis-aligned rectangle of valid pixels in a width x height mask.
/// Ties resolve to the first rectangle found scanning bottom edges top-down.
PixelRect maximal_valid_rectangle(std::span<const std::uint8_t> mask, int width, int height);

struct CropResult {
  Image image;
  int offset_x = 0;
  int offset_y = 0;

  /// Principal point shifted into the cropped image.
  Intrinsics shift(const Intrinsics& k) const {
    return {k.fu, k.fv, k.cu - offset_x, k.cv - offset_y};
  }
};

CropResult crop_valid(const Image& image);

/// Binary PGM (P5, 1 channel) / PPM (P6, 3 channels), maxval <= 255.
Image read_pnm(const std::filesystem::path& path);
/// Quantizes to 8 bits with round-to-nearest; invalid pixels written as 0.
void write_pnm(const std::filesystem::path& path, const Image& image);

}  // namespace lgc
