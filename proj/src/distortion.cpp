#include "lgc/distortion.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "lgc/error.hpp"
#include "lgc/fileutil.hpp"
#include "lgc/parallel.hpp"

namespace lgc {
namespace {

// d/dr [r (1 + k1 r^2 + k2 r^4 + k3 r^6)]
double radial_slope(const kernels::RadialCoeffs& k, double r) {
  const double r2 = r * r;
  return 1.0 + r2 * (3.0 * k.k1 + r2 * (5.0 * k.k2 + r2 * 7.0 * k.k3));
}

// Snap coordinates within this distance of the image border onto it so that
// exact identity warps do not lose their last row/column to rounding.
constexpr double kBorderSnap = 1e-9;

}  // namespace

DistortionModel::DistortionModel(double k1, double k2, double k3) : coeffs_{k1, k2, k3} {
  if (!std::isfinite(k1) || !std::isfinite(k2) || !std::isfinite(k3)) {
    fail(Errc::kInvalidArgument, "DistortionModel: non-finite coefficient");
  }
  constexpr int kSteps = 4000;
  double prev = 0.0;
  for (int i = 1; i <= kSteps; ++i) {
    const double r = kSearchRadius * i / kSteps;
    if (radial_slope(coeffs_, r) <= 0.0) {
      double lo = prev;
      double hi = r;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (radial_slope(coeffs_, mid) > 0.0 ? lo : hi) = mid;
      }
      r_max_ = lo;
      rd_max_ = lo * radial_factor(lo * lo);
      return;
    }
    prev = r;
  }
}

Vec2 distort_normalized(const DistortionModel& model, const Vec2& xn) {
  return model.radial_factor(xn.squaredNorm()) * xn;
}

Vec2 undistort_normalized(const DistortionModel& model, const Vec2& xd,
                          const UndistortOptions& options) {
  if (!xd.allFinite()) fail(Errc::kInvalidArgument, "undistort_normalized: non-finite input");
  if (xd.norm() >= model.max_distorted_radius()) {
    fail(Errc::kDomain, "undistort_normalized: distorted radius " + std::to_string(xd.norm()) +
                            " is beyond the fold-over radius " +
                            std::to_string(model.max_distorted_radius()));
  }
  Vec2 out;
  std::uint8_t ok = 0;
  kernels::scalar_kernels().undistort(model.coeffs(), &xd.x(), &xd.y(), &out.x(), &out.y(), &ok,
                                      1, options.tol, options.max_iter);
  if (!ok) {
    fail(Errc::kNotConverged, "undistort_normalized: no convergence within " +
                                  std::to_string(options.max_iter) + " iterations");
  }
  return out;
}

void distort_normalized(const DistortionModel& model, std::span<const double> x,
                        std::span<const double> y, std::span<double> xd, std::span<double> yd) {
  const std::size_t n = x.size();
  if (y.size() != n || xd.size() != n || yd.size() != n) {
    fail(Errc::kInvalidArgument, "distort_normalized: span sizes differ");
  }
  kernels::active_kernels().distort(model.coeffs(), x.data(), y.data(), xd.data(), yd.data(), n);
}

void undistort_normalized(const DistortionModel& model, std::span<const double> xd,
                          std::span<const double> yd, std::span<double> x, std::span<double> y,
                          std::span<std::uint8_t> ok, const UndistortOptions& options) {
  const std::size_t n = xd.size();
  if (yd.size() != n || x.size() != n || y.size() != n || ok.size() != n) {
    fail(Errc::kInvalidArgument, "undistort_normalized: span sizes differ");
  }
  kernels::active_kernels().undistort(model.coeffs(), xd.data(), yd.data(), x.data(), y.data(),
                                      ok.data(), n, options.tol, options.max_iter);
  const double rd_max = model.max_distorted_radius();
  if (std::isfinite(rd_max)) {
    for (std::size_t i = 0; i < n; ++i) {
      if (std::hypot(xd[i], yd[i]) >= rd_max) ok[i] = 0;
    }
  }
}

// --- Images ----------------------------------------------------------------

Image Image::filled(int width, int height, int channels, double value) {
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3)) {
    fail(Errc::kInvalidArgument, "Image: bad dimensions");
  }
  Image img;
  img.width = width;
  img.height = height;
  img.channels = channels;
  img.samples.assign(static_cast<std::size_t>(channels) * width * height, value);
  img.mask.assign(static_cast<std::size_t>(width) * height, 1);
  return img;
}

Image warp_image(const Image& image, const Intrinsics& k, const DistortionModel& model) {
  if (!(k.fu > 0.0) || !(k.fv > 0.0)) fail(Errc::kInvalidArgument, "warp_image: bad intrinsics");
  if (model.is_identity()) {
    Image out = image;
    std::fill(out.mask.begin(), out.mask.end(), 1);
    return out;
  }
  Image out = Image::filled(image.width, image.height, image.channels, 0.0);
  const auto& kern = kernels::active_kernels();
  const int w = image.width;
  const double max_x = w - 1;
  const double max_y = image.height - 1;

  parallel_for(static_cast<std::size_t>(image.height), [&](std::size_t row) {
    std::vector<double> xd(w), yd(w, (static_cast<double>(row) - k.cv) / k.fv);
    for (int u = 0; u < w; ++u) xd[u] = (u - k.cu) / k.fu;
    std::vector<double> xn(w), yn(w), sx(w), sy(w), value(w);
    std::vector<std::uint8_t> converged(w), inside(w);
    undistort_normalized(model, xd, yd, xn, yn, converged);
    for (int u = 0; u < w; ++u) {
      double su = k.fu * xn[u] + k.cu;
      double sv = k.fv * yn[u] + k.cv;
      if (std::abs(su) < kBorderSnap) su = 0.0;
      if (std::abs(su - max_x) < kBorderSnap) su = max_x;
      if (std::abs(sv) < kBorderSnap) sv = 0.0;
      if (std::abs(sv - max_y) < kBorderSnap) sv = max_y;
      // Non-converged points are pushed out of bounds so they read invalid.
      sx[u] = converged[u] ? su : -1.0;
      sy[u] = converged[u] ? sv : -1.0;
    }
    std::uint8_t* mask_row = out.mask.data() + row * w;
    for (int c = 0; c < image.channels; ++c) {
      kern.bilinear(image.plane(c), w, image.height, sx.data(), sy.data(),
                    out.plane(c) + row * w, inside.data(), w);
    }
    std::copy(inside.begin(), inside.end(), mask_row);
  });
  return out;
}

PixelRect maximal_valid_rectangle(std::span<const std::uint8_t> mask, int width, int height) {
  if (mask.size() != static_cast<std::size_t>(width) * height) {
    fail(Errc::kInvalidArgument, "maximal_valid_rectangle: mask size mismatch");
  }
  PixelRect best;
  std::vector<int> heights(width, 0);
  std::vector<int> stack;
  stack.reserve(width + 1);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      heights[x] = mask[static_cast<std::size_t>(y) * width + x] ? heights[x] + 1 : 0;
    }
    // Largest rectangle in the histogram whose bars end on row y.
    stack.clear();
    for (int x = 0; x <= width; ++x) {
      const int h = x < width ? heights[x] : 0;
      while (!stack.empty() && heights[stack.back()] >= h) {
        const int top = heights[stack.back()];
        stack.pop_back();
        const int left = stack.empty() ? 0 : stack.back() + 1;
        const PixelRect cand{left, y - top + 1, x - left, top};
        if (cand.area() > best.area()) best = cand;
      }
      stack.push_back(x);
    }
  }
  return best;
}

CropResult crop_valid(const Image& image) {
  const PixelRect r = maximal_valid_rectangle(image.mask, image.width, image.height);
  if (r.area() == 0) fail(Errc::kInvalidArgument, "crop_valid: no valid pixels");
  CropResult out{Image::filled(r.width, r.height, image.channels, 0.0), r.x, r.y};
  for (int c = 0; c < image.channels; ++c) {
    for (int y = 0; y < r.height; ++y) {
      for (int x = 0; x < r.width; ++x) out.image.at(c, x, y) = image.at(c, r.x + x, r.y + y);
    }
  }
  return out;
}

// --- PNM I/O ---------------------------------------------------------------

namespace {

int read_header_int(std::istream& in, const std::string& path) {
  // Skips whitespace and '#' comments between header tokens.
  for (;;) {
    const int c = in.peek();
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int v = 0;
  if (!(in >> v)) fail(Errc::kParse, path + ": malformed PNM header");
  return v;
}

}  // namespace

Image read_pnm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::kIo, "cannot open image " + path.string());
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  int channels = 0;
  if (magic == "P5") {
    channels = 1;
  } else if (magic == "P6") {
    channels = 3;
  } else {
    fail(Errc::kParse, path.string() + ": not a binary PGM/PPM file");
  }
  const int width = read_header_int(in, path.string());
  const int height = read_header_int(in, path.string());
  const int maxval = read_header_int(in, path.string());
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    fail(Errc::kParse, path.string() + ": unsupported PNM dimensions or maxval");
  }
  in.get();  // single whitespace before raster
  std::vector<unsigned char> raster(static_cast<std::size_t>(width) * height * channels);
  in.read(reinterpret_cast<char*>(raster.data()), static_cast<std::streamsize>(raster.size()));
  if (in.gcount() != static_cast<std::streamsize>(raster.size())) {
    fail(Errc::kParse, path.string() + ": truncated raster");
  }
  Image img = Image::filled(width, height, channels, 0.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        img.at(c, x, y) =
            raster[(static_cast<std::size_t>(y) * width + x) * channels + c] / double(maxval);
      }
    }
  }
  return img;
}

void write_pnm(const std::filesystem::path& path, const Image& image) {
  if (image.channels != 1 && image.channels != 3) {
    fail(Errc::kInvalidArgument, "write_pnm: 1 or 3 channels required");
  }
  std::ostringstream out;
  out << (image.channels == 1 ? "P5" : "P6") << '\n'
      << image.width << ' ' << image.height << "\n255\n";
  std::string raster(static_cast<std::size_t>(image.width) * image.height * image.channels, '\0');
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        const double v = image.valid(x, y) ? std::clamp(image.at(c, x, y), 0.0, 1.0) : 0.0;
        raster[(static_cast<std::size_t>(y) * image.width + x) * image.channels + c] =
            static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
      }
    }
  }
  out << raster;
  write_file_atomic(path, out.str());
}

}  // namespace lgc
