#include <cmath>
#include <limits>

#include "kernels_internal.hpp"

namespace lgc::kernels {
namespace {

inline double radial_factor(const RadialCoeffs& k, double r2) {
  return 1.0 + r2 * (k.k1 + r2 * (k.k2 + r2 * k.k3));
}

void distort(const RadialCoeffs& k, const double* x, const double* y, double* xd, double* yd,
             std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double r2 = x[i] * x[i] + y[i] * y[i];
    const double f = radial_factor(k, r2);
    xd[i] = f * x[i];
    yd[i] = f * y[i];
  }
}

void undistort(const RadialCoeffs& k, const double* xd, const double* yd, double* x,
               double* y, std::uint8_t* converged, std::size_t n, double tol, int max_iter) {
  for (std::size_t i = 0; i < n; ++i) {
    double cx = xd[i];
    double cy = yd[i];
    std::uint8_t ok = 0;
    for (int it = 0; it < max_iter; ++it) {
      const double r2 = cx * cx + cy * cy;
      const double f = radial_factor(k, r2);
      const double nx = xd[i] / f;
      const double ny = yd[i] / f;
      const double step = std::fmax(std::fabs(nx - cx), std::fabs(ny - cy));
      cx = nx;
      cy = ny;
      if (!(std::isfinite(cx) && std::isfinite(cy))) break;
      if (step < tol) {
        ok = 1;
        break;
      }
    }
    x[i] = cx;
    y[i] = cy;
    converged[i] = ok;
  }
}

void bilinear(const double* plane, int width, int height, const double* sx, const double* sy,
              double* out, std::uint8_t* valid, std::size_t n) {
  const double max_x = width - 1;
  const double max_y = height - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = sx[i];
    const double v = sy[i];
    if (!(u >= 0.0 && u <= max_x && v >= 0.0 && v <= max_y)) {
      out[i] = 0.0;
      valid[i] = 0;
      continue;
    }
    int x0 = static_cast<int>(u);
    int y0 = static_cast<int>(v);
    if (x0 > width - 2) x0 = width > 1 ? width - 2 : 0;
    if (y0 > height - 2) y0 = height > 1 ? height - 2 : 0;
    const int x1 = width > 1 ? x0 + 1 : x0;
    const int y1 = height > 1 ? y0 + 1 : y0;
    const double fx = u - x0;
    const double fy = v - y0;
    const double* row0 = plane + static_cast<std::size_t>(y0) * width;
    const double* row1 = plane + static_cast<std::size_t>(y1) * width;
    const double top = (1.0 - fx) * row0[x0] + fx * row0[x1];
    const double bottom = (1.0 - fx) * row1[x0] + fx * row1[x1];
    out[i] = (1.0 - fy) * top + fy * bottom;
    valid[i] = 1;
  }
}

void stereo_sq_residuals(const StereoIntrinsics& cam, const RigidMotion& m, const double* px,
                         const double* py, const double* pz, const double* ul,
                         const double* vl, const double* ur, double* sq_err, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double qx = m.r[0] * px[i] + m.r[1] * py[i] + m.r[2] * pz[i] + m.t[0];
    const double qy = m.r[3] * px[i] + m.r[4] * py[i] + m.r[5] * pz[i] + m.t[1];
    const double qz = m.r[6] * px[i] + m.r[7] * py[i] + m.r[8] * pz[i] + m.t[2];
    if (!(qz > 0.0)) {
      sq_err[i] = std::numeric_limits<double>::infinity();
      continue;
    }
    const double inv_z = 1.0 / qz;
    const double eu = ul[i] - (cam.fu * qx * inv_z + cam.cu);
    const double ev = vl[i] - (cam.fv * qy * inv_z + cam.cv);
    const double er = ur[i] - (cam.fu * (qx - cam.baseline) * inv_z + cam.cu);
    sq_err[i] = eu * eu + ev * ev + er * er;
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", &distort, &undistort, &bilinear,
                                 &stereo_sq_residuals};
  return table;
}

}  // namespace lgc::kernels
