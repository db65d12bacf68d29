// Compiled with -mavx2 -mfma -ffp-contract=off. Mul/add sequences mirror the
// scalar reference operation for operation so distort, undistort and bilinear
// are bitwise-identical to it; only stereo_sq_residuals uses fused
// multiply-add.

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "kernels_internal.hpp"

namespace lgc::kernels {
namespace {

constexpr std::size_t kLanes = 4;

inline __m256d radial_factor(__m256d r2, __m256d k1, __m256d k2, __m256d k3) {
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc = _mm256_add_pd(k2, _mm256_mul_pd(r2, k3));
  acc = _mm256_add_pd(k1, _mm256_mul_pd(r2, acc));
  return _mm256_add_pd(one, _mm256_mul_pd(r2, acc));
}

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

inline __m256d is_finite(__m256d v) {
  return _mm256_cmp_pd(abs_pd(v), _mm256_set1_pd(std::numeric_limits<double>::infinity()),
                       _CMP_LT_OQ);
}

void distort(const RadialCoeffs& k, const double* x, const double* y, double* xd, double* yd,
             std::size_t n) {
  const __m256d k1 = _mm256_set1_pd(k.k1);
  const __m256d k2 = _mm256_set1_pd(k.k2);
  const __m256d k3 = _mm256_set1_pd(k.k3);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d vy = _mm256_loadu_pd(y + i);
    const __m256d r2 = _mm256_add_pd(_mm256_mul_pd(vx, vx), _mm256_mul_pd(vy, vy));
    const __m256d f = radial_factor(r2, k1, k2, k3);
    _mm256_storeu_pd(xd + i, _mm256_mul_pd(f, vx));
    _mm256_storeu_pd(yd + i, _mm256_mul_pd(f, vy));
  }
  scalar_kernels().distort(k, x + i, y + i, xd + i, yd + i, n - i);
}

void undistort(const RadialCoeffs& k, const double* xd, const double* yd, double* x,
               double* y, std::uint8_t* converged, std::size_t n, double tol, int max_iter) {
  const __m256d k1 = _mm256_set1_pd(k.k1);
  const __m256d k2 = _mm256_set1_pd(k.k2);
  const __m256d k3 = _mm256_set1_pd(k.k3);
  const __m256d vtol = _mm256_set1_pd(tol);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d tx = _mm256_loadu_pd(xd + i);
    const __m256d ty = _mm256_loadu_pd(yd + i);
    __m256d cx = tx;
    __m256d cy = ty;
    __m256d active = _mm256_castsi256_pd(_mm256_set1_epi64x(-1));
    __m256d ok = _mm256_setzero_pd();
    for (int it = 0; it < max_iter && _mm256_movemask_pd(active) != 0; ++it) {
      const __m256d r2 = _mm256_add_pd(_mm256_mul_pd(cx, cx), _mm256_mul_pd(cy, cy));
      const __m256d f = radial_factor(r2, k1, k2, k3);
      const __m256d nx = _mm256_div_pd(tx, f);
      const __m256d ny = _mm256_div_pd(ty, f);
      const __m256d step = _mm256_max_pd(abs_pd(_mm256_sub_pd(nx, cx)),
                                         abs_pd(_mm256_sub_pd(ny, cy)));
      cx = _mm256_blendv_pd(cx, nx, active);
      cy = _mm256_blendv_pd(cy, ny, active);
      const __m256d finite = _mm256_and_pd(is_finite(nx), is_finite(ny));
      const __m256d small = _mm256_cmp_pd(step, vtol, _CMP_LT_OQ);
      const __m256d live = _mm256_and_pd(active, finite);
      ok = _mm256_or_pd(ok, _mm256_and_pd(live, small));
      active = _mm256_andnot_pd(small, live);
    }
    _mm256_storeu_pd(x + i, cx);
    _mm256_storeu_pd(y + i, cy);
    const int bits = _mm256_movemask_pd(ok);
    for (std::size_t l = 0; l < kLanes; ++l) converged[i + l] = (bits >> l) & 1;
  }
  scalar_kernels().undistort(k, xd + i, yd + i, x + i, y + i, converged + i, n - i, tol,
                             max_iter);
}

void bilinear(const double* plane, int width, int height, const double* sx, const double* sy,
              double* out, std::uint8_t* valid, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d max_x = _mm256_set1_pd(width - 1);
  const __m256d max_y = _mm256_set1_pd(height - 1);
  const __m256d clamp_x = _mm256_set1_pd(width > 1 ? width - 2 : 0);
  const __m256d clamp_y = _mm256_set1_pd(height > 1 ? height - 2 : 0);
  const __m256d dx = _mm256_set1_pd(width > 1 ? 1.0 : 0.0);
  const __m256d dy = _mm256_set1_pd(height > 1 ? static_cast<double>(width) : 0.0);
  const __m256d vw = _mm256_set1_pd(width);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d u = _mm256_loadu_pd(sx + i);
    const __m256d v = _mm256_loadu_pd(sy + i);
    const __m256d in = _mm256_and_pd(
        _mm256_and_pd(_mm256_cmp_pd(u, zero, _CMP_GE_OQ), _mm256_cmp_pd(u, max_x, _CMP_LE_OQ)),
        _mm256_and_pd(_mm256_cmp_pd(v, zero, _CMP_GE_OQ), _mm256_cmp_pd(v, max_y, _CMP_LE_OQ)));
    const __m256d us = _mm256_blendv_pd(zero, u, in);
    const __m256d vs = _mm256_blendv_pd(zero, v, in);
    const __m256d x0 = _mm256_min_pd(_mm256_floor_pd(us), clamp_x);
    const __m256d y0 = _mm256_min_pd(_mm256_floor_pd(vs), clamp_y);
    const __m256d fx = _mm256_sub_pd(us, x0);
    const __m256d fy = _mm256_sub_pd(vs, y0);
    const __m256d base = _mm256_add_pd(_mm256_mul_pd(y0, vw), x0);
    const __m128i i00 = _mm256_cvttpd_epi32(base);
    const __m128i i01 = _mm256_cvttpd_epi32(_mm256_add_pd(base, dx));
    const __m128i i10 = _mm256_cvttpd_epi32(_mm256_add_pd(base, dy));
    const __m128i i11 = _mm256_cvttpd_epi32(_mm256_add_pd(_mm256_add_pd(base, dy), dx));
    const __m256d p00 = _mm256_mask_i32gather_pd(zero, plane, i00, in, 8);
    const __m256d p01 = _mm256_mask_i32gather_pd(zero, plane, i01, in, 8);
    const __m256d p10 = _mm256_mask_i32gather_pd(zero, plane, i10, in, 8);
    const __m256d p11 = _mm256_mask_i32gather_pd(zero, plane, i11, in, 8);
    const __m256d gx = _mm256_sub_pd(one, fx);
    const __m256d top = _mm256_add_pd(_mm256_mul_pd(gx, p00), _mm256_mul_pd(fx, p01));
    const __m256d bottom = _mm256_add_pd(_mm256_mul_pd(gx, p10), _mm256_mul_pd(fx, p11));
    const __m256d value = _mm256_add_pd(_mm256_mul_pd(_mm256_sub_pd(one, fy), top),
                                        _mm256_mul_pd(fy, bottom));
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(zero, value, in));
    const int bits = _mm256_movemask_pd(in);
    for (std::size_t l = 0; l < kLanes; ++l) valid[i + l] = (bits >> l) & 1;
  }
  scalar_kernels().bilinear(plane, width, height, sx + i, sy + i, out + i, valid + i, n - i);
}

void stereo_sq_residuals(const StereoIntrinsics& cam, const RigidMotion& m, const double* px,
                         const double* py, const double* pz, const double* ul,
                         const double* vl, const double* ur, double* sq_err, std::size_t n) {
  __m256d r[9];
  for (int j = 0; j < 9; ++j) r[j] = _mm256_set1_pd(m.r[j]);
  const __m256d tx = _mm256_set1_pd(m.t[0]);
  const __m256d ty = _mm256_set1_pd(m.t[1]);
  const __m256d tz = _mm256_set1_pd(m.t[2]);
  const __m256d fu = _mm256_set1_pd(cam.fu);
  const __m256d fv = _mm256_set1_pd(cam.fv);
  const __m256d cu = _mm256_set1_pd(cam.cu);
  const __m256d cv = _mm256_set1_pd(cam.cv);
  const __m256d b = _mm256_set1_pd(cam.baseline);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d x = _mm256_loadu_pd(px + i);
    const __m256d y = _mm256_loadu_pd(py + i);
    const __m256d z = _mm256_loadu_pd(pz + i);
    const __m256d qx = _mm256_fmadd_pd(r[0], x, _mm256_fmadd_pd(r[1], y, _mm256_fmadd_pd(r[2], z, tx)));
    const __m256d qy = _mm256_fmadd_pd(r[3], x, _mm256_fmadd_pd(r[4], y, _mm256_fmadd_pd(r[5], z, ty)));
    const __m256d qz = _mm256_fmadd_pd(r[6], x, _mm256_fmadd_pd(r[7], y, _mm256_fmadd_pd(r[8], z, tz)));
    const __m256d front = _mm256_cmp_pd(qz, zero, _CMP_GT_OQ);
    const __m256d inv_z = _mm256_div_pd(one, qz);
    const __m256d eu = _mm256_sub_pd(_mm256_loadu_pd(ul + i),
                                     _mm256_fmadd_pd(_mm256_mul_pd(fu, qx), inv_z, cu));
    const __m256d ev = _mm256_sub_pd(_mm256_loadu_pd(vl + i),
                                     _mm256_fmadd_pd(_mm256_mul_pd(fv, qy), inv_z, cv));
    const __m256d er = _mm256_sub_pd(
        _mm256_loadu_pd(ur + i),
        _mm256_fmadd_pd(_mm256_mul_pd(fu, _mm256_sub_pd(qx, b)), inv_z, cu));
    const __m256d sq = _mm256_fmadd_pd(eu, eu, _mm256_fmadd_pd(ev, ev, _mm256_mul_pd(er, er)));
    _mm256_storeu_pd(sq_err + i, _mm256_blendv_pd(inf, sq, front));
  }
  scalar_kernels().stereo_sq_residuals(cam, m, px + i, py + i, pz + i, ul + i, vl + i, ur + i,
                                       sq_err + i, n - i);
}

}  // namespace

namespace detail {

const KernelTable* avx2_table_unchecked() {
  static const KernelTable table{"avx2", &distort, &undistort, &bilinear,
                                 &stereo_sq_residuals};
  return &table;
}

}  // namespace detail
}  // namespace lgc::kernels
