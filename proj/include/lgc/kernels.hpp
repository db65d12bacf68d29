#pragma once

// Data-parallel inner loops with a scalar reference implementation and an
// AVX2 variant. The variant is picked once at startup from CPUID; setting
// LGC_FORCE_SCALAR=1 in the environment pins the scalar table.
//
// All entry points take structure-of-arrays inputs of length n.

#include <cstddef>
#include <cstdint>
#include <span>

namespace lgc::kernels {

struct RadialCoeffs {
  double k1 = 0.0;
  double k2 = 0.0;
  double k3 = 0.0;
};

struct StereoIntrinsics {
  double fu = 1.0;
  double fv = 1.0;
  double cu = 0.0;
  double cv = 0.0;
  double baseline = 1.0;
};

// Row-major rotation and translation of q = R p + t.
struct RigidMotion {
  double r[9];
  double t[3];
};

struct KernelTable {
  const char* name;

  // (xd, yd) = (1 + k1 r^2 + k2 r^4 + k3 r^6) (x, y).
  void (*distort)(const RadialCoeffs& k, const double* x, const double* y, double* xd,
                  double* yd, std::size_t n);

  // Fixed-point inversion x <- xd / (1 + k1 r^2 + k2 r^4 + k3 r^6) from x = xd,
  // stopping once the max-coordinate step drops below tol. converged[i] is 0
  // when the iteration cap is hit or the iterate becomes non-finite.
  void (*undistort)(const RadialCoeffs& k, const double* xd, const double* yd, double* x,
                    double* y, std::uint8_t* converged, std::size_t n, double tol,
                    int max_iter);

  // Bilinear lookup into a row-major width x height plane. A sample is valid
  // iff 0 <= sx <= width-1 and 0 <= sy <= height-1; invalid samples read 0.
  void (*bilinear)(const double* plane, int width, int height, const double* sx,
                   const double* sy, double* out, std::uint8_t* valid, std::size_t n);

  // Squared norm of (ul, vl, ur) - stereo_project(R p + t). Points landing at
  // non-positive depth report +infinity.
  void (*stereo_sq_residuals)(const StereoIntrinsics& cam, const RigidMotion& motion,
                              const double* px, const double* py, const double* pz,
                              const double* ul, const double* vl, const double* ur,
                              double* sq_err, std::size_t n);
};

enum class Isa { kScalar, kAvx2 };

const KernelTable& scalar_kernels();
/// nullptr when not compiled in or the CPU lacks AVX2+FMA.
const KernelTable* avx2_kernels();
const KernelTable& active_kernels();
Isa active_isa();
const char* isa_name(Isa isa);

}  // namespace lgc::kernels
