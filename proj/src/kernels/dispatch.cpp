#include <cstdlib>
#include <cstring>

#include "kernels_internal.hpp"

namespace lgc::kernels {
namespace {

bool cpu_has_avx2_fma() {
#if defined(LGC_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

bool scalar_forced() {
  const char* v = std::getenv("LGC_FORCE_SCALAR");
  return v != nullptr && std::strcmp(v, "") != 0 && std::strcmp(v, "0") != 0;
}

}  // namespace

const KernelTable* avx2_kernels() {
#if defined(LGC_HAVE_AVX2)
  static const bool ok = cpu_has_avx2_fma();
  return ok ? detail::avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

Isa active_isa() {
  static const Isa isa = (!scalar_forced() && avx2_kernels() != nullptr) ? Isa::kAvx2
                                                                          : Isa::kScalar;
  return isa;
}

const KernelTable& active_kernels() {
  return active_isa() == Isa::kAvx2 ? *avx2_kernels() : scalar_kernels();
}

const char* isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

}  // namespace lgc::kernels
