#pragma once

#include "lgc/kernels.hpp"

namespace lgc::kernels::detail {

// Defined in kernels_avx2.cpp; only called after the CPU check passes.
const KernelTable* avx2_table_unchecked();

}  // namespace lgc::kernels::detail
