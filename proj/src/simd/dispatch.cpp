#include <cstdlib>
#include <string_view>

#include "a2d/simd/kernels.hpp"

namespace a2d::simd {

#if !defined(A2D_HAVE_AVX2)
const KernelTable* avx2_kernels() { return nullptr; }
#endif

#if !defined(A2D_HAVE_NEON)
const KernelTable* neon_kernels() { return nullptr; }
#endif

namespace {

const KernelTable& choose() {
  const char* forced = std::getenv("A2D_SIMD");
  if (forced != nullptr && std::string_view(forced) == "scalar") return scalar_kernels();
  if (const KernelTable* t = avx2_kernels()) return *t;
  if (const KernelTable* t = neon_kernels()) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = choose();
  return table;
}

}  // namespace a2d::simd
