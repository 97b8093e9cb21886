#include "graspsim/common.hpp"
#include "graspsim/simd/kernels.hpp"

#include <cstdlib>
#include <string>

namespace graspsim::simd {

namespace {

constexpr KernelTable kScalar{Isa::Scalar, &detail::invariants_scalar, &detail::point_edge_scalar};
#if defined(__x86_64__) || defined(_M_X64)
constexpr KernelTable kAvx2{Isa::Avx2, &detail::invariants_avx2, &detail::point_edge_avx2};
#endif

const KernelTable& select() {
  if (const char* env = std::getenv("GRASPSIM_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return kScalar;
  }
  if (cpu_supports(Isa::Avx2)) return kernels_for(Isa::Avx2);
  return kScalar;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& kernels_for(Isa isa) {
  if (!cpu_supports(isa)) throw Error("CPU does not support " + std::string(isa_name(isa)));
#if defined(__x86_64__) || defined(_M_X64)
  if (isa == Isa::Avx2) return kAvx2;
#endif
  return kScalar;
}

const KernelTable& kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace graspsim::simd
