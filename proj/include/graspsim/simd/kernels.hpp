#pragma once
// Data-parallel inner loops with a scalar reference and vectorized variants.
//
// Every variant performs the same IEEE operations in the same order (no FMA
// contraction), so results are bit-identical across variants. The active
// variant is picked once at startup from CPUID; set GRASPSIM_SIMD=scalar to
// force the reference path.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace graspsim::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

/// Structure-of-arrays view over triangles: vertex indices into an interleaved
/// xy coordinate array and the row-major inverse rest shape matrix.
struct TriangleBatch {
  std::span<const std::int32_t> v0, v1, v2;
  std::span<const double> dm00, dm01, dm10, dm11;
  std::size_t size() const { return v0.size(); }
};

/// Structure-of-arrays view over point/segment triples.
struct PointEdgeBatch {
  std::span<const double> px, py, ax, ay, bx, by;
  std::size_t size() const { return px.size(); }
};

/// For each triangle: F = Ds * Dm^-1, writes tr(F^T F) and det F.
using InvariantsFn = void (*)(const double* xy, const TriangleBatch& tris, double* trace_ftf,
                              double* det_f);

/// For each triple: squared distance from p to segment ab, the clamped closest
/// point parameter t in [0,1], and the orientation cross((b-a),(p-a)).
/// Segments must be non-degenerate.
using PointEdgeFn = void (*)(const PointEdgeBatch& batch, double* dist2, double* t, double* side);

struct KernelTable {
  Isa isa;
  InvariantsFn invariants;
  PointEdgeFn point_edge;
};

bool cpu_supports(Isa isa);

/// Kernels for a specific ISA; throws graspsim::Error if the CPU lacks it.
const KernelTable& kernels_for(Isa isa);

/// Kernels selected at runtime (best supported ISA unless overridden).
const KernelTable& kernels();

namespace detail {
void invariants_scalar(const double* xy, const TriangleBatch& tris, double* trace_ftf, double* det_f);
void point_edge_scalar(const PointEdgeBatch& batch, double* dist2, double* t, double* side);
#if defined(__x86_64__) || defined(_M_X64)
void invariants_avx2(const double* xy, const TriangleBatch& tris, double* trace_ftf, double* det_f);
void point_edge_avx2(const PointEdgeBatch& batch, double* dist2, double* t, double* side);
#endif
}  // namespace detail

}  // namespace graspsim::simd
