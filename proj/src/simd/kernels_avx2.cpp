// Compiled with -mavx2 (and without -mfma). Only reached after a CPUID check.
#include "graspsim/simd/kernels.hpp"

#include <immintrin.h>

namespace graspsim::simd::detail {

namespace {

inline __m256d gather(const double* xy, __m128i idx2, int offset) {
  return _mm256_i32gather_pd(xy + offset, idx2, 8);
}

}  // namespace

void invariants_avx2(const double* xy, const TriangleBatch& tris, double* trace_ftf, double* det_f) {
  const std::size_t n = tris.size();
  std::size_t e = 0;
  for (; e + 4 <= n; e += 4) {
    const __m128i i0 = _mm_slli_epi32(_mm_loadu_si128(reinterpret_cast<const __m128i*>(&tris.v0[e])), 1);
    const __m128i i1 = _mm_slli_epi32(_mm_loadu_si128(reinterpret_cast<const __m128i*>(&tris.v1[e])), 1);
    const __m128i i2 = _mm_slli_epi32(_mm_loadu_si128(reinterpret_cast<const __m128i*>(&tris.v2[e])), 1);
    const __m256d x0 = gather(xy, i0, 0), y0 = gather(xy, i0, 1);
    const __m256d x1 = gather(xy, i1, 0), y1 = gather(xy, i1, 1);
    const __m256d x2 = gather(xy, i2, 0), y2 = gather(xy, i2, 1);
    const __m256d ds00 = _mm256_sub_pd(x1, x0), ds01 = _mm256_sub_pd(x2, x0);
    const __m256d ds10 = _mm256_sub_pd(y1, y0), ds11 = _mm256_sub_pd(y2, y0);
    const __m256d dm00 = _mm256_loadu_pd(&tris.dm00[e]), dm01 = _mm256_loadu_pd(&tris.dm01[e]);
    const __m256d dm10 = _mm256_loadu_pd(&tris.dm10[e]), dm11 = _mm256_loadu_pd(&tris.dm11[e]);
    const __m256d f00 = _mm256_add_pd(_mm256_mul_pd(ds00, dm00), _mm256_mul_pd(ds01, dm10));
    const __m256d f01 = _mm256_add_pd(_mm256_mul_pd(ds00, dm01), _mm256_mul_pd(ds01, dm11));
    const __m256d f10 = _mm256_add_pd(_mm256_mul_pd(ds10, dm00), _mm256_mul_pd(ds11, dm10));
    const __m256d f11 = _mm256_add_pd(_mm256_mul_pd(ds10, dm01), _mm256_mul_pd(ds11, dm11));
    __m256d tr = _mm256_add_pd(_mm256_mul_pd(f00, f00), _mm256_mul_pd(f01, f01));
    tr = _mm256_add_pd(tr, _mm256_mul_pd(f10, f10));
    tr = _mm256_add_pd(tr, _mm256_mul_pd(f11, f11));
    const __m256d det = _mm256_sub_pd(_mm256_mul_pd(f00, f11), _mm256_mul_pd(f01, f10));
    _mm256_storeu_pd(trace_ftf + e, tr);
    _mm256_storeu_pd(det_f + e, det);
  }
  if (e < n) {
    const TriangleBatch tail{tris.v0.subspan(e), tris.v1.subspan(e), tris.v2.subspan(e),
                             tris.dm00.subspan(e), tris.dm01.subspan(e), tris.dm10.subspan(e),
                             tris.dm11.subspan(e)};
    invariants_scalar(xy, tail, trace_ftf + e, det_f + e);
  }
}

void point_edge_avx2(const PointEdgeBatch& batch, double* dist2, double* t, double* side) {
  const std::size_t n = batch.size();
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ax = _mm256_loadu_pd(&batch.ax[i]), ay = _mm256_loadu_pd(&batch.ay[i]);
    const __m256d ex = _mm256_sub_pd(_mm256_loadu_pd(&batch.bx[i]), ax);
    const __m256d ey = _mm256_sub_pd(_mm256_loadu_pd(&batch.by[i]), ay);
    const __m256d qx = _mm256_sub_pd(_mm256_loadu_pd(&batch.px[i]), ax);
    const __m256d qy = _mm256_sub_pd(_mm256_loadu_pd(&batch.py[i]), ay);
    const __m256d ee = _mm256_add_pd(_mm256_mul_pd(ex, ex), _mm256_mul_pd(ey, ey));
    const __m256d qe = _mm256_add_pd(_mm256_mul_pd(qx, ex), _mm256_mul_pd(qy, ey));
    __m256d s = _mm256_div_pd(qe, ee);
    s = _mm256_max_pd(s, zero);
    s = _mm256_min_pd(s, one);
    const __m256d rx = _mm256_sub_pd(qx, _mm256_mul_pd(s, ex));
    const __m256d ry = _mm256_sub_pd(qy, _mm256_mul_pd(s, ey));
    _mm256_storeu_pd(dist2 + i, _mm256_add_pd(_mm256_mul_pd(rx, rx), _mm256_mul_pd(ry, ry)));
    _mm256_storeu_pd(t + i, s);
    _mm256_storeu_pd(side + i, _mm256_sub_pd(_mm256_mul_pd(ex, qy), _mm256_mul_pd(ey, qx)));
  }
  if (i < n) {
    const PointEdgeBatch tail{batch.px.subspan(i), batch.py.subspan(i), batch.ax.subspan(i),
                              batch.ay.subspan(i), batch.bx.subspan(i), batch.by.subspan(i)};
    point_edge_scalar(tail, dist2 + i, t + i, side + i);
  }
}

}  // namespace graspsim::simd::detail
