#include "graspsim/simd/kernels.hpp"

#include <algorithm>

namespace graspsim::simd::detail {

void invariants_scalar(const double* xy, const TriangleBatch& tris, double* trace_ftf, double* det_f) {
  const std::size_t n = tris.size();
  for (std::size_t e = 0; e < n; ++e) {
    const double x0 = xy[2 * tris.v0[e]], y0 = xy[2 * tris.v0[e] + 1];
    const double x1 = xy[2 * tris.v1[e]], y1 = xy[2 * tris.v1[e] + 1];
    const double x2 = xy[2 * tris.v2[e]], y2 = xy[2 * tris.v2[e] + 1];
    const double ds00 = x1 - x0, ds01 = x2 - x0;
    const double ds10 = y1 - y0, ds11 = y2 - y0;
    const double f00 = ds00 * tris.dm00[e] + ds01 * tris.dm10[e];
    const double f01 = ds00 * tris.dm01[e] + ds01 * tris.dm11[e];
    const double f10 = ds10 * tris.dm00[e] + ds11 * tris.dm10[e];
    const double f11 = ds10 * tris.dm01[e] + ds11 * tris.dm11[e];
    trace_ftf[e] = f00 * f00 + f01 * f01 + f10 * f10 + f11 * f11;
    det_f[e] = f00 * f11 - f01 * f10;
  }
}

void point_edge_scalar(const PointEdgeBatch& batch, double* dist2, double* t, double* side) {
  const std::size_t n = batch.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double ex = batch.bx[i] - batch.ax[i];
    const double ey = batch.by[i] - batch.ay[i];
    const double qx = batch.px[i] - batch.ax[i];
    const double qy = batch.py[i] - batch.ay[i];
    const double ee = ex * ex + ey * ey;
    const double qe = qx * ex + qy * ey;
    // max/min argument order mirrors _mm256_max_pd/_mm256_min_pd.
    double s = qe / ee;
    s = s > 0.0 ? s : 0.0;
    s = s < 1.0 ? s : 1.0;
    const double rx = qx - s * ex;
    const double ry = qy - s * ey;
    dist2[i] = rx * rx + ry * ry;
    t[i] = s;
    side[i] = ex * qy - ey * qx;
  }
}

}  // namespace graspsim::simd::detail
