// AVX2 variant of the segment-distance kernel. Compiled with -mavx2 in its own
// translation unit; only entered after a runtime CPU check. The arithmetic
// mirrors the scalar kernel operation for operation (mul/add/min/max, no FMA),
// so each lane rounds exactly like the scalar loop and the horizontal min over
// lanes equals the sequential min over the same values.
#include "mdm/kernels.hpp"

#if defined(__x86_64__)

#include <immintrin.h>

#include <algorithm>
#include <limits>

namespace mdm::kern {

bool avx2_available() { return __builtin_cpu_supports("avx2"); }

__attribute__((target("avx2"))) double min_dist_sq_avx2(const SegSet& s,
                                                        double px, double py) {
    if (s.n == 0) return std::numeric_limits<double>::infinity();
    const __m256d vpx = _mm256_set1_pd(px);
    const __m256d vpy = _mm256_set1_pd(py);
    const __m256d zero = _mm256_setzero_pd();
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d best = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < s.n_padded; i += 4) {
        __m256d ax = _mm256_loadu_pd(&s.ax[i]);
        __m256d ay = _mm256_loadu_pd(&s.ay[i]);
        __m256d dx = _mm256_loadu_pd(&s.dx[i]);
        __m256d dy = _mm256_loadu_pd(&s.dy[i]);
        __m256d il = _mm256_loadu_pd(&s.inv_len2[i]);
        __m256d rx = _mm256_sub_pd(vpx, ax);
        __m256d ry = _mm256_sub_pd(vpy, ay);
        __m256d t = _mm256_mul_pd(
            _mm256_add_pd(_mm256_mul_pd(rx, dx), _mm256_mul_pd(ry, dy)), il);
        t = _mm256_min_pd(_mm256_max_pd(t, zero), one);
        __m256d ex = _mm256_sub_pd(rx, _mm256_mul_pd(t, dx));
        __m256d ey = _mm256_sub_pd(ry, _mm256_mul_pd(t, dy));
        __m256d d2 =
            _mm256_add_pd(_mm256_mul_pd(ex, ex), _mm256_mul_pd(ey, ey));
        best = _mm256_min_pd(best, d2);
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, best);
    return std::min(std::min(lanes[0], lanes[1]), std::min(lanes[2], lanes[3]));
}

}  // namespace mdm::kern

#endif
