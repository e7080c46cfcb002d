#include <immintrin.h>

#include <limits>

#include "bkad/simd.hpp"

namespace bkad::simd {

namespace {

void block_update(double* s, const double* col, double diag, std::size_t n) {
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d dg = _mm256_set1_pd(diag);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        // (2*col + diag) then add to s, matching the scalar association
        __m256d t = _mm256_add_pd(_mm256_mul_pd(two, _mm256_loadu_pd(col + i)), dg);
        _mm256_storeu_pd(s + i, _mm256_add_pd(_mm256_loadu_pd(s + i), t));
    }
    for (; i < n; ++i) s[i] += 2.0 * col[i] + diag;
}

void cost(double* out, const double* s, const double* prefix, const double* len, double total, std::size_t n) {
    const __m256d tot = _mm256_set1_pd(total);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d a = _mm256_sub_pd(tot, _mm256_loadu_pd(prefix + i));
        __m256d b = _mm256_div_pd(_mm256_loadu_pd(s + i), _mm256_loadu_pd(len + i));
        _mm256_storeu_pd(out + i, _mm256_sub_pd(a, b));
    }
    for (; i < n; ++i) out[i] = (total - prefix[i]) - s[i] / len[i];
}

ArgMin min_plus(const double* a, const double* b, std::size_t n) {
    const double inf = std::numeric_limits<double>::infinity();
    __m256d best = _mm256_set1_pd(inf);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        best = _mm256_min_pd(best, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, best);
    double m = inf;
    for (double v : lanes) m = v < m ? v : m;
    for (std::size_t j = i; j < n; ++j) {
        double v = a[j] + b[j];
        m = v < m ? v : m;
    }
    if (!(m < inf)) return {inf, n};
    // second pass locates the first index attaining the minimum
    const __m256d target = _mm256_set1_pd(m);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        __m256d v = _mm256_add_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j));
        int mask = _mm256_movemask_pd(_mm256_cmp_pd(v, target, _CMP_EQ_OQ));
        if (mask != 0) return {m, j + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)))};
    }
    for (; j < n; ++j)
        if (a[j] + b[j] == m) return {m, j};
    return {m, n};
}

void sq_dist(double* out, const double* xs, const double* y, std::size_t n, std::size_t dim) {
    if (dim != 1) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                double diff = xs[i * dim + d] - y[d];
                acc += diff * diff;
            }
            out[i] = acc;
        }
        return;
    }
    const __m256d yv = _mm256_set1_pd(y[0]);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(xs + i), yv);
        // 0.0 + d*d keeps the scalar accumulation order
        _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_setzero_pd(), _mm256_mul_pd(d, d)));
    }
    for (; i < n; ++i) {
        double d = xs[i] - y[0];
        out[i] = 0.0 + d * d;
    }
}

}  // namespace

const Kernels* avx2_impl() {
    static const Kernels k{"avx2", block_update, cost, min_plus, sq_dist};
    return &k;
}

}  // namespace bkad::simd
