#include <cstdlib>
#include <cstring>
#include <limits>

#include "bkad/simd.hpp"

namespace bkad::simd {

namespace {

void block_update(double* s, const double* col, double diag, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) s[i] += 2.0 * col[i] + diag;
}

void cost(double* out, const double* s, const double* prefix, const double* len, double total, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = (total - prefix[i]) - s[i] / len[i];
}

ArgMin min_plus(const double* a, const double* b, std::size_t n) {
    ArgMin best{std::numeric_limits<double>::infinity(), n};
    for (std::size_t i = 0; i < n; ++i) {
        double v = a[i] + b[i];
        if (v < best.value) best = {v, i};
    }
    return best;
}

void sq_dist(double* out, const double* xs, const double* y, std::size_t n, std::size_t dim) {
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            double diff = xs[i * dim + d] - y[d];
            acc += diff * diff;
        }
        out[i] = acc;
    }
}

}  // namespace

#if defined(BKAD_HAVE_AVX2)
const Kernels* avx2_impl();
#endif

const Kernels& scalar() {
    static const Kernels k{"scalar", block_update, cost, min_plus, sq_dist};
    return k;
}

const Kernels* avx2() {
#if defined(BKAD_HAVE_AVX2)
    if (__builtin_cpu_supports("avx2")) return avx2_impl();
#endif
    return nullptr;
}

const Kernels& active() {
    static const Kernels& chosen = [] () -> const Kernels& {
        const char* env = std::getenv("BKAD_SIMD");
        if (env != nullptr && std::strcmp(env, "scalar") == 0) return scalar();
        const Kernels* v = avx2();
        return v != nullptr ? *v : scalar();
    }();
    return chosen;
}

}  // namespace bkad::simd
