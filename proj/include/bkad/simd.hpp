#pragma once

#include <cstddef>

// Inner loops of the changepoint dynamic program. Every variant performs the
// same elementwise IEEE operations in the same order, so results are bit-identical.
namespace bkad::simd {

struct ArgMin {
    double value;
    std::size_t index;
};

// S[i] += 2 * col[i] + diag, for i in [0, n)
using BlockUpdateFn = void (*)(double* s, const double* col, double diag, std::size_t n);
// cost[i] = (total - prefix[i]) - s[i] / len[i]
using CostFn = void (*)(double* cost, const double* s, const double* prefix, const double* len,
                        double total, std::size_t n);
// min_i a[i] + b[i]; first index wins on ties; {inf, n} when n == 0
using MinPlusFn = ArgMin (*)(const double* a, const double* b, std::size_t n);
// out[i] = sum_d (xs[i*dim+d] - y[d])^2
using SqDistFn = void (*)(double* out, const double* xs, const double* y, std::size_t n, std::size_t dim);

struct Kernels {
    const char* name;
    BlockUpdateFn block_update;
    CostFn cost;
    MinPlusFn min_plus;
    SqDistFn sq_dist;
};

const Kernels& scalar();
// nullptr when the binary or the CPU lacks AVX2.
const Kernels* avx2();
// Chosen once at startup; BKAD_SIMD=scalar forces the reference kernels.
const Kernels& active();

}  // namespace bkad::simd
