#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "bkad/kernels.hpp"
#include "bkad/simd.hpp"

namespace bkad {
namespace {

double eval1(const KernelSpec& k, double x, double y) {
    const std::vector<double> a{x}, b{y};
    return eval(k, a, b);
}

TEST(Kernel, GaussianValues) {
    EXPECT_DOUBLE_EQ(eval1(KernelSpec::gaussian(1.0), 0.3, 0.3), 1.0);
    EXPECT_NEAR(eval1(KernelSpec::gaussian(2.0), 0.0, 2.0), std::exp(-0.5), 1e-15);
}

TEST(Kernel, CombinationAtZeroDistance) {
    auto k = KernelSpec::combo({{0.5, KernelSpec::gaussian(1)}, {0.5, KernelSpec::gaussian(100)}});
    EXPECT_DOUBLE_EQ(eval1(k, 1.5, 1.5), 1.0);
}

TEST(Kernel, Validation) {
    EXPECT_THROW(KernelSpec::gaussian(0.0).validate(), ValidationError);
    EXPECT_THROW(KernelSpec::gaussian(-1.0).validate(), ValidationError);
    EXPECT_THROW(KernelSpec::combo({{0.0, KernelSpec::gaussian(1)}}).validate(), ValidationError);
    EXPECT_THROW(KernelSpec::combo({}).validate(), ValidationError);
    const std::vector<double> a{1.0}, b{1.0, 2.0};
    EXPECT_THROW(eval(KernelSpec::gaussian(1), a, b), ValidationError);
}

TEST(Kernel, SymmetricAndDecreasing) {
    Rng rng(4);
    auto k = KernelSpec::combo({{0.5, KernelSpec::gaussian(0.7)}, {0.5, KernelSpec::gaussian(3)}});
    for (int i = 0; i < 200; ++i) {
        const double x = rng.normal(), y = rng.normal();
        EXPECT_EQ(eval1(k, x, y), eval1(k, y, x));
    }
    const auto g = KernelSpec::gaussian(1.3);
    double prev = 2.0;
    for (double d = 0.0; d < 5.0; d += 0.25) {
        const double v = eval1(g, 0.0, d);
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(Kernel, GramMatrixIsPositiveSemidefinite) {
    Rng rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 2 + static_cast<int>(rng.uniform_int(0, 18));
        std::vector<double> xs(2 * n);
        for (auto& v : xs) v = rng.normal(0, 2);
        auto k = KernelSpec::combo({{0.5, KernelSpec::gaussian(1)}, {0.5, KernelSpec::gaussian(10)}});
        Eigen::MatrixXd G(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) G(i, j) = eval(k, {xs.data() + 2 * i, 2}, {xs.data() + 2 * j, 2});
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
    }
}

TEST(Kernel, EvalColumnMatchesEval) {
    Rng rng(6);
    std::vector<double> xs(30);
    for (auto& v : xs) v = rng.normal();
    const std::vector<double> y{0.2, -0.4};
    auto k = KernelSpec::combo({{0.3, KernelSpec::gaussian(0.5)}, {0.7, KernelSpec::gaussian(2)}});
    std::vector<double> out(15);
    eval_column(k, xs, 2, y, out);
    for (int i = 0; i < 15; ++i) EXPECT_NEAR(out[i], eval(k, {xs.data() + 2 * i, 2}, y), 1e-14);
}

TEST(MedianHeuristic, SmallExamples) {
    Rng rng(0);
    EXPECT_DOUBLE_EQ(median_heuristic(TimeSeries::univariate({0, 1, 3}), rng), 2.0);
    EXPECT_DOUBLE_EQ(median_heuristic(TimeSeries::univariate({0, 7.5}), rng), 7.5);
    EXPECT_THROW(median_heuristic(TimeSeries::univariate({2, 2, 2}), rng), ValidationError);
    EXPECT_THROW(median_heuristic(TimeSeries::univariate({2}), rng), ValidationError);
}

TEST(MedianHeuristic, MatchesAllPairsAndSubsample) {
    Rng data(7);
    std::vector<double> xs(3000);
    for (auto& v : xs) v = data.normal();
    std::vector<double> d;
    for (std::size_t i = 0; i < 1000; ++i)
        for (std::size_t j = i + 1; j < 1000; ++j) d.push_back(std::abs(xs[i] - xs[j]));
    auto mid = d.begin() + static_cast<long>((d.size() + 1) / 2 - 1);
    std::nth_element(d.begin(), mid, d.end());
    Rng rng(1);
    const double exact = median_heuristic(std::span<const double>(xs.data(), 1000), 1, rng);
    EXPECT_DOUBLE_EQ(exact, *mid);
    const double sub = median_heuristic(std::span<const double>(xs), 1, rng, 500);
    EXPECT_NEAR(sub / exact, 1.0, 0.1);
}

TEST(KernelJson, RoundTripAndUnknownFields) {
    auto k = KernelSpec::combo({{0.5, KernelSpec::gaussian(1)}, {0.5, KernelSpec::gaussian(100)}});
    nlohmann::json j = k;
    EXPECT_EQ(j["kind"], "combo");
    KernelSpec back = j.get<KernelSpec>();
    EXPECT_EQ(back.gaussian_terms(), k.gaussian_terms());
    EXPECT_THROW(nlohmann::json({{"kind", "gaussian"}, {"h", 1.0}, {"x", 1}}).get<KernelSpec>(), ValidationError);
    EXPECT_THROW(nlohmann::json({{"kind", "laplace"}}).get<KernelSpec>(), ValidationError);
}

TEST(Simd, Avx2MatchesScalarBitForBit) {
    const auto* avx = simd::avx2();
    if (avx == nullptr) GTEST_SKIP() << "AVX2 not available";
    const auto& sc = simd::scalar();
    Rng rng(8);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 17u, 64u, 101u}) {
        std::vector<double> s(n), col(n), prefix(n), len(n), a(n), b(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = rng.normal();
            col[i] = rng.uniform();
            prefix[i] = rng.normal(5, 1);
            len[i] = static_cast<double>(i + 1);
            a[i] = rng.normal();
            b[i] = std::round(rng.normal() * 4) / 4;
        }
        auto s1 = s, s2 = s;
        sc.block_update(s1.data(), col.data(), 0.75, n);
        avx->block_update(s2.data(), col.data(), 0.75, n);
        EXPECT_EQ(s1, s2);

        std::vector<double> c1(n), c2(n);
        sc.cost(c1.data(), s1.data(), prefix.data(), len.data(), 12.5, n);
        avx->cost(c2.data(), s1.data(), prefix.data(), len.data(), 12.5, n);
        EXPECT_EQ(c1, c2);

        const auto m1 = sc.min_plus(a.data(), b.data(), n);
        const auto m2 = avx->min_plus(a.data(), b.data(), n);
        EXPECT_EQ(m1.index, m2.index);
        if (n > 0) EXPECT_EQ(m1.value, m2.value);

        for (std::size_t dim : {1u, 2u, 3u}) {
            std::vector<double> xs(n * dim), y(dim), o1(n), o2(n);
            for (auto& v : xs) v = rng.normal();
            for (auto& v : y) v = rng.normal();
            sc.sq_dist(o1.data(), xs.data(), y.data(), n, dim);
            avx->sq_dist(o2.data(), xs.data(), y.data(), n, dim);
            EXPECT_EQ(o1, o2);
        }
    }
}

TEST(Simd, MinPlusTiesPickFirstIndex) {
    const std::vector<double> a{3, 1, 2, 1, 1, 0.5, 0.5, 9, 1}, b{0, 1, 0, 1, 1, 1.5, 1.5, 0, 1};
    for (const auto* k : {&simd::scalar(), simd::avx2()}) {
        if (k == nullptr) continue;
        const auto r = k->min_plus(a.data(), b.data(), a.size());
        EXPECT_EQ(r.value, 2.0);
        EXPECT_EQ(r.index, 1u);
    }
}

}  // namespace
}  // namespace bkad
