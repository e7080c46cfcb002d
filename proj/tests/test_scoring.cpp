#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bkad/scoring.hpp"

namespace bkad {
namespace {

std::vector<Pos> all_positions(SegmentView seg) {
    std::vector<Pos> v(static_cast<std::size_t>(seg.size()));
    std::iota(v.begin(), v.end(), seg.start);
    return v;
}

TEST(Score, ZscoreDirectFormula) {
    // median 0, MAD 1 training; biweight would rescale, so use median/mad here
    const std::vector<double> training{-1, 0, 1, -2, 2, 0, -1, 1, 0};
    Rng rng(0);
    const std::vector<double> x{4.0};
    const auto ncm = Ncm::zscore(Location::median, Dispersion::mad);
    EXPECT_DOUBLE_EQ(score(ncm, training, 1, x, rng), 4.0);
    const std::vector<double> neg{-4.0};
    EXPECT_DOUBLE_EQ(score(ncm, training, 1, neg, rng), 4.0);
}

TEST(Score, KernelSelfConformity) {
    Rng rng(0);
    const std::vector<double> s{0.3}, x{0.3};
    EXPECT_NEAR(score(Ncm::kernel_score(KernelSpec::gaussian(1)), s, 1, x, rng), 0.0, 1e-15);
}

TEST(Score, KnownParameters) {
    const std::vector<double> x{3, 4}, mu{0, 0}, cov{1, 0, 0, 1};
    EXPECT_DOUBLE_EQ(score_known(x, mu, cov), 5.0);
    const std::vector<double> x1{5}, mu1{1}, var1{4};
    EXPECT_DOUBLE_EQ(score_known(x1, mu1, var1), 2.0);
}

TEST(Score, KnnZeroDistance) {
    Rng rng(0);
    const std::vector<double> training(150, 2.5), x{2.5};
    EXPECT_EQ(score(Ncm::knn(10, 100), training, 1, x, rng), 0.0);
}

TEST(Score, KnnMatchesBruteForce) {
    Rng rng(1);
    std::vector<double> training(2 * 100);
    for (auto& v : training) v = rng.normal();
    const std::vector<double> x{0.4, -0.2};
    std::vector<double> d;
    for (int i = 0; i < 100; ++i) d.push_back(std::hypot(training[2 * i] - x[0], training[2 * i + 1] - x[1]));
    std::sort(d.begin(), d.end());
    const double ref = std::accumulate(d.begin(), d.begin() + 10, 0.0) / 10.0;
    EXPECT_NEAR(score(Ncm::knn(10, 100), training, 2, x, rng), ref, 1e-12);
}

TEST(Score, Validation) {
    EXPECT_THROW(Ncm::knn(10, 5).validate(), ValidationError);
    EXPECT_THROW(Ncm::knn(0, 100).validate(), ValidationError);
    Rng rng(0);
    const std::vector<double> t{1, 2}, x{1, 2};
    EXPECT_THROW(score(Ncm::zscore(), t, 1, x, rng), ValidationError);
}

TEST(ScoreSegment, ConstantSegmentScoresZero) {
    const auto s = TimeSeries::univariate(std::vector<double>(20, 1.5));
    Rng rng(0);
    for (auto d : {Dispersion::mle_std, Dispersion::mad, Dispersion::biweight}) {
        const auto out = score_segment(Ncm::zscore(Location::median, d), s, {1, 20}, rng);
        for (double v : out) EXPECT_EQ(v, 0.0);
    }
}

TEST(ScoreSegment, DeviationFromConstantGetsSentinel) {
    std::vector<double> xs(20, 1.5);
    xs[7] = 3.0;
    const auto s = TimeSeries::univariate(xs);
    Rng rng(0);
    const auto out = score_segment(Ncm::zscore(Location::median, Dispersion::mad), s, {1, 20}, rng);
    EXPECT_EQ(out[7], kScoreSentinel);
    EXPECT_EQ(out[0], 0.0);
}

TEST(ScoreSegment, RobustOrdering) {
    const auto s = TimeSeries::univariate({0, 0, 10});
    Rng rng(0);
    const auto out = score_segment(Ncm::zscore(Location::median, Dispersion::mad), s, {1, 3}, rng);
    EXPECT_GT(out[2], out[0]);
}

TEST(ScoreSegment, FastMatchesNaive) {
    Rng data(2);
    std::vector<double> uni(60), bi(2 * 60);
    for (auto& v : uni) v = data.normal();
    for (auto& v : bi) v = data.normal();
    uni[10] = 5.0;
    const auto s1 = TimeSeries::univariate(uni);
    const auto s2 = TimeSeries(2, bi);
    const SegmentView seg{5, 55};
    const auto pos = all_positions(seg);
    std::vector<std::pair<Ncm, const TimeSeries*>> cases;
    for (auto l : {Location::mle_mean, Location::median, Location::biweight})
        for (auto d : {Dispersion::mle_std, Dispersion::mad, Dispersion::biweight}) cases.push_back({Ncm::zscore(l, d), &s1});
    cases.push_back({Ncm::kernel_score(KernelSpec::gaussian(0.8)), &s1});
    cases.push_back({Ncm::kernel_score(KernelSpec::combo({{0.5, KernelSpec::gaussian(1)}, {0.5, KernelSpec::gaussian(10)}})), &s2});
    cases.push_back({Ncm::mahalanobis(), &s2});
    cases.push_back({Ncm::knn(5, 60), &s1});
    cases.push_back({Ncm::knn(5, 60), &s2});
    for (const auto& [ncm, s] : cases) {
        Rng r1(3), r2(3);
        const auto fast = score_segment(ncm, *s, seg, pos, r1);
        const auto naive = score_segment_naive(ncm, *s, seg, pos, r2);
        ASSERT_EQ(fast.size(), naive.size());
        for (std::size_t i = 0; i < fast.size(); ++i)
            EXPECT_NEAR(fast[i], naive[i], 1e-9 * (1.0 + std::abs(naive[i]))) << ncm.name() << " i=" << i;
    }
}

TEST(ScoreSegment, PlantedSpikeHasMaximumScore) {
    int ok[4] = {0, 0, 0, 0};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        std::vector<double> uni(200), bi(400);
        for (auto& v : uni) v = rng.normal();
        for (auto& v : bi) v = rng.normal();
        const auto planted = static_cast<std::size_t>(rng.uniform_int(0, 199));
        uni[planted] = rng.bernoulli(0.5) ? 4.0 : -4.0;
        bi[2 * planted] = 4.0;
        bi[2 * planted + 1] = 4.0;
        const auto s1 = TimeSeries::univariate(uni);
        const auto s2 = TimeSeries(2, bi);
        const SegmentView seg{1, 200};
        const Ncm ncms[4] = {Ncm::zscore(), Ncm::knn(), Ncm::kernel_score(KernelSpec::gaussian(1.0)), Ncm::mahalanobis()};
        for (int k = 0; k < 4; ++k) {
            const auto& s = (k == 3) ? s2 : s1;
            Rng r(seed + 1000);
            const auto sc = score_segment(ncms[k], s, seg, r);
            ok[k] += static_cast<std::size_t>(std::max_element(sc.begin(), sc.end()) - sc.begin()) == planted;
        }
    }
    for (int k = 0; k < 4; ++k) EXPECT_GE(ok[k], 48) << "ncm " << k;
}

TEST(ScoreSegment, ZscoreAffineInvariance) {
    Rng rng(4);
    std::vector<double> xs(80);
    for (auto& v : xs) v = rng.normal();
    std::vector<double> ys(xs);
    for (auto& v : ys) v = 3.5 * v - 7.0;
    Rng r(0);
    const auto a = score_segment(Ncm::zscore(), TimeSeries::univariate(xs), {1, 80}, r);
    const auto b = score_segment(Ncm::zscore(), TimeSeries::univariate(ys), {1, 80}, r);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12 * (1 + a[i]));
}

TEST(ScoreSegment, TranslationKeepsKnnAndKernelRanks) {
    Rng rng(5);
    std::vector<double> xs(120);
    for (auto& v : xs) v = rng.normal();
    std::vector<double> ys(xs);
    for (auto& v : ys) v += 11.0;
    for (const auto& ncm : {Ncm::knn(), Ncm::kernel_score(KernelSpec::gaussian(1))}) {
        Rng r1(6), r2(6);
        const auto a = score_segment(ncm, TimeSeries::univariate(xs), {1, 120}, r1);
        const auto b = score_segment(ncm, TimeSeries::univariate(ys), {1, 120}, r2);
        std::vector<std::size_t> ia(a.size()), ib(b.size());
        std::iota(ia.begin(), ia.end(), 0);
        std::iota(ib.begin(), ib.end(), 0);
        std::stable_sort(ia.begin(), ia.end(), [&](auto i, auto j) { return a[i] < a[j]; });
        std::stable_sort(ib.begin(), ib.end(), [&](auto i, auto j) { return b[i] < b[j]; });
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[ia[i]], b[ib[i]], 1e-9);
    }
}

TEST(ScoreSegment, KnnIsDeterministicPerSeed) {
    Rng rng(7);
    std::vector<double> xs(300);
    for (auto& v : xs) v = rng.normal();
    const auto s = TimeSeries::univariate(xs);
    Rng r1(9), r2(9);
    EXPECT_EQ(score_segment(Ncm::knn(), s, {1, 300}, r1), score_segment(Ncm::knn(), s, {1, 300}, r2));
}

}  // namespace
}  // namespace bkad
