#include <gtest/gtest.h>

#include <cmath>

#include "bkad/datagen.hpp"
#include "bkad/uncertainty.hpp"

namespace bkad {
namespace {

SegmentationHistory from_last(const std::vector<Pos>& last) {
    SegmentationHistory h;
    for (Pos b : last) {
        h.push_last(b);
        h.full.push_back(b > 0 ? std::vector<Pos>{b} : std::vector<Pos>{});
    }
    return h;
}

// Online-like history: the last boundary mostly stays, sometimes jumps forward
// to a recent position, sometimes falls back; full segmentations add older boundaries.
SegmentationHistory random_history(Pos T, Rng& rng) {
    SegmentationHistory h;
    Pos b = 0;
    std::vector<Pos> older;
    for (Pos t = 1; t <= T; ++t) {
        const double u = rng.uniform();
        if (u < 0.02 && t > 2) {
            older.push_back(b);
            b = std::max<Pos>(b, t - 1 - rng.uniform_int(0, std::min<Pos>(t - 2, 60)));
        } else if (u < 0.03 && !older.empty()) {
            b = older.back();
            older.pop_back();
        }
        if (b >= t) b = t - 1;
        h.push_last(b);
        std::vector<Pos> full;
        for (Pos o : older)
            if (o > 0 && o < b && rng.bernoulli(0.7)) full.push_back(o);
        std::sort(full.begin(), full.end());
        full.erase(std::unique(full.begin(), full.end()), full.end());
        if (b > 0) full.push_back(b);
        h.full.push_back(full);
    }
    return h;
}

TEST(RtValues, HandTrace) {
    const auto h = from_last({0, 0, 0, 2});
    EXPECT_EQ(r_naive(h), (std::vector<Pos>{0, 0, 1, 0}));
    EXPECT_EQ(r_efficient(h), (std::vector<Pos>{0, 0, 1, 0}));
    const auto r = r_efficient(h);
    const auto c = f_tau_from_r(r, 3);
    EXPECT_DOUBLE_EQ(c.p[0], 0.25);
    EXPECT_DOUBLE_EQ(c.p[1], 0.0);
    const auto e = f_tau_exact(h, 3);
    EXPECT_DOUBLE_EQ(e.p[0], 0.25);
    EXPECT_DOUBLE_EQ(e.p[1], 0.0);
}

TEST(RtValues, ConstantHistoryIsZero) {
    const auto h = from_last(std::vector<Pos>(50, 0));
    for (Pos r : r_efficient(h)) EXPECT_EQ(r, 0);
    const auto e = f_tau_exact(h, 10);
    for (double p : e.p) EXPECT_EQ(p, 0.0);
}

TEST(RtValues, NaiveEqualsEfficientOnLongHistory) {
    Rng rng(1);
    const auto h = random_history(10000, rng);
    const auto naive = r_naive(h);
    EXPECT_EQ(naive, r_efficient(h));
    EXPECT_GT(std::count_if(naive.begin(), naive.end(), [](Pos r) { return r > 0; }), 100);
}

TEST(FTau, ExactMatchesNaiveAndDominatesR) {
    Rng rng(2);
    for (int rep = 0; rep < 10; ++rep) {
        const auto h = random_history(400, rng);
        const auto exact = f_tau_exact(h, 100);
        const auto naive = f_tau_exact_naive(h, 100);
        ASSERT_EQ(exact.p.size(), naive.p.size());
        for (std::size_t i = 0; i < exact.p.size(); ++i) EXPECT_NEAR(exact.p[i], naive.p[i], 1e-15);
        const auto r = r_efficient(h);
        const auto from_r = f_tau_from_r(r, 100);
        for (std::size_t i = 0; i < exact.p.size(); ++i) EXPECT_LE(from_r.p[i], exact.p[i] + 1e-15);
        for (std::size_t i = 1; i < from_r.p.size(); ++i) EXPECT_LE(from_r.p[i], from_r.p[i - 1]);
    }
}

TEST(FTau, OnlineKcpHistoryCurveDecreases) {
    Rng rng(3);
    auto spec = generator_preset("table1");
    spec.T = 1500;
    spec.theta = 300;
    const auto g = generate(spec, rng);
    ProfileConfig cfg;
    cfg.fd.grid = {10, 20, 50, 100};
    cfg.fd.repetitions = 20;
    cfg.lambda_max = 200;
    Rng r(4);
    const auto model = build_uncertainty_model(g.series, cfg, r);
    EXPECT_GE(model.f_tau_exact.p.front(), model.f_tau_exact.p.back());
    for (std::size_t i = 0; i < model.f_tau.p.size(); ++i) EXPECT_LE(model.f_tau.p[i], model.f_tau_exact.p[i] + 1e-15);
    for (double p : model.f_tau_exact.p) {
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
    if (model.lambda_reached) {
        EXPECT_LT(model.f_tau_exact.p[static_cast<std::size_t>(model.lambda_star)], model.eta / 2);
        if (model.lambda_star > 0) EXPECT_GE(model.f_tau_exact.p[static_cast<std::size_t>(model.lambda_star - 1)], model.eta / 2);
    }
}

TEST(Cutoff, SmallestBelowLevel) {
    Curve c{{10, 20, 30, 40}, {0.5, 0.02, 0.004, 0.001}};
    EXPECT_EQ(cutoff(c, 0.005), 30.0);
    EXPECT_FALSE(cutoff(c, 0.0005).has_value());
}

TEST(ActiveSet, Cardinality) {
    EXPECT_EQ(active_set_cardinality(50, 143, 100), 50);
    EXPECT_EQ(active_set_cardinality(300, 143, 100), 143);
    EXPECT_EQ(active_set_cardinality(80, 143, 100), 80);
    EXPECT_EQ(active_set_cardinality(120, 143, 100), 120);
}

std::vector<std::vector<double>> gaussian_segments(Rng& rng, int count, int len, double pi = 0.01) {
    std::vector<std::vector<double>> segs;
    for (int s = 0; s < count; ++s) {
        std::vector<double> v(static_cast<std::size_t>(len));
        const double mu = rng.normal(0, 5);
        for (auto& x : v) x = rng.bernoulli(pi) ? mu + (rng.bernoulli(0.5) ? 4.0 : -4.0) : rng.normal(mu, 1);
        segs.push_back(std::move(v));
    }
    return segs;
}

TEST(FdTraining, WholeSegmentGivesZero) {
    Rng rng(5);
    const auto segs = gaussian_segments(rng, 3, 300);
    FdTrainConfig cfg;
    cfg.grid = {300};
    cfg.repetitions = 100;
    Rng r(6);
    const auto fd = train_f_d(segs, 1, Ncm::zscore(), cfg, r);
    EXPECT_EQ(fd.unknown.p[0], 0.0);
}

TEST(FdTraining, GaussianZscoreBelowOnePercentAt100) {
    Rng rng(7);
    const auto segs = gaussian_segments(rng, 8, 1000);
    FdTrainConfig cfg;
    cfg.grid = {20, 100};
    cfg.repetitions = 200;
    Rng r(8);
    const auto fd = train_f_d(segs, 1, Ncm::zscore(), cfg, r);
    EXPECT_LT(fd.unknown.p[1], 0.01);
    EXPECT_LE(fd.unknown.p[1], fd.unknown.p[0] + 2.0 / std::sqrt(100.0 * 200.0));
    EXPECT_THROW({
        FdTrainConfig big = cfg;
        big.grid = {5000};
        train_f_d(segs, 1, Ncm::zscore(), big, r);
    }, std::invalid_argument);
}

TEST(FdTraining, MixtureKernelScoreAbnormalAt500) {
    // modes at +-3, anomalies at the center
    Rng rng(9);
    std::vector<std::vector<double>> segs;
    for (int s = 0; s < 4; ++s) {
        std::vector<double> v(600);
        for (auto& x : v) x = rng.bernoulli(0.01) ? 0.0 : rng.normal(rng.bernoulli(0.5) ? 3.0 : -3.0, 1.0);
        segs.push_back(std::move(v));
    }
    FdTrainConfig cfg;
    cfg.grid = {500};
    cfg.repetitions = 60;
    Rng r(10);
    const auto fd = train_f_d(segs, 1, Ncm::kernel_score(KernelSpec::gaussian(3.0)), cfg, r);
    EXPECT_LE(fd.abnormal.p[0], 0.05);
    EXPECT_LE(fd.unknown.p[0], 0.01);
}

TEST(Profile, HistoryTooShort) {
    Rng rng(11);
    ProfileConfig cfg;
    std::vector<double> xs(100);
    for (auto& x : xs) x = rng.normal();
    EXPECT_THROW(build_uncertainty_model(TimeSeries::univariate(xs), cfg, rng), ValidationError);
}

TEST(Profile, StableHistory) {
    // no segmentation ever has a breakpoint, so f_tau is identically 0
    ProfileConfig cfg;
    cfg.fd.grid = {10, 20, 50, 100};
    cfg.fd.repetitions = 100;
    Rng r(13);
    const auto model = build_uncertainty_model(TimeSeries::univariate(std::vector<double>(1000, 2.0)), cfg, r);
    for (double p : model.f_tau_exact.p) EXPECT_EQ(p, 0.0);
    EXPECT_EQ(model.lambda_star, 0);
    EXPECT_TRUE(model.lambda_reached);
}

TEST(Profile, GaussianZscoreEllStar) {
    Rng rng(14);
    std::vector<double> xs(1000);
    for (auto& x : xs) x = rng.bernoulli(0.01) ? 4.0 : rng.normal();
    ProfileConfig cfg;
    cfg.fd.grid = {10, 20, 50, 100};
    cfg.fd.repetitions = 200;
    Rng r(15);
    const auto model = build_uncertainty_model(TimeSeries::univariate(xs), cfg, r);
    EXPECT_LE(model.ell_star, 100);
    EXPECT_TRUE(model.ell_reached);
}

}  // namespace
}  // namespace bkad
