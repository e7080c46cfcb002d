#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>

#include "bkad/changepoint.hpp"

namespace bkad {
namespace {

TimeSeries noise(Pos T, Rng& rng, double shift_at = 0, double delta = 0.0) {
    std::vector<double> xs(static_cast<std::size_t>(T));
    for (Pos t = 1; t <= T; ++t) xs[t - 1] = rng.normal() + (shift_at > 0 && t >= shift_at ? delta : 0.0);
    return TimeSeries::univariate(std::move(xs));
}

double naive_cost(const TimeSeries& s, const KernelSpec& k, Pos a, Pos b) {
    double diag = 0.0, block = 0.0;
    for (Pos u = a; u <= b; ++u) {
        diag += eval(k, s.at(u), s.at(u));
        for (Pos v = a; v <= b; ++v) block += eval(k, s.at(u), s.at(v));
    }
    return diag - block / static_cast<double>(b - a + 1);
}

// Minimum total cost over every segmentation of [1, t] into D segments.
double enumerate_best(const TimeSeries& s, const KernelSpec& k, Pos t, int D, int min_len) {
    double best = std::numeric_limits<double>::infinity();
    std::function<void(Pos, int, double)> rec = [&](Pos start, int left, double acc) {
        if (left == 1) {
            if (t - start + 1 >= min_len) best = std::min(best, acc + naive_cost(s, k, start, t));
            return;
        }
        for (Pos end = start + min_len - 1; end < t; ++end) rec(end + 1, left - 1, acc + naive_cost(s, k, start, end));
    };
    rec(1, D, 0.0);
    return best;
}

TEST(SegmentCost, ClosedForms) {
    const auto k = KernelSpec::gaussian(1.5);
    const auto constant = TimeSeries::univariate({2, 2, 2, 2});
    EXPECT_NEAR(segment_cost(constant, k, 1, 4), 0.0, 1e-15);
    const auto two = TimeSeries::univariate({0.0, 1.2});
    const std::vector<double> x{0.0}, y{1.2};
    EXPECT_NEAR(segment_cost(two, k, 1, 2), 1.0 - eval(k, x, y), 1e-15);
    EXPECT_THROW(segment_cost(two, k, 2, 2), std::invalid_argument);
}

TEST(SegmentCost, MatchesDoubleSum) {
    Rng rng(1);
    const auto s = noise(8, rng);
    const auto k = KernelSpec::gaussian(0.8);
    EXPECT_NEAR(segment_cost(s, k, 1, 8), naive_cost(s, k, 1, 8), 1e-12);
}

TEST(Kcp, DynamicProgramMatchesEnumeration) {
    for (int min_len : {1, 2}) {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            Rng rng(seed);
            const auto s = noise(12, rng, 6, seed % 2 ? 3.0 : 0.0);
            KcpConfig cfg;
            cfg.kernel = KernelSpec::combo({{0.5, KernelSpec::gaussian(0.7)}, {0.5, KernelSpec::gaussian(3)}});
            cfg.d_max = 3;
            cfg.min_seg_len = min_len;
            Kcp kcp(cfg, 1);
            for (Pos t = 1; t <= 12; ++t) {
                kcp.push(s.at(t));
                for (int D = 1; D <= 3; ++D) {
                    const double ref = enumerate_best(s, cfg.kernel, t, D, min_len);
                    if (std::isinf(ref)) {
                        EXPECT_TRUE(std::isinf(kcp.cost(D)));
                    } else {
                        EXPECT_NEAR(kcp.cost(D), ref, 1e-9) << "t=" << t << " D=" << D;
                        const auto seg = kcp.best(D);
                        double total = 0.0;
                        for (const auto& v : seg.segments()) total += naive_cost(s, cfg.kernel, v.start, v.end);
                        EXPECT_NEAR(total, ref, 1e-9);
                        EXPECT_EQ(seg.segment_count(), static_cast<std::size_t>(D));
                    }
                }
            }
        }
    }
}

TEST(Kcp, SingleSegmentCostAndMonotoneInD) {
    Rng rng(2);
    const auto s = noise(40, rng, 20, 2.0);
    KcpConfig cfg;
    cfg.d_max = 6;
    Kcp kcp(cfg, 1);
    for (Pos t = 1; t <= 40; ++t) {
        kcp.push(s.at(t));
        if (t >= 2) {
            EXPECT_NEAR(kcp.cost(1), segment_cost(s, cfg.kernel, 1, t), 1e-9);
        }
        for (int D = 2; D <= 6; ++D)
            if (std::isfinite(kcp.cost(D))) EXPECT_LE(kcp.cost(D), kcp.cost(D - 1) + 1e-9);
    }
}

TEST(Kcp, OnlineEqualsOffline) {
    Rng rng(3);
    const auto s = noise(120, rng, 60, 4.0);
    KcpConfig cfg;
    cfg.d_max = 10;
    Kcp online(cfg, 1);
    for (Pos t = 1; t <= 120; ++t) {
        online.push(s.at(t));
        if (t % 30 == 0) {
            std::vector<double> prefix(s.flat().begin(), s.flat().begin() + t);
            const auto offline = kcp_segment(TimeSeries::univariate(prefix), cfg);
            EXPECT_EQ(online.select(), offline);
        }
    }
}

TEST(Kcp, ForcedSingleSegment) {
    Rng rng(4);
    const auto s = noise(100, rng, 50, 5.0);
    KcpConfig cfg;
    cfg.d_max = 1;
    const auto seg = kcp_segment(s, cfg);
    EXPECT_TRUE(seg.breakpoints.empty());
    EXPECT_EQ(seg.length, 100);
}

TEST(FitPenalty, RecoversLinearSlopes) {
    const Pos t = 200;
    const int d_max = 10;
    std::vector<double> values(d_max);
    for (int D = 1; D <= d_max; ++D) values[D - 1] = 3.0 - 0.2 * D - 0.05 * log_binom_segmentations(t, D);
    const auto fit = fit_penalty(values, t, d_max);
    EXPECT_NEAR(fit.c1, 0.4, 1e-8);
    EXPECT_NEAR(fit.c2, 0.1, 1e-8);

    std::fill(values.begin(), values.end(), 1.0);
    const auto flat = fit_penalty(values, t, d_max);
    EXPECT_NEAR(flat.c1, 0.0, 1e-12);
    EXPECT_NEAR(flat.c2, 0.0, 1e-12);

    EXPECT_THROW(fit_penalty(std::vector<double>{1.0, 0.5}, t, 2), std::invalid_argument);
}

TEST(Kcp, WhiteNoiseSelectsOneSegment) {
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(100 + seed);
        const auto s = noise(300, rng);
        KcpConfig cfg;
        Rng h(seed);
        cfg.kernel = KernelSpec::gaussian(median_heuristic(s, h));
        cfg.d_max = default_d_max(300);
        ok += kcp_segment(s, cfg).segment_count() == 1;
    }
    EXPECT_GE(ok, 45);
}

TEST(Kcp, MeanShiftIsLocated) {
    int ok = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(200 + seed);
        const auto s = noise(300, rng, 151, 5.0);
        KcpConfig cfg;
        Rng h(seed);
        cfg.kernel = KernelSpec::gaussian(median_heuristic(s, h));
        cfg.d_max = default_d_max(300);
        const auto seg = kcp_segment(s, cfg);
        ok += seg.breakpoints.size() == 1 && std::abs(seg.breakpoints[0] - 151) <= 5;
    }
    EXPECT_GE(ok, 45);
}

TEST(Kcp, DefaultDMax) {
    EXPECT_EQ(default_d_max(100), 10);
    EXPECT_EQ(default_d_max(1000), 20);
    EXPECT_EQ(default_d_max(100000), 50);
}

}  // namespace
}  // namespace bkad
