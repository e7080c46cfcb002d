#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>

#include "bkad/core.hpp"
#include "bkad/multitest.hpp"

namespace bkad {
namespace {

// Largest k with some k p-values at or below alpha' k / m, by trying every k.
std::vector<std::size_t> bh_brute(const std::vector<double>& p, double slope) {
    const std::size_t m = p.size();
    std::size_t best = 0;
    for (std::size_t k = 1; k <= m; ++k) {
        std::size_t below = 0;
        for (double v : p) below += bh_rejects(v, slope * static_cast<double>(k) / static_cast<double>(m));
        if (below >= k) best = k;
    }
    std::vector<std::size_t> out;
    const double eps = slope * static_cast<double>(best) / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i)
        if (best > 0 && bh_rejects(p[i], eps)) out.push_back(i);
    return out;
}

TEST(PValue, Examples) {
    const std::vector<double> cal{1, 2, 3, 4};
    EXPECT_EQ(empirical_pvalue(5.0, cal), 0.0);
    EXPECT_EQ(empirical_pvalue(0.0, cal), 1.0);
    EXPECT_EQ(empirical_pvalue(2.5, cal), 0.5);
    EXPECT_EQ(empirical_pvalue(2.0, cal), 0.5);  // a tie is not an exceedance
    EXPECT_EQ(empirical_pvalue(1.0, cal), 1.0);  // at the minimum
    EXPECT_EQ(empirical_pvalue(1.0, std::vector<double>(5, 1.0)), 1.0);
    EXPECT_THROW(empirical_pvalue(1.0, std::vector<double>{}), std::invalid_argument);
}

TEST(PValue, TableMatchesDirect) {
    Rng rng(1);
    std::vector<double> cal(200);
    for (auto& v : cal) v = std::round(rng.normal() * 4) / 4;
    PValueTable table(cal);
    for (int i = 0; i < 500; ++i) {
        const double s = std::round(rng.normal() * 8) / 8;
        EXPECT_EQ(table(s), empirical_pvalue(s, cal));
    }
}

TEST(PValue, RankInvariance) {
    Rng rng(2);
    std::vector<double> cal(100), test(30);
    for (auto& v : cal) v = rng.normal();
    for (auto& v : test) v = rng.normal();
    auto f = [](double x) { return std::exp(2 * x) + x; };
    std::vector<double> pc, pt;
    for (double s : test) pc.push_back(empirical_pvalue(s, cal));
    std::vector<double> fcal(cal);
    for (auto& v : fcal) v = f(v);
    for (double s : test) pt.push_back(empirical_pvalue(f(s), fcal));
    EXPECT_EQ(pc, pt);
    EXPECT_EQ(bh_threshold(pc, 0.2).rejected, bh_threshold(pt, 0.2).rejected);
}

TEST(Bh, Examples) {
    const auto r = bh_threshold(std::vector<double>{0.01, 0.04, 0.5}, 0.2);
    EXPECT_EQ(r.k_hat, 2u);
    EXPECT_NEAR(r.threshold, 0.2 * 2 / 3, 1e-15);
    EXPECT_EQ(r.rejected, (std::vector<std::size_t>{0, 1}));

    const auto none = bh_threshold(std::vector<double>(5, 1.0), 0.1);
    EXPECT_EQ(none.k_hat, 0u);
    EXPECT_TRUE(none.rejected.empty());

    const auto all = bh_threshold(std::vector<double>(4, 0.0), 0.1);
    EXPECT_EQ(all.rejected.size(), 4u);
    EXPECT_NEAR(all.threshold, 0.1, 1e-15);
}

TEST(Bh, BruteForceOnGrid) {
    // every p-vector of length <= 6 with entries on {0, 0.05, ..., 1}
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(i * 0.05);
    std::size_t checked = 0;
    for (std::size_t len = 1; len <= 6; ++len) {
        std::vector<double> p(len);
        // non-decreasing vectors cover every multiset; permutations are checked on a sample
        std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t from) {
            if (pos == len) {
                for (double slope : {0.05, 0.1, 0.2, 0.5}) {
                    auto q = p;
                    for (int perm = 0; perm < 2; ++perm) {
                        const auto r = bh_threshold(q, slope);
                        const auto ref = bh_brute(q, slope);
                        ASSERT_EQ(r.rejected, ref);
                        ASSERT_EQ(r.k_hat, ref.size());
                        for (std::size_t i = 0; i < q.size(); ++i) {
                            const bool rej = std::binary_search(r.rejected.begin(), r.rejected.end(), i);
                            if (rej) EXPECT_TRUE(bh_rejects(q[i], r.threshold));
                            else EXPECT_FALSE(r.k_hat > 0 && bh_rejects(q[i], r.threshold));
                        }
                        std::reverse(q.begin(), q.end());
                    }
                    ++checked;
                }
                return;
            }
            for (std::size_t g = from; g < grid.size(); ++g) {
                p[pos] = grid[g];
                rec(pos + 1, g);
            }
        };
        rec(0, 0);
    }
    EXPECT_GT(checked, 100000u);
}

TEST(Bh, RejectionsGrowWithSlope) {
    Rng rng(3);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> p(20);
        for (auto& v : p) v = rng.bernoulli(0.3) ? rng.uniform() * 0.02 : rng.uniform();
        const auto a = bh_threshold(p, 0.05).rejected;
        const auto b = bh_threshold(p, 0.2).rejected;
        EXPECT_TRUE(std::includes(b.begin(), b.end(), a.begin(), a.end()));
        const auto r = bh_threshold(p, 0.1);
        EXPECT_NEAR(r.threshold * 20 / 0.1, std::round(r.threshold * 20 / 0.1), 1e-9);
    }
}

TEST(ModifiedSlope, Values) {
    EXPECT_NEAR(modified_slope(0.2, 100, 0.01), 0.2 / 1.8, 1e-15);
    EXPECT_NEAR(modified_slope(0.1, 100, 0.01), 0.1 / 1.9, 1e-15);
    double prev = 0.0;
    for (std::size_t m : {1u, 10u, 100u, 1000u, 100000u}) {
        const double s = modified_slope(0.2, m, 0.01);
        EXPECT_LT(s, 0.2);
        EXPECT_GT(s, prev);
        prev = s;
    }
    EXPECT_THROW(modified_slope(1.5, 10, 0.01), std::invalid_argument);
}

TEST(ThresholdChoice, SingleZeroIsRejected) {
    const auto r = threshold_choice(std::vector<double>{0.0}, 0.2, 0.01);
    EXPECT_EQ(r.rejected.size(), 1u);
    EXPECT_NEAR(r.slope, modified_slope(0.2, 1, 0.01), 1e-15);
    EXPECT_EQ(threshold_choice(std::vector<double>{0.5}, 0.2, 0.01, 0.1).slope, 0.1);
}

TEST(ThresholdChoice, UniformNullControlsFdr) {
    // all hypotheses null: FDR equals the probability of any rejection
    Rng rng(4);
    const int reps = 10000;
    const double slope = modified_slope(0.2, 100, 0.01);
    int any = 0;
    std::vector<double> p(100);
    for (int rep = 0; rep < reps; ++rep) {
        for (auto& v : p) v = rng.uniform();
        any += !threshold_choice(p, 0.2, 0.01).rejected.empty();
    }
    EXPECT_LE(static_cast<double>(any) / reps, slope + 0.02);
}

}  // namespace
}  // namespace bkad
