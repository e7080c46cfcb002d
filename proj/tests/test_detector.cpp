#include <gtest/gtest.h>

#include <map>

#include "bkad/bench.hpp"
#include "bkad/datagen.hpp"
#include "bkad/detector.hpp"
#include "bkad/multitest.hpp"

namespace bkad {
namespace {

DetectorConfig small_config() {
    auto cfg = DetectorConfig::paper_preset(0.2);
    cfg.record_trace = true;
    return cfg;
}

TEST(DetectorConfig, PresetAndValidation) {
    const auto c = DetectorConfig::paper_preset(0.2);
    ASSERT_TRUE(c.slope.has_value());
    EXPECT_DOUBLE_EQ(*c.slope, 0.1);
    EXPECT_EQ(c.calibration_size(100), 999u);
    EXPECT_DOUBLE_EQ(*DetectorConfig::paper_preset(0.1).slope, 0.05);
    EXPECT_EQ(DetectorConfig::paper_preset(0.1).calibration_size(100), 1999u);
    auto bad = c;
    bad.alpha = 1.5;
    EXPECT_THROW(bad.validate(), ValidationError);
    DetectorConfig exact;
    EXPECT_NEAR(exact.slope_for(100), modified_slope(0.2, 100, 0.01), 1e-15);
}

TEST(DetectorConfig, JsonRoundTripRejectsUnknown) {
    auto c = DetectorConfig::paper_preset(0.1);
    c.ncm = Ncm::knn(7, 70);
    c.kernel = KernelSpec::gaussian(2.0);
    c.oracle.params = true;
    nlohmann::json j = c;
    const auto back = j.get<DetectorConfig>();
    EXPECT_EQ(nlohmann::json(back), j);
    j["unexpected"] = true;
    EXPECT_THROW(j.get<DetectorConfig>(), ValidationError);
}

TEST(Detector, ConstantSeriesHasNoDetections) {
    const auto s = TimeSeries::univariate(std::vector<double>(1400, 3.0));
    const auto run = run_series(small_config(), s);
    for (bool b : run.statuses) EXPECT_FALSE(b);
    for (const auto& step : run.trace)
        for (const auto& [u, st] : step.status_changes) EXPECT_EQ(st, 0);
}

TEST(Detector, ShortStreamIsClassifiedOnFinish) {
    Detector d(small_config(), 1);
    const std::vector<double> x{1.0};
    EXPECT_TRUE(d.push(x).records.empty());
    const auto up = d.finish();
    ASSERT_EQ(up.records.size(), 1u);
    EXPECT_EQ(up.records[0].status, 0);
    EXPECT_TRUE(d.segmentation().breakpoints.empty());
    EXPECT_TRUE(Detector(small_config(), 1).finish().records.empty());
}

class DetectorRun : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        auto spec = generator_preset("table1");
        Rng rng(mix_seed(11, 0));
        data_ = new Generated(generate(spec, rng));
        auto cfg = small_config();
        cfg.seed = 5;
        run_ = new RunResult(run_series(cfg, data_->series, data_->truth));
    }
    static void TearDownTestSuite() {
        delete data_;
        delete run_;
    }
    static Generated* data_;
    static RunResult* run_;
};
Generated* DetectorRun::data_ = nullptr;
RunResult* DetectorRun::run_ = nullptr;

TEST_F(DetectorRun, Deterministic) {
    auto cfg = small_config();
    cfg.seed = 5;
    const auto again = run_series(cfg, data_->series, data_->truth);
    EXPECT_EQ(again.statuses, run_->statuses);
    EXPECT_EQ(again.segmentation, run_->segmentation);
    ASSERT_EQ(again.records.size(), run_->records.size());
    for (std::size_t i = 0; i < again.records.size(); ++i) {
        EXPECT_EQ(again.records[i].score, run_->records[i].score);
        EXPECT_EQ(again.records[i].p_value, run_->records[i].p_value);
    }
}

TEST_F(DetectorRun, StatusesOnlyChangeInsideActiveSet) {
    ASSERT_GT(run_->trace.size(), 1u);
    // the first step classifies the warm-up prefix; later steps only touch the active set
    Pos prev_start = 0;
    for (std::size_t i = 1; i < run_->trace.size(); ++i) {
        const auto& step = run_->trace[i];
        EXPECT_LE(step.active_start, step.t);
        EXPECT_GE(step.active_start, prev_start);
        prev_start = step.active_start;
        for (const auto& [u, s] : step.status_changes) {
            EXPECT_GE(u, step.active_start) << "t=" << step.t;
            EXPECT_LE(u, step.t);
        }
    }
}

TEST_F(DetectorRun, ReplayingTraceGivesFinalStatuses) {
    std::vector<int> status(run_->statuses.size(), 0);
    for (const auto& step : run_->trace)
        for (const auto& [u, s] : step.status_changes) status[static_cast<std::size_t>(u - 1)] = s;
    for (std::size_t i = 0; i < status.size(); ++i) EXPECT_EQ(status[i] != 0, run_->statuses[i]) << i;
}

TEST_F(DetectorRun, ThresholdIsBhStep) {
    for (const auto& step : run_->trace) {
        const Pos m = step.t - step.active_start + 1;
        EXPECT_NEAR(step.threshold, step.slope * static_cast<double>(step.k_hat) / static_cast<double>(m), 1e-12);
        EXPECT_LE(step.calibration_size, step.calibration_target);
    }
}

TEST_F(DetectorRun, HistoryMatchesSegmentations) {
    const auto& h = run_->history;
    ASSERT_FALSE(h.last.empty());
    const Pos first = data_->series.length() - h.size() + 1;
    for (Pos i = 0; i < h.size(); ++i) EXPECT_LT(h.last[static_cast<std::size_t>(i)], first + i);
    EXPECT_EQ(h.last.back(), run_->segmentation.last_boundary());
}

TEST_F(DetectorRun, ReasonableAccuracy) {
    const auto start = evaluation_start(small_config(), false);
    std::vector<bool> det(run_->statuses.begin() + start - 1, run_->statuses.end());
    std::vector<bool> tru(data_->truth.labels.begin() + start - 1, data_->truth.labels.end());
    const auto m = fdp_fnp(det, tru);
    EXPECT_LT(m.fnp, 0.5);
    EXPECT_LT(m.fdp, 0.8);
}

TEST(Detector, StreamingMatchesBatch) {
    auto spec = generator_preset("table1");
    spec.T = 1500;
    Rng rng(3);
    const auto g = generate(spec, rng);
    auto cfg = small_config();
    const auto batch = run_series(cfg, g.series);
    Detector d(cfg, 1, std::nullopt, g.series.length());
    std::map<Pos, int> latest;
    for (Pos t = 1; t <= g.series.length(); ++t)
        for (const auto& r : d.push(g.series.at(t)).records) latest[r.position] = r.status;
    d.finish();
    for (Pos t = 1; t <= g.series.length(); ++t) EXPECT_EQ(latest[t] != 0, batch.statuses[t - 1]) << t;
}

TEST(Detector, OracleFlagsRun) {
    auto spec = generator_preset("table1");
    spec.T = 1600;
    Rng rng(4);
    const auto g = generate(spec, rng);
    auto cfg = small_config();
    cfg.oracle = {true, true, true};
    const auto run = run_series(cfg, g.series, g.truth);
    EXPECT_EQ(run.segmentation, g.truth.segmentation);
    auto missing = cfg;
    EXPECT_THROW(run_series(missing, g.series), ValidationError);
}

TEST(Stationary, RejectsSixSigmaAndKeepsMean) {
    int rejected = 0, kept = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed);
        StationaryConfig cfg;
        StationaryDetector det(cfg, 1, seed);
        std::vector<double> prefix(cfg.q + cfg.n);
        for (auto& v : prefix) v = rng.normal();
        det.initialize(TimeSeries::univariate(prefix));
        ASSERT_TRUE(det.ready());
        const std::vector<double> spike{6.0};
        const auto r = det.push(spike);
        ASSERT_TRUE(r.has_value());
        rejected += r->status;
        if (seed < 20) {
            StationaryDetector det2(cfg, 1, seed);
            det2.initialize(TimeSeries::univariate(prefix));
            const std::vector<double> center{0.0};
            kept += det2.push(center)->status == 0;
        }
    }
    EXPECT_GE(rejected, 99);
    EXPECT_EQ(kept, 20);
}

TEST(Stationary, NoDecisionsBeforeReady) {
    StationaryConfig cfg;
    StationaryDetector det(cfg, 1, 0);
    const std::vector<double> x{0.5};
    for (std::size_t i = 0; i < cfg.q; ++i) EXPECT_FALSE(det.push(x).has_value());
    EXPECT_FALSE(det.ready());
}

}  // namespace
}  // namespace bkad
