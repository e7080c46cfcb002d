#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bkad/calibration.hpp"
#include "bkad/changepoint.hpp"
#include "bkad/core.hpp"
#include "bkad/kernels.hpp"
#include "bkad/scoring.hpp"
#include "bkad/uncertainty.hpp"

namespace bkad {

struct OracleFlags {
    bool breakpoints = false;  // true segmentation instead of the changepoint search
    bool params = false;       // true segment mean and covariance instead of estimates
    bool removal = false;      // true labels instead of detected statuses when calibrating

    bool any() const { return breakpoints || params || removal; }
};

struct DetectorConfig {
    std::optional<KernelSpec> kernel;  // absent: median heuristic on the warm-up prefix
    Ncm ncm = Ncm::zscore();
    double alpha = 0.2;
    double pi = 0.01;
    std::optional<double> slope;         // fixed α′; absent: modified slope per active set
    double k = 1.0;                      // calibration multiplier
    std::optional<std::size_t> n_override;  // fixed calibration cardinality
    Pos lambda_hat = 100;
    Pos ell_hat = 100;
    int d_max = 0;                       // 0: default for the series length
    int min_seg_len = 2;
    int refit_every = 1;
    Pos warmup = 0;                      // 0: n + m at the nominal active-set size
    int init_iterations = 20;
    OracleFlags oracle;
    std::uint64_t seed = 0;
    bool record_trace = false;

    void validate() const;
    // Paper-style preset: α′ = α/2 rounded as in the experiments (0.1 or 0.05).
    static DetectorConfig paper_preset(double alpha);

    // Slope and calibration cardinality used for an active set of size m.
    double slope_for(Pos m) const;
    std::size_t calibration_size(Pos m) const;
    Pos warmup_length() const;
};

void to_json(nlohmann::json& j, const Ncm& n);
void from_json(const nlohmann::json& j, Ncm& n);
void to_json(nlohmann::json& j, const DetectorConfig& c);
void from_json(const nlohmann::json& j, DetectorConfig& c);

struct StepTrace {
    Pos t = 0;
    std::vector<Pos> breakpoints;
    Pos active_start = 0;  // active set is [active_start, t]
    double slope = 0.0;
    double threshold = 0.0;
    std::size_t k_hat = 0;
    std::size_t calibration_size = 0;
    std::size_t calibration_target = 0;
    std::vector<std::pair<Pos, int>> status_changes;
};

// Updates emitted by one step: every position re-evaluated at this time.
struct StepUpdate {
    Pos t = 0;
    std::vector<DetectionRecord> records;
};

// Streaming breakpoint-based detector. Positions before the warm-up length are
// buffered; at the warm-up boundary the prefix is classified with a fixed-point
// pass that removes detected anomalies from its own calibration, then every new
// point triggers one online step.
class Detector {
public:
    Detector(DetectorConfig cfg, std::size_t dim, std::optional<Truth> truth = std::nullopt, Pos expected_length = 0);
    ~Detector();
    Detector(Detector&&) noexcept;
    Detector& operator=(Detector&&) noexcept;

    StepUpdate push(std::span<const double> x);
    // Classifies a stream that ended before the warm-up boundary; no-op otherwise.
    StepUpdate finish();

    Pos t() const { return series_.length(); }
    bool initialized() const { return initialized_; }
    const DetectorConfig& config() const { return cfg_; }
    const TimeSeries& series() const { return series_; }
    const std::vector<DetectionRecord>& records() const { return records_; }
    std::vector<bool> statuses() const;
    const Segmentation& segmentation() const { return segmentation_; }
    const SegmentationHistory& history() const { return history_; }
    const std::vector<StepTrace>& trace() const { return trace_; }
    double bandwidth() const { return bandwidth_; }

private:
    struct SegmentCache {
        std::vector<double> scores;
        SegmentSummary summary;  // location and dispersion only
        std::uint64_t last_used = 0;
    };

    void initialize();
    void step(bool record_all);
    Segmentation current_segmentation() const;
    SegmentCache& cache_for(SegmentView seg, bool current);
    std::vector<double> known_scores(SegmentView seg) const;
    bool excluded(Pos u) const;
    StepUpdate collect(Pos from, Pos to);

    DetectorConfig cfg_;
    std::size_t dim_;
    std::optional<Truth> truth_;
    Pos expected_length_;
    TimeSeries series_;
    std::unique_ptr<Kcp> kcp_;
    double bandwidth_ = 0.0;
    bool initialized_ = false;
    Segmentation segmentation_;
    SegmentationHistory history_;
    std::vector<DetectionRecord> records_;
    std::vector<std::uint8_t> status_;
    Pos frozen_before_ = 1;  // positions below this are frozen
    std::map<std::pair<Pos, Pos>, SegmentCache> cache_;
    std::uint64_t step_counter_ = 0;
    Rng rng_;
    std::vector<StepTrace> trace_;
};

struct RunResult {
    std::vector<bool> statuses;
    std::vector<DetectionRecord> records;
    Segmentation segmentation;
    SegmentationHistory history;
    std::vector<StepTrace> trace;
};

RunResult run_series(const DetectorConfig& cfg, const TimeSeries& series, const std::optional<Truth>& truth = std::nullopt);

// Algorithm for stationary data: a fixed training prefix of size q, a sliding
// calibration window of the n scores preceding the test window, and BH over the
// last m p-values.
struct StationaryConfig {
    Ncm ncm = Ncm::zscore();
    std::size_t q = 100;
    std::size_t n = 999;
    std::size_t m = 100;
    double slope = 0.1;
};

class StationaryDetector {
public:
    StationaryDetector(StationaryConfig cfg, std::size_t dim, std::uint64_t seed = 0);
    // Decision for x once training and calibration are filled.
    std::optional<DetectionRecord> push(std::span<const double> x);
    // Seeds training and calibration with a prefix; no decisions are emitted for it.
    void initialize(const TimeSeries& prefix);
    bool ready() const;

private:
    StationaryConfig cfg_;
    std::size_t dim_;
    Rng rng_;
    std::vector<double> training_;
    std::vector<double> scores_;
    std::vector<double> pvalues_;
    Pos t_ = 0;
};

}  // namespace bkad
