#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bkad/core.hpp"
#include "bkad/datagen.hpp"
#include "bkad/detector.hpp"

namespace bkad {

struct Proportions {
    double fdp = 0.0;
    double fnp = 0.0;
};

// FDP = |H0 ∩ R| / (|R| ∨ 1), FNP = |H1 \ R| / (|H1| ∨ 1).
Proportions fdp_fnp(const std::vector<bool>& detected, const std::vector<bool>& truth);

// Probability that a random anomaly outscores a random normal point, ties counted 1/2.
double auc(std::span<const double> scores, const std::vector<bool>& truth);
// Pair enumeration reference for auc.
double auc_pairs(std::span<const double> scores, const std::vector<bool>& truth);

// Two-sided paired sign-flip test of the mean difference; p in [1/(b_perm+1), 1].
double paired_permutation_test(std::span<const double> xs, std::span<const double> ys, int b_perm, Rng& rng);

// |x_t - median| / MAD over the preceding `window` values (fewer at the start).
std::vector<double> median_baseline_scores(std::span<const double> xs, std::size_t window = 100);

// Thresholds a score stream: each score is compared with the n scores before it,
// BH at `slope` runs over the last m p-values, and a position keeps the status of
// its last evaluation. Positions with fewer than n predecessors stay normal.
std::vector<bool> threshold_score_stream(std::span<const double> scores, std::size_t n, std::size_t m, double slope);

// Estimator study on single segments: MSE of each estimator, or FDR/FNR of the
// six-step detection simulation, as a function of the segment length ℓ.
struct ProtocolOptions {
    std::vector<Pos> grid;      // empty: 10..1000 for MSE, 10..500 for detection
    int repetitions = 0;        // 0: 1000 for MSE, 10000 for detection
    std::size_t n = 999;
    std::size_t m = 100;
    std::size_t m1 = 1;
    double slope = 0.1;
};

struct ProtocolCurve {
    std::string estimator;
    std::vector<double> mse;  // MSE presets
    std::vector<double> fdr;  // detection presets
    std::vector<double> fnr;
};

struct ProtocolResult {
    std::string preset;
    std::vector<Pos> grid;
    std::vector<ProtocolCurve> curves;

    const ProtocolCurve& curve(const std::string& estimator) const;
};

// preset: mse_clean, mse_contaminated, detect_clean, detect_contaminated.
ProtocolResult estimator_protocol(const std::string& preset, const ProtocolOptions& opt, Rng& rng);
std::vector<std::string> estimator_protocol_names();

void to_json(nlohmann::json& j, const ProtocolResult& r);

struct BenchOptions {
    int seeds = 50;
    std::uint64_t master_seed = 0;
    int workers = 0;                    // 0: hardware concurrency
    std::vector<std::string> variants;  // empty: every variant of the suite
    bool evaluate_prefix = false;       // include positions classified during warm-up
};

struct ReplicationRow {
    std::uint64_t seed = 0;
    std::string variant;
    double fdp = 0.0;
    double fnp = 0.0;
    std::optional<double> auc;
    double runtime_s = 0.0;
};

struct VariantSummary {
    std::string variant;
    std::size_t replications = 0;
    double fdr = 0.0;
    double fnr = 0.0;
    double fdr_se = 0.0;  // standard error of the mean FDP
    double fnr_se = 0.0;
    std::optional<double> auc;
};

struct ExperimentReport {
    std::string suite;
    nlohmann::json config;
    std::vector<ReplicationRow> rows;
    std::vector<VariantSummary> variants;
    double fdr = 0.0;  // mean over every row
    double fnr = 0.0;
    double runtime_s = 0.0;

    const VariantSummary& variant(const std::string& name) const;
    // Per-seed metric of one variant, ordered by seed.
    std::vector<double> metric(const std::string& variant, const std::string& name) const;
};

void to_json(nlohmann::json& j, const ExperimentReport& r);
std::string report_csv(const ExperimentReport& r);

std::vector<std::string> benchmark_suites();
std::vector<std::string> benchmark_variants(const std::string& suite);
ExperimentReport run_benchmark(const std::string& suite, const BenchOptions& opt);

// One BKAD replication: generated series, detector run, metrics from the first
// position after warm-up unless `evaluate_prefix`.
struct Replication {
    Proportions metrics;
    std::optional<double> auc;
    RunResult run;
    Pos evaluate_from = 1;
};
Replication run_replication(const DetectorConfig& cfg, const Generated& data, bool evaluate_prefix, bool with_auc);

// Position from which metrics are reported for a detector configuration.
Pos evaluation_start(const DetectorConfig& cfg, bool evaluate_prefix);

}  // namespace bkad
