#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <limits>
#include <vector>

#include "bkad/core.hpp"

namespace bkad {

// Robust summary of one segment used to rank segments by similarity.
struct SegmentSummary {
    SegmentView segment;
    double mu = 0.0;
    double sigma = 0.0;
    // Scored positions, most recent first, with their current status.
    std::vector<Pos> positions;
    std::vector<double> scores;
    std::vector<std::uint8_t> abnormal;

    void add(Pos u, double score, bool is_abnormal);
    std::vector<double> normal_scores() const;
};

// Median and biweight standard deviation of raw values.
SegmentSummary summarize(SegmentView seg, std::span<const double> values);

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

// Gaussian Bhattacharyya distance with pooled variance (σa² + σb²) / 2; +inf when
// either dispersion is zero.
double bhattacharyya(const SegmentSummary& a, const SegmentSummary& b);

struct CalibrationEntry {
    double score = 0.0;
    std::size_t source = 0;  // 0 = current segment, i = history[i-1]
    Pos position = 0;        // position the score belongs to
    bool replacement = false;
};

struct CalibrationSet {
    std::vector<double> scores;
    std::vector<CalibrationEntry> provenance;
    std::vector<double> distances;  // distance of each history source used, in append order
    bool short_set = false;
};

// Current segment's non-active normal scores first, then history segments by
// ascending distance to the current one, until n scores are gathered. Every
// abnormal-status position met on the way contributes a score drawn uniformly
// from all scores of the most similar non-empty source instead of its own.
CalibrationSet build_calibration_set(const SegmentSummary& current, const std::vector<SegmentSummary>& history,
                                     std::size_t n, Rng& rng);

// n = k m / α′ - 1, rounded to the nearest integer.
std::size_t calibration_cardinality(std::size_t m, double slope, double k);

}  // namespace bkad
