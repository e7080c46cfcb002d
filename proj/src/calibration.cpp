#include "bkad/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bkad/estimators.hpp"

namespace bkad {

SegmentSummary summarize(SegmentView seg, std::span<const double> values) {
    SegmentSummary s;
    s.segment = seg;
    if (values.empty()) return s;
    s.mu = median_of(values);
    s.sigma = values.size() >= 2 ? std::sqrt(std::max(0.0, biweight_midvariance(values))) : 0.0;
    return s;
}

void SegmentSummary::add(Pos u, double score, bool is_abnormal) {
    positions.push_back(u);
    scores.push_back(score);
    abnormal.push_back(is_abnormal ? 1 : 0);
}

std::vector<double> SegmentSummary::normal_scores() const {
    std::vector<double> out;
    for (std::size_t j = 0; j < scores.size(); ++j)
        if (!abnormal[j]) out.push_back(scores[j]);
    return out;
}

double bhattacharyya(const SegmentSummary& a, const SegmentSummary& b) {
    if (!(a.sigma > 0.0) || !(b.sigma > 0.0)) {
        if (a.sigma == b.sigma && a.mu == b.mu) return 0.0;
        return kInfiniteDistance;
    }
    const double pooled = 0.5 * (a.sigma * a.sigma + b.sigma * b.sigma);
    const double dm = a.mu - b.mu;
    return dm * dm / (8.0 * pooled) + 0.5 * std::log(std::sqrt(pooled) / std::sqrt(a.sigma * b.sigma));
}

CalibrationSet build_calibration_set(const SegmentSummary& current, const std::vector<SegmentSummary>& history,
                                     std::size_t n, Rng& rng) {
    if (n == 0) throw std::invalid_argument("calibration cardinality must be positive");
    std::vector<std::size_t> order(history.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> dist(history.size());
    for (std::size_t i = 0; i < history.size(); ++i) dist[i] = bhattacharyya(current, history[i]);
    // ties keep the most recent segment first
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (dist[a] != dist[b]) return dist[a] < dist[b];
        return a > b;
    });

    // replacement pool: scores of the most similar non-empty source
    std::vector<double> pool = current.scores;
    std::size_t pool_source = 0;
    for (std::size_t k = 0; pool.empty() && k < order.size(); ++k) {
        pool = history[order[k]].scores;
        pool_source = order[k] + 1;
    }

    CalibrationSet out;
    auto take = [&](const SegmentSummary& s, std::size_t source) {
        for (std::size_t j = 0; j < s.scores.size() && out.scores.size() < n; ++j) {
            if (!s.abnormal[j]) {
                out.scores.push_back(s.scores[j]);
                out.provenance.push_back({s.scores[j], source, s.positions[j], false});
            } else if (!pool.empty()) {
                const double r = pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
                out.scores.push_back(r);
                out.provenance.push_back({r, pool_source, s.positions[j], true});
            }
        }
    };
    take(current, 0);
    for (auto i : order) {
        if (out.scores.size() >= n) break;
        out.distances.push_back(dist[i]);
        take(history[i], i + 1);
    }
    out.short_set = out.scores.size() < n;
    return out;
}

std::size_t calibration_cardinality(std::size_t m, double slope, double k) {
    if (m < 1 || !(slope > 0.0 && slope < 1.0) || !(k >= 1.0)) throw std::invalid_argument("calibration_cardinality: need m >= 1, 0 < slope < 1, k >= 1");
    const double n = k * static_cast<double>(m) / slope - 1.0;
    return static_cast<std::size_t>(std::llround(std::max(1.0, n)));
}

}  // namespace bkad
