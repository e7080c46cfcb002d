#include "bkad/multitest.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace bkad {

double empirical_pvalue(double s, std::span<const double> calibration) {
    if (calibration.empty()) throw std::invalid_argument("empty calibration set");
    std::size_t exceed = 0;
    double lowest = calibration.front();
    for (double c : calibration) {
        exceed += c > s ? 1 : 0;
        lowest = std::min(lowest, c);
    }
    if (s <= lowest) return 1.0;
    return static_cast<double>(exceed) / static_cast<double>(calibration.size());
}

PValueTable::PValueTable(std::vector<double> calibration) : sorted_(std::move(calibration)) {
    if (sorted_.empty()) throw std::invalid_argument("empty calibration set");
    std::sort(sorted_.begin(), sorted_.end());
}

double PValueTable::operator()(double s) const {
    if (s <= sorted_.front()) return 1.0;
    auto it = std::upper_bound(sorted_.begin(), sorted_.end(), s);
    return static_cast<double>(sorted_.end() - it) / static_cast<double>(sorted_.size());
}

bool bh_rejects(double p, double threshold) { return p <= threshold * (1.0 + kStepSlack); }

BhResult bh_threshold(std::span<const double> pvalues, double slope) {
    BhResult out;
    out.slope = slope;
    const std::size_t m = pvalues.size();
    if (m == 0) return out;
    std::vector<double> sorted(pvalues.begin(), pvalues.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = m; k >= 1; --k) {
        if (bh_rejects(sorted[k - 1], slope * static_cast<double>(k) / static_cast<double>(m))) {
            out.k_hat = k;
            break;
        }
    }
    out.threshold = slope * static_cast<double>(out.k_hat) / static_cast<double>(m);
    if (out.k_hat == 0) return out;
    for (std::size_t i = 0; i < m; ++i)
        if (bh_rejects(pvalues[i], out.threshold)) out.rejected.push_back(i);
    return out;
}

double modified_slope(double alpha, std::size_t m, double pi) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
    if (!(pi > 0.0 && pi < 1.0)) throw std::invalid_argument("pi must lie in (0,1)");
    if (m == 0) throw std::invalid_argument("active set must be non-empty");
    return alpha / (1.0 + (1.0 - alpha) / (static_cast<double>(m) * pi));
}

BhResult threshold_choice(std::span<const double> pvalues, double alpha, double pi,
                          std::optional<double> slope_override) {
    if (pvalues.empty()) throw std::invalid_argument("active set must be non-empty");
    const double slope = slope_override ? *slope_override : modified_slope(alpha, pvalues.size(), pi);
    return bh_threshold(pvalues, slope);
}

}  // namespace bkad
