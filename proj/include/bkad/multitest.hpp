#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace bkad {

struct BhResult {
    double threshold = 0.0;           // ε̂ = α′ k̂ / m
    std::size_t k_hat = 0;
    std::vector<std::size_t> rejected;  // indices into the input, ascending
    double slope = 0.0;
};

// Fraction of calibration scores strictly exceeding s; 1 when s is at or below the
// calibration minimum, so a constant score stream is never flagged.
double empirical_pvalue(double s, std::span<const double> calibration);

// Calibration scores sorted once, then O(log n) p-values.
class PValueTable {
public:
    explicit PValueTable(std::vector<double> calibration);
    double operator()(double s) const;
    std::size_t size() const { return sorted_.size(); }

private:
    std::vector<double> sorted_;
};

// Comparisons p <= α′k/m carry a relative slack of 1e-12 so that grid p-values
// equal to a step value are not lost to rounding of α′k/m.
inline constexpr double kStepSlack = 1e-12;

BhResult bh_threshold(std::span<const double> pvalues, double slope);
bool bh_rejects(double p, double threshold);

// α′ = α / (1 + (1 - α) / (m π))
double modified_slope(double alpha, std::size_t m, double pi);

// BH at the modified slope, or at `slope_override` when given.
BhResult threshold_choice(std::span<const double> pvalues, double alpha, double pi,
                          std::optional<double> slope_override = std::nullopt);

}  // namespace bkad
