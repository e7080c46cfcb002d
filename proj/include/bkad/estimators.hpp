#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bkad {

enum class Location { mle_mean, median, biweight };
enum class Dispersion { mle_std, mad, biweight };

Location parse_location(const std::string& name);
Dispersion parse_dispersion(const std::string& name);
std::string to_string(Location l);
std::string to_string(Dispersion d);

// Tuning constant of the biweight weights u = (x - median) / (c * MAD).
inline constexpr double kBiweightC = 9.0;

// Order statistic of rank ceil(n/2); reorders `v`.
double lower_median(std::vector<double>& v);
double median_of(std::span<const double> xs);
// Unscaled median absolute deviation around `center`.
double mad_of(std::span<const double> xs, double center);

double biweight_location(std::span<const double> xs);
// Biweight midvariance (a variance, not a standard deviation).
double biweight_midvariance(std::span<const double> xs);

double location(Location est, std::span<const double> xs);
// mle_std and mad measure spread around `center`; the biweight uses its own median.
double dispersion(Dispersion est, std::span<const double> xs, double center);

// Row-major 2x2 matrix of biweight midcovariances for 2-vectors stored as (x0,y0,x1,y1,...).
std::array<double, 4> biweight_midcovariance(std::span<const double> xy);

// Leave-one-out median and MAD for every element at O(n log n) total cost.
// Removing one element yields one of two medians, and around each median one of
// two MADs, so every element maps to one of four (median, MAD) variants.
struct LooMedianMad {
    std::vector<std::uint8_t> variant;
    std::array<double, 4> median{};
    std::array<double, 4> mad{};
};
LooMedianMad loo_median_mad(std::span<const double> xs);

// Leave-one-out biweight sums for a variant table; index i excludes element i.
struct LooBiweight {
    std::vector<double> location;     // biweight location of xs \ {x_i}
    std::vector<double> midvariance;  // biweight midvariance of xs \ {x_i}
};
LooBiweight loo_biweight(std::span<const double> xs, const LooMedianMad& mm);

}  // namespace bkad
