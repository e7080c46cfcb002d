#pragma once

#include <span>
#include <string>
#include <vector>

#include "bkad/core.hpp"
#include "bkad/estimators.hpp"
#include "bkad/kernels.hpp"

namespace bkad {

struct Ncm {
    enum class Kind { zscore, knn, kernel, mahalanobis };

    Kind kind = Kind::zscore;
    Location location = Location::median;
    Dispersion dispersion = Dispersion::biweight;
    int k = 10;
    int resample_size = 100;
    KernelSpec kernel = KernelSpec::gaussian(1.0);

    static Ncm zscore(Location l = Location::median, Dispersion d = Dispersion::biweight);
    static Ncm knn(int k = 10, int resample_size = 100);
    static Ncm kernel_score(KernelSpec spec);
    static Ncm mahalanobis();

    void validate() const;
    std::string name() const;
};

// Score of x against `training` (n points of dimension dim, row-major), which must not contain x.
double score(const Ncm& ncm, std::span<const double> training, std::size_t dim, std::span<const double> x, Rng& rng);

// Leave-one-out score of each position against its own segment. knn draws one shared
// resample for the call; other measures ignore rng.
std::vector<double> score_segment(const Ncm& ncm, const TimeSeries& series, SegmentView seg,
                                  std::span<const Pos> positions, Rng& rng);
// Every position of the segment, in order.
std::vector<double> score_segment(const Ncm& ncm, const TimeSeries& series, SegmentView seg, Rng& rng);

// Reference path: one independent leave-one-out evaluation per position.
std::vector<double> score_segment_naive(const Ncm& ncm, const TimeSeries& series, SegmentView seg,
                                        std::span<const Pos> positions, Rng& rng);

// Score under known parameters: |x - mu| / sigma in 1D, Mahalanobis with `cov` otherwise.
double score_known(std::span<const double> x, std::span<const double> mu, std::span<const double> cov);

// Value used when a degenerate dispersion meets a deviating point.
inline constexpr double kScoreSentinel = 1.7976931348623157e308;

}  // namespace bkad
