#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bkad/core.hpp"
#include "bkad/kernels.hpp"

namespace bkad {

struct KcpConfig {
    KernelSpec kernel = KernelSpec::gaussian(1.0);
    int d_max = 10;
    int min_seg_len = 2;
    int refit_every = 1;
};

// max(10, T/50) capped at 50
int default_d_max(Pos T);

struct PenaltyFit {
    double c1 = 0.0;
    double c2 = 0.0;
};

// log C(t-1, D-1)
double log_binom_segmentations(Pos t, int D);

// Un-normalized cost of one segment [a, b] (1-based, inclusive).
double segment_cost(const TimeSeries& series, const KernelSpec& kernel, Pos a, Pos b, int min_seg_len = 2);

// Least squares of values[D-1] ~ b0 - c1*D - c2*log C(t-1,D-1) over D in [ceil(0.6*d_max), d_max],
// slopes doubled and clamped at zero. Throws when fewer than 3 finite points fall in the range.
PenaltyFit fit_penalty(std::span<const double> values, Pos t, int d_max);

// Online kernel changepoint search: one dp_step per observation.
class Kcp {
public:
    Kcp(KcpConfig cfg, std::size_t dim);

    void push(std::span<const double> x);
    Pos t() const { return t_; }
    const KcpConfig& config() const { return cfg_; }

    // L_{D,t} for the current t; +inf when infeasible.
    double cost(int D) const;
    double cost(int D, Pos t) const;
    // Best segmentation into D segments of X_1..X_t.
    Segmentation best(int D) const;
    Segmentation best(int D, Pos t) const;
    // Largest D with a finite cost at the current t.
    int feasible_d_max() const;

    PenaltyFit penalty() const { return penalty_; }
    bool penalty_fitted() const { return fitted_; }
    int selected_segment_count() const { return selected_d_; }
    Segmentation select() const { return best(selected_d_); }

private:
    void refit();
    void choose();

    KcpConfig cfg_;
    std::size_t dim_;
    std::vector<std::pair<double, double>> terms_;
    Pos t_ = 0;
    std::vector<double> points_;
    std::vector<double> diag_prefix_;      // diag_prefix_[a] = sum_{u<=a} K(u,u), a in [0,t]
    std::vector<double> block_;            // block_[a-1] = sum_{u,v in [a,t]} K(u,v)
    std::vector<std::vector<double>> L_;   // L_[D-1][t]
    std::vector<std::vector<std::int32_t>> back_;  // start of the last segment
    std::vector<double> column_, suffix_, cost_, len_;
    PenaltyFit penalty_;
    bool fitted_ = false;
    int selected_d_ = 1;
};

// Offline convenience: runs the online search over the whole series.
Segmentation kcp_segment(const TimeSeries& series, const KcpConfig& cfg);

}  // namespace bkad
