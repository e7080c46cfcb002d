#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bkad/core.hpp"
#include "bkad/kernels.hpp"
#include "bkad/scoring.hpp"

namespace bkad {

// Per-step segmentation record of an online run. b̂_t is stored as the last
// boundary (first index of the current segment minus one, 0 when none), so the
// current segment length is t - b̂_t.
struct SegmentationHistory {
    std::vector<Pos> last;                 // last[t-1] = b̂_t
    std::vector<std::vector<Pos>> full;    // boundaries (breakpoint - 1) of τ̂(t); may be empty

    Pos size() const { return static_cast<Pos>(last.size()); }
    void push(const Segmentation& seg);
    void push_last(Pos b);
};

// Probability-of-change curve on λ = 0..(size-1) or on an explicit grid.
struct Curve {
    std::vector<double> x;
    std::vector<double> p;
};

// f̂_τ(λ) = S_λ / (T̃ - λ): S_λ counts t̃ for which some boundary b' of a later
// segmentation satisfies b̂_t̃ < b' < t̃ - λ. Needs `full`.
Curve f_tau_exact(const SegmentationHistory& h, Pos lambda_max);
// Quadratic reference for f_tau_exact.
Curve f_tau_exact_naive(const SegmentationHistory& h, Pos lambda_max);

// r_t̃ = max over t' > t̃ with b̂_t̃ < b̂_t' < t̃ of t̃ - b̂_t'; 0 when empty.
std::vector<Pos> r_naive(const SegmentationHistory& h);
std::vector<Pos> r_efficient(const SegmentationHistory& h);
// f̂_τ(λ) = (1/T̃) Σ 1[r_t̃ > λ]
Curve f_tau_from_r(std::span<const Pos> r, Pos lambda_max);

// Smallest grid value whose probability is below `level`; nullopt if none.
std::optional<double> cutoff(const Curve& c, double level);

// Algorithm 4: ℓ_t < ℓ̂ → ℓ_t, else min(λ̂, ℓ_t).
Pos active_set_cardinality(Pos ell_t, Pos lambda_hat, Pos ell_hat);

std::vector<Pos> default_fd_grid();

struct FdTrainConfig {
    std::vector<Pos> grid = default_fd_grid();
    Pos m = 100;
    Pos n = 999;
    double slope = 0.1;
    int repetitions = 200;
};

struct FdCurves {
    Curve unknown;   // all test points
    Curve normal;    // test points with full-segment status 0
    Curve abnormal;  // test points with full-segment status 1
};

// Historical segments are given as flat row-major values of dimension dim.
FdCurves train_f_d(const std::vector<std::vector<double>>& segments, std::size_t dim, const Ncm& ncm,
                   const FdTrainConfig& cfg, Rng& rng);

struct UncertaintyModel {
    Curve f_tau;        // efficient estimate from r_t̃
    Curve f_tau_exact;
    FdCurves f_d;
    double eta = 0.01;
    Pos lambda_star = 0;
    Pos ell_star = 0;
    bool lambda_reached = true;  // false: no λ below η/2, lambda_star is the largest λ
    bool ell_reached = true;     // false: no grid ℓ below η/2, ell_star is the largest ℓ
};

struct ProfileConfig {
    std::optional<KernelSpec> kernel;  // absent: median heuristic on the history
    Ncm ncm = Ncm::zscore();
    double eta = 0.01;
    Pos lambda_max = 500;
    int d_max = 0;  // 0: default for the history length
    FdTrainConfig fd;
};

// Replays the changepoint search over a historical series, estimates f_τ from the
// segmentation history and f_d from the final segments, and picks λ̂ and ℓ̂ as the
// smallest values whose curve falls below η/2 (half of η per source of change).
// The history must hold at least 10 times the largest ℓ of the f_d grid.
UncertaintyModel build_uncertainty_model(const TimeSeries& history, const ProfileConfig& cfg, Rng& rng);

}  // namespace bkad
