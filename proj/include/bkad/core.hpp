#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace bkad {

// Positions are 1-based everywhere inside the library.
using Pos = std::int64_t;

class TimeSeries {
public:
    TimeSeries() = default;
    TimeSeries(std::size_t dim, std::vector<double> flat, std::vector<bool> labels = {});

    static TimeSeries univariate(std::vector<double> xs, std::vector<bool> labels = {});

    std::size_t dim() const { return dim_; }
    Pos length() const { return static_cast<Pos>(dim_ == 0 ? 0 : flat_.size() / dim_); }
    bool has_labels() const { return !labels_.empty(); }

    // 1-based access
    std::span<const double> at(Pos t) const {
        return {flat_.data() + (t - 1) * static_cast<Pos>(dim_), dim_};
    }
    double scalar(Pos t) const { return flat_[static_cast<std::size_t>(t - 1) * dim_]; }
    bool label(Pos t) const { return labels_[static_cast<std::size_t>(t - 1)]; }

    const std::vector<double>& flat() const { return flat_; }
    const std::vector<bool>& labels() const { return labels_; }

    void push_back(std::span<const double> x, bool label = false);
    void set_labels(std::vector<bool> labels);

private:
    std::size_t dim_ = 0;
    std::vector<double> flat_;
    std::vector<bool> labels_;
};

struct SegmentView {
    Pos start = 1;
    Pos end = 1;  // inclusive
    Pos size() const { return end - start + 1; }
    bool contains(Pos u) const { return start <= u && u <= end; }
    bool operator==(const SegmentView&) const = default;
};

// A breakpoint is the first index of a new segment; position 1 is never stored.
struct Segmentation {
    Pos length = 0;
    std::vector<Pos> breakpoints;

    std::size_t segment_count() const { return breakpoints.size() + 1; }
    // Last breakpoint minus one, 0 when there is none; the segment length is then t - last_boundary().
    Pos last_boundary() const { return breakpoints.empty() ? 0 : breakpoints.back() - 1; }
    std::vector<SegmentView> segments() const;
    bool operator==(const Segmentation&) const = default;
};

SegmentView segment_of(const Segmentation& seg, Pos u);

// Generating parameters of one segment: mean vector and row-major covariance
// (the variance when d = 1).
struct SegmentParams {
    std::vector<double> mu;
    std::vector<double> cov;
};

// Ground truth attached to a synthetic series.
struct Truth {
    Segmentation segmentation;
    std::vector<SegmentParams> params;  // one per segment
    std::vector<bool> labels;
};

struct DetectionRecord {
    Pos position = 0;
    Pos time = 0;
    double score = 0.0;
    double p_value = 1.0;
    int status = 0;
};

// Deterministic RNG with explicit stream splitting.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    std::uint64_t seed() const { return seed_; }
    // Child stream keyed by `key`; independent of the parent's consumption.
    Rng split(std::uint64_t key) const;
    Rng next_child() { return split(counter_++); }

    std::mt19937_64& engine() { return engine_; }
    double uniform();
    double normal(double mean = 0.0, double sd = 1.0);
    double exponential(double mean);
    bool bernoulli(double p);
    int rademacher();
    // Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    // k distinct indices from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
    std::mt19937_64 engine_;
};

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace bkad
