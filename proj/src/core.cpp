#include "bkad/core.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace bkad {

TimeSeries::TimeSeries(std::size_t dim, std::vector<double> flat, std::vector<bool> labels)
    : dim_(dim), flat_(std::move(flat)), labels_(std::move(labels)) {
    if (dim_ == 0) throw ValidationError("time series dimension must be positive");
    if (flat_.size() % dim_ != 0) throw ValidationError("value count is not a multiple of the dimension");
    if (!labels_.empty() && labels_.size() != flat_.size() / dim_)
        throw ValidationError("labels length differs from series length");
}

TimeSeries TimeSeries::univariate(std::vector<double> xs, std::vector<bool> labels) {
    return TimeSeries(1, std::move(xs), std::move(labels));
}

void TimeSeries::push_back(std::span<const double> x, bool label) {
    if (dim_ == 0) dim_ = x.size();
    if (x.size() != dim_) throw ValidationError("observation dimension mismatch");
    const bool labelled = !labels_.empty() || label;
    if (labelled && labels_.size() < static_cast<std::size_t>(length())) labels_.resize(length(), false);
    flat_.insert(flat_.end(), x.begin(), x.end());
    if (labelled) labels_.push_back(label);
}

void TimeSeries::set_labels(std::vector<bool> labels) {
    if (!labels.empty() && static_cast<Pos>(labels.size()) != length())
        throw ValidationError("labels length differs from series length");
    labels_ = std::move(labels);
}

std::vector<SegmentView> Segmentation::segments() const {
    std::vector<SegmentView> out;
    Pos start = 1;
    for (Pos b : breakpoints) {
        out.push_back({start, b - 1});
        start = b;
    }
    out.push_back({start, length});
    return out;
}

SegmentView segment_of(const Segmentation& seg, Pos u) {
    if (u < 1 || u > seg.length)
        throw std::out_of_range("position " + std::to_string(u) + " outside [1," + std::to_string(seg.length) + "]");
    auto it = std::upper_bound(seg.breakpoints.begin(), seg.breakpoints.end(), u);
    Pos start = it == seg.breakpoints.begin() ? 1 : *(it - 1);
    Pos end = it == seg.breakpoints.end() ? seg.length : *it - 1;
    return {start, end};
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over a combined state
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(mix_seed(seed, 0x5eed)) {}

Rng Rng::split(std::uint64_t key) const { return Rng(mix_seed(seed_, key ^ 0xa5a5a5a5ULL)); }

double Rng::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double Rng::normal(double mean, double sd) { return std::normal_distribution<double>(mean, sd)(engine_); }

double Rng::exponential(double mean) { return std::exponential_distribution<double>(1.0 / mean)(engine_); }

bool Rng::bernoulli(double p) { return uniform() < p; }

int Rng::rademacher() { return bernoulli(0.5) ? 1 : -1; }

std::int64_t Rng::uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) throw std::invalid_argument("sample larger than population");
    // partial Fisher-Yates
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        auto j = static_cast<std::size_t>(uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n - 1)));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace bkad
