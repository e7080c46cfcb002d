#include "bkad/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bkad/core.hpp"

namespace bkad {

Location parse_location(const std::string& name) {
    if (name == "mle" || name == "mean" || name == "mle_mean") return Location::mle_mean;
    if (name == "median") return Location::median;
    if (name == "biweight" || name == "bw") return Location::biweight;
    throw ValidationError("unknown location estimator: " + name);
}

Dispersion parse_dispersion(const std::string& name) {
    if (name == "mle" || name == "std" || name == "mle_std") return Dispersion::mle_std;
    if (name == "mad") return Dispersion::mad;
    if (name == "biweight" || name == "bw") return Dispersion::biweight;
    throw ValidationError("unknown dispersion estimator: " + name);
}

std::string to_string(Location l) {
    switch (l) {
        case Location::mle_mean: return "mle";
        case Location::median: return "median";
        case Location::biweight: return "biweight";
    }
    return "?";
}

std::string to_string(Dispersion d) {
    switch (d) {
        case Dispersion::mle_std: return "mle";
        case Dispersion::mad: return "mad";
        case Dispersion::biweight: return "biweight";
    }
    return "?";
}

double lower_median(std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("median of an empty sample");
    const std::size_t k = (v.size() + 1) / 2 - 1;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
    return v[k];
}

double median_of(std::span<const double> xs) {
    std::vector<double> v(xs.begin(), xs.end());
    return lower_median(v);
}

double mad_of(std::span<const double> xs, double center) {
    std::vector<double> dev(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) dev[i] = std::abs(xs[i] - center);
    return lower_median(dev);
}

namespace {

struct BiweightSums {
    double loc_num = 0.0, loc_den = 0.0;
    double var_num = 0.0, var_den = 0.0;
};

inline void add_biweight_term(BiweightSums& s, double x, double m, double scale, double sign) {
    const double d = x - m;
    const double u = d / scale;
    const double u2 = u * u;
    if (u2 >= 1.0) return;
    const double w = 1.0 - u2;
    s.loc_num += sign * w * x;
    s.loc_den += sign * w;
    s.var_num += sign * d * d * w * w * w * w;
    s.var_den += sign * w * (1.0 - 5.0 * u2);
}

}  // namespace

double biweight_location(std::span<const double> xs) {
    const double m = median_of(xs);
    const double mad = mad_of(xs, m);
    if (!(mad > 0.0)) return m;
    BiweightSums s;
    for (double x : xs) add_biweight_term(s, x, m, kBiweightC * mad, 1.0);
    return s.loc_num / s.loc_den;
}

double biweight_midvariance(std::span<const double> xs) {
    const double m = median_of(xs);
    const double mad = mad_of(xs, m);
    if (!(mad > 0.0)) return 0.0;
    BiweightSums s;
    for (double x : xs) add_biweight_term(s, x, m, kBiweightC * mad, 1.0);
    return static_cast<double>(xs.size()) * s.var_num / (s.var_den * s.var_den);
}

double location(Location est, std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("location of an empty sample");
    switch (est) {
        case Location::mle_mean: return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        case Location::median: return median_of(xs);
        case Location::biweight: return biweight_location(xs);
    }
    return 0.0;
}

double dispersion(Dispersion est, std::span<const double> xs, double center) {
    if (xs.empty()) throw std::invalid_argument("dispersion of an empty sample");
    switch (est) {
        case Dispersion::mle_std: {
            double acc = 0.0;
            for (double x : xs) acc += (x - center) * (x - center);
            return std::sqrt(acc / static_cast<double>(xs.size()));
        }
        case Dispersion::mad: return mad_of(xs, center);
        case Dispersion::biweight: return std::sqrt(biweight_midvariance(xs));
    }
    return 0.0;
}

std::array<double, 4> biweight_midcovariance(std::span<const double> xy) {
    const std::size_t n = xy.size() / 2;
    if (n < 3) throw std::invalid_argument("biweight midcovariance needs at least three points");
    std::array<std::vector<double>, 2> col;
    for (int c = 0; c < 2; ++c) {
        col[c].resize(n);
        for (std::size_t i = 0; i < n; ++i) col[c][i] = xy[2 * i + c];
    }
    std::array<double, 2> med{}, mad{};
    for (int c = 0; c < 2; ++c) {
        med[c] = median_of(col[c]);
        mad[c] = mad_of(col[c], med[c]);
        if (!(mad[c] > 0.0)) throw std::invalid_argument("biweight midcovariance: degenerate MAD");
    }
    // numerator terms d(1-u^2)^2 zeroed outside |u| < 1; denominators per coordinate
    std::array<std::vector<double>, 2> num;
    std::array<double, 2> den{};
    for (int c = 0; c < 2; ++c) {
        num[c].assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = col[c][i] - med[c];
            const double u = d / (kBiweightC * mad[c]);
            const double u2 = u * u;
            if (u2 >= 1.0) continue;
            num[c][i] = d * (1.0 - u2) * (1.0 - u2);
            den[c] += (1.0 - u2) * (1.0 - 5.0 * u2);
        }
    }
    std::array<double, 4> out{};
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += num[a][i] * num[b][i];
            out[2 * a + b] = static_cast<double>(n) * acc / (den[a] * den[b]);
        }
    return out;
}

LooMedianMad loo_median_mad(std::span<const double> xs) {
    const std::size_t n = xs.size();
    if (n < 2) throw std::invalid_argument("leave-one-out needs at least two points");
    LooMedianMad out;
    out.variant.assign(n, 0);
    // 0-based rank k of the lower median among the n-1 remaining values
    const std::size_t k = n / 2 - 1;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<std::size_t> rank(n);
    for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;
    // removing rank r > k keeps sorted[k]; otherwise the median shifts to sorted[k+1]
    const std::array<double, 2> med = {xs[order[k]], xs[order[k + 1]]};
    std::vector<double> dev(n);
    std::vector<std::size_t> dorder(n), drank(n);
    for (int mc = 0; mc < 2; ++mc) {
        for (std::size_t i = 0; i < n; ++i) dev[i] = std::abs(xs[i] - med[mc]);
        std::iota(dorder.begin(), dorder.end(), 0);
        std::sort(dorder.begin(), dorder.end(), [&](std::size_t a, std::size_t b) { return dev[a] < dev[b]; });
        for (std::size_t r = 0; r < n; ++r) drank[dorder[r]] = r;
        out.median[2 * mc] = out.median[2 * mc + 1] = med[mc];
        out.mad[2 * mc] = dev[dorder[k]];
        out.mad[2 * mc + 1] = dev[dorder[k + 1]];
        for (std::size_t i = 0; i < n; ++i) {
            const int own_mc = rank[i] > k ? 0 : 1;
            if (own_mc != mc) continue;
            const int dc = drank[i] > k ? 0 : 1;
            out.variant[i] = static_cast<std::uint8_t>(2 * mc + dc);
        }
    }
    return out;
}

LooBiweight loo_biweight(std::span<const double> xs, const LooMedianMad& mm) {
    const std::size_t n = xs.size();
    std::array<bool, 4> used{};
    for (auto v : mm.variant) used[v] = true;
    std::array<BiweightSums, 4> total{};
    for (int v = 0; v < 4; ++v) {
        if (!used[v] || !(mm.mad[v] > 0.0)) continue;
        for (double x : xs) add_biweight_term(total[v], x, mm.median[v], kBiweightC * mm.mad[v], 1.0);
    }
    LooBiweight out;
    out.location.resize(n);
    out.midvariance.resize(n);
    const double count = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const int v = mm.variant[i];
        if (!(mm.mad[v] > 0.0)) {
            out.location[i] = mm.median[v];
            out.midvariance[i] = 0.0;
            continue;
        }
        BiweightSums s = total[v];
        add_biweight_term(s, xs[i], mm.median[v], kBiweightC * mm.mad[v], -1.0);
        out.location[i] = s.loc_num / s.loc_den;
        out.midvariance[i] = count * s.var_num / (s.var_den * s.var_den);
    }
    return out;
}

}  // namespace bkad
