#include "bkad/scoring.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace bkad {

Ncm Ncm::zscore(Location l, Dispersion d) {
    Ncm n;
    n.kind = Kind::zscore;
    n.location = l;
    n.dispersion = d;
    return n;
}

Ncm Ncm::knn(int k, int resample_size) {
    Ncm n;
    n.kind = Kind::knn;
    n.k = k;
    n.resample_size = resample_size;
    n.validate();
    return n;
}

Ncm Ncm::kernel_score(KernelSpec spec) {
    Ncm n;
    n.kind = Kind::kernel;
    n.kernel = std::move(spec);
    n.validate();
    return n;
}

Ncm Ncm::mahalanobis() {
    Ncm n;
    n.kind = Kind::mahalanobis;
    return n;
}

void Ncm::validate() const {
    if (kind == Kind::knn) {
        if (resample_size < 10) throw ValidationError("knn resample size must be at least 10");
        if (k < 1 || k >= resample_size) throw ValidationError("knn needs 1 <= k < resample size");
    }
    if (kind == Kind::kernel) kernel.validate();
}

std::string Ncm::name() const {
    switch (kind) {
        case Kind::zscore: return "zscore(" + to_string(location) + "," + to_string(dispersion) + ")";
        case Kind::knn: return "knn(" + std::to_string(k) + "," + std::to_string(resample_size) + ")";
        case Kind::kernel: return "kernel";
        case Kind::mahalanobis: return "mahalanobis";
    }
    return "?";
}

namespace {

double ratio_score(double dev, double scale) {
    if (scale > 0.0) return dev / scale;
    return dev == 0.0 ? 0.0 : kScoreSentinel;
}

double euclid(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
}

double mean_k_smallest(std::vector<double>& d, int k) {
    const auto kk = std::min<std::size_t>(static_cast<std::size_t>(k), d.size());
    if (kk == 0) return 0.0;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kk - 1), d.end());
    double acc = 0.0;
    for (std::size_t i = 0; i < kk; ++i) acc += d[i];
    return acc / static_cast<double>(kk);
}

double mahalanobis2(double dx, double dy, const std::array<double, 4>& s) {
    const double det = s[0] * s[3] - s[1] * s[2];
    if (!(det > 0.0) || !(s[0] > 0.0)) {
        return (dx == 0.0 && dy == 0.0) ? 0.0 : kScoreSentinel;
    }
    const double q = (s[3] * dx * dx - (s[1] + s[2]) * dx * dy + s[0] * dy * dy) / det;
    return std::sqrt(std::max(q, 0.0));
}

double zscore_of(const Ncm& ncm, std::span<const double> xs, double x) {
    const double mu = location(ncm.location, xs);
    const double sd = dispersion(ncm.dispersion, xs, mu);
    return ratio_score(std::abs(x - mu), sd);
}

}  // namespace

double score(const Ncm& ncm, std::span<const double> training, std::size_t dim, std::span<const double> x, Rng& rng) {
    if (x.size() != dim) throw ValidationError("score: dimension mismatch");
    const std::size_t n = training.size() / dim;
    switch (ncm.kind) {
        case Ncm::Kind::zscore: {
            if (dim != 1) throw ValidationError("zscore is univariate");
            if (n < 2) throw std::invalid_argument("zscore needs at least two training points");
            return zscore_of(ncm, training, x[0]);
        }
        case Ncm::Kind::knn: {
            if (n == 0) throw std::invalid_argument("knn needs training points");
            const auto b = std::min<std::size_t>(n, static_cast<std::size_t>(ncm.resample_size));
            auto idx = rng.sample_without_replacement(n, b);
            std::vector<double> d(b);
            for (std::size_t i = 0; i < b; ++i) d[i] = euclid(training.subspan(idx[i] * dim, dim), x);
            return mean_k_smallest(d, ncm.k);
        }
        case Ncm::Kind::kernel: {
            if (n == 0) throw std::invalid_argument("kernel score needs training points");
            double gram = 0.0, cross = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                auto si = training.subspan(i * dim, dim);
                cross += eval(ncm.kernel, x, si);
                for (std::size_t j = 0; j < n; ++j) gram += eval(ncm.kernel, si, training.subspan(j * dim, dim));
            }
            const double m = static_cast<double>(n);
            return gram / (m * m) - 2.0 * cross / m + eval(ncm.kernel, x, x);
        }
        case Ncm::Kind::mahalanobis: {
            if (dim != 2) throw ValidationError("mahalanobis score is implemented for 2-dimensional data");
            if (n < 3) throw std::invalid_argument("mahalanobis needs at least three training points");
            std::vector<double> c0(n), c1(n);
            for (std::size_t i = 0; i < n; ++i) {
                c0[i] = training[2 * i];
                c1[i] = training[2 * i + 1];
            }
            const auto cov = biweight_midcovariance(training);
            const double det = cov[0] * cov[3] - cov[1] * cov[2];
            if (!(det > 0.0)) throw std::invalid_argument("mahalanobis: singular covariance estimate");
            return mahalanobis2(x[0] - biweight_location(c0), x[1] - biweight_location(c1), cov);
        }
    }
    return 0.0;
}

double score_known(std::span<const double> x, std::span<const double> mu, std::span<const double> cov) {
    if (x.size() == 1) return ratio_score(std::abs(x[0] - mu[0]), std::sqrt(cov[0]));
    if (x.size() == 2) return mahalanobis2(x[0] - mu[0], x[1] - mu[1], {cov[0], cov[1], cov[2], cov[3]});
    throw ValidationError("known-parameter score supports dimensions 1 and 2");
}

namespace {

std::vector<double> values_of(const TimeSeries& series, SegmentView seg) {
    const auto dim = static_cast<Pos>(series.dim());
    const auto& f = series.flat();
    return {f.begin() + (seg.start - 1) * dim, f.begin() + seg.end * dim};
}

// Leave-one-out z-scores for every element of xs.
std::vector<double> loo_zscores(const Ncm& ncm, std::span<const double> xs) {
    const std::size_t n = xs.size();
    std::vector<double> out(n, 0.0);
    if (n < 3) return out;
    const double m = static_cast<double>(n - 1);
    if (ncm.location == Location::mle_mean && ncm.dispersion == Dispersion::mle_std) {
        const double g = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(n);
        double d2 = 0.0;
        for (double x : xs) d2 += (x - g) * (x - g);
        for (std::size_t i = 0; i < n; ++i) {
            const double e = xs[i] - g;
            const double mu = g - e / m;
            const double ss = std::max(0.0, d2 - e * e - e * e / m);
            out[i] = ratio_score(std::abs(xs[i] - mu), std::sqrt(ss / m));
        }
        return out;
    }
    const bool median_loc = ncm.location == Location::median;
    const bool bw_pair = ncm.location == Location::biweight && ncm.dispersion == Dispersion::biweight;
    if (!median_loc && !bw_pair) {
        std::vector<double> rest(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            std::copy(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(i), rest.begin());
            std::copy(xs.begin() + static_cast<std::ptrdiff_t>(i) + 1, xs.end(), rest.begin() + static_cast<std::ptrdiff_t>(i));
            out[i] = zscore_of(ncm, rest, xs[i]);
        }
        return out;
    }
    const auto mm = loo_median_mad(xs);
    LooBiweight bw;
    if (ncm.dispersion == Dispersion::biweight) bw = loo_biweight(xs, mm);
    std::array<double, 2> sq{};
    if (ncm.dispersion == Dispersion::mle_std)
        for (int mc = 0; mc < 2; ++mc)
            for (double x : xs) sq[mc] += (x - mm.median[2 * mc]) * (x - mm.median[2 * mc]);
    for (std::size_t i = 0; i < n; ++i) {
        const int v = mm.variant[i];
        const double mu = median_loc ? mm.median[v] : bw.location[i];
        double sd = 0.0;
        switch (ncm.dispersion) {
            case Dispersion::biweight: sd = std::sqrt(bw.midvariance[i]); break;
            case Dispersion::mad: sd = mm.mad[v]; break;
            case Dispersion::mle_std: {
                const double e = xs[i] - mm.median[v];
                sd = std::sqrt(std::max(0.0, sq[v / 2] - e * e) / m);
                break;
            }
        }
        out[i] = ratio_score(std::abs(xs[i] - mu), sd);
    }
    return out;
}

std::vector<double> loo_kernel_scores(const KernelSpec& kernel, std::span<const double> xs, std::size_t dim) {
    const std::size_t n = xs.size() / dim;
    std::vector<double> out(n, 0.0);
    if (n < 2) return out;
    std::vector<double> row(n), rowsum(n, 0.0), diag(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        eval_column(kernel, xs, dim, xs.subspan(i * dim, dim), row);
        rowsum[i] = std::accumulate(row.begin(), row.end(), 0.0);
        diag[i] = row[i];
        total += rowsum[i];
    }
    const double m = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double gram = total - 2.0 * rowsum[i] + diag[i];
        const double cross = rowsum[i] - diag[i];
        out[i] = gram / (m * m) - 2.0 * cross / m + diag[i];
    }
    return out;
}

std::vector<double> loo_mahalanobis(std::span<const double> xy) {
    const std::size_t n = xy.size() / 2;
    std::vector<double> out(n, 0.0);
    if (n < 4) return out;
    std::array<std::vector<double>, 2> col;
    std::array<LooMedianMad, 2> mm;
    std::array<LooBiweight, 2> bw;
    for (int c = 0; c < 2; ++c) {
        col[c].resize(n);
        for (std::size_t i = 0; i < n; ++i) col[c][i] = xy[2 * i + c];
        mm[c] = loo_median_mad(col[c]);
        bw[c] = loo_biweight(col[c], mm[c]);
    }
    // per coordinate and variant: numerator terms d(1-u^2)^2 and denominator terms (1-u^2)(1-5u^2)
    std::array<std::array<std::vector<double>, 4>, 2> num, den;
    std::array<std::array<double, 4>, 2> den_total{};
    for (int c = 0; c < 2; ++c)
        for (int v = 0; v < 4; ++v) {
            num[c][v].assign(n, 0.0);
            den[c][v].assign(n, 0.0);
            const double scale = kBiweightC * mm[c].mad[v];
            if (!(scale > 0.0)) continue;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = col[c][i] - mm[c].median[v];
                const double u2 = (d / scale) * (d / scale);
                if (u2 >= 1.0) continue;
                num[c][v][i] = d * (1.0 - u2) * (1.0 - u2);
                den[c][v][i] = (1.0 - u2) * (1.0 - 5.0 * u2);
                den_total[c][v] += den[c][v][i];
            }
        }
    std::array<std::array<double, 4>, 4> cross{};
    std::array<std::array<bool, 4>, 4> used{};
    for (std::size_t i = 0; i < n; ++i) used[mm[0].variant[i]][mm[1].variant[i]] = true;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            if (!used[a][b]) continue;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) acc += num[0][a][i] * num[1][b][i];
            cross[a][b] = acc;
        }
    const double m = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const int a = mm[0].variant[i], b = mm[1].variant[i];
        const double dx = xy[2 * i] - bw[0].location[i];
        const double dy = xy[2 * i + 1] - bw[1].location[i];
        const double d0 = den_total[0][a] - den[0][a][i];
        const double d1 = den_total[1][b] - den[1][b][i];
        const double off = m * (cross[a][b] - num[0][a][i] * num[1][b][i]) / (d0 * d1);
        std::array<double, 4> s = {bw[0].midvariance[i], off, off, bw[1].midvariance[i]};
        if (!(mm[0].mad[a] > 0.0) || !(mm[1].mad[b] > 0.0)) s = {0.0, 0.0, 0.0, 0.0};
        out[i] = mahalanobis2(dx, dy, s);
    }
    return out;
}

std::vector<double> knn_scores(const Ncm& ncm, std::span<const double> xs, std::size_t dim,
                               std::span<const std::size_t> which, Rng& rng) {
    const std::size_t n = xs.size() / dim;
    const auto b = static_cast<std::size_t>(ncm.resample_size);
    // one shared draw of b+1 indices; each point uses the first b that are not itself
    auto pool = rng.sample_without_replacement(n, std::min(n, b + 1));
    std::vector<double> out;
    out.reserve(which.size());
    std::vector<double> d;
    for (std::size_t i : which) {
        d.clear();
        for (std::size_t j : pool) {
            if (j == i) continue;
            if (d.size() == b) break;
            d.push_back(euclid(xs.subspan(j * dim, dim), xs.subspan(i * dim, dim)));
        }
        out.push_back(mean_k_smallest(d, ncm.k));
    }
    return out;
}

}  // namespace

std::vector<double> score_segment(const Ncm& ncm, const TimeSeries& series, SegmentView seg,
                                  std::span<const Pos> positions, Rng& rng) {
    for (Pos u : positions)
        if (!seg.contains(u)) throw std::invalid_argument("score_segment: position outside the segment");
    const auto xs = values_of(series, seg);
    const std::size_t dim = series.dim();
    if (ncm.kind == Ncm::Kind::knn) {
        std::vector<std::size_t> which;
        for (Pos u : positions) which.push_back(static_cast<std::size_t>(u - seg.start));
        return knn_scores(ncm, xs, dim, which, rng);
    }
    std::vector<double> all;
    switch (ncm.kind) {
        case Ncm::Kind::zscore:
            if (dim != 1) throw ValidationError("zscore is univariate");
            all = loo_zscores(ncm, xs);
            break;
        case Ncm::Kind::kernel: all = loo_kernel_scores(ncm.kernel, xs, dim); break;
        case Ncm::Kind::mahalanobis:
            if (dim != 2) throw ValidationError("mahalanobis score is implemented for 2-dimensional data");
            all = loo_mahalanobis(xs);
            break;
        default: break;
    }
    std::vector<double> out;
    out.reserve(positions.size());
    for (Pos u : positions) out.push_back(all[static_cast<std::size_t>(u - seg.start)]);
    return out;
}

std::vector<double> score_segment(const Ncm& ncm, const TimeSeries& series, SegmentView seg, Rng& rng) {
    std::vector<Pos> all(static_cast<std::size_t>(seg.size()));
    std::iota(all.begin(), all.end(), seg.start);
    return score_segment(ncm, series, seg, all, rng);
}

std::vector<double> score_segment_naive(const Ncm& ncm, const TimeSeries& series, SegmentView seg,
                                        std::span<const Pos> positions, Rng& rng) {
    const auto xs = values_of(series, seg);
    const std::size_t dim = series.dim();
    const std::size_t n = xs.size() / dim;
    std::vector<double> out;
    std::vector<double> rest;
    for (Pos u : positions) {
        const auto i = static_cast<std::size_t>(u - seg.start);
        rest.assign(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(i * dim));
        rest.insert(rest.end(), xs.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim), xs.end());
        auto x = std::span<const double>(xs).subspan(i * dim, dim);
        if (ncm.kind == Ncm::Kind::zscore && n < 3) {
            out.push_back(0.0);
            continue;
        }
        out.push_back(score(ncm, rest, dim, x, rng));
    }
    return out;
}

}  // namespace bkad
