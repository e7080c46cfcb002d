#include "bkad/changepoint.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "bkad/simd.hpp"

namespace bkad {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

int default_d_max(Pos T) { return static_cast<int>(std::min<Pos>(50, std::max<Pos>(10, T / 50))); }

double log_binom_segmentations(Pos t, int D) {
    const double n = static_cast<double>(t - 1);
    const double k = static_cast<double>(D - 1);
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double segment_cost(const TimeSeries& series, const KernelSpec& kernel, Pos a, Pos b, int min_seg_len) {
    if (a > b || b - a + 1 < min_seg_len) throw std::invalid_argument("segment shorter than the minimum length");
    double diag = 0.0, block = 0.0;
    for (Pos u = a; u <= b; ++u) {
        diag += eval(kernel, series.at(u), series.at(u));
        for (Pos v = a; v <= b; ++v) block += eval(kernel, series.at(u), series.at(v));
    }
    return diag - block / static_cast<double>(b - a + 1);
}

PenaltyFit fit_penalty(std::span<const double> values, Pos t, int d_max) {
    const int lo = static_cast<int>(std::ceil(0.6 * d_max));
    std::vector<int> ds;
    for (int D = std::max(lo, 1); D <= d_max && D <= static_cast<int>(values.size()); ++D)
        if (std::isfinite(values[D - 1])) ds.push_back(D);
    if (ds.size() < 3) throw std::invalid_argument("penalty fit needs at least three finite costs");
    Eigen::MatrixXd X(ds.size(), 3);
    Eigen::VectorXd y(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        X(i, 0) = 1.0;
        X(i, 1) = -static_cast<double>(ds[i]);
        X(i, 2) = -log_binom_segmentations(t, ds[i]);
        y(i) = values[ds[i] - 1];
    }
    Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
    PenaltyFit fit;
    fit.c1 = std::max(0.0, 2.0 * beta(1));
    fit.c2 = std::max(0.0, 2.0 * beta(2));
    if (!std::isfinite(fit.c1)) fit.c1 = 0.0;
    if (!std::isfinite(fit.c2)) fit.c2 = 0.0;
    return fit;
}

Kcp::Kcp(KcpConfig cfg, std::size_t dim) : cfg_(std::move(cfg)), dim_(dim) {
    cfg_.kernel.validate();
    if (cfg_.d_max < 1) throw ValidationError("d_max must be at least 1");
    if (cfg_.min_seg_len < 1) throw ValidationError("min_seg_len must be at least 1");
    if (cfg_.refit_every < 1) throw ValidationError("refit cadence must be at least 1");
    terms_ = cfg_.kernel.gaussian_terms();
    L_.assign(cfg_.d_max, std::vector<double>(1, kInf));
    back_.assign(cfg_.d_max, std::vector<std::int32_t>(1, 0));
    diag_prefix_.push_back(0.0);
}

void Kcp::push(std::span<const double> x) {
    if (x.size() != dim_) throw ValidationError("observation dimension mismatch");
    points_.insert(points_.end(), x.begin(), x.end());
    ++t_;
    const auto t = static_cast<std::size_t>(t_);
    const auto& k = simd::active();

    // kernel column K(x_u, x_t), u = 1..t
    column_.resize(t);
    eval_column(cfg_.kernel, points_, dim_, x, column_);
    const double ktt = column_[t - 1];
    diag_prefix_.push_back(diag_prefix_.back() + ktt);

    // suffix_[a-1] = sum_{u=a}^{t-1} K(u,t)
    suffix_.resize(t);
    suffix_[t - 1] = 0.0;
    for (std::size_t a = t - 1; a-- > 0;) suffix_[a] = suffix_[a + 1] + column_[a];
    k.block_update(block_.data(), suffix_.data(), ktt, t - 1);
    block_.push_back(ktt);

    // cost_[a-1] = C(a, t)
    len_.resize(t);
    for (std::size_t a = 0; a < t; ++a) len_[a] = static_cast<double>(t - a);
    cost_.resize(t);
    k.cost(cost_.data(), block_.data(), diag_prefix_.data(), len_.data(), diag_prefix_[t], t);

    const int m0 = cfg_.min_seg_len;
    for (int D = 1; D <= cfg_.d_max; ++D) {
        double best = kInf;
        std::int32_t arg = 0;
        if (D == 1) {
            if (t_ >= m0) {
                best = cost_[0];
                arg = 1;
            }
        } else {
            // last segment [a, t] with a in [(D-1)*m0 + 1, t - m0 + 1]
            const Pos lo = static_cast<Pos>(D - 1) * m0 + 1;
            const Pos hi = t_ - m0 + 1;
            if (hi >= lo) {
                const auto& prev = L_[D - 2];
                auto r = k.min_plus(prev.data() + (lo - 1), cost_.data() + (lo - 1), static_cast<std::size_t>(hi - lo + 1));
                if (r.index < static_cast<std::size_t>(hi - lo + 1)) {
                    best = r.value;
                    arg = static_cast<std::int32_t>(lo + static_cast<Pos>(r.index));
                }
            }
        }
        L_[D - 1].push_back(best);
        back_[D - 1].push_back(arg);
    }
    if (!fitted_ || (t_ % cfg_.refit_every) == 0) refit();
    choose();
}

double Kcp::cost(int D) const { return cost(D, t_); }

double Kcp::cost(int D, Pos t) const {
    if (D < 1 || D > cfg_.d_max || t < 1 || t > t_) throw std::out_of_range("cost table index out of range");
    return L_[D - 1][static_cast<std::size_t>(t)];
}

int Kcp::feasible_d_max() const {
    int best = 0;
    for (int D = 1; D <= cfg_.d_max; ++D)
        if (t_ >= 1 && std::isfinite(L_[D - 1][static_cast<std::size_t>(t_)])) best = D;
    return best;
}

Segmentation Kcp::best(int D) const { return best(D, t_); }

Segmentation Kcp::best(int D, Pos t) const {
    Segmentation seg;
    seg.length = t;
    if (D <= 1 || t < 1) return seg;
    if (!std::isfinite(cost(D, t))) throw std::invalid_argument("no feasible segmentation with that many segments");
    Pos end = t;
    for (int d = D; d >= 2; --d) {
        const Pos a = back_[d - 1][static_cast<std::size_t>(end)];
        seg.breakpoints.push_back(a);
        end = a - 1;
    }
    std::reverse(seg.breakpoints.begin(), seg.breakpoints.end());
    return seg;
}

void Kcp::refit() {
    const int dmax = feasible_d_max();
    fitted_ = false;
    if (dmax < 2) return;
    std::vector<double> values(dmax);
    const double tt = static_cast<double>(t_);
    for (int D = 1; D <= dmax; ++D) values[D - 1] = L_[D - 1][static_cast<std::size_t>(t_)] / tt;
    try {
        penalty_ = fit_penalty(values, t_, dmax);
    } catch (const std::invalid_argument&) {
        return;
    }
    fitted_ = true;
}

void Kcp::choose() {
    selected_d_ = 1;
    if (!fitted_) return;
    const int dmax = feasible_d_max();
    const double tt = static_cast<double>(t_);
    std::vector<double> values(dmax);
    for (int D = 1; D <= dmax; ++D) values[D - 1] = L_[D - 1][static_cast<std::size_t>(t_)] / tt;
    double best = kInf;
    for (int D = 1; D <= dmax; ++D) {
        const double crit = values[D - 1] + penalty_.c1 * D + penalty_.c2 * log_binom_segmentations(t_, D);
        if (crit < best) {
            best = crit;
            selected_d_ = D;
        }
    }
}

Segmentation kcp_segment(const TimeSeries& series, const KcpConfig& cfg) {
    Kcp kcp(cfg, series.dim());
    for (Pos t = 1; t <= series.length(); ++t) kcp.push(series.at(t));
    return kcp.select();
}

}  // namespace bkad
