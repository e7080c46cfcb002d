#include "bkad/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "bkad/changepoint.hpp"
#include "bkad/core.hpp"
#include "bkad/multitest.hpp"

namespace bkad {

void SegmentationHistory::push(const Segmentation& seg) {
    last.push_back(seg.last_boundary());
    std::vector<Pos> b;
    b.reserve(seg.breakpoints.size());
    for (Pos tau : seg.breakpoints) b.push_back(tau - 1);
    full.push_back(std::move(b));
}

void SegmentationHistory::push_last(Pos b) { last.push_back(b); }

namespace {

Curve curve_from_counts(const std::vector<double>& counts, Pos T, bool shrink_denominator) {
    Curve c;
    const auto n = static_cast<Pos>(counts.size());
    for (Pos lambda = 0; lambda < n; ++lambda) {
        const Pos denom = shrink_denominator ? T - lambda : T;
        c.x.push_back(static_cast<double>(lambda));
        c.p.push_back(denom > 0 ? counts[static_cast<std::size_t>(lambda)] / static_cast<double>(denom) : 0.0);
    }
    return c;
}

// reach[t̃-1] = t̃ - q where q is the smallest later boundary above b̂_t̃; the
// event at λ holds iff reach > λ.
std::vector<double> counts_from_reach(const std::vector<Pos>& reach, Pos lambda_max) {
    std::vector<double> counts(static_cast<std::size_t>(lambda_max + 1), 0.0);
    for (Pos r : reach)
        for (Pos lambda = 0; lambda < std::min(r, lambda_max + 1); ++lambda) counts[static_cast<std::size_t>(lambda)] += 1.0;
    return counts;
}

}  // namespace

Curve f_tau_exact(const SegmentationHistory& h, Pos lambda_max) {
    const Pos T = h.size();
    if (static_cast<Pos>(h.full.size()) != T) throw std::invalid_argument("exact f_tau needs the full segmentation history");
    std::vector<Pos> reach(static_cast<std::size_t>(T), 0);
    // walk t̃ downwards, accumulating the union of boundaries of every later segmentation
    std::set<Pos> later;
    for (Pos tt = T; tt >= 1; --tt) {
        if (tt < T)
            for (Pos b : h.full[static_cast<std::size_t>(tt)]) later.insert(b);
        const Pos own = h.last[static_cast<std::size_t>(tt - 1)];
        auto it = later.upper_bound(own);
        if (it != later.end() && *it < tt) reach[static_cast<std::size_t>(tt - 1)] = tt - *it;
    }
    return curve_from_counts(counts_from_reach(reach, lambda_max), T, true);
}

Curve f_tau_exact_naive(const SegmentationHistory& h, Pos lambda_max) {
    const Pos T = h.size();
    std::vector<double> counts(static_cast<std::size_t>(lambda_max + 1), 0.0);
    for (Pos tt = 1; tt <= T; ++tt) {
        const Pos own = h.last[static_cast<std::size_t>(tt - 1)];
        for (Pos lambda = 0; lambda <= lambda_max; ++lambda) {
            bool event = false;
            for (Pos tp = tt + 1; tp <= T && !event; ++tp)
                for (Pos b : h.full[static_cast<std::size_t>(tp - 1)])
                    if (own < b && b < tt - lambda) {
                        event = true;
                        break;
                    }
            if (event) counts[static_cast<std::size_t>(lambda)] += 1.0;
        }
    }
    return curve_from_counts(counts, T, true);
}

std::vector<Pos> r_naive(const SegmentationHistory& h) {
    const Pos T = h.size();
    std::vector<Pos> r(static_cast<std::size_t>(T), 0);
    for (Pos tt = 1; tt <= T; ++tt) {
        const Pos own = h.last[static_cast<std::size_t>(tt - 1)];
        for (Pos tp = tt + 1; tp <= T; ++tp) {
            const Pos b = h.last[static_cast<std::size_t>(tp - 1)];
            if (b > own && b < tt) r[static_cast<std::size_t>(tt - 1)] = std::max(r[static_cast<std::size_t>(tt - 1)], tt - b);
        }
    }
    return r;
}

std::vector<Pos> r_efficient(const SegmentationHistory& h) {
    const Pos T = h.size();
    std::vector<Pos> r(static_cast<std::size_t>(T), 0);
    // only t̃ in ]b̂_t', t'[ can be affected by the last breakpoint seen at t'
    for (Pos tp = 1; tp <= T; ++tp) {
        const Pos b = h.last[static_cast<std::size_t>(tp - 1)];
        for (Pos tt = std::max<Pos>(1, b + 1); tt < tp; ++tt) {
            if (h.last[static_cast<std::size_t>(tt - 1)] < b)
                r[static_cast<std::size_t>(tt - 1)] = std::max(r[static_cast<std::size_t>(tt - 1)], tt - b);
        }
    }
    return r;
}

Curve f_tau_from_r(std::span<const Pos> r, Pos lambda_max) {
    std::vector<Pos> reach(r.begin(), r.end());
    return curve_from_counts(counts_from_reach(reach, lambda_max), static_cast<Pos>(r.size()), false);
}

std::optional<double> cutoff(const Curve& c, double level) {
    for (std::size_t i = 0; i < c.x.size(); ++i)
        if (c.p[i] < level) return c.x[i];
    return std::nullopt;
}

Pos active_set_cardinality(Pos ell_t, Pos lambda_hat, Pos ell_hat) {
    if (ell_t < 0 || lambda_hat < 0 || ell_hat < 0) throw std::invalid_argument("active set inputs must be non-negative");
    return ell_t < ell_hat ? ell_t : std::min(lambda_hat, ell_t);
}

std::vector<Pos> default_fd_grid() {
    std::vector<Pos> g;
    for (Pos l = 10; l <= 100; l += 10) g.push_back(l);
    for (Pos l = 150; l <= 500; l += 50) g.push_back(l);
    return g;
}

namespace {

std::vector<double> test_scores(const Ncm& ncm, const std::vector<double>& train, std::size_t dim,
                                const std::vector<std::size_t>& train_idx_of_test,
                                const std::vector<double>& test_values, Rng rng) {
    // train_idx_of_test[i] is the index of test point i inside `train`, or SIZE_MAX if absent
    const auto ts = TimeSeries(dim, train);
    const SegmentView whole{1, ts.length()};
    std::vector<Pos> inside;
    for (auto j : train_idx_of_test)
        if (j != SIZE_MAX) inside.push_back(static_cast<Pos>(j) + 1);
    Rng seg_rng = rng.split(1);
    auto loo = score_segment(ncm, ts, whole, inside, seg_rng);
    std::vector<double> out(train_idx_of_test.size());
    std::size_t next = 0;
    Rng out_rng = rng.split(2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (train_idx_of_test[i] != SIZE_MAX) {
            out[i] = loo[next++];
        } else {
            out[i] = score(ncm, train, dim, std::span<const double>(test_values).subspan(i * dim, dim), out_rng);
        }
    }
    return out;
}

}  // namespace

FdCurves train_f_d(const std::vector<std::vector<double>>& segments, std::size_t dim, const Ncm& ncm,
                   const FdTrainConfig& cfg, Rng& rng) {
    if (cfg.repetitions < 1) throw std::invalid_argument("f_d training needs repetitions");
    if (segments.empty()) throw std::invalid_argument("no historical segments");
    FdCurves out;
    const auto seg_len = [&](std::size_t s) { return static_cast<Pos>(segments[s].size() / dim); };
    std::vector<std::size_t> calib_pool;
    for (std::size_t s = 0; s < segments.size(); ++s)
        if (seg_len(s) >= 3) calib_pool.push_back(s);
    if (calib_pool.empty()) throw std::invalid_argument("historical segments too short for calibration");

    for (Pos ell : cfg.grid) {
        std::vector<std::size_t> pool;
        for (std::size_t s = 0; s < segments.size(); ++s)
            if (seg_len(s) >= std::max(ell, cfg.m)) pool.push_back(s);
        if (pool.empty()) throw std::invalid_argument("segment too small for the requested length " + std::to_string(ell));
        double diff_all = 0, n_all = 0, diff_norm = 0, n_norm = 0, diff_ab = 0, n_ab = 0;
        for (int b = 0; b < cfg.repetitions; ++b) {
            Rng r = rng.split(static_cast<std::uint64_t>(ell) * 1000003ULL + static_cast<std::uint64_t>(b));
            // Step 1: current segment S2, then calibration segment S1 among the others when possible
            const std::size_t i2 = pool[static_cast<std::size_t>(r.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
            std::vector<std::size_t> others;
            for (std::size_t c : calib_pool)
                if (c != i2) others.push_back(c);
            const auto& from = others.empty() ? calib_pool : others;
            const std::size_t i1 = from[static_cast<std::size_t>(r.uniform_int(0, static_cast<std::int64_t>(from.size()) - 1))];
            const auto& s1 = segments[i1];
            const auto& s2 = segments[i2];
            const auto n2 = static_cast<std::size_t>(s2.size() / dim);
            // Step 2: sub-sample of length ℓ, kept in original order
            auto sub = r.sample_without_replacement(n2, static_cast<std::size_t>(ell));
            std::sort(sub.begin(), sub.end());
            // Step 3: test set of size m
            auto test = r.sample_without_replacement(n2, static_cast<std::size_t>(cfg.m));
            std::vector<double> sub_values, test_values;
            std::vector<std::size_t> pos_in_sub(n2, SIZE_MAX);
            for (std::size_t i = 0; i < sub.size(); ++i) {
                pos_in_sub[sub[i]] = i;
                sub_values.insert(sub_values.end(), s2.begin() + static_cast<std::ptrdiff_t>(sub[i] * dim),
                                  s2.begin() + static_cast<std::ptrdiff_t>((sub[i] + 1) * dim));
            }
            std::vector<std::size_t> full_idx, sub_idx;
            for (auto j : test) {
                full_idx.push_back(j);
                sub_idx.push_back(pos_in_sub[j]);
                test_values.insert(test_values.end(), s2.begin() + static_cast<std::ptrdiff_t>(j * dim),
                                   s2.begin() + static_cast<std::ptrdiff_t>((j + 1) * dim));
            }
            // Step 4: calibration scores from S1 and test scores in both worlds
            const auto ts1 = TimeSeries(dim, s1);
            Rng cal_rng = r.split(3);
            auto cal = score_segment(ncm, ts1, SegmentView{1, ts1.length()}, cal_rng);
            if (i1 == i2) {
                // test points never calibrate themselves
                std::vector<std::uint8_t> is_test(cal.size(), 0);
                for (auto j : test) is_test[j] = 1;
                std::vector<double> kept;
                for (std::size_t j = 0; j < cal.size(); ++j)
                    if (!is_test[j]) kept.push_back(cal[j]);
                if (!kept.empty()) cal = std::move(kept);
            }
            if (static_cast<Pos>(cal.size()) > cfg.n) {
                auto keep = r.sample_without_replacement(cal.size(), static_cast<std::size_t>(cfg.n));
                std::vector<double> c2;
                for (auto k : keep) c2.push_back(cal[k]);
                cal = std::move(c2);
            }
            const Rng world_rng = r.split(4);
            auto s_full = test_scores(ncm, s2, dim, full_idx, test_values, world_rng);
            auto s_sub = test_scores(ncm, sub_values, dim, sub_idx, test_values, world_rng);
            // Step 5: p-values against the same calibration set
            PValueTable table(cal);
            std::vector<double> p_full(s_full.size()), p_sub(s_sub.size());
            for (std::size_t i = 0; i < s_full.size(); ++i) {
                p_full[i] = table(s_full[i]);
                p_sub[i] = table(s_sub[i]);
            }
            // Step 6: BH in both worlds
            auto bh_full = bh_threshold(p_full, cfg.slope);
            auto bh_sub = bh_threshold(p_sub, cfg.slope);
            // Step 7: differing statuses
            for (std::size_t i = 0; i < p_full.size(); ++i) {
                const bool d = bh_rejects(p_full[i], bh_full.threshold) && bh_full.k_hat > 0;
                const bool dt = bh_rejects(p_sub[i], bh_sub.threshold) && bh_sub.k_hat > 0;
                const double diff = d != dt ? 1.0 : 0.0;
                diff_all += diff;
                n_all += 1;
                if (d) {
                    diff_ab += diff;
                    n_ab += 1;
                } else {
                    diff_norm += diff;
                    n_norm += 1;
                }
            }
        }
        const double x = static_cast<double>(ell);
        out.unknown.x.push_back(x);
        out.unknown.p.push_back(diff_all / n_all);
        out.normal.x.push_back(x);
        out.normal.p.push_back(n_norm > 0 ? diff_norm / n_norm : 0.0);
        out.abnormal.x.push_back(x);
        out.abnormal.p.push_back(n_ab > 0 ? diff_ab / n_ab : 0.0);
    }
    return out;
}

UncertaintyModel build_uncertainty_model(const TimeSeries& history, const ProfileConfig& cfg, Rng& rng) {
    if (!(cfg.eta > 0.0 && cfg.eta < 1.0)) throw ValidationError("eta must lie in (0,1)");
    if (cfg.lambda_max < 1) throw ValidationError("lambda_max must be positive");
    if (cfg.fd.grid.empty()) throw ValidationError("f_d grid is empty");
    const Pos ell_max = *std::max_element(cfg.fd.grid.begin(), cfg.fd.grid.end());
    if (history.length() < 10 * ell_max)
        throw ValidationError("history too short: need at least " + std::to_string(10 * ell_max) + " points");

    KernelSpec kernel = KernelSpec::gaussian(1.0);
    if (cfg.kernel) {
        kernel = *cfg.kernel;
    } else {
        Rng r = rng.split(0x6b65726e656cULL);
        try {
            kernel = KernelSpec::gaussian(median_heuristic(history, r));
        } catch (const std::invalid_argument&) {
            // constant history: every bandwidth gives the same segmentation
        }
    }
    KcpConfig kc{kernel, cfg.d_max > 0 ? cfg.d_max : default_d_max(history.length()), 2, 1};
    Kcp kcp(kc, history.dim());
    SegmentationHistory h;
    for (Pos t = 1; t <= history.length(); ++t) {
        kcp.push(history.at(t));
        h.push(kcp.select());
    }

    UncertaintyModel model;
    model.eta = cfg.eta;
    const Pos lambda_max = std::min(cfg.lambda_max, history.length() - 1);
    model.f_tau_exact = f_tau_exact(h, lambda_max);
    const auto r = r_efficient(h);
    model.f_tau = f_tau_from_r(r, lambda_max);

    std::vector<std::vector<double>> segments;
    const Segmentation final_seg = kcp.select();
    for (const auto& seg : final_seg.segments()) {
        const auto first = history.flat().begin() + static_cast<std::ptrdiff_t>((seg.start - 1) * static_cast<Pos>(history.dim()));
        const auto last = history.flat().begin() + static_cast<std::ptrdiff_t>(seg.end * static_cast<Pos>(history.dim()));
        segments.emplace_back(first, last);
    }
    Rng fd_rng = rng.split(0x6664ULL);
    model.f_d = train_f_d(segments, history.dim(), cfg.ncm, cfg.fd, fd_rng);

    const double level = cfg.eta / 2.0;
    if (auto l = cutoff(model.f_tau_exact, level)) {
        model.lambda_star = static_cast<Pos>(*l);
    } else {
        model.lambda_star = lambda_max;
        model.lambda_reached = false;
    }
    if (auto l = cutoff(model.f_d.unknown, level)) {
        model.ell_star = static_cast<Pos>(*l);
    } else {
        model.ell_star = ell_max;
        model.ell_reached = false;
    }
    return model;
}

}  // namespace bkad
