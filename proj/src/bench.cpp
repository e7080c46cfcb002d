#include "bkad/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bkad/estimators.hpp"
#include "bkad/multitest.hpp"
#include "bkad/scoring.hpp"

namespace bkad {

Proportions fdp_fnp(const std::vector<bool>& detected, const std::vector<bool>& truth) {
    if (detected.size() != truth.size()) throw ValidationError("detections and labels differ in length");
    std::size_t r = 0, false_disc = 0, h1 = 0, missed = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        r += detected[i];
        false_disc += detected[i] && !truth[i];
        h1 += truth[i];
        missed += truth[i] && !detected[i];
    }
    return {static_cast<double>(false_disc) / static_cast<double>(std::max<std::size_t>(r, 1)),
            static_cast<double>(missed) / static_cast<double>(std::max<std::size_t>(h1, 1))};
}

double auc(std::span<const double> scores, const std::vector<bool>& truth) {
    if (scores.size() != truth.size()) throw ValidationError("scores and labels differ in length");
    const std::size_t n = scores.size();
    std::size_t n1 = 0;
    for (bool b : truth) n1 += b;
    const std::size_t n0 = n - n1;
    if (n1 == 0 || n0 == 0) throw ValidationError("auc needs both classes");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    // Mann-Whitney U with average ranks for ties.
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            if (truth[idx[k]]) rank_sum += avg;
        i = j;
    }
    const double u = rank_sum - 0.5 * static_cast<double>(n1) * static_cast<double>(n1 + 1);
    return u / (static_cast<double>(n1) * static_cast<double>(n0));
}

double auc_pairs(std::span<const double> scores, const std::vector<bool>& truth) {
    if (scores.size() != truth.size()) throw ValidationError("scores and labels differ in length");
    double wins = 0.0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!truth[i]) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (truth[j]) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins += 1.0;
            else if (scores[i] == scores[j]) wins += 0.5;
        }
    }
    if (pairs == 0) throw ValidationError("auc needs both classes");
    return wins / static_cast<double>(pairs);
}

double paired_permutation_test(std::span<const double> xs, std::span<const double> ys, int b_perm, Rng& rng) {
    if (xs.size() != ys.size() || xs.size() < 2) throw ValidationError("permutation test needs two paired samples of size >= 2");
    if (b_perm < 1) throw ValidationError("permutation count must be positive");
    const std::size_t n = xs.size();
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = xs[i] - ys[i];
    const double observed = std::abs(std::accumulate(d.begin(), d.end(), 0.0));
    const double tol = 1e-12 * std::max(1.0, observed);
    int extreme = 0;
    for (int b = 0; b < b_perm; ++b) {
        double s = 0.0;
        for (double v : d) s += rng.bernoulli(0.5) ? v : -v;
        if (std::abs(s) >= observed - tol) ++extreme;
    }
    return static_cast<double>(extreme + 1) / static_cast<double>(b_perm + 1);
}

std::vector<double> median_baseline_scores(std::span<const double> xs, std::size_t window) {
    if (window < 2) throw ValidationError("median window must hold at least two points");
    std::vector<double> out(xs.size(), 0.0);
    for (std::size_t t = 0; t < xs.size(); ++t) {
        const std::size_t lo = t > window ? t - window : 0;
        if (t - lo < 2) continue;
        std::span<const double> w(xs.data() + lo, t - lo);
        const double med = median_of(w);
        const double mad = mad_of(w, med);
        const double dev = std::abs(xs[t] - med);
        out[t] = mad > 0.0 ? dev / mad : (dev > 0.0 ? kScoreSentinel : 0.0);
    }
    return out;
}

std::vector<bool> threshold_score_stream(std::span<const double> scores, std::size_t n, std::size_t m, double slope) {
    if (n < 1 || m < 1) throw ValidationError("calibration and test windows must be non-empty");
    std::vector<bool> status(scores.size(), false);
    std::vector<double> p(scores.size(), 1.0);
    for (std::size_t t = n; t < scores.size(); ++t) {
        std::vector<double> cal(scores.begin() + static_cast<std::ptrdiff_t>(t - n), scores.begin() + static_cast<std::ptrdiff_t>(t));
        p[t] = empirical_pvalue(scores[t], cal);
        const std::size_t a0 = std::max(n, t + 1 >= m ? t + 1 - m : 0);
        std::span<const double> window(p.data() + a0, t - a0 + 1);
        const auto bh = bh_threshold(window, slope);
        for (std::size_t u = a0; u <= t; ++u) status[u] = bh_rejects(p[u], bh.threshold);
    }
    return status;
}

// ---------------------------------------------------------------------------
// Estimator protocols

namespace {

struct EstimatorDef {
    std::string name;
    bool is_location;
    Location location;
    Dispersion dispersion;
};

const std::vector<EstimatorDef>& protocol_estimators() {
    static const std::vector<EstimatorDef> defs = {
        {"mle_mean", true, Location::mle_mean, Dispersion::biweight},
        {"median", true, Location::median, Dispersion::biweight},
        {"biweight_location", true, Location::biweight, Dispersion::biweight},
        {"mle_std", false, Location::median, Dispersion::mle_std},
        {"mad", false, Location::median, Dispersion::mad},
        {"biweight_midvariance", false, Location::median, Dispersion::biweight},
    };
    return defs;
}

double estimate_dispersion(Dispersion d, std::span<const double> xs, Location l) {
    // The MLE deviation is taken around the mean, the MAD around the median.
    const double center = d == Dispersion::mle_std ? location(Location::mle_mean, xs) : location(l, xs);
    return dispersion(d, xs, center);
}

std::vector<Pos> default_protocol_grid(bool mse) {
    std::vector<Pos> g;
    const Pos top = mse ? 1000 : 500;
    for (Pos l = 10; l < 100; l += 10) g.push_back(l);
    for (Pos l = 100; l <= top; l += 50) g.push_back(l);
    return g;
}

}  // namespace

std::vector<std::string> estimator_protocol_names() {
    return {"mse_clean", "mse_contaminated", "detect_clean", "detect_contaminated"};
}

const ProtocolCurve& ProtocolResult::curve(const std::string& estimator) const {
    for (const auto& c : curves)
        if (c.estimator == estimator) return c;
    throw std::out_of_range("no curve for estimator " + estimator);
}

ProtocolResult estimator_protocol(const std::string& preset, const ProtocolOptions& opt, Rng& rng) {
    const bool mse = preset == "mse_clean" || preset == "mse_contaminated";
    const bool detect = preset == "detect_clean" || preset == "detect_contaminated";
    if (!mse && !detect) throw ValidationError("unknown estimator protocol: " + preset);
    const bool contaminated = preset == "mse_contaminated" || preset == "detect_contaminated";
    if (detect && (opt.m1 > opt.m || opt.n < 1 || !(opt.slope > 0.0 && opt.slope < 1.0)))
        throw ValidationError("invalid detection protocol settings");

    ProtocolResult out;
    out.preset = preset;
    out.grid = opt.grid.empty() ? default_protocol_grid(mse) : opt.grid;
    const int reps = opt.repetitions > 0 ? opt.repetitions : (mse ? 1000 : 10000);
    const auto& defs = protocol_estimators();
    for (const auto& d : defs) out.curves.push_back({d.name, {}, {}, {}});

    for (std::size_t gi = 0; gi < out.grid.size(); ++gi) {
        const Pos ell = out.grid[gi];
        if (ell < 3) throw ValidationError("protocol segment length must be at least 3");
        const auto ell1 = contaminated ? static_cast<std::size_t>(std::floor(0.02 * static_cast<double>(ell))) : 0;
        std::vector<double> sq(defs.size(), 0.0), fdp(defs.size(), 0.0), fnp(defs.size(), 0.0);
        Rng grid_rng = rng.split(static_cast<std::uint64_t>(ell));
        std::vector<double> x(static_cast<std::size_t>(ell));
        std::vector<double> cal(opt.n), z(opt.m), p(opt.m);
        for (int b = 0; b < reps; ++b) {
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (i < ell1) x[i] = mse ? 4.0 : grid_rng.normal(4.0, 0.1);
                else x[i] = grid_rng.normal();
            }
            if (detect) {
                for (auto& y : cal) y = grid_rng.normal();
                std::sort(cal.begin(), cal.end());
                for (std::size_t i = 0; i < opt.m; ++i) z[i] = i < opt.m1 ? grid_rng.normal(4.0, 0.1) : grid_rng.normal();
            }
            for (std::size_t e = 0; e < defs.size(); ++e) {
                const auto& d = defs[e];
                if (mse) {
                    const double est = d.is_location ? location(d.location, x) : estimate_dispersion(d.dispersion, x, d.location);
                    const double truth = d.is_location ? 0.0 : 1.0;
                    sq[e] += (est - truth) * (est - truth);
                    continue;
                }
                const double mu = location(d.location, x);
                const double sd = estimate_dispersion(d.dispersion, x, d.location);
                for (std::size_t i = 0; i < opt.m; ++i) {
                    // One-sided p-value: calibration draws strictly above the standardized test value.
                    const double s = sd > 0.0 ? (z[i] - mu) / sd : (z[i] > mu ? kScoreSentinel : -kScoreSentinel);
                    const auto above = cal.end() - std::upper_bound(cal.begin(), cal.end(), s);
                    p[i] = static_cast<double>(above) / static_cast<double>(opt.n);
                }
                const auto bh = bh_threshold(p, opt.slope);
                std::vector<bool> det(opt.m), truth(opt.m);
                for (std::size_t i = 0; i < opt.m; ++i) {
                    det[i] = bh_rejects(p[i], bh.threshold);
                    truth[i] = i < opt.m1;
                }
                const auto pr = fdp_fnp(det, truth);
                fdp[e] += pr.fdp;
                fnp[e] += pr.fnp;
            }
        }
        for (std::size_t e = 0; e < defs.size(); ++e) {
            if (mse) {
                out.curves[e].mse.push_back(sq[e] / reps);
            } else {
                out.curves[e].fdr.push_back(fdp[e] / reps);
                out.curves[e].fnr.push_back(fnp[e] / reps);
            }
        }
    }
    return out;
}

void to_json(nlohmann::json& j, const ProtocolResult& r) {
    j = {{"preset", r.preset}, {"grid", r.grid}, {"curves", nlohmann::json::array()}};
    for (const auto& c : r.curves) {
        nlohmann::json cj = {{"estimator", c.estimator}};
        if (!c.mse.empty()) cj["mse"] = c.mse;
        if (!c.fdr.empty()) {
            cj["fdr"] = c.fdr;
            cj["fnr"] = c.fnr;
        }
        j["curves"].push_back(cj);
    }
}

// ---------------------------------------------------------------------------
// Benchmark suites

Pos evaluation_start(const DetectorConfig& cfg, bool evaluate_prefix) {
    return evaluate_prefix ? 1 : cfg.warmup_length() + 1;
}

namespace {

std::vector<bool> window_of(const std::vector<bool>& v, Pos from) {
    const auto off = static_cast<std::size_t>(std::clamp<Pos>(from - 1, 0, static_cast<Pos>(v.size())));
    return {v.begin() + static_cast<std::ptrdiff_t>(off), v.end()};
}

std::optional<double> windowed_auc(const std::vector<double>& scores, const std::vector<bool>& labels, Pos from) {
    const auto off = static_cast<std::size_t>(std::clamp<Pos>(from - 1, 0, static_cast<Pos>(scores.size())));
    std::vector<double> s(scores.begin() + static_cast<std::ptrdiff_t>(off), scores.end());
    const auto l = window_of(labels, from);
    const auto anomalies = std::count(l.begin(), l.end(), true);
    if (anomalies == 0 || anomalies == static_cast<std::ptrdiff_t>(l.size())) return std::nullopt;
    return auc(s, l);
}

enum class DetectorKind { bkad, median };

struct Variant {
    std::string name;
    std::function<Generated(Rng&)> data;
    nlohmann::json data_config;
    DetectorKind kind = DetectorKind::bkad;
    DetectorConfig cfg;
    bool with_auc = false;
};

Variant bkad_variant(std::string name, const GeneratorSpec& spec, DetectorConfig cfg, bool with_auc = false) {
    Variant v;
    v.name = std::move(name);
    v.data = [spec](Rng& r) { return generate(spec, r); };
    v.data_config = spec;
    v.cfg = std::move(cfg);
    v.with_auc = with_auc;
    return v;
}

GeneratorSpec preset_with_delta(const std::string& preset, double delta) {
    auto s = generator_preset(preset);
    s.delta = delta;
    return s;
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

const std::vector<std::pair<std::string, KernelSpec>>& kernel_family() {
    static const std::vector<std::pair<std::string, KernelSpec>> k = {
        {"Gaussian1", KernelSpec::gaussian(1.0)},
        {"Gaussian10", KernelSpec::gaussian(10.0)},
        {"Gaussian100", KernelSpec::gaussian(100.0)},
        {"CombG1G100", KernelSpec::combo({{0.5, KernelSpec::gaussian(1.0)}, {0.5, KernelSpec::gaussian(100.0)}})},
    };
    return k;
}

void add_family_variants(std::vector<Variant>& out, const std::string& family, std::function<Generated(Rng&)> data,
                         nlohmann::json data_config) {
    Variant b;
    b.name = family + "/BKAD";
    b.data = data;
    b.data_config = data_config;
    b.cfg = DetectorConfig::paper_preset(0.2);
    b.with_auc = true;
    out.push_back(b);
    Variant m = b;
    m.name = family + "/Median";
    m.kind = DetectorKind::median;
    out.push_back(std::move(m));
}

std::vector<Variant> suite_variants(const std::string& suite) {
    std::vector<Variant> v;
    if (suite == "table1") {
        for (double alpha : {0.1, 0.2})
            for (double delta : {2.0, 3.0, 5.0})
                v.push_back(bkad_variant("alpha=" + fmt(alpha) + ",delta=" + fmt(delta), preset_with_delta("table1", delta),
                                         DetectorConfig::paper_preset(alpha)));
    } else if (suite == "table2") {
        for (double alpha : {0.1, 0.2}) {
            auto cfg = DetectorConfig::paper_preset(alpha);
            cfg.ncm = Ncm::knn();
            v.push_back(bkad_variant("alpha=" + fmt(alpha), generator_preset("mog"), cfg));
        }
    } else if (suite == "table3") {
        for (double alpha : {0.1, 0.2}) {
            auto cfg = DetectorConfig::paper_preset(alpha);
            cfg.ncm = Ncm::mahalanobis();
            v.push_back(bkad_variant("alpha=" + fmt(alpha), generator_preset("2d"), cfg));
        }
    } else if (suite == "table4" || suite == "table5") {
        const auto spec = generator_preset(suite == "table4" ? "meanvar" : "var");
        for (double alpha : {0.1, 0.2})
            for (const auto& [name, kernel] : kernel_family()) {
                auto cfg = DetectorConfig::paper_preset(alpha);
                cfg.kernel = kernel;
                v.push_back(bkad_variant("alpha=" + fmt(alpha) + "," + name, spec, cfg));
            }
    } else if (suite == "table6_sigma") {
        for (auto d : {Dispersion::mle_std, Dispersion::mad, Dispersion::biweight}) {
            auto cfg = DetectorConfig::paper_preset(0.2);
            cfg.ncm = Ncm::zscore(Location::median, d);
            v.push_back(bkad_variant(to_string(d), generator_preset("table1"), cfg));
        }
    } else if (suite == "table7_activeset") {
        for (Pos m : {10, 100}) {
            auto cfg = DetectorConfig::paper_preset(0.2);
            cfg.lambda_hat = m;
            cfg.ell_hat = m;
            v.push_back(bkad_variant("m=" + std::to_string(m), generator_preset("table1"), cfg));
        }
    } else if (suite == "table8_oracle") {
        struct Det {
            const char* name;
            OracleFlags flags;
        };
        const Det dets[] = {{"D1", {true, true, true}},
                            {"D2", {true, true, false}},
                            {"D3", {true, false, true}},
                            {"D4", {false, false, true}},
                            {"D5", {false, false, false}}};
        for (const char* law : {"gaussian", "student"}) {
            const auto spec = generator_preset(std::string(law) == "gaussian" ? "table1" : "student");
            for (const auto& d : dets) {
                auto cfg = DetectorConfig::paper_preset(0.2);
                cfg.oracle = d.flags;
                v.push_back(bkad_variant(std::string(law) + "/" + d.name, spec, cfg));
            }
        }
    } else if (suite == "table9_badn") {
        for (auto [alpha, n] : {std::pair{0.2, 999}, std::pair{0.2, 1000}, std::pair{0.1, 1999}, std::pair{0.1, 2000}}) {
            auto cfg = DetectorConfig::paper_preset(alpha);
            cfg.n_override = static_cast<std::size_t>(n);
            v.push_back(bkad_variant("alpha=" + fmt(alpha) + ",n=" + std::to_string(n), generator_preset("table1"), cfg));
        }
    } else if (suite == "bench_auc" || suite == "bench_fdrfnr") {
        for (const char* preset : {"bench_mean", "bench_var"}) {
            const auto spec = generator_preset(preset);
            const std::string family = std::string(preset) == "bench_mean" ? "breakpoint_mean" : "breakpoint_var";
            add_family_variants(v, family, [spec](Rng& r) { return generate(spec, r); }, spec);
        }
        for (auto fam : {SeasonalSpec::Family::simple, SeasonalSpec::Family::complex, SeasonalSpec::Family::variance,
                         SeasonalSpec::Family::trend}) {
            add_family_variants(
                v, "seasonal_" + to_string(fam),
                [fam](Rng& r) {
                    Rng draw = r.split(0x736561ULL);
                    const auto spec = SeasonalSpec::random(fam, draw);
                    Generated g;
                    g.series = generate_seasonal(spec, r);
                    g.truth.labels = g.series.labels();
                    g.truth.segmentation.length = g.series.length();
                    return g;
                },
                nlohmann::json{{"family", to_string(fam)}, {"T", 3000}});
        }
    } else {
        throw ValidationError("unknown benchmark suite: " + suite);
    }
    return v;
}

ReplicationRow run_task(const Variant& v, std::uint64_t master, int seed, bool evaluate_prefix) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t key = mix_seed(master, static_cast<std::uint64_t>(seed));
    Rng data_rng(key);
    const Generated g = v.data(data_rng);
    ReplicationRow row;
    row.seed = static_cast<std::uint64_t>(seed);
    row.variant = v.name;
    if (v.kind == DetectorKind::bkad) {
        DetectorConfig cfg = v.cfg;
        cfg.seed = mix_seed(key, 0x646574ULL);
        const auto rep = run_replication(cfg, g, evaluate_prefix, v.with_auc);
        row.fdp = rep.metrics.fdp;
        row.fnp = rep.metrics.fnp;
        row.auc = rep.auc;
    } else {
        // Same evaluation window and threshold rule as the BKAD row of the family.
        const auto cfg = DetectorConfig::paper_preset(0.2);
        const Pos from = evaluation_start(cfg, evaluate_prefix);
        std::vector<double> xs(g.series.flat().begin(), g.series.flat().end());
        const auto scores = median_baseline_scores(xs, 100);
        const auto status = threshold_score_stream(scores, cfg.calibration_size(cfg.lambda_hat),
                                                   static_cast<std::size_t>(cfg.lambda_hat), cfg.slope_for(cfg.lambda_hat));
        const auto pr = fdp_fnp(window_of(status, from), window_of(g.truth.labels, from));
        row.fdp = pr.fdp;
        row.fnp = pr.fnp;
        row.auc = windowed_auc(scores, g.truth.labels, from);
    }
    row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

Replication run_replication(const DetectorConfig& cfg, const Generated& data, bool evaluate_prefix, bool with_auc) {
    Replication rep;
    const bool needs_truth = cfg.oracle.any();
    rep.run = run_series(cfg, data.series, needs_truth ? std::optional<Truth>(data.truth) : std::nullopt);
    rep.evaluate_from = evaluation_start(cfg, evaluate_prefix);
    rep.metrics = fdp_fnp(window_of(rep.run.statuses, rep.evaluate_from), window_of(data.truth.labels, rep.evaluate_from));
    if (with_auc) {
        std::vector<double> scores(rep.run.records.size());
        for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = rep.run.records[i].score;
        rep.auc = windowed_auc(scores, data.truth.labels, rep.evaluate_from);
    }
    return rep;
}

std::vector<std::string> benchmark_suites() {
    return {"table1", "table2", "table3", "table4", "table5", "table6_sigma", "table7_activeset", "table8_oracle",
            "table9_badn", "bench_auc", "bench_fdrfnr"};
}

std::vector<std::string> benchmark_variants(const std::string& suite) {
    std::vector<std::string> names;
    for (const auto& v : suite_variants(suite)) names.push_back(v.name);
    return names;
}

ExperimentReport run_benchmark(const std::string& suite, const BenchOptions& opt) {
    if (opt.seeds < 1) throw ValidationError("seeds must be positive");
    auto all = suite_variants(suite);
    std::vector<Variant> variants;
    for (auto& v : all)
        if (opt.variants.empty() || std::find(opt.variants.begin(), opt.variants.end(), v.name) != opt.variants.end())
            variants.push_back(std::move(v));
    for (const auto& name : opt.variants)
        if (std::none_of(variants.begin(), variants.end(), [&](const Variant& v) { return v.name == name; }))
            throw ValidationError("unknown variant for suite " + suite + ": " + name);

    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t tasks = variants.size() * static_cast<std::size_t>(opt.seeds);
    std::vector<ReplicationRow> rows(tasks);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks; i = next++) {
            try {
                const auto& v = variants[i / static_cast<std::size_t>(opt.seeds)];
                rows[i] = run_task(v, opt.master_seed, static_cast<int>(i % static_cast<std::size_t>(opt.seeds)),
                                   opt.evaluate_prefix);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    unsigned workers = opt.workers > 0 ? static_cast<unsigned>(opt.workers) : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, tasks));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    ExperimentReport rep;
    rep.suite = suite;
    rep.config = {{"seeds", opt.seeds}, {"master_seed", opt.master_seed}, {"evaluate_prefix", opt.evaluate_prefix},
                  {"variants", nlohmann::json::array()}};
    for (const auto& v : variants) {
        nlohmann::json vj = {{"name", v.name}, {"data", v.data_config}};
        vj["detector"] = v.kind == DetectorKind::bkad ? nlohmann::json(v.cfg) : nlohmann::json("median_window_100");
        rep.config["variants"].push_back(vj);
    }
    rep.rows = std::move(rows);
    std::vector<double> all_fdp, all_fnp;
    for (const auto& v : variants) {
        std::vector<double> f, n, a;
        for (const auto& r : rep.rows) {
            if (r.variant != v.name) continue;
            f.push_back(r.fdp);
            n.push_back(r.fnp);
            if (r.auc) a.push_back(*r.auc);
        }
        VariantSummary s;
        s.variant = v.name;
        s.replications = f.size();
        s.fdr = mean_of(f);
        s.fnr = mean_of(n);
        s.fdr_se = se_of(f);
        s.fnr_se = se_of(n);
        if (!a.empty()) s.auc = mean_of(a);
        rep.variants.push_back(s);
        all_fdp.insert(all_fdp.end(), f.begin(), f.end());
        all_fnp.insert(all_fnp.end(), n.begin(), n.end());
    }
    rep.fdr = mean_of(all_fdp);
    rep.fnr = mean_of(all_fnp);
    rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

const VariantSummary& ExperimentReport::variant(const std::string& name) const {
    for (const auto& v : variants)
        if (v.variant == name) return v;
    throw std::out_of_range("no variant " + name + " in report " + suite);
}

std::vector<double> ExperimentReport::metric(const std::string& variant_name, const std::string& name) const {
    std::vector<const ReplicationRow*> sel;
    for (const auto& r : rows)
        if (r.variant == variant_name) sel.push_back(&r);
    std::sort(sel.begin(), sel.end(), [](auto* a, auto* b) { return a->seed < b->seed; });
    std::vector<double> out;
    for (const auto* r : sel) {
        if (name == "fdp") out.push_back(r->fdp);
        else if (name == "fnp") out.push_back(r->fnp);
        else if (name == "auc") out.push_back(r->auc.value_or(std::nan("")));
        else throw std::invalid_argument("unknown metric " + name);
    }
    return out;
}

void to_json(nlohmann::json& j, const ExperimentReport& r) {
    j = nlohmann::json::object();
    j["suite"] = r.suite;
    j["config"] = r.config;
    j["rows"] = nlohmann::json::array();
    for (const auto& row : r.rows) {
        nlohmann::json rj = {{"seed", row.seed}, {"variant", row.variant}, {"fdp", row.fdp}, {"fnp", row.fnp},
                             {"runtime_s", row.runtime_s}};
        if (row.auc) rj["auc"] = *row.auc;
        j["rows"].push_back(rj);
    }
    j["variants"] = nlohmann::json::array();
    for (const auto& v : r.variants) {
        nlohmann::json vj = {{"variant", v.variant}, {"replications", v.replications}, {"fdr", v.fdr}, {"fnr", v.fnr},
                             {"fdr_se", v.fdr_se}, {"fnr_se", v.fnr_se}};
        if (v.auc) vj["auc"] = *v.auc;
        j["variants"].push_back(vj);
    }
    j["fdr"] = r.fdr;
    j["fnr"] = r.fnr;
    j["runtime_s"] = r.runtime_s;
}

std::string report_csv(const ExperimentReport& r) {
    std::ostringstream os;
    os.precision(10);
    os << "seed,variant,fdp,fnp,auc,runtime_s\n";
    for (const auto& row : r.rows) {
        os << row.seed << ",\"" << row.variant << "\"," << row.fdp << ',' << row.fnp << ',';
        if (row.auc) os << *row.auc;
        os << ',' << row.runtime_s << '\n';
    }
    return os.str();
}

}  // namespace bkad
