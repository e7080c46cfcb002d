#include "bkad/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "bkad/estimators.hpp"
#include "bkad/multitest.hpp"

namespace bkad {

namespace {

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const char* what) {
    if (!j.is_object()) throw ValidationError(std::string(what) + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw ValidationError(std::string("unknown ") + what + " field: " + key);
    }
}

std::string kind_name(Ncm::Kind k) {
    switch (k) {
        case Ncm::Kind::zscore: return "zscore";
        case Ncm::Kind::knn: return "knn";
        case Ncm::Kind::kernel: return "kernel";
        case Ncm::Kind::mahalanobis: return "mahalanobis";
    }
    return "zscore";
}

}  // namespace

void to_json(nlohmann::json& j, const Ncm& n) {
    j = {{"kind", kind_name(n.kind)}};
    switch (n.kind) {
        case Ncm::Kind::zscore:
            j["location"] = to_string(n.location);
            j["dispersion"] = to_string(n.dispersion);
            break;
        case Ncm::Kind::knn:
            j["k"] = n.k;
            j["resample_size"] = n.resample_size;
            break;
        case Ncm::Kind::kernel: j["kernel"] = n.kernel; break;
        case Ncm::Kind::mahalanobis: break;
    }
}

void from_json(const nlohmann::json& j, Ncm& n) {
    reject_unknown(j, {"kind", "location", "dispersion", "k", "resample_size", "kernel"}, "ncm");
    const auto kind = j.value("kind", std::string("zscore"));
    if (kind == "zscore") {
        n = Ncm::zscore(parse_location(j.value("location", std::string("median"))),
                        parse_dispersion(j.value("dispersion", std::string("biweight"))));
    } else if (kind == "knn") {
        n = Ncm::knn(j.value("k", 10), j.value("resample_size", 100));
    } else if (kind == "kernel") {
        n = Ncm::kernel_score(j.at("kernel").get<KernelSpec>());
    } else if (kind == "mahalanobis") {
        n = Ncm::mahalanobis();
    } else {
        throw ValidationError("unknown ncm kind: " + kind);
    }
    n.validate();
}

void to_json(nlohmann::json& j, const DetectorConfig& c) {
    j = nlohmann::json::object();
    j["kernel"] = c.kernel ? nlohmann::json(*c.kernel) : nlohmann::json(nullptr);
    j["ncm"] = c.ncm;
    j["alpha"] = c.alpha;
    j["pi"] = c.pi;
    j["slope"] = c.slope ? nlohmann::json(*c.slope) : nlohmann::json(nullptr);
    j["k"] = c.k;
    j["n"] = c.n_override ? nlohmann::json(*c.n_override) : nlohmann::json(nullptr);
    j["lambda_hat"] = c.lambda_hat;
    j["ell_hat"] = c.ell_hat;
    j["d_max"] = c.d_max;
    j["min_seg_len"] = c.min_seg_len;
    j["refit_every"] = c.refit_every;
    j["warmup"] = c.warmup;
    j["init_iterations"] = c.init_iterations;
    j["oracle"] = {{"breakpoints", c.oracle.breakpoints}, {"params", c.oracle.params}, {"removal", c.oracle.removal}};
    j["seed"] = c.seed;
    j["record_trace"] = c.record_trace;
}

void from_json(const nlohmann::json& j, DetectorConfig& c) {
    reject_unknown(j,
                   {"kernel", "ncm", "alpha", "pi", "slope", "k", "n", "lambda_hat", "ell_hat", "d_max", "min_seg_len",
                    "refit_every", "warmup", "init_iterations", "oracle", "seed", "record_trace"},
                   "detector");
    c = DetectorConfig{};
    if (j.contains("kernel") && !j["kernel"].is_null()) c.kernel = j["kernel"].get<KernelSpec>();
    if (j.contains("ncm")) c.ncm = j["ncm"].get<Ncm>();
    c.alpha = j.value("alpha", c.alpha);
    c.pi = j.value("pi", c.pi);
    if (j.contains("slope") && !j["slope"].is_null()) c.slope = j["slope"].get<double>();
    c.k = j.value("k", c.k);
    if (j.contains("n") && !j["n"].is_null()) c.n_override = j["n"].get<std::size_t>();
    c.lambda_hat = j.value("lambda_hat", c.lambda_hat);
    c.ell_hat = j.value("ell_hat", c.ell_hat);
    c.d_max = j.value("d_max", c.d_max);
    c.min_seg_len = j.value("min_seg_len", c.min_seg_len);
    c.refit_every = j.value("refit_every", c.refit_every);
    c.warmup = j.value("warmup", c.warmup);
    c.init_iterations = j.value("init_iterations", c.init_iterations);
    if (j.contains("oracle")) {
        const auto& o = j["oracle"];
        reject_unknown(o, {"breakpoints", "params", "removal"}, "oracle");
        c.oracle.breakpoints = o.value("breakpoints", false);
        c.oracle.params = o.value("params", false);
        c.oracle.removal = o.value("removal", false);
    }
    c.seed = j.value("seed", c.seed);
    c.record_trace = j.value("record_trace", c.record_trace);
    c.validate();
}

void DetectorConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0,1)");
    if (!(pi > 0.0 && pi < 1.0)) throw ValidationError("pi must lie in (0,1)");
    if (slope && !(*slope > 0.0 && *slope < 1.0)) throw ValidationError("slope must lie in (0,1)");
    if (!(k >= 1.0)) throw ValidationError("k must be at least 1");
    if (n_override && *n_override < 1) throw ValidationError("n must be positive");
    if (lambda_hat < 1 || ell_hat < 0) throw ValidationError("lambda_hat must be positive and ell_hat non-negative");
    if (d_max < 0 || min_seg_len < 1 || refit_every < 1) throw ValidationError("invalid changepoint settings");
    if (warmup < 0 || init_iterations < 1) throw ValidationError("invalid warm-up settings");
    if (kernel) kernel->validate();
    ncm.validate();
}

DetectorConfig DetectorConfig::paper_preset(double alpha) {
    DetectorConfig c;
    c.alpha = alpha;
    c.slope = alpha / 2.0;
    return c;
}

double DetectorConfig::slope_for(Pos m) const {
    return slope ? *slope : modified_slope(alpha, static_cast<std::size_t>(std::max<Pos>(1, m)), pi);
}

std::size_t DetectorConfig::calibration_size(Pos m) const {
    if (n_override) return *n_override;
    return calibration_cardinality(static_cast<std::size_t>(std::max<Pos>(1, m)), slope_for(m), k);
}

Pos DetectorConfig::warmup_length() const {
    if (warmup > 0) return warmup;
    return static_cast<Pos>(calibration_size(lambda_hat)) + lambda_hat;
}

Detector::Detector(DetectorConfig cfg, std::size_t dim, std::optional<Truth> truth, Pos expected_length)
    : cfg_(std::move(cfg)),
      dim_(dim),
      truth_(std::move(truth)),
      expected_length_(expected_length),
      series_(dim, {}),
      rng_(cfg_.seed) {
    cfg_.validate();
    if (cfg_.oracle.any() && !truth_) throw ValidationError("oracle substitution needs the ground truth");
    if (cfg_.oracle.removal && truth_->labels.empty()) throw ValidationError("oracle removal needs labels");
    if (cfg_.oracle.params && truth_->params.size() != truth_->segmentation.segment_count())
        throw ValidationError("oracle parameters need one entry per true segment");
}

Detector::~Detector() = default;
Detector::Detector(Detector&&) noexcept = default;
Detector& Detector::operator=(Detector&&) noexcept = default;

std::vector<bool> Detector::statuses() const {
    std::vector<bool> out(status_.size());
    for (std::size_t i = 0; i < status_.size(); ++i) out[i] = status_[i] != 0;
    return out;
}

bool Detector::excluded(Pos u) const {
    if (cfg_.oracle.removal) return truth_->labels[static_cast<std::size_t>(u - 1)];
    return status_[static_cast<std::size_t>(u - 1)] != 0;
}

Segmentation Detector::current_segmentation() const {
    const Pos t = series_.length();
    if (cfg_.oracle.breakpoints) {
        Segmentation s{t, {}};
        for (Pos b : truth_->segmentation.breakpoints)
            if (b <= t) s.breakpoints.push_back(b);
        return s;
    }
    return kcp_->select();
}

std::vector<double> Detector::known_scores(SegmentView seg) const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(seg.size()));
    const auto& bps = truth_->segmentation.breakpoints;
    for (Pos u = seg.start; u <= seg.end; ++u) {
        const auto i = static_cast<std::size_t>(std::upper_bound(bps.begin(), bps.end(), u) - bps.begin());
        const auto& p = truth_->params[i];
        out.push_back(score_known(series_.at(u), p.mu, p.cov));
    }
    return out;
}

Detector::SegmentCache& Detector::cache_for(SegmentView seg, bool needs_scores) {
    auto [it, inserted] = cache_.try_emplace({seg.start, seg.end});
    auto& c = it->second;
    c.last_used = step_counter_;
    if (inserted) {
        if (cfg_.oracle.params) {
            c.scores = known_scores(seg);
        } else if (needs_scores || dim_ > 1) {
            Rng r = rng_.split(mix_seed(static_cast<std::uint64_t>(seg.start), static_cast<std::uint64_t>(seg.end)));
            c.scores = score_segment(cfg_.ncm, series_, seg, r);
        }
        if (dim_ == 1) {
            const auto& f = series_.flat();
            c.summary = summarize(seg, std::span<const double>(f).subspan(static_cast<std::size_t>(seg.start - 1),
                                                                          static_cast<std::size_t>(seg.size())));
        } else {
            c.summary = summarize(seg, c.scores);
        }
    } else if (needs_scores && c.scores.empty()) {
        Rng r = rng_.split(mix_seed(static_cast<std::uint64_t>(seg.start), static_cast<std::uint64_t>(seg.end)));
        c.scores = score_segment(cfg_.ncm, series_, seg, r);
    }
    return c;
}

StepUpdate Detector::collect(Pos from, Pos to) {
    StepUpdate u;
    u.t = series_.length();
    for (Pos p = from; p <= to; ++p) u.records.push_back(records_[static_cast<std::size_t>(p - 1)]);
    return u;
}

StepUpdate Detector::push(std::span<const double> x) {
    const Pos t = series_.length() + 1;
    bool label = false;
    if (truth_ && !truth_->labels.empty() && t <= static_cast<Pos>(truth_->labels.size()))
        label = truth_->labels[static_cast<std::size_t>(t - 1)];
    series_.push_back(x, label);
    records_.push_back(DetectionRecord{t, t, 0.0, 1.0, 0});
    status_.push_back(0);
    if (!initialized_) {
        if (t < cfg_.warmup_length()) return StepUpdate{t, {}};
        initialize();
        return collect(1, t);
    }
    if (kcp_) kcp_->push(x);
    step(false);
    return collect(frozen_before_, t);
}

StepUpdate Detector::finish() {
    if (initialized_ || series_.length() == 0) return StepUpdate{series_.length(), {}};
    initialize();
    return collect(1, series_.length());
}

void Detector::initialize() {
    const Pos t = series_.length();
    if (!cfg_.oracle.breakpoints) {
        KernelSpec kernel = KernelSpec::gaussian(1.0);
        if (cfg_.kernel) {
            kernel = *cfg_.kernel;
        } else {
            Rng r = rng_.split(0x6b65726e656cULL);
            try {
                kernel = KernelSpec::gaussian(median_heuristic(series_, r));
            } catch (const std::invalid_argument&) {
                // constant or single-point prefix: any bandwidth gives zero cost
            }
        }
        bandwidth_ = kernel.kind == KernelSpec::Kind::gaussian ? kernel.h : 0.0;
        KcpConfig kc{kernel, cfg_.d_max > 0 ? cfg_.d_max : default_d_max(std::max(expected_length_, t)), cfg_.min_seg_len,
                     cfg_.refit_every};
        kcp_ = std::make_unique<Kcp>(kc, dim_);
        for (Pos u = 1; u < t; ++u) {
            kcp_->push(series_.at(u));
            history_.push_last(kcp_->select().last_boundary());
        }
        kcp_->push(series_.at(t));
    } else {
        for (Pos u = 1; u < t; ++u) {
            Pos last = 0;
            for (Pos b : truth_->segmentation.breakpoints)
                if (b <= u) last = b - 1;
            history_.push_last(last);
        }
    }
    initialized_ = true;
    step(true);
}

void Detector::step(bool init) {
    ++step_counter_;
    const Pos t = series_.length();
    segmentation_ = current_segmentation();
    history_.push_last(segmentation_.last_boundary());
    const auto segs = segmentation_.segments();
    const SegmentView cur = segs.back();

    const Pos m_t = std::max<Pos>(1, active_set_cardinality(cur.size(), cfg_.lambda_hat, cfg_.ell_hat));
    const Pos a0 = std::max(t - m_t + 1, frozen_before_);
    frozen_before_ = a0;
    const Pos m_eff = t - a0 + 1;

    StepTrace tr;
    tr.t = t;
    tr.active_start = a0;
    if (cfg_.record_trace) tr.breakpoints = segmentation_.breakpoints;
    auto set_status = [&](Pos u, double score, double p, bool rejected) {
        auto& rec = records_[static_cast<std::size_t>(u - 1)];
        const int s = rejected ? 1 : 0;
        if (cfg_.record_trace && rec.status != s) tr.status_changes.emplace_back(u, s);
        rec = DetectionRecord{u, t, score, p, s};
        status_[static_cast<std::size_t>(u - 1)] = static_cast<std::uint8_t>(s);
    };

    // Prefix classification: blocks of the non-active prefix are tested against
    // the remaining prefix scores until statuses stop changing.
    if (init && a0 > 1) {
        std::vector<double> prefix_scores(static_cast<std::size_t>(a0 - 1));
        for (const auto& seg : segs) {
            if (seg.start >= a0) break;
            const auto& c = cache_for(seg, true);
            for (Pos u = seg.start; u <= std::min(seg.end, a0 - 1); ++u)
                prefix_scores[static_cast<std::size_t>(u - 1)] = c.scores[static_cast<std::size_t>(u - seg.start)];
        }
        const Pos block = std::max<Pos>(1, cfg_.lambda_hat);
        for (int iter = 0; iter < cfg_.init_iterations; ++iter) {
            bool changed = false;
            for (Pos b0 = 1; b0 < a0; b0 += block) {
                const Pos b1 = std::min(a0 - 1, b0 + block - 1);
                std::vector<double> cal;
                cal.reserve(prefix_scores.size());
                for (Pos u = 1; u < a0; ++u)
                    if ((u < b0 || u > b1) && !excluded(u)) cal.push_back(prefix_scores[static_cast<std::size_t>(u - 1)]);
                if (cal.empty()) continue;
                PValueTable table(std::move(cal));
                std::vector<double> p;
                for (Pos u = b0; u <= b1; ++u) p.push_back(table(prefix_scores[static_cast<std::size_t>(u - 1)]));
                const auto bh = bh_threshold(p, cfg_.slope_for(b1 - b0 + 1));
                for (Pos u = b0; u <= b1; ++u) {
                    const double pu = p[static_cast<std::size_t>(u - b0)];
                    const bool rej = bh_rejects(pu, bh.threshold);
                    changed = changed || (status_[static_cast<std::size_t>(u - 1)] != 0) != rej;
                    set_status(u, prefix_scores[static_cast<std::size_t>(u - 1)], pu, rej);
                }
            }
            if (!changed) break;
            // Peeling always exposes the top remaining score, so stop once the
            // expected number of anomalies has been removed.
            std::size_t flagged = 0;
            for (Pos u = 1; u < a0; ++u) flagged += status_[static_cast<std::size_t>(u - 1)];
            if (static_cast<double>(flagged) >= cfg_.pi * static_cast<double>(a0 - 1)) break;
        }
    }

    // Calibration: current segment's settled part, then the most similar past segments.
    const auto& cur_cache = cache_for(cur, true);
    const std::size_t n = cfg_.calibration_size(m_eff);
    SegmentSummary current = cur_cache.summary;
    for (Pos u = a0 - 1; u >= cur.start; --u)
        current.add(u, cur_cache.scores[static_cast<std::size_t>(u - cur.start)], excluded(u));

    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i + 1 < segs.size(); ++i)
        ranked.emplace_back(bhattacharyya(current, cache_for(segs[i], false).summary), i);
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second > b.second;
    });
    std::vector<SegmentSummary> chosen;
    std::size_t gathered = current.scores.size();
    for (const auto& [d, i] : ranked) {
        if (gathered >= n) break;
        const auto& c = cache_for(segs[i], true);
        SegmentSummary s = c.summary;
        for (Pos u = segs[i].end; u >= segs[i].start; --u)
            s.add(u, c.scores[static_cast<std::size_t>(u - segs[i].start)], excluded(u));
        gathered += s.scores.size();
        chosen.push_back(std::move(s));
    }
    Rng cal_rng = rng_.split(mix_seed(0x63616cULL, static_cast<std::uint64_t>(t)));
    const auto cal = build_calibration_set(current, chosen, n, cal_rng);

    std::vector<double> p;
    std::vector<double> s;
    if (!cal.scores.empty()) {
        PValueTable table(cal.scores);
        for (Pos u = a0; u <= t; ++u) {
            s.push_back(cur_cache.scores[static_cast<std::size_t>(u - cur.start)]);
            p.push_back(table(s.back()));
        }
    } else {
        for (Pos u = a0; u <= t; ++u) {
            s.push_back(cur_cache.scores[static_cast<std::size_t>(u - cur.start)]);
            p.push_back(1.0);
        }
    }
    const double slope = cfg_.slope_for(m_eff);
    const auto bh = bh_threshold(p, slope);
    for (Pos u = a0; u <= t; ++u) {
        const auto i = static_cast<std::size_t>(u - a0);
        set_status(u, s[i], p[i], bh_rejects(p[i], bh.threshold));
    }

    if (cfg_.record_trace) {
        tr.slope = slope;
        tr.threshold = bh.threshold;
        tr.k_hat = bh.k_hat;
        tr.calibration_size = cal.scores.size();
        tr.calibration_target = n;
        trace_.push_back(std::move(tr));
    }
    for (auto it = cache_.begin(); it != cache_.end();) {
        if (it->second.last_used != step_counter_) it = cache_.erase(it);
        else ++it;
    }
}

RunResult run_series(const DetectorConfig& cfg, const TimeSeries& series, const std::optional<Truth>& truth) {
    Detector det(cfg, series.dim(), truth, series.length());
    for (Pos t = 1; t <= series.length(); ++t) det.push(series.at(t));
    det.finish();
    RunResult r;
    r.statuses = det.statuses();
    r.records = det.records();
    r.segmentation = det.segmentation();
    r.history = det.history();
    r.trace = det.trace();
    return r;
}

StationaryDetector::StationaryDetector(StationaryConfig cfg, std::size_t dim, std::uint64_t seed)
    : cfg_(std::move(cfg)), dim_(dim), rng_(seed) {
    cfg_.ncm.validate();
    if (cfg_.q < 2 || cfg_.n < 1 || cfg_.m < 1) throw ValidationError("stationary detector needs q >= 2, n >= 1, m >= 1");
    if (!(cfg_.slope > 0.0 && cfg_.slope < 1.0)) throw ValidationError("slope must lie in (0,1)");
}

bool StationaryDetector::ready() const {
    return training_.size() / dim_ >= cfg_.q && scores_.size() >= cfg_.n;
}

void StationaryDetector::initialize(const TimeSeries& prefix) {
    for (Pos u = 1; u <= prefix.length(); ++u) {
        auto x = prefix.at(u);
        ++t_;
        if (training_.size() / dim_ < cfg_.q) {
            training_.insert(training_.end(), x.begin(), x.end());
        } else {
            scores_.push_back(score(cfg_.ncm, training_, dim_, x, rng_));
        }
    }
}

std::optional<DetectionRecord> StationaryDetector::push(std::span<const double> x) {
    ++t_;
    if (training_.size() / dim_ < cfg_.q) {
        training_.insert(training_.end(), x.begin(), x.end());
        return std::nullopt;
    }
    const double s = score(cfg_.ncm, training_, dim_, x, rng_);
    if (scores_.size() < cfg_.n) {
        scores_.push_back(s);
        return std::nullopt;
    }
    // calibration: the n scores preceding the current test window of m points
    const std::size_t len = scores_.size();
    const std::size_t end = std::min(len, std::max(cfg_.n, len - std::min(len, cfg_.m - 1)));
    std::vector<double> cal(scores_.begin() + static_cast<std::ptrdiff_t>(end - cfg_.n),
                            scores_.begin() + static_cast<std::ptrdiff_t>(end));
    const double p = empirical_pvalue(s, cal);
    scores_.push_back(s);
    pvalues_.push_back(p);
    std::vector<double> test(pvalues_.end() - static_cast<std::ptrdiff_t>(std::min(cfg_.m, pvalues_.size())), pvalues_.end());
    const auto bh = bh_threshold(test, cfg_.slope);
    const bool rej = bh_rejects(p, bh.threshold);
    return DetectionRecord{t_, t_, s, p, rej ? 1 : 0};
}

}  // namespace bkad
