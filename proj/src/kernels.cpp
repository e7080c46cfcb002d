#include "bkad/kernels.hpp"

#include <cmath>
#include <json.hpp>

#include "bkad/estimators.hpp"
#include "bkad/simd.hpp"

namespace bkad {

KernelSpec KernelSpec::gaussian(double h) {
    KernelSpec k;
    k.kind = Kind::gaussian;
    k.h = h;
    k.validate();
    return k;
}

KernelSpec KernelSpec::combo(std::vector<std::pair<double, KernelSpec>> terms) {
    KernelSpec k;
    k.kind = Kind::combo;
    k.terms = std::move(terms);
    k.validate();
    return k;
}

void KernelSpec::validate() const {
    if (kind == Kind::gaussian) {
        if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("gaussian bandwidth must be positive and finite");
        return;
    }
    if (terms.empty()) throw ValidationError("kernel combination needs at least one term");
    for (const auto& [w, child] : terms) {
        if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("combination weights must be positive and finite");
        child.validate();
    }
}

std::vector<std::pair<double, double>> KernelSpec::gaussian_terms() const {
    if (kind == Kind::gaussian) return {{1.0, h}};
    std::vector<std::pair<double, double>> out;
    for (const auto& [w, child] : terms)
        for (auto [cw, ch] : child.gaussian_terms()) out.emplace_back(w * cw, ch);
    return out;
}

double eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("kernel arguments differ in dimension");
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = x[i] - y[i];
        d2 += d * d;
    }
    double v = 0.0;
    for (auto [w, h] : spec.gaussian_terms()) v += w * std::exp(-d2 / (2.0 * h * h));
    return v;
}

void eval_column(const KernelSpec& spec, std::span<const double> xs, std::size_t dim,
                 std::span<const double> y, std::span<double> out) {
    const std::size_t n = out.size();
    simd::active().sq_dist(out.data(), xs.data(), y.data(), n, dim);
    const auto terms = spec.gaussian_terms();
    if (terms.size() == 1) {
        const double inv = 1.0 / (2.0 * terms[0].second * terms[0].second);
        const double w = terms[0].first;
        for (std::size_t i = 0; i < n; ++i) out[i] = w * std::exp(-out[i] * inv);
        return;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double d2 = out[i];
        double v = 0.0;
        for (auto [w, h] : terms) v += w * std::exp(-d2 / (2.0 * h * h));
        out[i] = v;
    }
}

double median_heuristic(std::span<const double> flat, std::size_t dim, Rng& rng, Pos max_points) {
    const auto n = static_cast<std::size_t>(flat.size() / dim);
    if (n < 2) throw ValidationError("median heuristic needs at least two points");
    std::vector<std::size_t> idx;
    if (static_cast<Pos>(n) <= max_points) {
        idx.resize(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    } else {
        idx = rng.sample_without_replacement(n, static_cast<std::size_t>(max_points));
    }
    std::vector<double> dists;
    dists.reserve(idx.size() * (idx.size() - 1) / 2);
    for (std::size_t a = 0; a < idx.size(); ++a)
        for (std::size_t b = a + 1; b < idx.size(); ++b) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                double d = flat[idx[a] * dim + k] - flat[idx[b] * dim + k];
                d2 += d * d;
            }
            dists.push_back(std::sqrt(d2));
        }
    double h = lower_median(dists);
    if (!(h > 0.0))
        throw ValidationError("median heuristic degenerate (median pairwise distance is 0); set an explicit bandwidth");
    return h;
}

double median_heuristic(const TimeSeries& data, Rng& rng, Pos max_points) {
    return median_heuristic(data.flat(), data.dim(), rng, max_points);
}

void to_json(nlohmann::json& j, const KernelSpec& k) {
    if (k.kind == KernelSpec::Kind::gaussian) {
        j = {{"kind", "gaussian"}, {"h", k.h}};
        return;
    }
    auto terms = nlohmann::json::array();
    for (const auto& [w, child] : k.terms) terms.push_back(nlohmann::json::array({w, child}));
    j = {{"kind", "combo"}, {"terms", terms}};
}

void from_json(const nlohmann::json& j, KernelSpec& k) {
    if (!j.is_object() || !j.contains("kind")) throw ValidationError("kernel spec must be an object with a \"kind\"");
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "gaussian") {
        for (const auto& [key, _] : j.items())
            if (key != "kind" && key != "h") throw ValidationError("unknown kernel field: " + key);
        k = KernelSpec::gaussian(j.at("h").get<double>());
    } else if (kind == "combo") {
        for (const auto& [key, _] : j.items())
            if (key != "kind" && key != "terms") throw ValidationError("unknown kernel field: " + key);
        std::vector<std::pair<double, KernelSpec>> terms;
        for (const auto& t : j.at("terms")) {
            if (!t.is_array() || t.size() != 2) throw ValidationError("combo term must be [weight, kernel]");
            terms.emplace_back(t[0].get<double>(), t[1].get<KernelSpec>());
        }
        k = KernelSpec::combo(std::move(terms));
    } else {
        throw ValidationError("unknown kernel kind: " + kind);
    }
}

}  // namespace bkad
