#include "bkad/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace bkad {

namespace {

const char* transition_name(GeneratorSpec::Transition t) {
    switch (t) {
        case GeneratorSpec::Transition::mean_shift: return "mean_shift";
        case GeneratorSpec::Transition::var_shift: return "var_shift";
        case GeneratorSpec::Transition::mean_and_var: return "mean_and_var";
    }
    return "mean_shift";
}

const char* base_name(GeneratorSpec::BaseLaw b) {
    switch (b) {
        case GeneratorSpec::BaseLaw::gaussian: return "gaussian";
        case GeneratorSpec::BaseLaw::student: return "student";
        case GeneratorSpec::BaseLaw::mog: return "mog";
        case GeneratorSpec::BaseLaw::gaussian2d: return "gaussian2d";
    }
    return "gaussian";
}

const char* anomaly_name(GeneratorSpec::AnomalyLaw a) {
    switch (a) {
        case GeneratorSpec::AnomalyLaw::spike: return "spike";
        case GeneratorSpec::AnomalyLaw::center: return "center";
        case GeneratorSpec::AnomalyLaw::point: return "point";
    }
    return "spike";
}

template <typename E>
E parse_enum(const std::string& s, std::initializer_list<E> values, const char* (*name)(E), const char* what) {
    for (E v : values)
        if (s == name(v)) return v;
    throw ValidationError(std::string("unknown ") + what + ": " + s);
}

}  // namespace

void GeneratorSpec::validate() const {
    if (T < 1) throw ValidationError("T must be positive");
    if (!(theta > 0.0)) throw ValidationError("theta must be positive");
    if (!(pi >= 0.0 && pi < 1.0)) throw ValidationError("pi must lie in [0,1)");
    if (!(delta > 0.0) || !(delta_mu > 0.0) || !(delta_sigma > 0.0) || !(spike > 0.0))
        throw ValidationError("shift sizes must be positive");
    if (!(up_probability >= 0.0 && up_probability <= 1.0)) throw ValidationError("up_probability must lie in [0,1]");
    if (!(sigma0 > 0.0)) throw ValidationError("sigma0 must be positive");
    if (!(df > 0.0)) throw ValidationError("df must be positive");
    if (!(std::abs(rho) < 1.0)) throw ValidationError("rho must lie in (-1,1)");
    if (min_segment < 1) throw ValidationError("min_segment must be positive");
    if (T < min_segment) throw ValidationError("T is shorter than the minimum segment length");
    if (base == BaseLaw::gaussian2d && point.size() != 2) throw ValidationError("2D anomaly point needs two coordinates");
    if (base != BaseLaw::gaussian2d && anomaly == AnomalyLaw::point) throw ValidationError("point anomalies are 2D only");
    if (fixed_breakpoint && (*fixed_breakpoint < 2 || *fixed_breakpoint > T)) throw ValidationError("fixed breakpoint outside [2,T]");
}

void to_json(nlohmann::json& j, const GeneratorSpec& s) {
    j = {{"T", s.T},
         {"theta", s.theta},
         {"transition", transition_name(s.transition)},
         {"delta", s.delta},
         {"delta_mu", s.delta_mu},
         {"delta_sigma", s.delta_sigma},
         {"up_probability", s.up_probability},
         {"base", base_name(s.base)},
         {"df", s.df},
         {"mode_offset", s.mode_offset},
         {"rho", s.rho},
         {"pi", s.pi},
         {"anomaly", anomaly_name(s.anomaly)},
         {"spike", s.spike},
         {"point", s.point},
         {"min_segment", s.min_segment},
         {"fixed_breakpoint", s.fixed_breakpoint ? nlohmann::json(*s.fixed_breakpoint) : nlohmann::json(nullptr)},
         {"anomalies_after_first_breakpoint", s.anomalies_after_first_breakpoint},
         {"mu0", s.mu0},
         {"sigma0", s.sigma0}};
}

void from_json(const nlohmann::json& j, GeneratorSpec& s) {
    if (!j.is_object()) throw ValidationError("generator spec must be a JSON object");
    nlohmann::json defaults = GeneratorSpec{};
    for (const auto& [key, _] : j.items())
        if (!defaults.contains(key)) throw ValidationError("unknown generator field: " + key);
    s = GeneratorSpec{};
    s.T = j.value("T", s.T);
    s.theta = j.value("theta", s.theta);
    if (j.contains("transition"))
        s.transition = parse_enum(j["transition"].get<std::string>(),
                                  {GeneratorSpec::Transition::mean_shift, GeneratorSpec::Transition::var_shift,
                                   GeneratorSpec::Transition::mean_and_var},
                                  transition_name, "transition");
    s.delta = j.value("delta", s.delta);
    s.delta_mu = j.value("delta_mu", s.delta_mu);
    s.delta_sigma = j.value("delta_sigma", s.delta_sigma);
    s.up_probability = j.value("up_probability", s.up_probability);
    if (j.contains("base"))
        s.base = parse_enum(j["base"].get<std::string>(),
                            {GeneratorSpec::BaseLaw::gaussian, GeneratorSpec::BaseLaw::student, GeneratorSpec::BaseLaw::mog,
                             GeneratorSpec::BaseLaw::gaussian2d},
                            base_name, "base law");
    s.df = j.value("df", s.df);
    s.mode_offset = j.value("mode_offset", s.mode_offset);
    s.rho = j.value("rho", s.rho);
    s.pi = j.value("pi", s.pi);
    if (j.contains("anomaly"))
        s.anomaly = parse_enum(j["anomaly"].get<std::string>(),
                               {GeneratorSpec::AnomalyLaw::spike, GeneratorSpec::AnomalyLaw::center, GeneratorSpec::AnomalyLaw::point},
                               anomaly_name, "anomaly law");
    s.spike = j.value("spike", s.spike);
    if (j.contains("point")) s.point = j["point"].get<std::vector<double>>();
    s.min_segment = j.value("min_segment", s.min_segment);
    if (j.contains("fixed_breakpoint") && !j["fixed_breakpoint"].is_null()) s.fixed_breakpoint = j["fixed_breakpoint"].get<Pos>();
    s.anomalies_after_first_breakpoint = j.value("anomalies_after_first_breakpoint", s.anomalies_after_first_breakpoint);
    s.mu0 = j.value("mu0", s.mu0);
    s.sigma0 = j.value("sigma0", s.sigma0);
    s.validate();
}

std::vector<std::string> generator_preset_names() {
    return {"table1", "student", "mog", "2d", "meanvar", "var", "bench_mean", "bench_var"};
}

GeneratorSpec generator_preset(const std::string& name) {
    GeneratorSpec s;
    if (name == "table1") return s;
    if (name == "student") {
        s.base = GeneratorSpec::BaseLaw::student;
        return s;
    }
    if (name == "mog") {
        s.base = GeneratorSpec::BaseLaw::mog;
        s.anomaly = GeneratorSpec::AnomalyLaw::center;
        return s;
    }
    if (name == "2d") {
        s.T = 2000;
        s.base = GeneratorSpec::BaseLaw::gaussian2d;
        s.anomaly = GeneratorSpec::AnomalyLaw::point;
        s.fixed_breakpoint = s.T / 2 + 1;
        s.anomalies_after_first_breakpoint = true;
        return s;
    }
    if (name == "meanvar") {
        s.transition = GeneratorSpec::Transition::mean_and_var;
        return s;
    }
    if (name == "var") {
        s.transition = GeneratorSpec::Transition::var_shift;
        s.delta = 4.0;
        return s;
    }
    if (name == "bench_mean") {
        s.theta = 125.0;
        s.delta = 2.0;
        return s;
    }
    if (name == "bench_var") {
        s.theta = 125.0;
        s.transition = GeneratorSpec::Transition::var_shift;
        s.delta = 1.5;
        return s;
    }
    throw ValidationError("unknown generator preset: " + name);
}

std::vector<Pos> draw_breakpoints(Pos T, double theta, Pos min_segment, Rng& rng) {
    const auto D = static_cast<Pos>(std::llround(rng.exponential(static_cast<double>(T) / theta)));
    std::vector<Pos> raw;
    if (T >= 2)
        for (Pos i = 0; i < D; ++i) raw.push_back(rng.uniform_int(2, T));
    std::sort(raw.begin(), raw.end());
    std::vector<Pos> kept;
    Pos start = 1;
    for (Pos b : raw) {
        if (b - start >= min_segment && T - b + 1 >= min_segment) {
            kept.push_back(b);
            start = b;
        }
    }
    return kept;
}

Generated generate(const GeneratorSpec& spec, Rng& rng) {
    spec.validate();
    Rng bp_rng = rng.split(1);
    Rng law_rng = rng.split(2);
    Rng point_rng = rng.split(3);

    Segmentation seg{spec.T, {}};
    if (spec.fixed_breakpoint) {
        seg.breakpoints = {*spec.fixed_breakpoint};
    } else {
        seg.breakpoints = draw_breakpoints(spec.T, spec.theta, spec.min_segment, bp_rng);
    }
    const std::size_t S = seg.segment_count();

    std::vector<double> mu(S, spec.mu0), sigma(S, spec.sigma0);
    for (std::size_t i = 1; i < S; ++i) {
        mu[i] = mu[i - 1];
        sigma[i] = sigma[i - 1];
        switch (spec.transition) {
            case GeneratorSpec::Transition::mean_shift: mu[i] += law_rng.rademacher() * spec.delta; break;
            case GeneratorSpec::Transition::var_shift:
                sigma[i] *= std::exp(law_rng.rademacher() * std::log(spec.delta) / 2.0);
                break;
            case GeneratorSpec::Transition::mean_and_var: {
                const int zs = law_rng.bernoulli(spec.up_probability) ? 1 : -1;
                sigma[i] *= std::exp(zs * std::log(spec.delta_sigma));
                mu[i] += law_rng.rademacher() * spec.delta_mu * std::max(sigma[i - 1], sigma[i]);
                break;
            }
        }
    }

    const std::size_t dim = spec.dim();
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(spec.T) * dim);
    std::vector<bool> labels(static_cast<std::size_t>(spec.T), false);
    const Pos first_bp = seg.breakpoints.empty() ? spec.T + 1 : seg.breakpoints.front();
    std::student_t_distribution<double> student(spec.df);
    std::size_t i = 0;
    for (Pos t = 1; t <= spec.T; ++t) {
        while (i < seg.breakpoints.size() && t >= seg.breakpoints[i]) ++i;
        const bool eligible = !spec.anomalies_after_first_breakpoint || t >= first_bp;
        const bool anomalous = eligible && point_rng.bernoulli(spec.pi);
        labels[static_cast<std::size_t>(t - 1)] = anomalous;
        if (spec.base == GeneratorSpec::BaseLaw::gaussian2d) {
            if (anomalous) {
                flat.push_back(spec.point[0]);
                flat.push_back(spec.point[1]);
                continue;
            }
            const double rho = i == 0 ? spec.rho : -spec.rho;
            const double z1 = point_rng.normal(), z2 = point_rng.normal();
            flat.push_back(mu[i] + sigma[i] * z1);
            flat.push_back(mu[i] + sigma[i] * (rho * z1 + std::sqrt(1.0 - rho * rho) * z2));
            continue;
        }
        if (anomalous) {
            if (spec.anomaly == GeneratorSpec::AnomalyLaw::center) {
                flat.push_back(mu[i]);
            } else {
                flat.push_back(mu[i] + point_rng.rademacher() * spec.spike * sigma[i]);
            }
            continue;
        }
        switch (spec.base) {
            case GeneratorSpec::BaseLaw::gaussian: flat.push_back(point_rng.normal(mu[i], sigma[i])); break;
            case GeneratorSpec::BaseLaw::student: flat.push_back(mu[i] + sigma[i] * student(point_rng.engine())); break;
            case GeneratorSpec::BaseLaw::mog: {
                const double mode = point_rng.bernoulli(0.5) ? spec.mode_offset : -spec.mode_offset;
                flat.push_back(point_rng.normal(mu[i] + mode, sigma[i]));
                break;
            }
            default: break;
        }
    }

    Truth truth;
    truth.segmentation = seg;
    truth.labels = labels;
    for (std::size_t k = 0; k < S; ++k) {
        SegmentParams p;
        if (dim == 2) {
            const double rho = k == 0 ? spec.rho : -spec.rho;
            const double v = sigma[k] * sigma[k];
            p.mu = {mu[k], mu[k]};
            p.cov = {v, rho * v, rho * v, v};
        } else {
            p.mu = {mu[k]};
            double v = sigma[k] * sigma[k];
            if (spec.base == GeneratorSpec::BaseLaw::mog) v += spec.mode_offset * spec.mode_offset;
            if (spec.base == GeneratorSpec::BaseLaw::student && spec.df > 2.0) v *= spec.df / (spec.df - 2.0);
            p.cov = {v};
        }
        truth.params.push_back(std::move(p));
    }
    return Generated{TimeSeries(dim, std::move(flat), labels), std::move(truth)};
}

SeasonalSpec SeasonalSpec::random(Family family, Rng& rng, Pos T) {
    static constexpr double amplitudes[] = {1.0, 3.0, 5.0};
    static constexpr double frequencies[] = {5.0, 10.0, 20.0};
    static constexpr double attenuations[] = {0.5, 0.3, 0.1};
    static constexpr double multiples[] = {2.0, 3.0, 5.0};
    SeasonalSpec s;
    s.family = family;
    s.T = T;
    s.amplitude = amplitudes[rng.uniform_int(0, 2)];
    s.frequency = frequencies[rng.uniform_int(0, 2)];
    s.attenuation = attenuations[rng.uniform_int(0, 2)];
    s.multiple = multiples[rng.uniform_int(0, 2)];
    return s;
}

SeasonalSpec::Family parse_seasonal_family(const std::string& name) {
    if (name == "simple") return SeasonalSpec::Family::simple;
    if (name == "complex") return SeasonalSpec::Family::complex;
    if (name == "variance") return SeasonalSpec::Family::variance;
    if (name == "trend") return SeasonalSpec::Family::trend;
    throw ValidationError("unknown seasonal family: " + name);
}

std::string to_string(SeasonalSpec::Family f) {
    switch (f) {
        case SeasonalSpec::Family::simple: return "simple";
        case SeasonalSpec::Family::complex: return "complex";
        case SeasonalSpec::Family::variance: return "variance";
        case SeasonalSpec::Family::trend: return "trend";
    }
    return "simple";
}

TimeSeries generate_seasonal(const SeasonalSpec& spec, Rng& rng) {
    if (spec.T < 1 || !(spec.sigma > 0.0) || !(spec.pi >= 0.0 && spec.pi < 1.0)) throw ValidationError("invalid seasonal spec");
    std::vector<double> xs;
    std::vector<bool> labels;
    const double two_pi = 2.0 * std::numbers::pi;
    for (Pos t = 1; t <= spec.T; ++t) {
        const bool a = rng.bernoulli(spec.pi);
        const int zeta = rng.rademacher();
        const double r = rng.normal(0.0, spec.sigma);
        const double noise = a ? zeta * spec.spike : r;
        const double u = static_cast<double>(t) / static_cast<double>(spec.T);
        const double s1 = spec.amplitude * std::sin(two_pi * spec.frequency * u);
        const double s2 = spec.attenuation * spec.amplitude * std::sin(two_pi * spec.multiple * spec.frequency * u);
        double x = 0.0;
        switch (spec.family) {
            case SeasonalSpec::Family::simple: x = s1 + noise; break;
            case SeasonalSpec::Family::complex: x = s1 + s2 + noise; break;
            case SeasonalSpec::Family::variance: x = noise * (std::sin(static_cast<double>(t)) + 1.5); break;
            case SeasonalSpec::Family::trend: x = spec.trend_slope * static_cast<double>(t) + s1 + noise; break;
        }
        xs.push_back(x);
        labels.push_back(a);
    }
    return TimeSeries::univariate(std::move(xs), std::move(labels));
}

}  // namespace bkad
