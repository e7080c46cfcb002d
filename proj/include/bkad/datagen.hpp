#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bkad/core.hpp"

namespace bkad {

struct GeneratorSpec {
    enum class Transition { mean_shift, var_shift, mean_and_var };
    enum class BaseLaw { gaussian, student, mog, gaussian2d };
    enum class AnomalyLaw { spike, center, point };

    Pos T = 3000;
    double theta = 300.0;  // average segment length
    Transition transition = Transition::mean_shift;
    double delta = 5.0;        // mean jump, or scale factor for var_shift
    double delta_mu = 2.0;     // mean_and_var: mean jump in units of max(σ_i, σ_{i+1})
    double delta_sigma = 2.0;  // mean_and_var: σ multiplied or divided by this
    double up_probability = 0.9;
    BaseLaw base = BaseLaw::gaussian;
    double df = 5.0;            // student degrees of freedom
    double mode_offset = 6.0;   // mog modes at μ ± mode_offset
    double rho = 0.7;           // gaussian2d: correlation before the breakpoint, -rho after
    double pi = 0.01;
    AnomalyLaw anomaly = AnomalyLaw::spike;
    double spike = 4.0;         // Δ′
    std::vector<double> point = {1.0, 1.0};
    Pos min_segment = 100;
    std::optional<Pos> fixed_breakpoint;  // single breakpoint at this position instead of the Poisson draw
    bool anomalies_after_first_breakpoint = false;
    double mu0 = 0.0;
    double sigma0 = 1.0;

    std::size_t dim() const { return base == BaseLaw::gaussian2d ? 2 : 1; }
    void validate() const;
};

void to_json(nlohmann::json& j, const GeneratorSpec& s);
void from_json(const nlohmann::json& j, GeneratorSpec& s);

// Named presets: table1, student, mog, 2d, meanvar, var, bench_mean, bench_var.
GeneratorSpec generator_preset(const std::string& name);
std::vector<std::string> generator_preset_names();

struct Generated {
    TimeSeries series;
    Truth truth;
};

// Breakpoint positions: D = round(Exp(mean T/θ)) uniform draws on [2, T], sorted,
// then greedily dropped so that every segment keeps at least min_segment points.
std::vector<Pos> draw_breakpoints(Pos T, double theta, Pos min_segment, Rng& rng);

Generated generate(const GeneratorSpec& spec, Rng& rng);

struct SeasonalSpec {
    enum class Family { simple, complex, variance, trend };

    Family family = Family::simple;
    Pos T = 3000;
    double amplitude = 1.0;    // A_1
    double frequency = 5.0;    // f_1, cycles over the series
    double attenuation = 0.5;  // a_21
    double multiple = 2.0;     // w_21
    double trend_slope = 0.001;  // B
    double sigma = 1.0;
    double spike = 4.0;
    double pi = 0.01;

    // Draws A_1, f_1, a_21, w_21 from their listed value sets.
    static SeasonalSpec random(Family family, Rng& rng, Pos T = 3000);
};

SeasonalSpec::Family parse_seasonal_family(const std::string& name);
std::string to_string(SeasonalSpec::Family f);

TimeSeries generate_seasonal(const SeasonalSpec& spec, Rng& rng);

}  // namespace bkad
