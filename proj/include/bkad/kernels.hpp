#pragma once

#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bkad/core.hpp"

namespace bkad {

struct KernelSpec {
    enum class Kind { gaussian, combo };

    Kind kind = Kind::gaussian;
    double h = 1.0;
    std::vector<std::pair<double, KernelSpec>> terms;

    static KernelSpec gaussian(double h);
    static KernelSpec combo(std::vector<std::pair<double, KernelSpec>> terms);

    void validate() const;
    // Flattened (weight, bandwidth) list of the Gaussian leaves.
    std::vector<std::pair<double, double>> gaussian_terms() const;
};

double eval(const KernelSpec& spec, std::span<const double> x, std::span<const double> y);

// K(x_u, y) for u = 0..n-1 where xs holds n points of dimension dim, row-major.
void eval_column(const KernelSpec& spec, std::span<const double> xs, std::size_t dim,
                 std::span<const double> y, std::span<double> out);

// Median of pairwise distances; all pairs up to max_points, uniform pair subsample beyond.
double median_heuristic(const TimeSeries& data, Rng& rng, Pos max_points = 2000);
double median_heuristic(std::span<const double> flat, std::size_t dim, Rng& rng, Pos max_points = 2000);

void to_json(nlohmann::json& j, const KernelSpec& k);
void from_json(const nlohmann::json& j, KernelSpec& k);

}  // namespace bkad
