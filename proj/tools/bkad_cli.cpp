#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bkad/bench.hpp"
#include "bkad/datagen.hpp"
#include "bkad/detector.hpp"
#include "bkad/io.hpp"
#include "bkad/uncertainty.hpp"

namespace {

using namespace bkad;

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;
constexpr const char* kProfileSchema = "bkad-profile/1";

struct DetectorFlags {
    std::optional<double> alpha, pi, k;
    std::string oracle;
    std::optional<std::uint64_t> seed;
};

OracleFlags parse_oracle(const std::string& list) {
    OracleFlags f;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty() || item == "none") continue;
        if (item == "all") f = {true, true, true};
        else if (item == "breakpoints") f.breakpoints = true;
        else if (item == "params") f.params = true;
        else if (item == "removal") f.removal = true;
        else throw ValidationError("unknown oracle '" + item + "' (breakpoints, params, removal, all, none)");
    }
    return f;
}

nlohmann::json parse_json(const std::string& text, const std::string& what) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(what + " is not valid JSON: " + e.what());
    }
}

DetectorConfig detector_config(const std::string& config_path, const DetectorFlags& flags) {
    DetectorConfig cfg = DetectorConfig::paper_preset(0.2);
    if (!config_path.empty()) cfg = parse_json(read_file(config_path), config_path).get<DetectorConfig>();
    if (flags.alpha) {
        cfg.alpha = *flags.alpha;
        if (cfg.slope) cfg.slope = *flags.alpha / 2.0;
    }
    if (flags.pi) cfg.pi = *flags.pi;
    if (flags.k) cfg.k = *flags.k;
    if (!flags.oracle.empty()) cfg.oracle = parse_oracle(flags.oracle);
    if (flags.seed) cfg.seed = *flags.seed;
    cfg.validate();
    return cfg;
}

std::string join_path(const std::string& dir, const std::string& file) {
    if (dir.empty()) return file;
    return dir.back() == '/' ? dir + file : dir + "/" + file;
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string preset = "table1";
    std::string seasonal;
    std::string config;
    std::optional<double> delta;
    std::uint64_t seed = 0;
    std::string out = ".";
    std::string name = "series";
    bool force = false;
};

int cmd_generate(const GenerateArgs& a) {
    Rng rng(a.seed);
    TimeSeries series;
    Truth truth;
    if (!a.seasonal.empty()) {
        const auto family = parse_seasonal_family(a.seasonal);
        Rng draw = rng.split(0x736561ULL);
        const auto spec = SeasonalSpec::random(family, draw);
        series = generate_seasonal(spec, rng);
        truth.segmentation.length = series.length();
        truth.labels = series.labels();
    } else {
        GeneratorSpec spec = a.config.empty() ? generator_preset(a.preset)
                                              : parse_json(read_file(a.config), a.config).get<GeneratorSpec>();
        if (a.delta) spec.delta = *a.delta;
        spec.validate();
        auto g = generate(spec, rng);
        series = std::move(g.series);
        truth = std::move(g.truth);
    }
    std::ostringstream csv;
    write_series_csv(csv, series);
    const auto csv_path = join_path(a.out, a.name + ".csv");
    const auto truth_path = join_path(a.out, a.name + ".truth.json");
    write_file(csv_path, csv.str(), a.force);
    write_file(truth_path, truth_to_json(truth).dump(2) + "\n", a.force);
    std::cout << csv_path << "\n" << truth_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct ProfileArgs {
    std::string input;
    std::string out = "profile.json";
    std::uint64_t seed = 0;
    double eta = 0.01;
    int repetitions = 200;
    bool force = false;
};

nlohmann::json curve_json(const Curve& c) {
    nlohmann::json j = nlohmann::json::array();
    for (std::size_t i = 0; i < c.x.size(); ++i) j.push_back({c.x[i], c.p[i]});
    return j;
}

int cmd_profile(const ProfileArgs& a) {
    std::ifstream in(a.input);
    if (!in) throw std::runtime_error("cannot open " + a.input);
    const auto history = read_series_csv(in);
    ProfileConfig cfg;
    cfg.eta = a.eta;
    cfg.fd.repetitions = a.repetitions;
    if (history.dim() > 1) cfg.ncm = Ncm::mahalanobis();
    Rng rng(a.seed);
    const auto model = build_uncertainty_model(history, cfg, rng);
    nlohmann::json j = {{"schema", kProfileSchema},
                        {"eta", model.eta},
                        {"lambda_star", model.lambda_star},
                        {"ell_star", model.ell_star},
                        {"lambda_reached", model.lambda_reached},
                        {"ell_reached", model.ell_reached},
                        {"f_tau", curve_json(model.f_tau)},
                        {"f_tau_exact", curve_json(model.f_tau_exact)},
                        {"f_d", curve_json(model.f_d.unknown)},
                        {"f_d_normal", curve_json(model.f_d.normal)},
                        {"f_d_abnormal", curve_json(model.f_d.abnormal)}};
    write_file(a.out, j.dump(2) + "\n", a.force);
    std::cout << "lambda_star " << model.lambda_star << " ell_star " << model.ell_star << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct DetectArgs {
    std::string input;
    std::string config;
    std::string profile;
    std::optional<Pos> lambda_hat, ell_hat;
    std::string truth;
    bool evaluate = false;
    std::string out = ".";
    bool force = false;
    DetectorFlags flags;
};

void apply_profile(DetectorConfig& cfg, const std::string& path) {
    const auto j = parse_json(read_file(path), path);
    if (!j.is_object() || j.value("schema", std::string()) != kProfileSchema)
        throw ValidationError(path + ": profile schema tag missing or not " + std::string(kProfileSchema));
    cfg.lambda_hat = std::max<Pos>(1, j.at("lambda_star").get<Pos>());
    cfg.ell_hat = j.at("ell_star").get<Pos>();
}

int detect_stream(const DetectorConfig& cfg) {
    // Header, then one line per observation; prints every status that changed or is new.
    std::string line;
    if (!std::getline(std::cin, line)) throw FormatError("missing header", 1);
    std::stringstream hs(line);
    std::string col;
    std::size_t dim = 0;
    while (std::getline(hs, col, ',')) dim += col != "t";
    if (dim == 0) throw FormatError("header must be t,x1[,x2,...]", 1);
    Detector det(cfg, dim);
    std::vector<int> shown;
    std::size_t lineno = 1;
    std::cout << "t,status,p_value,score\n";
    auto emit = [&](const StepUpdate& up) {
        for (const auto& r : up.records) {
            const auto i = static_cast<std::size_t>(r.position - 1);
            if (shown.size() <= i) shown.resize(i + 1, -1);
            if (shown[i] == r.status) continue;
            shown[i] = r.status;
            std::cout << (r.position - 1) << ',' << r.status << ',' << r.p_value << ',' << r.score << '\n';
        }
        std::cout.flush();
    };
    while (std::getline(std::cin, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::vector<double> x;
        std::string field;
        bool first = true;
        while (std::getline(ss, field, ',')) {
            if (first) {
                first = false;
                continue;
            }
            char* end = nullptr;
            const double v = std::strtod(field.c_str(), &end);
            if (field.empty() || end != field.c_str() + field.size()) throw FormatError("not a number: '" + field + "'", lineno);
            x.push_back(v);
        }
        if (x.size() != dim) throw FormatError("expected " + std::to_string(dim) + " values", lineno);
        emit(det.push(x));
    }
    emit(det.finish());
    return 0;
}

int cmd_detect(DetectArgs a) {
    DetectorConfig cfg = detector_config(a.config, a.flags);
    if (!a.profile.empty()) apply_profile(cfg, a.profile);
    if (a.lambda_hat) cfg.lambda_hat = *a.lambda_hat;
    if (a.ell_hat) cfg.ell_hat = *a.ell_hat;
    cfg.validate();
    if (a.input == "-") {
        if (cfg.oracle.any()) throw ValidationError("oracle runs need a file input and --truth");
        return detect_stream(cfg);
    }
    std::ifstream in(a.input);
    if (!in) throw std::runtime_error("cannot open " + a.input);
    const auto series = read_series_csv(in);
    std::optional<Truth> truth;
    if (!a.truth.empty()) {
        truth = truth_from_json(parse_json(read_file(a.truth), a.truth));
        if (truth->segmentation.length != series.length()) throw ValidationError("truth length differs from the series");
    }
    if ((cfg.oracle.any() || a.evaluate) && !truth) throw ValidationError("--truth is required for oracles and --evaluate");
    cfg.record_trace = true;

    std::ostringstream csv, trace;
    Detector det(cfg, series.dim(), cfg.oracle.any() ? truth : std::nullopt, series.length());
    std::size_t flushed = 0;
    auto drain = [&] {
        for (; flushed < det.trace().size(); ++flushed) trace << trace_to_json(det.trace()[flushed]).dump() << '\n';
    };
    for (Pos t = 1; t <= series.length(); ++t) {
        det.push(series.at(t));
        drain();
    }
    det.finish();
    drain();
    write_detections_csv(csv, det.records(), det.segmentation());
    write_file(join_path(a.out, "detections.csv"), csv.str(), a.force);
    write_file(join_path(a.out, "trace.jsonl"), trace.str(), a.force);
    if (a.evaluate) {
        const Pos from = evaluation_start(cfg, false);
        const auto statuses = det.statuses();
        std::vector<bool> d(statuses.begin() + std::min<Pos>(from - 1, series.length()), statuses.end());
        std::vector<bool> l(truth->labels.begin() + std::min<Pos>(from - 1, series.length()), truth->labels.end());
        const auto pr = fdp_fnp(d, l);
        std::cout << "FDP " << pr.fdp << " FNP " << pr.fnp << " (positions from t=" << (from - 1) << ")\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
    std::string suite;
    int seeds = 50;
    int workers = 0;
    std::uint64_t seed = 0;
    std::string out = ".";
    std::vector<std::string> variants;
    bool evaluate_prefix = false;
    bool force = false;
};

int cmd_bench(const BenchArgs& a) {
    BenchOptions opt;
    opt.seeds = a.seeds;
    opt.workers = a.workers;
    if (const char* env = std::getenv("BKAD_WORKERS")) {
        try {
            opt.workers = std::stoi(env);
        } catch (const std::exception&) {
            throw ValidationError("BKAD_WORKERS must be an integer");
        }
    }
    opt.master_seed = a.seed;
    opt.variants = a.variants;
    opt.evaluate_prefix = a.evaluate_prefix;
    const auto rep = run_benchmark(a.suite, opt);
    write_file(join_path(a.out, a.suite + ".json"), nlohmann::json(rep).dump(2) + "\n", a.force);
    write_file(join_path(a.out, a.suite + ".csv"), report_csv(rep), a.force);
    for (const auto& v : rep.variants) {
        std::cout << v.variant << ": FDR " << v.fdr << " FNR " << v.fnr;
        if (v.auc) std::cout << " AUC " << *v.auc;
        std::cout << "\n";
    }
    std::cout << "runtime_s " << rep.runtime_s << "\n";
    return 0;
}

void add_detector_flags(CLI::App* app, DetectorFlags& f) {
    app->add_option("--alpha", f.alpha, "Target FDR");
    app->add_option("--pi", f.pi, "Anomaly proportion");
    app->add_option("--k", f.k, "Calibration multiplier");
    app->add_option("--oracle", f.oracle, "Comma list of breakpoints, params, removal");
    app->add_option("--seed", f.seed, "Detector seed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Breakpoint-based online anomaly detection"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Generate a synthetic series and its truth sidecar");
    g->add_option("--preset", gen.preset, "Generator preset")->check(CLI::IsMember(generator_preset_names()));
    g->add_option("--seasonal", gen.seasonal, "Seasonal family: simple, complex, variance, trend");
    g->add_option("--config", gen.config, "Generator spec JSON");
    g->add_option("--delta", gen.delta, "Transition size");
    g->add_option("--seed", gen.seed, "Seed");
    g->add_option("--out", gen.out, "Output directory");
    g->add_option("--name", gen.name, "Base file name");
    g->add_flag("--force", gen.force, "Overwrite existing files");

    ProfileArgs prof;
    auto* p = app.add_subcommand("profile", "Estimate the active-set parameters from a historical series");
    p->add_option("--input", prof.input, "Historical series CSV")->required();
    p->add_option("--out", prof.out, "Profile JSON path");
    p->add_option("--seed", prof.seed, "Seed");
    p->add_option("--eta", prof.eta, "Confidence level η");
    p->add_option("--repetitions", prof.repetitions, "Resampling repetitions per length");
    p->add_flag("--force", prof.force, "Overwrite existing files");

    DetectArgs det;
    auto* d = app.add_subcommand("detect", "Run the detector on a series CSV ('-' streams stdin)");
    d->add_option("--input", det.input, "Series CSV or '-'")->required();
    d->add_option("--config", det.config, "Detector config JSON");
    d->add_option("--profile", det.profile, "Profile JSON from the profile command");
    d->add_option("--lambda-hat", det.lambda_hat, "Active-set distance λ̂");
    d->add_option("--ell-hat", det.ell_hat, "Active-set length ℓ̂");
    d->add_option("--truth", det.truth, "Truth sidecar JSON");
    d->add_flag("--evaluate", det.evaluate, "Print FDP and FNP against the truth");
    d->add_option("--out", det.out, "Output directory");
    d->add_flag("--force", det.force, "Overwrite existing files");
    add_detector_flags(d, det.flags);

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "Run a benchmark suite");
    b->add_option("suite", bench.suite, "Suite name")->required()->check(CLI::IsMember(benchmark_suites()));
    b->add_option("--seeds", bench.seeds, "Replications per variant");
    b->add_option("--workers", bench.workers, "Worker threads (BKAD_WORKERS overrides)");
    b->add_option("--seed", bench.seed, "Master seed");
    b->add_option("--out", bench.out, "Output directory");
    b->add_option("--variant", bench.variants, "Restrict to these variants");
    b->add_flag("--evaluate-prefix", bench.evaluate_prefix, "Include warm-up positions in the metrics");
    b->add_flag("--force", bench.force, "Overwrite existing files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitValidation;
    }
    try {
        if (g->parsed()) return cmd_generate(gen);
        if (p->parsed()) return cmd_profile(prof);
        if (d->parsed()) return cmd_detect(det);
        if (b->parsed()) return cmd_bench(bench);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const FormatError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: invalid configuration: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
