#include "bkad/io.hpp"

#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace bkad {

FormatError::FormatError(const std::string& what, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, std::size_t line) {
    if (s.empty()) throw FormatError("empty field", line);
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size() || errno == ERANGE) throw FormatError("not a number: '" + s + "'", line);
    return v;
}

}  // namespace

void write_series_csv(std::ostream& os, const TimeSeries& series) {
    os << 't';
    for (std::size_t d = 0; d < series.dim(); ++d) os << ",x" << (d + 1);
    os << '\n';
    os << std::setprecision(17);
    for (Pos t = 1; t <= series.length(); ++t) {
        os << (t - 1);
        for (double v : series.at(t)) os << ',' << v;
        os << '\n';
    }
}

TimeSeries read_series_csv(std::istream& is) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(is, line)) throw FormatError("missing header", 1);
    ++lineno;
    const auto header = split_csv(line);
    if (header.size() < 2 || header[0] != "t") throw FormatError("header must be t,x1[,x2,...]", lineno);
    for (std::size_t d = 1; d < header.size(); ++d)
        if (header[d] != "x" + std::to_string(d)) throw FormatError("unexpected column '" + header[d] + "'", lineno);
    const std::size_t dim = header.size() - 1;
    std::vector<double> flat;
    Pos expected = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv(line);
        if (fields.size() != header.size())
            throw FormatError("expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()), lineno);
        const double t = parse_double(fields[0], lineno);
        if (t != static_cast<double>(expected)) throw FormatError("t must count up from 0", lineno);
        ++expected;
        for (std::size_t d = 1; d < fields.size(); ++d) flat.push_back(parse_double(fields[d], lineno));
    }
    return TimeSeries(dim, std::move(flat));
}

nlohmann::json truth_to_json(const Truth& truth) {
    nlohmann::json j;
    j["length"] = truth.segmentation.length;
    std::vector<Pos> bps;
    for (Pos b : truth.segmentation.breakpoints) bps.push_back(b - 1);
    j["breakpoints"] = bps;
    j["params"] = nlohmann::json::array();
    for (const auto& p : truth.params) j["params"].push_back({{"mu", p.mu}, {"cov", p.cov}});
    std::vector<Pos> anomalies;
    for (std::size_t i = 0; i < truth.labels.size(); ++i)
        if (truth.labels[i]) anomalies.push_back(static_cast<Pos>(i));
    j["anomalies"] = anomalies;
    return j;
}

Truth truth_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("truth must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (key != "length" && key != "breakpoints" && key != "params" && key != "anomalies")
            throw ValidationError("unknown truth field: " + key);
    Truth t;
    t.segmentation.length = j.at("length").get<Pos>();
    if (t.segmentation.length < 0) throw ValidationError("negative truth length");
    Pos prev = 0;
    for (Pos b : j.value("breakpoints", std::vector<Pos>{})) {
        if (b <= prev || b >= t.segmentation.length) throw ValidationError("truth breakpoints must increase within (0, length)");
        t.segmentation.breakpoints.push_back(b + 1);
        prev = b;
    }
    if (j.contains("params"))
        for (const auto& p : j["params"]) t.params.push_back({p.at("mu").get<std::vector<double>>(), p.at("cov").get<std::vector<double>>()});
    t.labels.assign(static_cast<std::size_t>(t.segmentation.length), false);
    for (Pos a : j.value("anomalies", std::vector<Pos>{})) {
        if (a < 0 || a >= t.segmentation.length) throw ValidationError("truth anomaly outside the series");
        t.labels[static_cast<std::size_t>(a)] = true;
    }
    return t;
}

void write_detections_csv(std::ostream& os, const std::vector<DetectionRecord>& records, const Segmentation& segmentation) {
    os << "t,status,p_value,score,segment_start\n";
    os << std::setprecision(17);
    for (const auto& r : records) {
        const auto seg = segment_of(segmentation, r.position);
        os << (r.position - 1) << ',' << r.status << ',' << r.p_value << ',' << r.score << ',' << (seg.start - 1) << '\n';
    }
}

nlohmann::json trace_to_json(const StepTrace& step) {
    std::vector<Pos> bps;
    for (Pos b : step.breakpoints) bps.push_back(b - 1);
    nlohmann::json changes = nlohmann::json::array();
    for (const auto& [u, s] : step.status_changes) changes.push_back({u - 1, s});
    return {{"t", step.t - 1},
            {"breakpoints", bps},
            {"active_start", step.active_start - 1},
            {"slope", step.slope},
            {"threshold", step.threshold},
            {"k_hat", step.k_hat},
            {"calibration_size", step.calibration_size},
            {"calibration_target", step.calibration_target},
            {"status_changes", changes}};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content, bool force) {
    if (!force && std::filesystem::exists(path)) throw ValidationError(path + " exists; pass --force to overwrite");
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace bkad
