#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bkad/core.hpp"
#include "bkad/detector.hpp"

namespace bkad {

// Malformed input file; `line` is 1-based (0 when not tied to a line).
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& what, std::size_t line);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// CSV `t,x1[,x2,...]` with a header row and 0-based t.
void write_series_csv(std::ostream& os, const TimeSeries& series);
TimeSeries read_series_csv(std::istream& is);

// Truth sidecar. Positions use the CSV's 0-based t: breakpoints are the t of the
// first point of each new segment, anomalies the t of each anomalous point.
nlohmann::json truth_to_json(const Truth& truth);
Truth truth_from_json(const nlohmann::json& j);

// CSV `t,status,p_value,score,segment_start` with 0-based t and segment_start.
void write_detections_csv(std::ostream& os, const std::vector<DetectionRecord>& records, const Segmentation& segmentation);

// One JSON object per step, 0-based positions.
nlohmann::json trace_to_json(const StepTrace& step);

std::string read_file(const std::string& path);
// Throws when the file exists and `force` is false.
void write_file(const std::string& path, const std::string& content, bool force);

}  // namespace bkad
