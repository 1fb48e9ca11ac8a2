#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace cliphinge {

/// Per-iteration record of a run. wall_ms is diagnostic only and is never
/// serialized: metric files must be byte-identical across repeated runs.
struct RunMetrics {
    int iter = 0;
    double gap = 0.0;
    double min_gap_so_far = 0.0;
    double v_min = 0.0, v_mean = 0.0, v_max = 0.0;
    int improvement_violations = 0;
    std::int64_t wall_ms = 0;
    std::vector<std::pair<std::string, double>> extras;  // same keys in every record of a run
};

enum class MetricsFormat { csv, jsonl };

/// Floats at 17 significant digits for exact replay.
std::string format_double(double v);

/// header_lines are the resolved config echo, one "key = value" per entry.
void write_metrics(std::ostream& os, const std::vector<RunMetrics>& records,
                   MetricsFormat format, const std::vector<std::string>& header_lines);
void write_metrics_file(const std::string& path, const std::vector<RunMetrics>& records,
                        MetricsFormat format, const std::vector<std::string>& header_lines);

/// Parses the CSV form back (header echo skipped). Values round-trip
/// bit-exactly under format_double.
std::vector<RunMetrics> parse_metrics_csv(std::istream& is);

}  // namespace cliphinge
