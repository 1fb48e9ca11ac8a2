#include "cliphinge/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cliphinge {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void write_csv(std::ostream& os, const std::vector<RunMetrics>& records,
               const std::vector<std::string>& header_lines) {
    for (const auto& line : header_lines)
        os << "# " << line << "\n";
    os << "iter,gap,min_gap_so_far,v_min,v_mean,v_max,improvement_violations";
    if (!records.empty())
        for (const auto& [k, _] : records.front().extras)
            os << "," << k;
    os << "\n";
    for (const auto& r : records) {
        os << r.iter << "," << format_double(r.gap) << "," << format_double(r.min_gap_so_far)
           << "," << format_double(r.v_min) << "," << format_double(r.v_mean) << ","
           << format_double(r.v_max) << "," << r.improvement_violations;
        for (const auto& [_, v] : r.extras)
            os << "," << format_double(v);
        os << "\n";
    }
}

void write_jsonl(std::ostream& os, const std::vector<RunMetrics>& records,
                 const std::vector<std::string>& header_lines) {
    os << "{\"type\":\"header\",\"config\":[";
    for (size_t i = 0; i < header_lines.size(); ++i)
        os << (i ? "," : "") << "\"" << header_lines[i] << "\"";
    os << "]}\n";
    for (const auto& r : records) {
        os << "{\"type\":\"metrics\",\"iter\":" << r.iter << ",\"gap\":" << format_double(r.gap)
           << ",\"min_gap_so_far\":" << format_double(r.min_gap_so_far)
           << ",\"v_min\":" << format_double(r.v_min) << ",\"v_mean\":" << format_double(r.v_mean)
           << ",\"v_max\":" << format_double(r.v_max)
           << ",\"improvement_violations\":" << r.improvement_violations;
        for (const auto& [k, v] : r.extras)
            os << ",\"" << k << "\":" << format_double(v);
        os << "}\n";
    }
}

}  // namespace

void write_metrics(std::ostream& os, const std::vector<RunMetrics>& records,
                   MetricsFormat format, const std::vector<std::string>& header_lines) {
    if (format == MetricsFormat::csv)
        write_csv(os, records, header_lines);
    else
        write_jsonl(os, records, header_lines);
}

void write_metrics_file(const std::string& path, const std::vector<RunMetrics>& records,
                        MetricsFormat format, const std::vector<std::string>& header_lines) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("write_metrics: cannot open " + path);
    write_metrics(os, records, format, header_lines);
    if (!os)
        throw std::runtime_error("write_metrics: write failed for " + path);
}

std::vector<RunMetrics> parse_metrics_csv(std::istream& is) {
    std::vector<RunMetrics> out;
    std::string line;
    std::vector<std::string> cols;
    bool have_header = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (!have_header) {
            cols = cells;
            have_header = true;
            continue;
        }
        if (cells.size() != cols.size())
            throw std::runtime_error("parse_metrics_csv: ragged row");
        RunMetrics r;
        for (size_t i = 0; i < cols.size(); ++i) {
            const std::string& k = cols[i];
            double v = std::strtod(cells[i].c_str(), nullptr);
            if (k == "iter") r.iter = static_cast<int>(v);
            else if (k == "gap") r.gap = v;
            else if (k == "min_gap_so_far") r.min_gap_so_far = v;
            else if (k == "v_min") r.v_min = v;
            else if (k == "v_mean") r.v_mean = v;
            else if (k == "v_max") r.v_max = v;
            else if (k == "improvement_violations") r.improvement_violations = static_cast<int>(v);
            else r.extras.emplace_back(k, v);
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace cliphinge
