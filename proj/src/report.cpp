#include "qgrav/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "qgrav/errors.hpp"

namespace qgrav::report {

std::string tool_version() { return "qgrav 1.0.0"; }

RunManifest RunManifest::make(const std::string& subcommand, const std::string& config_path,
                              std::uint64_t seed, const std::string& out_dir) {
    RunManifest m;
    m.subcommand = subcommand;
    m.config_path = config_path;
    m.seed = seed;
    m.out_dir = out_dir;
    m.tool_version = qgrav::report::tool_version();
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm_utc{};
    gmtime_r(&tt, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    m.timestamp = buf;
    return m;
}

std::string RunManifest::as_comment_block() const {
    std::ostringstream out;
    out << "# tool: " << tool_version << "\n";
    out << "# subcommand: " << subcommand << "\n";
    out << "# config: " << config_path << "\n";
    out << "# seed: " << seed << "\n";
    if (!out_dir.empty()) out << "# out_dir: " << out_dir << "\n";
    out << "# timestamp: " << timestamp << "\n";
    return out.str();
}

std::string RunManifest::as_json_object() const {
    std::ostringstream out;
    out << "{\"tool\": \"" << tool_version << "\", \"subcommand\": \"" << subcommand
        << "\", \"config\": \"" << config_path << "\", \"seed\": " << seed
        << ", \"timestamp\": \"" << timestamp << "\"}";
    return out.str();
}

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.8e", v);
    return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void CsvWriter::add_row(const std::vector<double>& values) {
    if (values.size() != columns_.size())
        throw DomainError("CSV row width does not match the header");
    rows_.push_back(values);
}

std::string CsvWriter::str(const RunManifest& manifest) const {
    std::ostringstream out;
    out << manifest.as_comment_block();
    for (std::size_t i = 0; i < columns_.size(); ++i)
        out << columns_[i] << (i + 1 < columns_.size() ? "," : "\n");
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << format_value(row[i]) << (i + 1 < row.size() ? "," : "\n");
    }
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericsError("cannot write output file: " + path);
    out << content;
}

} // namespace qgrav::report
