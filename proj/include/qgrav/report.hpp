#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qgrav::report {

// Provenance block recorded verbatim at the head of every output artifact.
struct RunManifest {
    std::string subcommand;
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string tool_version;
    std::string timestamp; // ISO 8601; the one line allowed to differ between runs

    static RunManifest make(const std::string& subcommand, const std::string& config_path,
                            std::uint64_t seed, const std::string& out_dir);
    std::string as_comment_block() const; // "# key: value" lines
    std::string as_json_object() const;   // embeddable fragment
};

std::string tool_version();

// Fixed CSV dialect: comma separated, '.' decimal, scientific notation with
// nine significant digits, mandatory header row.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns);
    void add_row(const std::vector<double>& values);
    std::string str(const RunManifest& manifest) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

std::string format_value(double v);

void write_file(const std::string& path, const std::string& content);

} // namespace qgrav::report
