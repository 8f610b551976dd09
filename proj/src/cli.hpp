#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgrav/report.hpp"

namespace qgrav::cli {

// Exit codes: 0 success, 2 validation failure, 64 usage error.
int run(const std::vector<std::string>& args);

// Aggregated per-figure artifacts produced by the `report` subcommand.
struct ReportBundle {
    std::optional<std::string> consistency_csv;
    std::optional<nlohmann::json> design;
    std::optional<std::string> qubit_radius_sweep_csv;
    std::optional<std::string> scale_sweep_csv;
    std::optional<std::string> cooling_csv;
    std::optional<nlohmann::json> budget;
    std::optional<std::string> wire_sweep_ideal_csv;
    std::optional<std::string> wire_sweep_full_csv;
    std::optional<nlohmann::json> sensitivity;
};

// Writes every artifact of a complete bundle under out_dir; an incomplete
// bundle is an error naming the missing stages.
void emit_report(const ReportBundle& bundle, const std::string& out_dir,
                 const report::RunManifest& manifest);

} // namespace qgrav::cli
