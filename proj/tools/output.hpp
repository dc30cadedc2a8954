#pragma once

#include "config.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bsvie::lab {

/// Long-format table: one row per (statistic, t, s) value.
class Table {
public:
    void add(const std::string& statistic, std::optional<double> t, std::optional<double> s, double value);
    [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }
    [[nodiscard]] std::string csv(const std::string& run_id) const;

private:
    struct Row {
        std::string statistic;
        std::optional<double> t, s;
        double value;
    };
    std::vector<Row> rows_;
};

struct RunOutput {
    nlohmann::json results = nlohmann::json::object();
    std::map<std::string, Table> tables;
    /// Text printed instead of the JSON results when not empty.
    std::string text;
    bool converged = true;
};

struct RunMeta {
    std::uint64_t seed = 0;
    std::string seed_source;
    double elapsed_seconds = 0.0;
};

/// Writes config.echo, results.json, tables/*.csv and meta.json under `dir`.
void write_run_dir(const std::string& dir, const ExperimentConfig& cfg, const RunOutput& out, const RunMeta& meta);

std::string format_number(double v);

}  // namespace bsvie::lab
