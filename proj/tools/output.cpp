#include "output.hpp"

#include "bsvie/errors.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

namespace bsvie::lab {

namespace fs = std::filesystem;

std::string format_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void Table::add(const std::string& statistic, std::optional<double> t, std::optional<double> s, double value) {
    rows_.push_back({statistic, t, s, value});
}

std::string Table::csv(const std::string& run_id) const {
    std::string out = "run_id,statistic,t,s,value\n";
    for (const auto& r : rows_) {
        out += run_id + "," + r.statistic + ",";
        out += r.t ? format_number(*r.t) : "";
        out += ",";
        out += r.s ? format_number(*r.s) : "";
        out += "," + format_number(r.value) + "\n";
    }
    return out;
}

namespace {

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) {
        throw ValidationError("cannot write " + p.string());
    }
    f << content;
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace

void write_run_dir(const std::string& dir, const ExperimentConfig& cfg, const RunOutput& out, const RunMeta& meta) {
    const fs::path root(dir);
    std::error_code ec;
    fs::create_directories(root / "tables", ec);
    if (ec) {
        throw ValidationError("cannot create run directory " + dir + ": " + ec.message());
    }
    const std::string run_id = cfg.get_string("run.id");
    write_file(root / "config.echo", cfg.echo());
    write_file(root / "results.json", out.results.dump(2) + "\n");
    for (const auto& [name, table] : out.tables) {
        write_file(root / "tables" / (name + ".csv"), table.csv(run_id));
    }
    nlohmann::json m = {
        {"program", "bsvie-lab"},
        {"version", BSVIE_LAB_VERSION},
        {"command", cfg.command()},
        {"run_id", run_id},
        {"seed", meta.seed},
        {"seed_source", meta.seed_source},
        {"elapsed_seconds", meta.elapsed_seconds},
        {"finished_utc", utc_now()},
        {"compiler", __VERSION__},
        {"converged", out.converged},
    };
    write_file(root / "meta.json", m.dump(2) + "\n");
}

}  // namespace bsvie::lab
