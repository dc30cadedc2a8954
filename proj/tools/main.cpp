#include "commands.hpp"
#include "config.hpp"
#include "output.hpp"

#include "bsvie/errors.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>

namespace {

using namespace bsvie;
using namespace bsvie::lab;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitConvergence = 3;

std::string flag_name(const KeySpec& k) {
    if (k.qualified() == "world.kind") {
        return "--world";
    }
    if (k.key.size() == 1) {
        return "-" + k.key;
    }
    std::string name = k.key;
    for (char& c : name) {
        if (c == '_') c = '-';
    }
    return "--" + name;
}

struct Invocation {
    CLI::App* app = nullptr;
    std::string command;
    std::string config_path;
    std::string out_dir;
    std::map<std::string, std::string> flags;
    std::map<std::string, CLI::Option*> options;
};

const std::vector<std::pair<std::string, std::string>>& subcommands() {
    static const std::vector<std::pair<std::string, std::string>> list = {
        {"constants", "well-posedness constants at one beta"},
        {"min-beta", "smallest admissible beta for a condition"},
        {"simulate", "build a world and report its noise statistics"},
        {"solve-bsde", "discrete BSDE solve"},
        {"solve-type1", "Type-I BSVIE solve"},
        {"solve-type2", "Type-II M-solution solve"},
        {"sfie", "frozen-window Fredholm equation"},
        {"compare", "sandwich comparison by monotone iteration"},
        {"partition-compare", "comparison of linear BSVIEs by the partition scheme"},
        {"duality", "FSVIE / adjoint BSVIE duality gap"},
        {"regularity", "time regularity and jump locations of Y"},
        {"norms", "S^p norms and a-priori estimate"},
        {"list-presets", "catalog of built-in data"},
    };
    return list;
}

int execute(ExperimentConfig cfg, const std::string& out_dir) {
    RunMeta meta;
    if (cfg.explicitly_set("run.seed")) {
        meta.seed_source = "config";
    } else if (const char* env = std::getenv("BSVIE_SEED"); env != nullptr && *env != '\0') {
        try {
            cfg.set("run.seed", env);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("BSVIE_SEED: ") + e.what());
        }
        meta.seed_source = "environment";
    } else {
        meta.seed_source = "default";
    }
    meta.seed = static_cast<std::uint64_t>(cfg.get_int("run.seed"));
    const auto start = std::chrono::steady_clock::now();
    const RunOutput out = run_command(cfg);
    meta.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out.text.empty()) {
        std::cout << out.results.dump(2) << "\n";
    } else {
        std::cout << out.text;
    }
    if (!out_dir.empty()) {
        write_run_dir(out_dir, cfg, out, meta);
    }
    if (!out.converged) {
        std::cerr << "error: " << cfg.command() << " did not converge\n";
        return kExitConvergence;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bsvie-lab: experiments for backward stochastic Volterra integral equations"};
    app.require_subcommand(1);
    std::vector<std::unique_ptr<Invocation>> invocations;
    for (const auto& [name, help] : subcommands()) {
        auto inv = std::make_unique<Invocation>();
        inv->command = name;
        inv->app = app.add_subcommand(name, help);
        inv->app->add_option("--config", inv->config_path, "typed config file");
        inv->app->add_option("--out", inv->out_dir, "run directory to write");
        for (const KeySpec& k : config_schema()) {
            if (k.qualified() == "run.command" || !k.applies_to(name)) {
                continue;
            }
            inv->options[k.qualified()] =
                inv->app->add_option(flag_name(k), inv->flags[k.qualified()], k.help + " (" + k.qualified() + ")");
        }
        invocations.push_back(std::move(inv));
    }
    std::string run_config, run_out;
    CLI::App* run = app.add_subcommand("run", "run the experiment described by a config file");
    run->add_option("config", run_config, "typed config file with run.command")->required();
    run->add_option("--out", run_out, "run directory (default runs/<run.id>)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        if (run->parsed()) {
            ExperimentConfig cfg = ExperimentConfig::load(run_config);
            const std::string out = run_out.empty() ? "runs/" + cfg.get_string("run.id") : run_out;
            return execute(std::move(cfg), out);
        }
        for (const auto& inv : invocations) {
            if (!inv->app->parsed()) {
                continue;
            }
            ExperimentConfig cfg = inv->config_path.empty() ? ExperimentConfig(inv->command)
                                                            : ExperimentConfig::load(inv->config_path, inv->command);
            for (const auto& [key, opt] : inv->options) {
                if (opt->count() > 0) {
                    cfg.set(key, inv->flags[key]);
                }
            }
            return execute(std::move(cfg), inv->out_dir);
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConvergence;
    }
    return kExitValidation;
}
