#include "config.hpp"

#include "bsvie/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bsvie::lab {

namespace {

const std::vector<std::string> kSolverCommands = {"simulate", "solve-bsde", "solve-type1", "solve-type2", "sfie",
                                                  "compare", "partition-compare", "duality", "regularity", "norms"};

std::vector<KeySpec> build_schema() {
    const auto& w = kSolverCommands;
    std::vector<KeySpec> s = {
        {"run", "command", ValueType::string, "", "subcommand to run (used by `run`)", {}},
        {"run", "id", ValueType::string, "", "run identifier, first column of every table", {}},
        {"run", "seed", ValueType::integer, "1", "ensemble seed; BSVIE_SEED is used when absent", {}},
        {"constants", "beta", ValueType::real, "174", "weight parameter beta", {"constants"}},
        {"constants", "frakf", ValueType::real, "0", "bound on the jumps of the clock", {"constants", "min-beta"}},
        {"constants", "condition", ValueType::string, "type1", "type1 | type1_noY | type2", {"min-beta"}},
        {"data", "preset", ValueType::string, "", "built-in data, see list-presets", w},
        {"world", "kind", ValueType::string, "preset", "preset | deterministic | tree | ensemble", w},
        {"world", "steps", ValueType::integer, "0", "number of grid steps, 0 for the preset default", w},
        {"world", "horizon", ValueType::real, "1", "terminal time T", w},
        {"world", "paths", ValueType::integer, "10000", "ensemble size", w},
        {"world", "jumps", ValueType::boolean, "false", "add a Poisson mark to jump-free presets", w},
        {"world", "max_tree_steps", ValueType::integer, "6", "cap on tree depth", w},
        {"solver", "tol", ValueType::real, "1e-10", "stopping tolerance",
         {"solve-type1", "solve-type2", "compare", "regularity", "norms"}},
        {"solver", "max_iter", ValueType::integer, "200", "iteration cap",
         {"solve-type1", "solve-type2", "compare", "regularity", "norms"}},
        {"solver", "plan_constant", ValueType::real, "1", "constant C of the interval plan", {"solve-type2", "duality"}},
        {"sfie", "r", ValueType::integer, "0", "first outer step", {"sfie"}},
        {"sfie", "s", ValueType::integer, "-1", "window start, -1 for the midpoint", {"sfie"}},
        {"compare", "iterations", ValueType::integer, "30", "monotone iterations", {"compare"}},
        {"compare", "blocks", ValueType::integers, "1,2,4,8", "numbers of uniform blocks", {"partition-compare"}},
        {"analysis", "p", ValueType::real, "2", "moment order", {"regularity", "norms"}},
        {"analysis", "beta", ValueType::real, "0", "norm weight, 0 for unweighted", {"norms"}},
        {"simulate", "export", ValueType::string, "", "write the ensemble to this binary file", {"simulate"}},
    };
    return s;
}

/// Defaults that differ between subcommands.
const std::map<std::string, std::map<std::string, std::string>>& command_defaults() {
    static const std::map<std::string, std::map<std::string, std::string>> d = {
        {"simulate", {{"data.preset", "holder-regularity"}}},
        {"solve-bsde", {{"data.preset", "girsanov-drift"}}},
        {"solve-type1", {{"data.preset", "ode-exp"}}},
        {"solve-type2", {{"data.preset", "type2-linear"}, {"solver.tol", "1e-13"}}},
        {"sfie", {{"data.preset", "girsanov-drift"}}},
        {"compare", {{"data.preset", "comparison-sandwich"}, {"solver.tol", "1e-12"}}},
        {"partition-compare", {{"data.preset", "comparison-partition"}}},
        {"duality", {{"data.preset", "duality-linear"}}},
        {"regularity", {{"data.preset", "holder-regularity"}, {"analysis.p", "4"}}},
        {"norms", {{"data.preset", "lipschitz-standard"}}},
    };
    return d;
}

const std::vector<std::string>& all_commands() {
    static const std::vector<std::string> c = {"constants",  "min-beta",    "simulate",    "solve-bsde", "solve-type1",
                                               "solve-type2", "sfie",       "compare",     "partition-compare",
                                               "duality",    "regularity",  "norms",       "list-presets"};
    return c;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::optional<ValueType> parse_type(const std::string& s) {
    if (s == "string") return ValueType::string;
    if (s == "int") return ValueType::integer;
    if (s == "float") return ValueType::real;
    if (s == "bool") return ValueType::boolean;
    if (s == "ints") return ValueType::integers;
    return std::nullopt;
}

bool parse_int(const std::string& s, std::int64_t& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(b, e, out);
    return ec == std::errc() && ptr == e && !s.empty();
}

bool parse_real(const std::string& s, double& out) {
    if (s.empty()) {
        return false;
    }
    std::size_t used = 0;
    try {
        out = std::stod(s, &used);
    } catch (const std::exception&) {
        return false;
    }
    return used == s.size() && std::isfinite(out);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        parts.push_back(trim(item));
    }
    return parts;
}

/// Canonical text of a value, or a message when it does not parse.
std::string canonical(const KeySpec& spec, const std::string& text) {
    const std::string v = trim(text);
    auto fail = [&](const std::string& what) {
        return ValidationError("config key " + spec.qualified() + ": " + what + ", got '" + v + "'");
    };
    switch (spec.type) {
        case ValueType::string:
            return v;
        case ValueType::integer: {
            std::int64_t x = 0;
            if (!parse_int(v, x)) throw fail("expected an integer");
            return std::to_string(x);
        }
        case ValueType::real: {
            double x = 0.0;
            if (!parse_real(v, x)) throw fail("expected a finite number");
            return v;
        }
        case ValueType::boolean:
            if (v == "true" || v == "1" || v == "yes") return "true";
            if (v == "false" || v == "0" || v == "no") return "false";
            throw fail("expected true or false");
        case ValueType::integers: {
            std::string out;
            for (const auto& part : split_list(v)) {
                std::int64_t x = 0;
                if (!parse_int(part, x)) throw fail("expected a comma separated list of integers");
                out += (out.empty() ? "" : ",") + std::to_string(x);
            }
            if (out.empty()) throw fail("expected at least one integer");
            return out;
        }
    }
    return v;
}

}  // namespace

std::string_view type_name(ValueType t) {
    switch (t) {
        case ValueType::string: return "string";
        case ValueType::integer: return "int";
        case ValueType::real: return "float";
        case ValueType::boolean: return "bool";
        case ValueType::integers: return "ints";
    }
    return "string";
}

bool KeySpec::applies_to(const std::string& command) const {
    return commands.empty() || std::find(commands.begin(), commands.end(), command) != commands.end();
}

const std::vector<KeySpec>& config_schema() {
    static const std::vector<KeySpec> schema = build_schema();
    return schema;
}

const KeySpec* find_key(const std::string& qualified) {
    for (const auto& k : config_schema()) {
        if (k.qualified() == qualified) {
            return &k;
        }
    }
    return nullptr;
}

ExperimentConfig::ExperimentConfig(std::string command) : command_(std::move(command)) {
    const auto& cmds = all_commands();
    if (std::find(cmds.begin(), cmds.end(), command_) == cmds.end()) {
        throw ValidationError("config key run.command: unknown command '" + command_ + "'");
    }
    const auto overrides = command_defaults().find(command_);
    for (const auto& k : config_schema()) {
        if (!k.applies_to(command_)) {
            continue;
        }
        std::string v = k.default_value;
        if (overrides != command_defaults().end()) {
            if (auto it = overrides->second.find(k.qualified()); it != overrides->second.end()) {
                v = it->second;
            }
        }
        values_[k.qualified()] = v;
    }
    values_["run.command"] = command_;
    values_["run.id"] = command_;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text, const std::string& origin,
                                         std::optional<std::string> command) {
    struct Entry {
        std::string key, value;
        int line;
    };
    std::vector<Entry> entries;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const std::string t = trim(line);
        const std::string where = origin + ":" + std::to_string(number);
        if (t.empty() || t[0] == '#' || t[0] == ';') {
            continue;
        }
        if (t.front() == '[') {
            if (t.back() != ']') {
                throw ValidationError(where + ": malformed section header '" + t + "'");
            }
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto colon = t.find(':');
        const auto eq = t.find('=');
        if (colon == std::string::npos || eq == std::string::npos || eq < colon) {
            throw ValidationError(where + ": expected 'key: type = value', got '" + t + "'");
        }
        if (section.empty()) {
            throw ValidationError(where + ": key outside of any [section]");
        }
        const std::string key = section + "." + trim(t.substr(0, colon));
        const std::string tname = trim(t.substr(colon + 1, eq - colon - 1));
        const KeySpec* spec = find_key(key);
        if (spec == nullptr) {
            throw ValidationError(where + ": unknown config key " + key);
        }
        const auto type = parse_type(tname);
        if (!type) {
            throw ValidationError(where + ": config key " + key + ": unknown type '" + tname + "'");
        }
        if (*type != spec->type) {
            throw ValidationError(where + ": config key " + key + " has type " + std::string(type_name(spec->type)) +
                                  ", declared as " + tname);
        }
        for (const auto& e : entries) {
            if (e.key == key) {
                throw ValidationError(where + ": config key " + key + " given twice");
            }
        }
        entries.push_back({key, trim(t.substr(eq + 1)), number});
    }
    std::string cmd;
    for (const auto& e : entries) {
        if (e.key == "run.command") {
            cmd = e.value;
        }
    }
    if (command) {
        if (!cmd.empty() && cmd != *command) {
            throw ValidationError(origin + ": config key run.command is '" + cmd + "' but the subcommand is '" +
                                  *command + "'");
        }
        cmd = *command;
    }
    if (cmd.empty()) {
        throw ValidationError(origin + ": config key run.command is required");
    }
    ExperimentConfig cfg(cmd);
    for (const auto& e : entries) {
        if (e.key == "run.command") {
            continue;
        }
        const KeySpec* spec = find_key(e.key);
        if (!spec->applies_to(cmd)) {
            throw ValidationError(origin + ":" + std::to_string(e.line) + ": config key " + e.key +
                                  " does not apply to " + cmd);
        }
        cfg.set(e.key, e.value);
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path, std::optional<std::string> command) {
    std::ifstream f(path);
    if (!f) {
        throw ValidationError("cannot read config file " + path);
    }
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str(), path, std::move(command));
}

void ExperimentConfig::set(const std::string& qualified, const std::string& text) {
    const KeySpec* spec = find_key(qualified);
    if (spec == nullptr) {
        throw ValidationError("unknown config key " + qualified);
    }
    if (!spec->applies_to(command_)) {
        throw ValidationError("config key " + qualified + " does not apply to " + command_);
    }
    if (qualified == "run.command" && trim(text) != command_) {
        throw ValidationError("config key run.command cannot change the command");
    }
    values_[qualified] = canonical(*spec, text);
    if (qualified != "run.command") {
        values_["!" + qualified] = "1";
    }
}

bool ExperimentConfig::explicitly_set(const std::string& qualified) const {
    return values_.count("!" + qualified) > 0;
}

const std::string& ExperimentConfig::raw(const std::string& qualified, ValueType expected) const {
    const KeySpec* spec = find_key(qualified);
    if (spec == nullptr || spec->type != expected) {
        throw std::logic_error("config key " + qualified + " read with the wrong type");
    }
    auto it = values_.find(qualified);
    if (it == values_.end()) {
        throw std::logic_error("config key " + qualified + " does not apply to " + command_);
    }
    return it->second;
}

std::string ExperimentConfig::get_string(const std::string& qualified) const {
    return raw(qualified, ValueType::string);
}

std::int64_t ExperimentConfig::get_int(const std::string& qualified) const {
    std::int64_t x = 0;
    parse_int(raw(qualified, ValueType::integer), x);
    return x;
}

double ExperimentConfig::get_real(const std::string& qualified) const {
    double x = 0.0;
    parse_real(raw(qualified, ValueType::real), x);
    return x;
}

bool ExperimentConfig::get_bool(const std::string& qualified) const {
    return raw(qualified, ValueType::boolean) == "true";
}

std::vector<std::int64_t> ExperimentConfig::get_ints(const std::string& qualified) const {
    std::vector<std::int64_t> out;
    for (const auto& part : split_list(raw(qualified, ValueType::integers))) {
        std::int64_t x = 0;
        parse_int(part, x);
        out.push_back(x);
    }
    return out;
}

std::string ExperimentConfig::echo() const {
    std::ostringstream out;
    std::string section;
    for (const auto& k : config_schema()) {
        auto it = values_.find(k.qualified());
        if (it == values_.end()) {
            continue;
        }
        if (k.section != section) {
            out << (section.empty() ? "" : "\n") << "[" << k.section << "]\n";
            section = k.section;
        }
        out << k.key << ": " << type_name(k.type) << " = " << it->second << "\n";
    }
    return out.str();
}

}  // namespace bsvie::lab
