#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bsvie::lab {

enum class ValueType { string, integer, real, boolean, integers };

std::string_view type_name(ValueType t);

/// One admissible key of the experiment config.
struct KeySpec {
    std::string section;
    std::string key;
    ValueType type;
    std::string default_value;
    std::string help;
    /// Subcommands the key applies to; empty means every subcommand.
    std::vector<std::string> commands;

    [[nodiscard]] std::string qualified() const { return section + "." + key; }
    [[nodiscard]] bool applies_to(const std::string& command) const;
};

const std::vector<KeySpec>& config_schema();
const KeySpec* find_key(const std::string& qualified);

/// Validated experiment configuration.
///
/// Text form, one entry per line under `[section]` headers:
///
///     [world]
///     steps: int = 4
///     jumps: bool = true
///
/// Lines starting with `#` or `;` are comments. Every key must be declared in the
/// schema with the same type, and must apply to the configured command.
class ExperimentConfig {
public:
    explicit ExperimentConfig(std::string command);

    static ExperimentConfig parse(const std::string& text, const std::string& origin,
                                  std::optional<std::string> command = std::nullopt);
    static ExperimentConfig load(const std::string& path, std::optional<std::string> command = std::nullopt);

    [[nodiscard]] const std::string& command() const noexcept { return command_; }

    /// Sets a value given as text; throws ValidationError naming the key on bad input.
    void set(const std::string& qualified, const std::string& text);
    [[nodiscard]] bool explicitly_set(const std::string& qualified) const;

    [[nodiscard]] std::string get_string(const std::string& qualified) const;
    [[nodiscard]] std::int64_t get_int(const std::string& qualified) const;
    [[nodiscard]] double get_real(const std::string& qualified) const;
    [[nodiscard]] bool get_bool(const std::string& qualified) const;
    [[nodiscard]] std::vector<std::int64_t> get_ints(const std::string& qualified) const;

    /// Every key of the command with its resolved value; parses back to the same config.
    [[nodiscard]] std::string echo() const;

private:
    [[nodiscard]] const std::string& raw(const std::string& qualified, ValueType expected) const;

    std::string command_;
    std::map<std::string, std::string> values_;
};

}  // namespace bsvie::lab
