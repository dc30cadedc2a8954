#pragma once

#include "bsvie/analysis.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace bsvie {

enum class SolverKind { bsde, type1, type1_noY, type2, comparison, partition, duality, regularity };

std::string_view to_string(SolverKind k);

enum class WorldChoice { preset_default, deterministic, tree, ensemble };

struct PresetParams {
    /// 0 selects the preset default.
    std::size_t steps = 0;
    double horizon = 1.0;
    WorldChoice world = WorldChoice::preset_default;
    std::size_t n_paths = 10000;
    std::uint64_t seed = 1;
    /// Adds a Poisson mark to presets that are jump free by default.
    bool with_jumps = false;
    /// Cap on tree depth passed to the world builder; never below the preset default.
    std::size_t max_tree_steps = 6;
};

/// Data of a sandwich comparison: three free terms and three drivers.
struct SandwichData {
    FreeTerm phi1, phi2, phi_bar;
    GeneratorSpec f1, f2, f_bar;
};

/// A fully built experiment: world, data and the oracle, if any, for Y(0).
struct Problem {
    std::string preset;
    std::shared_ptr<const World> world;
    SolverKind solver = SolverKind::type1;
    FreeTerm phi;
    GeneratorSpec f;
    /// Closed-form value of Y at time 0, when one exists.
    std::optional<double> expected_y0;
    std::optional<SandwichData> sandwich;
    std::optional<LinearComparisonData> linear;
    std::optional<FSVIECoefficients> coeff;
    /// Adapted forward input Psi(t_i) on level i.
    std::vector<Values> psi;
};

struct PresetInfo {
    std::string name;
    /// Result of the theory the preset exercises.
    std::string anchor;
    /// Independent check its output is compared with.
    std::string oracle;
    SolverKind solver;
    WorldChoice default_world;
    std::size_t default_steps;
};

const std::vector<PresetInfo>& preset_catalog();
const PresetInfo& preset_info(const std::string& name);

/// Builds the named preset; throws ValidationError for unknown names.
Problem build_preset(const std::string& name, const PresetParams& params = {});

}  // namespace bsvie
