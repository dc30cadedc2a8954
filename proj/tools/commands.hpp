#pragma once

#include "config.hpp"
#include "output.hpp"

namespace bsvie::lab {

/// Runs the configured subcommand. Throws ValidationError/DomainError for bad input
/// and ConvergenceError when a solver gives up.
RunOutput run_command(const ExperimentConfig& cfg);

}  // namespace bsvie::lab
