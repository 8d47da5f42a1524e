#pragma once

#include "config.hpp"
#include "report.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace finslab::cli {

/// Command-line overrides of config values.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> step;
    /// Replaces the tolerance of every assertion.
    std::optional<double> tol;
};

/// Runs one experiment. Throws ConfigError for invalid input and lets
/// numerical library errors propagate.
Report run_experiment(const std::string& experiment, const Config& config, const Overrides& overrides);

} // namespace finslab::cli
