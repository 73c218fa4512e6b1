#pragma once

#include <stdexcept>
#include <string>

namespace pathsens {

// Exit codes used by the CLI.
enum ExitCode : int {
    exit_ok = 0,
    exit_config_error = 2,
    exit_divergence = 3,
    exit_oracle_failure = 4,
};

// Invalid or inconsistent user configuration (bad field, missing key, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Broken geometry: coincident atoms, colinear angle arms, r <= 0.
struct GeometryError : std::runtime_error {
    explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

// Caller violated an interface contract (dimension mismatch, asymmetry, ...).
struct ContractError : std::logic_error {
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

// Non-finite state during time integration; carries diagnostics.
struct DivergenceError : std::runtime_error {
    long step = -1;
    double max_force = 0.0;
    double min_pair_distance = 0.0;
    DivergenceError(const std::string& what, long step_, double max_force_, double min_r_)
        : std::runtime_error(what), step(step_), max_force(max_force_), min_pair_distance(min_r_) {}
};

// Not enough data to produce an estimate (e.g. MSD fit window too short).
struct EstimationError : std::runtime_error {
    explicit EstimationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace pathsens
