#pragma once

#include "ioslab/json_io.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ioslab {

inline constexpr const char* kVersion = "0.1.0";

/// One CLI invocation. `gains`, `lambda` and `input` hold either what the user
/// typed (a path / input spec string) or, once resolved, the inline documents,
/// so that the echo in an artifact can be re-run without the original files.
struct ScenarioSpec {
    std::string command;  // simulate | verify | ros | redefine | smallgain | example
    std::string system;
    std::string property;
    Json gains = nullptr;
    Json lambda = nullptr;
    Json input = nullptr;  // "const:<v>", "none", {"pwc": <signal>} or "pwc:<file>"
    std::optional<std::vector<double>> xi;
    std::optional<double> horizon;
    std::optional<double> step;
    std::uint64_t seed = 1;
    std::string out;
    std::string box;
    std::optional<int> resolution;

    Json to_json() const;
    static ScenarioSpec from_json(const Json& doc);
};

struct ScenarioOutcome {
    int exit_code = 0;
    Json report;
    std::string csv;  // trajectory, simulate only
};

/// Reads gain/input files named in the scenario and replaces them by their contents.
ScenarioSpec resolve_scenario(const ScenarioSpec& spec);

/// Runs a resolved or unresolved scenario. Errors propagate as ioslab::Error.
ScenarioOutcome run_scenario(const ScenarioSpec& spec);

/// Full front end: parses argv, runs, writes artifacts and diagnostics.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ioslab
