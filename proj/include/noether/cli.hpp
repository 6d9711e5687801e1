#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace noether {

inline constexpr const char* kToolVersion = "0.3.0";

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitUsage = 2 };

struct RunConfig {
    std::string command;
    std::string problem_path;
    std::string symmetry_path;
    std::string trajectories_path;
    int trials = 200;
    double tol = 1e-9;
    std::uint64_t seed = 0;
    std::optional<int> steps;  // overrides the trajectory document
    int samples_per_node = 16;
    std::string out_dir;       // empty: no files written
    bool force = false;
    bool machine = false;      // --format machine
};

// Commands: check, currents, verify, simulate. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// Dispatch with an already-parsed configuration.
int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace noether
