#pragma once

#include "butterfly/params.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace butterfly::cli {

inline constexpr const char* kToolVersion = "0.1.0";

struct GlobalOptions {
    std::string preset;  // empty: the config file's preset line, else "model"
    std::string config_path;
    std::filesystem::path out_dir = "out";
    std::optional<double> dt;
    std::optional<double> duration;
    std::vector<std::string> overrides;  // key=value
    bool seedless = false;
};

// Preset, then config file, then --set overrides, then --dt/--duration; validated.
Configuration resolve_config(const GlobalOptions& opts);

struct SweepOptions {
    std::string param;
    std::string values;
    int jobs = 0;  // 0: hardware concurrency
    bool coupled = false;
};

struct StaticStrokeOptions {
    double x_max_mm = 10.0;
};

struct AeroTableOptions {
    std::optional<double> reynolds;
    double step_deg = 1.0;
};

struct MocapOptions {
    std::filesystem::path file;
    double rate = 0.0;
    double ground_z = 0.0;
};

// Each command writes its manifest and result files under opts.out_dir and prints the
// summary to `out`. Library errors propagate to the caller.
void cmd_simulate(const GlobalOptions& opts, std::ostream& out);
void cmd_sweep(const GlobalOptions& opts, const SweepOptions& sweep, std::ostream& out);
void cmd_couple(const GlobalOptions& opts, std::ostream& out);
void cmd_static_stroke(const GlobalOptions& opts, const StaticStrokeOptions& so, std::ostream& out);
void cmd_aero_table(const GlobalOptions& opts, const AeroTableOptions& ao, std::ostream& out);
void cmd_analyze_mocap(const GlobalOptions& opts, const MocapOptions& mo, std::ostream& out);

// Returns true when every check passes.
bool cmd_self_test(const GlobalOptions& opts, std::ostream& out);

}  // namespace butterfly::cli
