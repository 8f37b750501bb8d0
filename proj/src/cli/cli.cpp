#include "cli/cli.hpp"

#include "butterfly/config.hpp"
#include "butterfly/errors.hpp"
#include "butterfly/flapdyn.hpp"
#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <ostream>

namespace butterfly::cli {

namespace {

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Validation:
        case ErrorKind::Parse:
        case ErrorKind::ModelRange:
        case ErrorKind::Ordering:
            return 2;
        case ErrorKind::Divergence:
            return 3;
        default:
            return 1;
    }
}

std::string key_list() {
    std::string out = "Configuration keys (key = value, '#' comments):\n";
    for (const auto& k : config_keys()) out += "  " + std::string(k.key) + "  " + std::string(k.description) + "\n";
    return out;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Robotic butterfly flapping-wing simulator and flight-record analyzer"};
    app.require_subcommand(1);
    app.footer(key_list());

    GlobalOptions global;
    app.add_option("--preset", global.preset, "Parameter preset: model or prototype");
    app.add_option("--config", global.config_path, "Config file applied on top of the preset");
    app.add_option("--out-dir", global.out_dir, "Directory for manifest and result files")->capture_default_str();
    app.add_option("--dt", global.dt, "Integration step, s");
    app.add_option("--duration", global.duration, "Simulated time, s");
    app.add_option("--set", global.overrides, "Override a config key, key=value (repeatable)");
    app.add_flag("--seedless", global.seedless, "Accepted for reproducibility scripts; no run uses randomness");

    auto* simulate_cmd = app.add_subcommand("simulate", "Integrate the wing and write trajectory.csv + summary");

    SweepOptions sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run one simulation per parameter value");
    sweep_cmd->add_option("--param", sweep.param, "tau (N.m), K (N.m/rad), m2 (kg) or d5 (m)")->required();
    sweep_cmd->add_option("--values", sweep.values, "Comma-separated values")->required();
    sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads (0: available parallelism)");
    sweep_cmd->add_flag("--coupled", sweep.coupled, "Run the abdomen coupling per member (implied for m2, d5)");

    auto* couple_cmd = app.add_subcommand("couple", "Baseline, abdomen reaction and corrected wing run");

    StaticStrokeOptions stroke;
    auto* stroke_cmd = app.add_subcommand("static-stroke", "Wing angles at the slider stroke ends");
    stroke_cmd->add_option("--x-max-mm", stroke.x_max_mm, "Slider stroke, mm")->capture_default_str();

    AeroTableOptions aero;
    auto* aero_cmd = app.add_subcommand("aero-table", "Lift and drag coefficients against angle of attack");
    aero_cmd->add_option("--re", aero.reynolds, "Reynolds number (default: sim.reynolds or estimate)");
    aero_cmd->add_option("--step-deg", aero.step_deg, "Angle step, deg")->capture_default_str();

    MocapOptions mocap;
    auto* mocap_cmd = app.add_subcommand("analyze-mocap", "Flight metrics from a marker CSV");
    mocap_cmd->add_option("file", mocap.file, "Marker CSV")->required();
    mocap_cmd->add_option("--rate", mocap.rate, "Frame rate, Hz, for files without t_s");
    mocap_cmd->add_option("--ground-z", mocap.ground_z, "Ground plane height, m")->capture_default_str();

    auto* self_test_cmd = app.add_subcommand("self-test", "Convergence under dt halving and invariant checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (simulate_cmd->parsed()) cmd_simulate(global, out);
        if (sweep_cmd->parsed()) cmd_sweep(global, sweep, out);
        if (couple_cmd->parsed()) cmd_couple(global, out);
        if (stroke_cmd->parsed()) cmd_static_stroke(global, stroke, out);
        if (aero_cmd->parsed()) cmd_aero_table(global, aero, out);
        if (mocap_cmd->parsed()) cmd_analyze_mocap(global, mocap, out);
        if (self_test_cmd->parsed()) return cmd_self_test(global, out) ? 0 : 1;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace butterfly::cli
