#include "cli/commands.hpp"

#include "butterfly/abdomen.hpp"
#include "butterfly/aero.hpp"
#include "butterfly/config.hpp"
#include "butterfly/errors.hpp"
#include "butterfly/flapdyn.hpp"
#include "butterfly/io.hpp"
#include "butterfly/linkage.hpp"
#include "butterfly/mocap.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace butterfly::cli {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct OutputFile {
    std::filesystem::path name;  // relative to out_dir
    std::string content;
};

std::string manifest_text(const std::string& command, const Configuration& config, const std::string& input_hash,
                          const std::vector<OutputFile>& outputs) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::string out = "# butterfly run manifest\n";
    out += fmt::format("timestamp = {:%Y-%m-%dT%H:%M:%SZ}\n", fmt::gmtime(now));
    out += fmt::format("tool_version = {}\n", kToolVersion);
    out += fmt::format("command = {}\n", command);
    out += fmt::format("preset = {}\n", config.preset);
    out += fmt::format("input_hash = {}\n", input_hash);
    for (const auto& f : outputs) out += fmt::format("output = {}\n", f.name.generic_string());
    out += "[config]\n";
    out += serialize_config(config);
    return out;
}

// Manifest first, then every result through a temp file and rename.
void publish(const GlobalOptions& opts, const std::string& command, const Configuration& config,
             const std::string& input_hash, const std::vector<OutputFile>& outputs) {
    std::error_code ec;
    std::filesystem::create_directories(opts.out_dir, ec);
    if (ec) fail(ErrorKind::Io, "cannot create output directory " + opts.out_dir.string());
    atomic_write(opts.out_dir / "manifest.txt", manifest_text(command, config, input_hash, outputs));
    for (const auto& f : outputs) {
        const auto path = opts.out_dir / f.name;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) fail(ErrorKind::Io, "cannot create output directory " + path.parent_path().string());
        atomic_write(path, f.content);
    }
}

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

CsvTable trajectory_table(const Trajectory& traj) {
    CsvTable t;
    t.header = {"t_s", "theta_A_rad", "theta_dot_rad_s", "x_m", "F1_N", "F_lift_N", "F_drag_N", "M_Fdrag_Nm"};
    t.columns.resize(t.header.size());
    for (auto& c : t.columns) c.reserve(traj.samples.size());
    for (const auto& s : traj.samples) {
        const double dir = sgn(s.state.theta_dot);
        t.columns[0].push_back(s.state.t);
        t.columns[1].push_back(s.state.theta);
        t.columns[2].push_back(s.state.theta_dot);
        t.columns[3].push_back(s.state.x);
        t.columns[4].push_back(s.drive_force);
        t.columns[5].push_back(s.lift);
        t.columns[6].push_back(dir * s.drag);
        t.columns[7].push_back(dir * s.drag_moment);
    }
    return t;
}

struct RunStats {
    std::optional<double> frequency;
    double avg_lift = 0.0;
    double stroke_max = 0.0;
    double stroke_min = 0.0;
};

RunStats run_stats(const Trajectory& traj) {
    RunStats s;
    const std::vector<double> t = traj.times();
    const std::vector<double> lift = traj.lifts();
    try {
        s.frequency = flapping_frequency(traj);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::InsufficientData) throw;
    }
    const double period = s.frequency ? 1.0 / *s.frequency : t.back() - t.front();
    s.avg_lift = average_lift(t, lift, period);
    const std::vector<double> theta = traj.angles();
    const auto [lo, hi] = std::minmax_element(theta.begin(), theta.end());
    s.stroke_max = *hi;
    s.stroke_min = *lo;
    return s;
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : "n/a"; }

void print_summary(std::ostream& out, const Summary& summary) {
    for (const auto& [key, value] : summary) out << key << " = " << value << '\n';
}

std::vector<double> parse_values(const std::string& text) {
    std::vector<double> out;
    std::string_view rest = text;
    while (true) {
        const auto comma = rest.find(',');
        std::string_view cell = rest.substr(0, comma);
        while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
        while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
            fail(ErrorKind::Validation, fmt::format("--values: '{}' is not a number", cell));
        }
        out.push_back(v);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
    }
    return out;
}

void apply_sweep_value(Configuration& config, const std::string& param, double value) {
    if (param == "tau") {
        config.sim.tau = value;
    } else if (param == "K") {
        config.linkage.stiffness = value;
    } else if (param == "m2") {
        config.abdomen.mass = value;
    } else if (param == "d5") {
        config.abdomen.mass_arm = value;
    } else {
        fail(ErrorKind::Validation, fmt::format("--param must be one of tau, K, m2, d5 (got '{}')", param));
    }
}

// Runs fn(0..n-1) on up to `jobs` threads; rethrows the lowest-index failure.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
    std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs)
                                   : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

void require_undulating(const Configuration& config) {
    if (config.sim.abdomen_mode != AbdomenMode::Undulating) {
        fail(ErrorKind::Validation,
             fmt::format("sim.abdomen_mode is '{}': the coupled pipeline requires 'undulating'",
                         to_string(config.sim.abdomen_mode)));
    }
}

std::string preset_in_file(const std::string& path) {
    Configuration probe;
    probe.preset.clear();
    probe = load_config_file(path, probe);
    return probe.preset;
}

}  // namespace

Configuration resolve_config(const GlobalOptions& opts) {
    std::string preset = opts.preset;
    if (preset.empty() && !opts.config_path.empty()) preset = preset_in_file(opts.config_path);
    if (preset.empty()) preset = "model";
    auto base = preset_by_name(preset);
    if (!base) fail(ErrorKind::Validation, fmt::format("unknown preset '{}' (expected model or prototype)", preset));

    Configuration config = *base;
    if (!opts.config_path.empty()) config = load_config_file(opts.config_path, config);
    config.preset = preset;
    for (const auto& assignment : opts.overrides) {
        const auto eq = assignment.find('=');
        if (eq == std::string::npos) fail(ErrorKind::Parse, fmt::format("--set '{}': expected key=value", assignment));
        std::string key = assignment.substr(0, eq);
        std::string value = assignment.substr(eq + 1);
        set_config_value(config, key, value);
    }
    if (opts.dt) config.sim.dt = *opts.dt;
    if (opts.duration) config.sim.duration = *opts.duration;
    validate(config);
    return config;
}

void cmd_simulate(const GlobalOptions& opts, std::ostream& out) {
    const Configuration config = resolve_config(opts);
    const std::string hash = hash_hex(serialize_config(config));
    const Trajectory traj = simulate(config);
    const RunStats stats = run_stats(traj);

    const Summary summary = {
        {"frequency_hz", optional_number(stats.frequency)},
        {"avg_lift_N", format_number(stats.avg_lift)},
        {"stroke_max_deg", format_number(stats.stroke_max / kDeg)},
        {"stroke_min_deg", format_number(stats.stroke_min / kDeg)},
        {"reynolds", format_number(traj.reynolds)},
    };
    publish(opts, "simulate", config, hash,
            {{"trajectory.csv", render_csv(trajectory_table(traj), hash)},
             {"summary.txt", render_summary(summary, hash)}});
    print_summary(out, summary);
}

void cmd_sweep(const GlobalOptions& opts, const SweepOptions& sweep, std::ostream& out) {
    const Configuration config = resolve_config(opts);
    const std::vector<double> values = parse_values(sweep.values);
    const bool coupled = sweep.coupled || sweep.param == "m2" || sweep.param == "d5";

    std::vector<Configuration> members(values.size(), config);
    for (std::size_t i = 0; i < values.size(); ++i) {
        apply_sweep_value(members[i], sweep.param, values[i]);
        validate(members[i]);
        if (coupled) require_undulating(members[i]);
    }

    struct MemberResult {
        std::string hash;
        std::string trajectory_csv;
        std::string lifts_csv;
        RunStats stats;
        double lift_gain = 0.0;
        double freq_coupled = 0.0;
    };
    std::vector<MemberResult> results(values.size());
    parallel_for(values.size(), sweep.jobs, [&](std::size_t i) {
        MemberResult& r = results[i];
        r.hash = hash_hex(serialize_config(members[i]));
        if (coupled) {
            const CoupledResult c = coupled_pipeline(members[i]);
            r.trajectory_csv = render_csv(trajectory_table(c.baseline), r.hash);
            r.stats = run_stats(c.baseline);
            r.lift_gain = c.lift_gain;
            r.freq_coupled = c.freq_coupled;
            r.lifts_csv = render_csv({{"t_s", "F_lift_N", "F_lift_prime_N"},
                                      {c.baseline.times(), c.baseline.lifts(), c.corrected.lifts()}},
                                     r.hash);
        } else {
            const Trajectory traj = simulate(members[i]);
            r.trajectory_csv = render_csv(trajectory_table(traj), r.hash);
            r.stats = run_stats(traj);
        }
    });

    const std::string hash =
        hash_hex(serialize_config(config) + "sweep " + sweep.param + " " + sweep.values + (coupled ? " coupled" : ""));
    CsvTable table;
    table.header = {"value", "frequency_hz", "avg_lift_N"};
    if (coupled) {
        table.header.push_back("lift_gain_percent");
        table.header.push_back("freq_coupled_hz");
    }
    table.columns.resize(table.header.size());
    std::vector<OutputFile> files;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const MemberResult& r = results[i];
        table.columns[0].push_back(values[i]);
        table.columns[1].push_back(r.stats.frequency.value_or(std::nan("")));
        table.columns[2].push_back(r.stats.avg_lift);
        if (coupled) {
            table.columns[3].push_back(100.0 * r.lift_gain);
            table.columns[4].push_back(r.freq_coupled);
        }
        const std::filesystem::path dir = std::filesystem::path("members") / fmt::format("{:03d}", i);
        files.push_back({dir / "trajectory.csv", r.trajectory_csv});
        if (coupled) files.push_back({dir / "lifts.csv", r.lifts_csv});
    }
    files.insert(files.begin(), OutputFile{"sweep.csv", render_csv(table, hash)});
    publish(opts, "sweep", config, hash, files);

    out << "param = " << sweep.param << '\n';
    for (std::size_t i = 0; i < values.size(); ++i) {
        out << fmt::format("value = {} frequency_hz = {} avg_lift_N = {}", format_number(values[i]),
                           optional_number(results[i].stats.frequency), format_number(results[i].stats.avg_lift));
        if (coupled) out << " lift_gain_percent = " << format_number(100.0 * results[i].lift_gain);
        out << '\n';
    }
}

void cmd_couple(const GlobalOptions& opts, std::ostream& out) {
    const Configuration config = resolve_config(opts);
    require_undulating(config);
    const std::string hash = hash_hex(serialize_config(config));
    const CoupledResult r = coupled_pipeline(config);
    const double antiphase = antiphase_check(r.baseline, r.trace);

    const std::vector<double> t = r.baseline.times();
    const CsvTable abdomen{{"t_s", "theta_D_rad", "theta_Ddot", "theta_Dddot", "F2_N"},
                           {t, r.trace.angle, r.trace.rate, r.trace.acceleration, r.trace.reaction}};
    const CsvTable forces{{"t_s", "F1_N", "F2_N", "F3_N"}, {t, r.drive, r.reaction, r.resultant}};
    const CsvTable lifts{{"t_s", "F_lift_N", "F_lift_prime_N"}, {t, r.baseline.lifts(), r.corrected.lifts()}};
    const CsvTable moments{{"t_s", "M_abdomen_Nm", "M_drag_Nm", "M_total_Nm"},
                           {r.corrected.times(), r.moments.abdomen, r.moments.drag, r.moments.total}};

    const Summary summary = {
        {"lift_gain_percent", format_number(100.0 * r.lift_gain)},
        {"freq_baseline_hz", format_number(r.freq_baseline)},
        {"freq_coupled_hz", format_number(r.freq_coupled)},
        {"antiphase_fraction", format_number(antiphase)},
        {"avg_lift_N", format_number(r.lift_baseline)},
        {"avg_lift_prime_N", format_number(r.lift_corrected)},
        {"reynolds", format_number(r.baseline.reynolds)},
    };
    publish(opts, "couple", config, hash,
            {{"trajectory.csv", render_csv(trajectory_table(r.baseline), hash)},
             {"trajectory_corrected.csv", render_csv(trajectory_table(r.corrected), hash)},
             {"abdomen.csv", render_csv(abdomen, hash)},
             {"forces.csv", render_csv(forces, hash)},
             {"lifts.csv", render_csv(lifts, hash)},
             {"moments.csv", render_csv(moments, hash)},
             {"summary.txt", render_summary(summary, hash)}});
    print_summary(out, summary);
}

void cmd_static_stroke(const GlobalOptions& opts, const StaticStrokeOptions& so, std::ostream& out) {
    const Configuration config = resolve_config(opts);
    if (!(so.x_max_mm >= 0.0)) fail(ErrorKind::Validation, "--x-max-mm must be non-negative");
    const std::string hash = hash_hex(serialize_config(config) + "static-stroke " + format_number(so.x_max_mm));
    const StaticStroke s = static_stroke(config.linkage, so.x_max_mm * 1e-3);
    const Summary summary = {
        {"x_max_mm", format_number(so.x_max_mm)},
        {"theta_up_deg", format_number(s.up / kDeg)},
        {"theta_down_deg", format_number(s.down / kDeg)},
        {"stroke_deg", format_number((s.up - s.down) / kDeg)},
    };
    publish(opts, "static-stroke", config, hash, {{"static_stroke.txt", render_summary(summary, hash)}});
    print_summary(out, summary);
}

void cmd_aero_table(const GlobalOptions& opts, const AeroTableOptions& ao, std::ostream& out) {
    const Configuration config = resolve_config(opts);
    if (!(ao.step_deg > 0.0 && ao.step_deg <= 90.0)) fail(ErrorKind::Validation, "--step-deg must lie in (0, 90]");
    const double re = ao.reynolds ? *ao.reynolds : config.sim.reynolds ? *config.sim.reynolds : estimate_reynolds(config);
    const AeroCoefficients coeffs = coefficients_from_re(re);
    const std::string hash =
        hash_hex(serialize_config(config) + "aero-table " + format_number(re) + " " + format_number(ao.step_deg));

    CsvTable table{{"alpha_deg", "C_Lt", "C_Dt"}, {{}, {}, {}}};
    const auto steps = static_cast<int>(std::floor(90.0 / ao.step_deg + 1e-9));
    for (int i = 0; i <= steps; ++i) {
        const double alpha_deg = i * ao.step_deg;
        const ForceCoefficients c = lift_drag_coeff(coeffs, alpha_deg * kDeg);
        table.columns[0].push_back(alpha_deg);
        table.columns[1].push_back(c.lift);
        table.columns[2].push_back(c.drag);
    }
    publish(opts, "aero-table", config, hash, {{"aero_table.csv", render_csv(table, hash)}});
    print_summary(out, {{"reynolds", format_number(re)},
                        {"A_D", format_number(coeffs.drag_amplitude)},
                        {"C_D0", format_number(coeffs.drag_base)},
                        {"A_L", format_number(coeffs.lift_amplitude)},
                        {"rows", std::to_string(steps + 1)}});
}

void cmd_analyze_mocap(const GlobalOptions& opts, const MocapOptions& mo, std::ostream& out) {
    const Configuration config = resolve_config(opts);
    const std::string text = read_file(mo.file);
    const std::string hash =
        hash_hex(text + "analyze-mocap " + format_number(mo.rate) + " " + format_number(mo.ground_z));
    std::istringstream stream(text);
    const FlightRecord rec = parse_record(stream, mo.rate);
    const FlightMetrics m = flight_metrics(rec, mo.ground_z);
    const std::vector<Pose> poses = pose_series(rec);
    const std::vector<Vec3> vel = velocity_series(rec);

    CsvTable series;
    series.header = {"t_s", "x_m", "y_m", "z_m", "vx_m_s", "vy_m_s", "vz_m_s", "pitch_rad"};
    series.columns.resize(series.header.size());
    for (std::size_t i = 0; i < poses.size(); ++i) {
        series.columns[0].push_back(poses[i].t);
        for (int k = 0; k < 3; ++k) {
            series.columns[1 + k].push_back(poses[i].position[k]);
            series.columns[4 + k].push_back(vel[i][k]);
        }
        series.columns[7].push_back(poses[i].pitch);
    }
    const Summary summary = {
        {"forward_distance_m", format_number(m.forward_distance)},
        {"flight_duration_s", format_number(m.flight_duration)},
        {"final_altitude_drop_m", format_number(m.final_altitude_drop)},
        {"pitch_p2p_rad", format_number(m.pitch_p2p)},
        {"pitch_p2p_deg", format_number(m.pitch_p2p / kDeg)},
        {"pitch_dominant_freq_hz", format_number(m.pitch_dominant_freq)},
        {"mean_vertical_velocity_m_s", format_number(m.mean_vertical_velocity)},
        {"frames", std::to_string(rec.frames.size())},
        {"pose_frames", std::to_string(poses.size())},
    };
    publish(opts, "analyze-mocap", config, hash,
            {{"mocap_series.csv", render_csv(series, hash)}, {"metrics.txt", render_summary(summary, hash)}});
    print_summary(out, summary);
}

}  // namespace butterfly::cli
