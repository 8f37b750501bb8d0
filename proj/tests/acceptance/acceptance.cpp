// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include "butterfly/abdomen.hpp"
#include "butterfly/aero.hpp"
#include "butterfly/errors.hpp"
#include "butterfly/flapdyn.hpp"
#include "butterfly/io.hpp"
#include "butterfly/linkage.hpp"
#include "butterfly/mocap.hpp"
#include "cli/cli.hpp"
#include "support/dynamics.hpp"
#include "support/flight.hpp"
#include "support/oracles.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace butterfly;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, fmt::format("threw: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    fmt::print("{} {}: {} [{:.2f} s]\n", o.pass ? "PASS" : "FAIL", name, o.detail, secs);
    std::fflush(stdout);
}

double p2p(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

int run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "butterfly");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out;
    std::ostringstream err;
    return butterfly::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string text = read_file(e.path());
        if (e.path().filename() == "manifest.txt") {
            const auto a = text.find("timestamp = ");
            if (a != std::string::npos) text.erase(a, text.find('\n', a) - a + 1);
        }
        files[fs::relative(e.path(), dir).generic_string()] = text;
    }
    return files;
}

}  // namespace

int main() {
    const Configuration model = model_preset();

    criterion("static stroke", [&] {
        const auto start = std::chrono::steady_clock::now();
        const StaticStroke s = static_stroke(model.linkage, 0.010);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const double up = s.up / kDeg;
        const double down = s.down / kDeg;
        return Outcome{std::abs(up - 50.0) <= 1.5 && std::abs(down + 37.0) <= 1.5 && secs < 1.0,
                       fmt::format("up {:.3f} deg, down {:.3f} deg (50 +/- 1.5, -37 +/- 1.5)", up, down)};
    });

    criterion("flapping frequency", [&] {
        const auto start = std::chrono::steady_clock::now();
        const double f = flapping_frequency(simulate(model));
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return Outcome{std::abs(f - 8.0) <= 1.6 && secs < 30.0, fmt::format("{:.4f} Hz (8 +/- 20%)", f)};
    });

    criterion("torque monotonicity", [&] {
        std::vector<double> f;
        for (double tau : {0.02, 0.025, 0.03}) {
            Configuration c = model;
            c.sim.tau = tau;
            f.push_back(flapping_frequency(simulate(c)));
        }
        return Outcome{f[0] < f[1] && f[1] < f[2],
                       fmt::format("{:.4f} < {:.4f} < {:.4f} Hz", f[0], f[1], f[2])};
    });

    criterion("hinge effect", [&] {
        const HingeEffect e = hinge_effect(model);
        return Outcome{e.relative >= 0.10 && e.relative <= 0.25,
                       fmt::format("{:+.2f}% ({:.4f} vs {:.4f} Hz; need +10..+25%)", 100.0 * e.relative,
                                   e.with_hinges, e.without_hinges)};
    });

    const CoupledResult coupled = coupled_pipeline(model);

    criterion("abdomen lift gain", [&] {
        const double shift = std::abs(coupled.freq_coupled - coupled.freq_baseline) / coupled.freq_baseline;
        return Outcome{coupled.lift_gain > 0.0 && coupled.lift_gain >= 0.005 && coupled.lift_gain <= 0.08 && shift < 0.05,
                       fmt::format("gain {:+.3f}% (need +0.5..+8%), frequency shift {:.2f}% (need < 5%)",
                                   100.0 * coupled.lift_gain, 100.0 * shift)};
    });

    criterion("antiphase invariant", [&] {
        std::vector<double> fractions = {antiphase_check(coupled.baseline, coupled.trace)};
        fractions.push_back(antiphase_check(coupled.corrected, abdomen_trace(model.abdomen, coupled.corrected, model.env)));
        for (double tau : {0.02, 0.025}) {
            Configuration c = model;
            c.sim.tau = tau;
            const Trajectory t = simulate(c);
            fractions.push_back(antiphase_check(t, abdomen_trace(c.abdomen, t, c.env)));
        }
        const bool all = std::all_of(fractions.begin(), fractions.end(), [](double f) { return f == 1.0; });
        return Outcome{all, fmt::format("fractions {} over {} runs", fmt::join(fractions, ", "), fractions.size())};
    });

    criterion("moment amplification", [&] {
        const double total = p2p(coupled.moments.total);
        const double drag = p2p(coupled.moments.drag);
        return Outcome{total > drag, fmt::format("p2p M_total {:.4g} N.m > p2p M_drag {:.4g} N.m", total, drag)};
    });

    criterion("hygiene (a) energy drift", [&] {
        const double d = dynamics::energy_drift_per_cycle(dynamics::conservative(model));
        return Outcome{d < 1e-3, fmt::format("{:.3g} of initial energy per cycle (need < 1e-3)", d)};
    });

    criterion("hygiene (b) fourth-order convergence", [&] {
        Configuration cons = dynamics::conservative(model);
        cons.sim.duration = 0.5;
        const double r_cons = dynamics::convergence_ratio(cons, 8e-5);
        const double r_drive = dynamics::convergence_ratio(dynamics::smooth_driven(model), 4e-5);
        return Outcome{r_cons >= 8.0 && r_drive >= 8.0,
                       fmt::format("error ratio per dt halving: conservative {:.2f}, driven {:.2f} (need >= 8)",
                                   r_cons, r_drive)};
    });

    criterion("hygiene (c) strip refinement", [&] {
        const AeroCoefficients c = coefficients_from_re(coupled.baseline.reynolds);
        const double a = strip_forces(model.wing, 50.0, model.sim.alpha, c, model.env, 256).lift;
        const double b = strip_forces(model.wing, 50.0, model.sim.alpha, c, model.env, 512).lift;
        const double rel = std::abs(b - a) / a;
        return Outcome{rel < 5e-3, fmt::format("256 -> 512 strips changes F_lift by {:.3g} (need < 0.5%)", rel)};
    });

    criterion("hygiene (d) second-moment radius", [&] {
        const double r2 = second_moment_radius(model.wing);
        const double ref = oracle::second_moment_radius(model.wing);
        const double rel = std::abs(r2 - ref) / ref;
        return Outcome{rel < 1e-6, fmt::format("R2 {:.9g} m vs quadrature {:.9g} m, rel {:.2g} (need < 1e-6)", r2, ref, rel)};
    });

    criterion("hygiene (e) abdomen reaction residual", [&] {
        const AbdomenTrace& tr = coupled.trace;
        const auto x = coupled.baseline.slider();
        double worst = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            worst = std::max(worst, std::abs(reaction_residual(model.abdomen, tr.reaction[i], tr.angle[i],
                                                               tr.acceleration[i], x[i], model.env)));
        }
        const double bound = 1e-9 * model.abdomen.mass * model.env.gravity;
        return Outcome{worst < bound, fmt::format("max residual {:.3g} N (bound {:.3g} N)", worst, bound)};
    });

    criterion("mocap fixtures", [&] {
        const double rate = 200.0;
        const FlightMetrics g = flight_metrics(flight::record(flight::glide(), rate, 4.5));
        const bool glide_ok = std::abs(g.forward_distance - 10.0) <= 0.01 && std::abs(g.flight_duration - 4.0) <= 1.0 / rate;
        const double p2p_deg = g.pitch_p2p / kDeg;
        const bool pitch_ok = std::abs(p2p_deg - 30.0) <= 0.02 * 30.0 && std::abs(g.pitch_dominant_freq - 8.0) <= 0.02 * 8.0;
        return Outcome{glide_ok && pitch_ok,
                       fmt::format("distance {:.4f} m, duration {:.4f} s, pitch p2p {:.3f} deg, pitch freq {:.4f} Hz",
                                   g.forward_distance, g.flight_duration, p2p_deg, g.pitch_dominant_freq)};
    });

    criterion("determinism", [&] {
        const fs::path root = fs::temp_directory_path() / "butterfly_acceptance";
        fs::remove_all(root);
        fs::create_directories(root);
        atomic_write(root / "glide.csv", flight::csv(flight::record(flight::glide(), 200.0, 4.5)));
        const std::vector<std::vector<std::string>> commands = {
            {"simulate"},
            {"sweep", "--param", "tau", "--values", "0.02,0.025,0.03"},
            {"couple"},
            {"static-stroke"},
            {"aero-table"},
            {"analyze-mocap", (root / "glide.csv").string()},
        };
        std::size_t files = 0;
        for (std::size_t i = 0; i < commands.size(); ++i) {
            std::map<std::string, std::string> snaps[2];
            for (int k = 0; k < 2; ++k) {
                const fs::path dir = root / fmt::format("{}_{}", i, k);
                std::vector<std::string> args = {"--out-dir", dir.string()};
                args.insert(args.end(), commands[i].begin(), commands[i].end());
                if (run_cli(args) != 0) return Outcome{false, fmt::format("'{}' failed", commands[i][0])};
                snaps[k] = snapshot(dir);
            }
            if (snaps[0] != snaps[1]) return Outcome{false, fmt::format("'{}' outputs differ", commands[i][0])};
            files += snaps[0].size();
        }
        fs::remove_all(root);
        return Outcome{true, fmt::format("{} commands, {} files byte-identical across two runs", commands.size(), files)};
    });

    fmt::print("{} criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
