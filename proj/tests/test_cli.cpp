#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "butterfly/io.hpp"
#include "cli/cli.hpp"
#include "support/flight.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using butterfly::read_file;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "butterfly");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out;
    std::ostringstream err;
    const int code = butterfly::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "butterfly_test_cli" / name;
    fs::remove_all(dir);
    return dir;
}

// Every file under `dir`, manifest timestamp removed.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::string text = read_file(e.path());
        if (e.path().filename() == "manifest.txt") {
            const auto a = text.find("timestamp = ");
            REQUIRE(a != std::string::npos);
            text.erase(a, text.find('\n', a) - a + 1);
        }
        files[fs::relative(e.path(), dir).generic_string()] = text;
    }
    return files;
}

std::string summary_value(const fs::path& file, const std::string& key) {
    std::istringstream in(read_file(file));
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(key + " = ", 0) == 0) return line.substr(key.size() + 3);
    }
    return {};
}

// Column `name` of a rendered CSV.
std::vector<double> column(const fs::path& file, const std::string& name) {
    std::istringstream in(read_file(file));
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    std::vector<std::string> header;
    std::stringstream hs(line);
    for (std::string cell; std::getline(hs, cell, ',');) header.push_back(cell);
    const auto idx = std::find(header.begin(), header.end(), name) - header.begin();
    std::vector<double> out;
    while (std::getline(in, line)) {
        std::stringstream ls(line);
        std::string cell;
        for (long i = 0; i <= idx; ++i) std::getline(ls, cell, ',');
        out.push_back(std::stod(cell));
    }
    return out;
}

}  // namespace

TEST_CASE("help and usage errors") {
    CHECK(run({"--help"}).code == 0);
    CHECK(run({}).code == 2);
    CHECK(run({"fly"}).code == 2);
    CHECK(run({"simulate", "--dt", "abc"}).code == 2);
}

TEST_CASE("simulate writes trajectory, summary and manifest") {
    const fs::path dir = scratch("simulate");
    const Run r = run({"--out-dir", dir.string(), "simulate"});
    REQUIRE(r.code == 0);
    CHECK(std::stod(summary_value(dir / "summary.txt", "frequency_hz")) == doctest::Approx(8.0).epsilon(0.2));
    const std::string manifest = read_file(dir / "manifest.txt");
    CHECK(manifest.find("command = simulate") != std::string::npos);
    CHECK(manifest.find("output = trajectory.csv") != std::string::npos);
    CHECK(manifest.find("[config]\n") != std::string::npos);
    const std::string csv = read_file(dir / "trajectory.csv");
    CHECK(csv.rfind("# input_hash=", 0) == 0);
    CHECK(csv.find("t_s,theta_A_rad,theta_dot_rad_s,x_m,F1_N,F_lift_N,F_drag_N,M_Fdrag_Nm\n") != std::string::npos);
    CHECK(csv.find('\r') == std::string::npos);
}

TEST_CASE("validation errors exit 2 and write nothing") {
    const fs::path dir = scratch("invalid");
    const Run r = run({"--out-dir", dir.string(), "--set", "linkage.l1_mm=0", "simulate"});
    CHECK(r.code == 2);
    CHECK(r.err.find("linkage.l1") != std::string::npos);
    CHECK_FALSE(fs::exists(dir));

    CHECK(run({"--out-dir", dir.string(), "--set", "sim.abdomen_mode=none", "couple"}).code == 2);
    CHECK(run({"--out-dir", dir.string(), "sweep", "--param", "wingspan", "--values", "1"}).code == 2);
    CHECK(run({"--out-dir", dir.string(), "--set", "bogus.key=1", "simulate"}).code == 2);
    CHECK(run({"--out-dir", dir.string(), "--preset", "nope", "simulate"}).code == 2);
    CHECK(run({"--out-dir", dir.string(), "--config", (dir / "missing.cfg").string(), "simulate"}).code == 1);
    CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("divergence exits 3 with the last valid state") {
    const fs::path dir = scratch("diverge");
    const Run r = run({"--out-dir", dir.string(), "--dt", "0.5", "--duration", "10", "simulate"});
    CHECK(r.code == 3);
    CHECK(r.err.find("last valid") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "trajectory.csv"));
}

TEST_CASE("config files layer on the preset") {
    const fs::path dir = scratch("config");
    fs::create_directories(dir);
    butterfly::atomic_write(dir / "run.cfg", "# slower drive\npreset = prototype\nsim.tau_nm = 0.025\n");
    const Run r = run({"--out-dir", (dir / "out").string(), "--config", (dir / "run.cfg").string(), "--duration", "1",
                       "simulate"});
    REQUIRE(r.code == 0);
    const std::string manifest = read_file(dir / "out" / "manifest.txt");
    CHECK(manifest.find("preset = prototype") != std::string::npos);
    CHECK(manifest.find("sim.tau_nm = 0.025") != std::string::npos);
    CHECK(manifest.find("abdomen.d5_mm = 80") != std::string::npos);
}

TEST_CASE("identical inputs give byte-identical outputs") {
    for (const std::vector<std::string> cmd : {std::vector<std::string>{"--duration", "1", "couple"},
                                               std::vector<std::string>{"--duration", "1", "sweep", "--param", "tau",
                                                                        "--values", "0.02,0.03", "--jobs", "2"},
                                               std::vector<std::string>{"static-stroke"},
                                               std::vector<std::string>{"aero-table", "--re", "11000"}}) {
        const fs::path a = scratch("det_a");
        const fs::path b = scratch("det_b");
        std::vector<std::string> args_a = {"--out-dir", a.string()};
        std::vector<std::string> args_b = {"--out-dir", b.string()};
        args_a.insert(args_a.end(), cmd.begin(), cmd.end());
        args_b.insert(args_b.end(), cmd.begin(), cmd.end());
        REQUIRE(run(args_a).code == 0);
        REQUIRE(run(args_b).code == 0);
        const auto sa = snapshot(a);
        CHECK(sa == snapshot(b));
        for (const auto& [name, text] : sa) {
            if (name.ends_with(".csv")) CHECK(text.rfind("# input_hash=", 0) == 0);
        }
    }
}

TEST_CASE("single-value sweep matches simulate") {
    const fs::path sim = scratch("single_sim");
    const fs::path sweep = scratch("single_sweep");
    REQUIRE(run({"--out-dir", sim.string(), "--duration", "1", "simulate"}).code == 0);
    REQUIRE(run({"--out-dir", sweep.string(), "--duration", "1", "sweep", "--param", "tau", "--values", "0.03"}).code == 0);
    CHECK(read_file(sim / "trajectory.csv") == read_file(sweep / "members" / "000" / "trajectory.csv"));
    CHECK(column(sweep / "sweep.csv", "frequency_hz")[0] == std::stod(summary_value(sim / "summary.txt", "frequency_hz")));
}

TEST_CASE("torque sweep frequencies increase") {
    const fs::path dir = scratch("tau_sweep");
    REQUIRE(run({"--out-dir", dir.string(), "sweep", "--param", "tau", "--values", "0.02,0.025,0.03"}).code == 0);
    const auto f = column(dir / "sweep.csv", "frequency_hz");
    REQUIRE(f.size() == 3);
    CHECK(f[0] < f[1]);
    CHECK(f[1] < f[2]);
}

TEST_CASE("abdomen mass sweep runs coupled") {
    const fs::path dir = scratch("m2_sweep");
    REQUIRE(run({"--out-dir", dir.string(), "sweep", "--param", "m2", "--values", "0,0.002"}).code == 0);
    const auto gain = column(dir / "sweep.csv", "lift_gain_percent");
    REQUIRE(gain.size() == 2);
    CHECK(gain[0] == 0.0);
    CHECK(gain[1] > 0.5);
    CHECK(gain[1] < 8.0);
    CHECK(fs::exists(dir / "members" / "001" / "lifts.csv"));
}

TEST_CASE("couple reports antiphase and lift gain") {
    const fs::path dir = scratch("couple");
    REQUIRE(run({"--out-dir", dir.string(), "couple"}).code == 0);
    CHECK(summary_value(dir / "summary.txt", "antiphase_fraction") == "1");
    const double gain = std::stod(summary_value(dir / "summary.txt", "lift_gain_percent"));
    CHECK(gain > 0.5);
    CHECK(gain < 8.0);
    for (const char* f : {"trajectory.csv", "trajectory_corrected.csv", "abdomen.csv", "forces.csv", "lifts.csv", "moments.csv"}) {
        CHECK(fs::exists(dir / f));
    }
    CHECK(column(dir / "forces.csv", "F3_N").size() == column(dir / "lifts.csv", "F_lift_N").size());
}

TEST_CASE("static stroke and aero table") {
    const fs::path dir = scratch("stroke");
    REQUIRE(run({"--out-dir", dir.string(), "static-stroke"}).code == 0);
    CHECK(std::stod(summary_value(dir / "static_stroke.txt", "theta_up_deg")) == doctest::Approx(50.0).epsilon(0.03));
    CHECK(std::stod(summary_value(dir / "static_stroke.txt", "theta_down_deg")) == doctest::Approx(-37.0).epsilon(0.041));

    REQUIRE(run({"--out-dir", dir.string(), "aero-table", "--re", "11000", "--step-deg", "5"}).code == 0);
    const auto alpha = column(dir / "aero_table.csv", "alpha_deg");
    CHECK(alpha.size() == 19);
    CHECK(alpha.back() == 90.0);
    CHECK(run({"--out-dir", dir.string(), "aero-table", "--re", "1"}).code == 2);
}

TEST_CASE("analyze-mocap") {
    const fs::path dir = scratch("mocap");
    fs::create_directories(dir);
    butterfly::atomic_write(dir / "glide.csv", flight::csv(flight::record(flight::glide(), 200.0, 4.5)));
    REQUIRE(run({"--out-dir", (dir / "out").string(), "analyze-mocap", (dir / "glide.csv").string()}).code == 0);
    CHECK(std::stod(summary_value(dir / "out" / "metrics.txt", "forward_distance_m")) == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(std::stod(summary_value(dir / "out" / "metrics.txt", "flight_duration_s")) == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(column(dir / "out" / "mocap_series.csv", "pitch_rad").size() == 901);

    butterfly::atomic_write(dir / "bad.csv", std::string(butterfly::kMocapHeader) + "\n0,1\n");
    CHECK(run({"--out-dir", (dir / "bad").string(), "analyze-mocap", (dir / "bad.csv").string()}).code == 2);
    CHECK_FALSE(fs::exists(dir / "bad"));
}
