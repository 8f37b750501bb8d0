#include "butterfly/config.hpp"

#include "butterfly/errors.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace butterfly {

namespace {

constexpr double kMm = 1e-3;
constexpr double kDeg = std::numbers::pi / 180.0;

enum class ValueKind { Number, Integer, Boolean, Mode, OptionalNumber };

struct KeyBinding {
    std::string_view key;
    std::string_view description;
    ValueKind kind;
    double scale = 1.0;
    std::function<double&(Configuration&)> number;
    std::function<std::optional<double>&(Configuration&)> optional_number;
    std::function<int&(Configuration&)> integer;
    std::function<bool&(Configuration&)> boolean;
};

KeyBinding num(std::string_view key, std::string_view desc, double scale,
               std::function<double&(Configuration&)> get) {
    return KeyBinding{key, desc, ValueKind::Number, scale, std::move(get), {}, {}, {}};
}

const std::vector<KeyBinding>& bindings() {
    static const std::vector<KeyBinding> table = [] {
        std::vector<KeyBinding> t;
        t.push_back(num("linkage.l1_mm", "wing-base link length [14.95]", kMm, [](Configuration& c) -> double& { return c.linkage.wing_base; }));
        t.push_back(num("linkage.l2_mm", "thorax-wall link length [13.49]", kMm, [](Configuration& c) -> double& { return c.linkage.wall; }));
        t.push_back(num("linkage.l3_mm", "thorax-base link length [13.75]", kMm, [](Configuration& c) -> double& { return c.linkage.base; }));
        t.push_back(num("linkage.l4_mm", "slide rod length [30]", kMm, [](Configuration& c) -> double& { return c.linkage.rod; }));
        t.push_back(num("linkage.l5_mm", "crank length [10]", kMm, [](Configuration& c) -> double& { return c.linkage.crank; }));
        t.push_back(num("linkage.d1_mm", "tergum length [4.89]", kMm, [](Configuration& c) -> double& { return c.linkage.tergum; }));
        t.push_back(num("linkage.d2_mm", "crank centre to neutral slider [30]", kMm, [](Configuration& c) -> double& { return c.linkage.slider_offset; }));
        t.push_back(num("linkage.k_mnm_per_rad", "torsional spring stiffness [1.57]", 1e-3, [](Configuration& c) -> double& { return c.linkage.stiffness; }));
        t.push_back(num("wing.l6_mm", "single-wing span [190]", kMm, [](Configuration& c) -> double& { return c.wing.span; }));
        t.push_back(num("wing.l7_mm", "hindwing inner-edge length [100]", kMm, [](Configuration& c) -> double& { return c.wing.hindwing_edge; }));
        t.push_back(num("wing.cr_mm", "root chord [65]", kMm, [](Configuration& c) -> double& { return c.wing.root_chord; }));
        t.push_back(num("wing.phi_deg", "hindwing edge to flapping axis angle [10]", kDeg, [](Configuration& c) -> double& { return c.wing.hindwing_angle; }));
        t.push_back(num("wing.inertia_kg_m2", "half-wing inertia about the flapping axis [3.98e-6]", 1.0, [](Configuration& c) -> double& { return c.wing.inertia; }));
        t.push_back(num("wing.rc_mm", "spanwise mass-centre position [81.7]", kMm, [](Configuration& c) -> double& { return c.wing.mass_radius; }));
        t.push_back(num("wing.m1_g", "half-wing mass [0.425]", 1e-3, [](Configuration& c) -> double& { return c.wing.mass; }));
        t.push_back(num("abdomen.d3_mm", "pivot to slider, horizontal [55]", kMm, [](Configuration& c) -> double& { return c.abdomen.pivot_dx; }));
        t.push_back(num("abdomen.d4_mm", "pivot to neutral slider, vertical [3.75]", kMm, [](Configuration& c) -> double& { return c.abdomen.pivot_dy; }));
        t.push_back(num("abdomen.d5_mm", "pivot to abdomen mass [150]", kMm, [](Configuration& c) -> double& { return c.abdomen.mass_arm; }));
        t.push_back(num("abdomen.m2_g", "abdomen mass [2]", 1e-3, [](Configuration& c) -> double& { return c.abdomen.mass; }));
        t.push_back(num("abdomen.dc_mm", "CoM to foremost point [60]", kMm, [](Configuration& c) -> double& { return c.abdomen.com_to_nose; }));
        t.push_back(num("env.rho_kg_m3", "air density [1.225]", 1.0, [](Configuration& c) -> double& { return c.env.air_density; }));
        t.push_back(num("env.nu_m2_s", "kinematic viscosity [1.5e-5]", 1.0, [](Configuration& c) -> double& { return c.env.viscosity; }));
        t.push_back(num("env.g_m_s2", "gravitational acceleration [9.81]", 1.0, [](Configuration& c) -> double& { return c.env.gravity; }));
        t.push_back(num("sim.tau_nm", "crank drive torque [0.03]", 1.0, [](Configuration& c) -> double& { return c.sim.tau; }));
        t.push_back(num("sim.alpha_deg", "angle of attack [70]", kDeg, [](Configuration& c) -> double& { return c.sim.alpha; }));
        t.push_back(num("sim.dt_s", "integration step [2e-5]", 1.0, [](Configuration& c) -> double& { return c.sim.dt; }));
        t.push_back(num("sim.duration_s", "simulated time [2]", 1.0, [](Configuration& c) -> double& { return c.sim.duration; }));
        t.push_back(KeyBinding{"sim.n_strips", "blade-element strip count [256]", ValueKind::Integer, 1.0, {}, {},
                               [](Configuration& c) -> int& { return c.sim.n_strips; }, {}});
        t.push_back(KeyBinding{"sim.hinges", "include hinge springs [true]", ValueKind::Boolean, 1.0, {}, {}, {},
                               [](Configuration& c) -> bool& { return c.sim.hinges_enabled; }});
        t.push_back(KeyBinding{"sim.aero", "include aerodynamic drag moment [true]", ValueKind::Boolean, 1.0, {}, {}, {},
                               [](Configuration& c) -> bool& { return c.sim.aero_enabled; }});
        t.push_back(KeyBinding{"sim.abdomen_mode", "none | fixed-mass | undulating [undulating]", ValueKind::Mode, 1.0, {}, {}, {}, {}});
        t.push_back(num("sim.dead_center_clearance_um", "slider clearance where the crank reverses [2]", 1e-6,
                        [](Configuration& c) -> double& { return c.sim.dead_center_clearance; }));
        t.push_back(KeyBinding{"sim.initial_angle_deg", "release angle, or auto for the upper stroke limit [auto]",
                               ValueKind::OptionalNumber, kDeg, {},
                               [](Configuration& c) -> std::optional<double>& { return c.sim.initial_angle; }, {}, {}});
        t.push_back(KeyBinding{"sim.reynolds", "Reynolds number, or auto to estimate it [auto]", ValueKind::OptionalNumber,
                               1.0, {}, [](Configuration& c) -> std::optional<double>& { return c.sim.reynolds; }, {}, {}});
        return t;
    }();
    return table;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view text) {
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    fail(ErrorKind::Validation,
         fmt::format("{}: cannot use '{}' (expected {})", key, value, expected));
}

// Shortest decimal d with parse(d) * scale == si, so files round-trip exactly.
std::string format_scaled(double si, double scale) {
    if (scale == 1.0) return fmt::format("{}", si);
    const double centre = si / scale;
    double up = centre;
    double down = centre;
    for (int k = 0; k <= 16; ++k) {
        for (double probe : {up, down}) {
            std::string text = fmt::format("{}", probe);
            if (auto back = parse_double(text); back && *back * scale == si) return text;
        }
        up = std::nextafter(up, INFINITY);
        down = std::nextafter(down, -INFINITY);
    }
    return fmt::format("{}", si / scale);
}

}  // namespace

const std::vector<ConfigKeyInfo>& config_keys() {
    static const std::vector<ConfigKeyInfo> keys = [] {
        std::vector<ConfigKeyInfo> out;
        for (const auto& b : bindings()) out.push_back({b.key, b.description});
        return out;
    }();
    return keys;
}

void set_config_value(Configuration& config, std::string_view key, std::string_view value) {
    for (const auto& b : bindings()) {
        if (b.key != key) continue;
        switch (b.kind) {
            case ValueKind::Number: {
                auto v = parse_double(value);
                if (!v) bad_value(key, value, "a number");
                b.number(config) = *v * b.scale;
                return;
            }
            case ValueKind::OptionalNumber: {
                if (value == "auto") {
                    b.optional_number(config).reset();
                    return;
                }
                auto v = parse_double(value);
                if (!v) bad_value(key, value, "a number or auto");
                b.optional_number(config) = *v * b.scale;
                return;
            }
            case ValueKind::Integer: {
                int v = 0;
                auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
                if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value, "an integer");
                b.integer(config) = v;
                return;
            }
            case ValueKind::Boolean: {
                if (value == "true") {
                    b.boolean(config) = true;
                } else if (value == "false") {
                    b.boolean(config) = false;
                } else {
                    bad_value(key, value, "true or false");
                }
                return;
            }
            case ValueKind::Mode: {
                auto mode = parse_abdomen_mode(value);
                if (!mode) bad_value(key, value, "none, fixed-mass or undulating");
                config.sim.abdomen_mode = *mode;
                return;
            }
        }
    }
    fail(ErrorKind::Validation, fmt::format("unknown configuration key '{}'", key));
}

Configuration apply_config_text(std::string_view text, Configuration base) {
    std::size_t line_no = 0;
    while (!text.empty()) {
        ++line_no;
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            fail(ErrorKind::Parse, fmt::format("line {}: expected 'key = value'", line_no));
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            fail(ErrorKind::Parse, fmt::format("line {}: expected 'key = value'", line_no));
        }
        if (key == "preset") {
            // Presets are chosen on the command line; the snapshot records it for reference.
            base.preset = std::string(value);
            continue;
        }
        try {
            set_config_value(base, key, value);
        } catch (const Error& e) {
            fail(e.kind(), fmt::format("line {}: {}", line_no, e.what()));
        }
    }
    return base;
}

Configuration load_config_file(const std::filesystem::path& path, Configuration base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open config file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return apply_config_text(buffer.str(), std::move(base));
}

std::string serialize_config(const Configuration& config) {
    Configuration snapshot = config;
    std::string out = fmt::format("preset = {}\n", config.preset);
    for (const auto& b : bindings()) {
        switch (b.kind) {
            case ValueKind::Number:
                out += fmt::format("{} = {}\n", b.key, format_scaled(b.number(snapshot), b.scale));
                break;
            case ValueKind::OptionalNumber: {
                const auto& v = b.optional_number(snapshot);
                out += fmt::format("{} = {}\n", b.key, v ? format_scaled(*v, b.scale) : std::string("auto"));
                break;
            }
            case ValueKind::Integer:
                out += fmt::format("{} = {}\n", b.key, b.integer(snapshot));
                break;
            case ValueKind::Boolean:
                out += fmt::format("{} = {}\n", b.key, b.boolean(snapshot) ? "true" : "false");
                break;
            case ValueKind::Mode:
                out += fmt::format("{} = {}\n", b.key, to_string(snapshot.sim.abdomen_mode));
                break;
        }
    }
    return out;
}

}  // namespace butterfly
