#include "butterfly/params.hpp"

#include "butterfly/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace butterfly {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kTol = 1e-12;

void require_positive(double value, const char* key) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        fail(ErrorKind::Validation, std::string(key) + " must be a finite positive number");
    }
}

void require_non_negative(double value, const char* key) {
    if (!(value >= 0.0) || !std::isfinite(value)) {
        fail(ErrorKind::Validation, std::string(key) + " must be a finite non-negative number");
    }
}

void require_finite(double value, const char* key) {
    if (!std::isfinite(value)) {
        fail(ErrorKind::Validation, std::string(key) + " must be finite");
    }
}

// Simpson's rule on [a, b] for a function linear in r times r², exact up to rounding.
template <typename F>
double simpson(F&& f, double a, double b, int intervals) {
    if (b <= a) return 0.0;
    if (intervals % 2 != 0) ++intervals;
    const double h = (b - a) / intervals;
    double sum = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) {
        sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
    }
    return sum * h / 3.0;
}

}  // namespace

std::string_view to_string(AbdomenMode mode) {
    switch (mode) {
        case AbdomenMode::None: return "none";
        case AbdomenMode::FixedMass: return "fixed-mass";
        case AbdomenMode::Undulating: return "undulating";
    }
    return "none";
}

std::optional<AbdomenMode> parse_abdomen_mode(std::string_view text) {
    if (text == "none") return AbdomenMode::None;
    if (text == "fixed-mass") return AbdomenMode::FixedMass;
    if (text == "undulating") return AbdomenMode::Undulating;
    return std::nullopt;
}

void validate(const ThoraxLinkage& link) {
    require_positive(link.wing_base, "linkage.l1");
    require_positive(link.wall, "linkage.l2");
    require_positive(link.base, "linkage.l3");
    require_positive(link.rod, "linkage.l4");
    require_positive(link.crank, "linkage.l5");
    require_positive(link.tergum, "linkage.d1");
    require_positive(link.slider_offset, "linkage.d2");
    require_non_negative(link.stiffness, "linkage.k");

    const double neutral = link.wing_base + link.tergum - link.base;
    if (std::abs(neutral) > link.wall * (1.0 + kTol)) {
        fail(ErrorKind::Validation,
             "linkage.l2 must satisfy |l1 + d1 - l3| <= l2 (neutral wall angle undefined)");
    }
    const double low = std::abs(link.rod - link.crank);
    const double high = link.rod + link.crank;
    if (low > link.slider_offset - kDesignStroke + kTol ||
        link.slider_offset + kDesignStroke > high + kTol) {
        fail(ErrorKind::Validation,
             "linkage.d2 must leave the +/-10 mm design stroke inside the crank range "
             "|l4 - l5| <= d2 + x <= l4 + l5");
    }
}

void validate(const HingeSpec& hinge) {
    require_positive(hinge.youngs_modulus, "hinge.e");
    require_positive(hinge.width, "hinge.b");
    require_positive(hinge.thickness, "hinge.t");
    require_positive(hinge.length, "hinge.h");
}

void validate(const WingGeometry& wing) {
    require_positive(wing.span, "wing.l6");
    require_positive(wing.hindwing_edge, "wing.l7");
    require_positive(wing.root_chord, "wing.cr");
    require_positive(wing.hindwing_angle, "wing.phi");
    require_positive(wing.inertia, "wing.inertia");
    require_positive(wing.mass_radius, "wing.rc");
    require_positive(wing.mass, "wing.m1");
    if (wing.hindwing_angle >= std::numbers::pi / 2.0) {
        fail(ErrorKind::Validation, "wing.phi must lie in (0, 90) degrees");
    }
    if (wing.hindwing_edge * std::sin(wing.hindwing_angle) >= wing.span) {
        fail(ErrorKind::Validation,
             "wing.l7 must satisfy l7*sin(phi) < l6 (trailing corner inboard of the tip)");
    }
}

void validate(const AbdomenParams& abdomen) {
    require_positive(abdomen.pivot_dx, "abdomen.d3");
    require_finite(abdomen.pivot_dy, "abdomen.d4");
    require_positive(abdomen.mass_arm, "abdomen.d5");
    require_non_negative(abdomen.mass, "abdomen.m2");
    require_positive(abdomen.com_to_nose, "abdomen.dc");
}

void validate(const Environment& env) {
    require_positive(env.air_density, "env.rho");
    require_positive(env.viscosity, "env.nu");
    require_positive(env.gravity, "env.g");
}

void validate(const SimConfig& sim) {
    require_positive(sim.dt, "sim.dt");
    require_positive(sim.duration, "sim.duration");
    if (sim.duration < 10.0 * sim.dt * (1.0 - kTol)) {
        fail(ErrorKind::Validation, "sim.duration must be at least 10 * sim.dt");
    }
    if (sim.n_strips < 8) {
        fail(ErrorKind::Validation, "sim.n_strips must be >= 8");
    }
    require_non_negative(sim.tau, "sim.tau");
    if (!(sim.alpha > 0.0 && sim.alpha <= std::numbers::pi / 2.0 + kTol)) {
        fail(ErrorKind::Validation, "sim.alpha must lie in (0, 90] degrees");
    }
    require_non_negative(sim.dead_center_clearance, "sim.dead_center_clearance");
    if (sim.initial_angle) require_finite(*sim.initial_angle, "sim.initial_angle");
    if (sim.reynolds) require_positive(*sim.reynolds, "sim.reynolds");
}

void validate(const Configuration& config) {
    validate(config.linkage);
    validate(config.wing);
    validate(config.abdomen);
    validate(config.env);
    validate(config.sim);
}

double hinge_stiffness(const HingeSpec& hinge) {
    validate(hinge);
    const double area_moment = hinge.width * hinge.thickness * hinge.thickness * hinge.thickness / 12.0;
    return hinge.youngs_modulus * area_moment / hinge.length;
}

double neutral_wall_angle(const ThoraxLinkage& link) {
    double arg = (link.wing_base + link.tergum - link.base) / link.wall;
    if (std::abs(arg) > 1.0 + kTol || !std::isfinite(arg)) {
        fail(ErrorKind::Geometry,
             "neutral wall angle undefined: |l1 + d1 - l3| exceeds l2 (arccos argument " +
                 std::to_string(arg) + ")");
    }
    arg = std::clamp(arg, -1.0, 1.0);
    return std::acos(arg);
}

double chord_at(const WingGeometry& wing, double r) {
    if (!(r >= 0.0 && r <= wing.span)) {
        fail(ErrorKind::Range, "spanwise position " + std::to_string(r) + " m outside [0, l6]");
    }
    const double kink = wing.hindwing_edge * std::sin(wing.hindwing_angle);
    if (r <= kink) {
        return wing.root_chord + r * std::cos(wing.hindwing_angle) / std::sin(wing.hindwing_angle);
    }
    const double corner_chord = wing.root_chord + wing.hindwing_edge * std::cos(wing.hindwing_angle);
    return corner_chord * (wing.span - r) / (wing.span - kink);
}

double mean_chord(const WingGeometry& wing) {
    const double s = std::sin(wing.hindwing_angle);
    const double c = std::cos(wing.hindwing_angle);
    return wing.root_chord * wing.hindwing_edge * s / (2.0 * wing.span) + wing.root_chord / 2.0 +
           wing.hindwing_edge * c / 2.0;
}

double planform_area(const WingGeometry& wing) { return mean_chord(wing) * wing.span; }

double second_moment_radius(const WingGeometry& wing, int n) {
    if (n < 64) {
        fail(ErrorKind::Validation, "second moment quadrature needs at least 64 points");
    }
    const double kink = std::clamp(wing.hindwing_edge * std::sin(wing.hindwing_angle), 0.0, wing.span);
    const int inner = std::max(2, static_cast<int>(std::lround(n * kink / wing.span)));
    const int outer = std::max(2, n - inner);
    auto integrand = [&](double r) { return chord_at(wing, r) * r * r; };
    const double moment = simpson(integrand, 0.0, kink, inner) + simpson(integrand, kink, wing.span, outer);
    return std::sqrt(moment / planform_area(wing));
}

double reynolds(const WingGeometry& wing, double frequency, double stroke, const Environment& env) {
    if (!(frequency > 0.0) || !(stroke > 0.0)) {
        fail(ErrorKind::Validation, "reynolds needs positive flapping frequency and stroke");
    }
    const double travel = 2.0 * stroke * second_moment_radius(wing);
    const double u_ref = frequency * travel;
    return mean_chord(wing) * u_ref / env.viscosity;
}

Configuration model_preset() {
    Configuration c;
    c.preset = "model";
    c.linkage = ThoraxLinkage{
        .wing_base = 14.95e-3,
        .wall = 13.49e-3,
        .base = 13.75e-3,
        .rod = 30e-3,
        .crank = 10e-3,
        .tergum = 4.89e-3,
        .slider_offset = 30e-3,
        .stiffness = 1.57e-3,
    };
    c.wing = WingGeometry{
        .span = 190e-3,
        .hindwing_edge = 100e-3,
        .root_chord = 65e-3,
        .hindwing_angle = 10.0 * kDeg,
        .inertia = 3.98e-6,
        .mass_radius = 81.7e-3,
        .mass = 0.425e-3,
    };
    c.abdomen = AbdomenParams{
        .pivot_dx = 55e-3,
        .pivot_dy = 3.75e-3,
        .mass_arm = 150e-3,
        .mass = 2e-3,
        .com_to_nose = 60e-3,
    };
    return c;
}

Configuration prototype_preset() {
    Configuration c = model_preset();
    c.preset = "prototype";
    c.abdomen.mass_arm = 80e-3;
    c.abdomen.mass = 1.8e-3;
    return c;
}

std::optional<Configuration> preset_by_name(std::string_view name) {
    if (name == "model") return model_preset();
    if (name == "prototype") return prototype_preset();
    return std::nullopt;
}

HingeSpec calibrated_tpu_hinge() {
    return HingeSpec{
        .youngs_modulus = 26e6,
        .width = 10e-3,
        .thickness = 1e-3,
        .length = 0.013800424628450107,
    };
}

}  // namespace butterfly
