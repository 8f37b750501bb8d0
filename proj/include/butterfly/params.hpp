#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace butterfly {

// Pseudo-rigid half-thorax: rigid links joined by torsional springs of equal stiffness.
// All lengths in metres.
struct ThoraxLinkage {
    double wing_base = 0.0;     // l1, wing-base link
    double wall = 0.0;          // l2, thorax-wall link
    double base = 0.0;          // l3, thorax-base link
    double rod = 0.0;           // l4, slide (connecting) rod
    double crank = 0.0;         // l5
    double tergum = 0.0;        // d1
    double slider_offset = 0.0; // d2, crank centre to neutral slider position
    double stiffness = 0.0;     // K, N·m/rad
};

// Flexure hinge geometry and material, for K = E·I/H with I = b·t³/12.
struct HingeSpec {
    double youngs_modulus = 0.0;  // Pa
    double width = 0.0;           // m
    double thickness = 0.0;       // m
    double length = 0.0;          // m
};

// One wing, forewing and hindwing lumped into a single quadrilateral planform.
struct WingGeometry {
    double span = 0.0;           // l6, root to tip along the flapping axis
    double hindwing_edge = 0.0;  // l7
    double root_chord = 0.0;     // c_r
    double hindwing_angle = 0.0; // Phi, rad
    double inertia = 0.0;        // kg·m² about the flapping axis
    double mass_radius = 0.0;    // R_C, spanwise position of the mass centre
    double mass = 0.0;           // m1, kg
};

struct AbdomenParams {
    double pivot_dx = 0.0;     // d3, pivot to slider, horizontal
    double pivot_dy = 0.0;     // d4, pivot to neutral slider, vertical
    double mass_arm = 0.0;     // d5, pivot to abdomen mass
    double mass = 0.0;         // m2, kg
    double com_to_nose = 0.0;  // d_c, body CoM to foremost point
};

struct Environment {
    double air_density = 1.225;  // kg/m³
    double viscosity = 1.5e-5;   // kinematic, m²/s
    double gravity = 9.81;       // m/s²
};

enum class AbdomenMode { None, FixedMass, Undulating };

std::string_view to_string(AbdomenMode mode);
std::optional<AbdomenMode> parse_abdomen_mode(std::string_view text);

struct SimConfig {
    double tau = 0.03;                  // crank drive torque, N·m
    double alpha = 1.2217304763960306;  // angle of attack, rad (70°)
    double dt = 2e-5;
    double duration = 2.0;
    int n_strips = 256;
    bool hinges_enabled = true;
    bool aero_enabled = true;
    AbdomenMode abdomen_mode = AbdomenMode::Undulating;
    // Slider clearance at each dead center where the crank reverses the drive, m.
    double dead_center_clearance = 2e-6;
    // Release angle; unset means the upper stroke limit.
    std::optional<double> initial_angle;
    // Reynolds number override; unset means estimate from a dry run.
    std::optional<double> reynolds;
};

struct Configuration {
    std::string preset = "model";
    ThoraxLinkage linkage;
    WingGeometry wing;
    AbdomenParams abdomen;
    Environment env;
    SimConfig sim;
};

// Validation throws Error{Validation} naming the offending config key.
void validate(const ThoraxLinkage& link);
void validate(const HingeSpec& hinge);
void validate(const WingGeometry& wing);
void validate(const AbdomenParams& abdomen);
void validate(const Environment& env);
void validate(const SimConfig& sim);
void validate(const Configuration& config);

// Design slider stroke the linkage must accommodate on either side of neutral.
inline constexpr double kDesignStroke = 0.010;

double hinge_stiffness(const HingeSpec& hinge);

// Angle between the thorax wall and the x-axis in the unloaded configuration.
double neutral_wall_angle(const ThoraxLinkage& link);

// Piecewise-linear chord of the quadrilateral planform with vertices
// (0,0), (l6,0), (l7·sinΦ, c_r + l7·cosΦ), (0, c_r).
double chord_at(const WingGeometry& wing, double r);

double mean_chord(const WingGeometry& wing);

double planform_area(const WingGeometry& wing);

/// Radius of second moment of area, sqrt(∫ c r² dr / S), by composite Simpson
/// over `n` intervals split at the planform kink.
double second_moment_radius(const WingGeometry& wing, int n = 4096);

/// Reynolds number c̄·U/ν with U = f·l and l = 2·stroke·R2, the arc a point at
/// R2 sweeps over one up-and-down cycle.
double reynolds(const WingGeometry& wing, double frequency, double stroke,
                const Environment& env);

Configuration model_preset();
Configuration prototype_preset();
std::optional<Configuration> preset_by_name(std::string_view name);

// TPU flexure whose stiffness matches the model preset's K.
HingeSpec calibrated_tpu_hinge();

}  // namespace butterfly
