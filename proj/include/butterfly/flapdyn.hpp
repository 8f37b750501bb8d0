#pragma once

#include "butterfly/aero.hpp"
#include "butterfly/errors.hpp"
#include "butterfly/linkage.hpp"
#include "butterfly/params.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace butterfly {

struct WingState {
    double t = 0.0;
    double theta = 0.0;      // θ_A, wing-base angle from horizontal
    double theta_dot = 0.0;
    double x = 0.0;          // slider displacement, always slider_from_wing(theta)
    int stroke_dir = -1;
};

struct TrajectorySample {
    WingState state;
    double drive_force = 0.0;  // F1 from the crank, signed
    double lift = 0.0;         // half-wing lift magnitude
    double drag = 0.0;         // half-wing drag magnitude
    double drag_moment = 0.0;  // M_Fdrag magnitude
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    Configuration config;
    double reynolds = 0.0;
    AeroCoefficients coefficients;

    double dt() const { return config.sim.dt; }
    std::vector<double> times() const;
    std::vector<double> angles() const;
    std::vector<double> rates() const;
    std::vector<double> slider() const;
    std::vector<double> lifts() const;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& message, const WingState& last_valid);

    const WingState& last_valid() const noexcept { return last_valid_; }

private:
    WingState last_valid_;
};

// Extra vertical force on the slider as a function of time (the abdomen reaction).
using SliderForce = std::function<double(double t)>;

// Moment balance about the wing base: crank drive through the thorax linkage,
// lumped hinge springs, aerodynamic drag moment and wing weight.
class WingModel {
public:
    WingModel(const Configuration& config, const AeroCoefficients& coeffs);

    struct Torques {
        double drive = 0.0;
        double spring = 0.0;   // restoring, signed with θ_A
        double drag = 0.0;     // resisting, signed with θ̇
        double gravity = 0.0;
    };

    Torques torques(double theta, double theta_dot, int stroke_dir, double extra_force = 0.0) const;
    double acceleration(double theta, double theta_dot, int stroke_dir, double extra_force = 0.0) const;

    // Signed F1 with the slider position clamped to the crank's reach.
    double crank_force(double x, int stroke_dir) const;
    double slider_position(double theta) const;

    double upper_stop() const { return upper_stop_; }
    double lower_stop() const { return lower_stop_; }
    const BladeElementWing& blade() const { return blade_; }
    const Configuration& config() const { return config_; }

private:
    Configuration config_;
    BladeElementWing blade_;
    double wall_angle_ = 0.0;
    SliderLimits limits_;
    double upper_stop_ = 0.0;
    double lower_stop_ = 0.0;
};

double wing_acceleration(const WingState& state, const ThoraxLinkage& link, const WingGeometry& wing,
                         const AeroCoefficients& coeffs, const Environment& env, double tau, double alpha,
                         bool hinges_enabled);

// One fixed RK4 step of (θ_A, θ̇). Dead-center stops and stroke reversals inside the
// step are located by bisection on the sub-step and the step is split there.
// Errors: DivergenceError when the state leaves the linkage's reachable range.
WingState step(const WingModel& model, const WingState& state, double dt, const SliderForce& extra = {});

struct SimulateOptions {
    std::optional<AeroCoefficients> coefficients;  // skip the Reynolds estimate
    std::optional<double> reynolds;                // recorded with explicit coefficients
    SliderForce extra_force;
};

Trajectory simulate(const Configuration& config, const SimulateOptions& options = {});

// Reynolds number from a coarse drag-free run and the static stroke.
double estimate_reynolds(const Configuration& config);

// 1 / mean period between upward crossings of θ_A − mean(θ_A), dropping the first
// period. Errors: InsufficientData with fewer than three crossings.
double flapping_frequency(std::span<const double> time, std::span<const double> theta);
double flapping_frequency(const Trajectory& traj);

struct HingeEffect {
    double with_hinges = 0.0;     // Hz
    double without_hinges = 0.0;  // Hz
    double relative = 0.0;
};

HingeEffect hinge_effect(const Configuration& config);

}  // namespace butterfly
