#include "butterfly/flapdyn.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace butterfly {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

// Coarse drag-free run used to estimate the flapping frequency for Re.
constexpr double kDryRunStep = 1e-4;
constexpr double kDryRunDuration = 1.0;

// Sub-step splits per step before the remainder is taken without event handling.
constexpr int kMaxEvents = 16;
constexpr int kBisections = 80;

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

struct Phase {
    double theta;
    double theta_dot;
};

// Classic RK4 over h with the stroke direction frozen.
Phase rk4(const WingModel& model, const WingState& s, double h, const SliderForce& extra) {
    auto force = [&](double t) { return extra ? extra(t) : 0.0; };
    const double f0 = force(s.t);
    const double fm = force(s.t + 0.5 * h);
    const double f1 = force(s.t + h);
    const int sd = s.stroke_dir;

    const double k1x = s.theta_dot;
    const double k1v = model.acceleration(s.theta, s.theta_dot, sd, f0);
    const double k2x = s.theta_dot + 0.5 * h * k1v;
    const double k2v = model.acceleration(s.theta + 0.5 * h * k1x, k2x, sd, fm);
    const double k3x = s.theta_dot + 0.5 * h * k2v;
    const double k3v = model.acceleration(s.theta + 0.5 * h * k2x, k3x, sd, fm);
    const double k4x = s.theta_dot + h * k3v;
    const double k4v = model.acceleration(s.theta + h * k3x, k4x, sd, f1);

    return Phase{s.theta + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
                 s.theta_dot + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)};
}

enum class Event { None, UpperStop, LowerStop, Reversal };

Event triggered(const WingModel& model, const WingState& from, const Phase& p) {
    if (p.theta > model.upper_stop() && from.theta <= model.upper_stop()) return Event::UpperStop;
    if (p.theta < model.lower_stop() && from.theta >= model.lower_stop()) return Event::LowerStop;
    if (from.stroke_dir * p.theta_dot < 0.0) return Event::Reversal;
    return Event::None;
}

bool fires(const WingModel& model, const WingState& from, const Phase& p, Event e) {
    switch (e) {
        case Event::UpperStop: return p.theta > model.upper_stop();
        case Event::LowerStop: return p.theta < model.lower_stop();
        case Event::Reversal: return from.stroke_dir * p.theta_dot < 0.0;
        case Event::None: return false;
    }
    return false;
}

// Smallest sub-step (to bisection precision) after which `e` has fired.
double locate(const WingModel& model, const WingState& from, double h, Event e, const SliderForce& extra) {
    double lo = 0.0;
    double hi = h;
    for (int i = 0; i < kBisections; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (fires(model, from, rk4(model, from, mid, extra), e)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

bool held(const WingModel& model, const WingState& s, const SliderForce& extra) {
    if (s.theta_dot != 0.0) return false;
    const double f = extra ? extra(s.t) : 0.0;
    if (s.theta >= model.upper_stop()) return model.acceleration(s.theta, 0.0, s.stroke_dir, f) > 0.0;
    if (s.theta <= model.lower_stop()) return model.acceleration(s.theta, 0.0, s.stroke_dir, f) < 0.0;
    return false;
}

WingState advance(const WingModel& model, const WingState& s, double dt, const SliderForce& extra) {
    WingState cur = s;
    double remaining = dt;
    for (int n = 0; remaining > 0.0; ++n) {
        if (held(model, cur, extra)) break;
        const Phase full = rk4(model, cur, remaining, extra);
        const Event first = n < kMaxEvents ? triggered(model, cur, full) : Event::None;
        if (first == Event::None) {
            cur.theta = full.theta;
            cur.theta_dot = full.theta_dot;
            break;
        }

        // Several events may fire in one step; take the earliest.
        Event event = first;
        double h = locate(model, cur, remaining, first, extra);
        for (Event other : {Event::UpperStop, Event::LowerStop, Event::Reversal}) {
            if (other == first || !fires(model, cur, full, other)) continue;
            if (other == Event::UpperStop && cur.theta > model.upper_stop()) continue;
            if (other == Event::LowerStop && cur.theta < model.lower_stop()) continue;
            const double h_other = locate(model, cur, remaining, other, extra);
            if (h_other < h) {
                h = h_other;
                event = other;
            }
        }

        const Phase at = rk4(model, cur, h, extra);
        cur.t += h;
        remaining -= h;
        cur.theta_dot = 0.0;
        switch (event) {
            case Event::UpperStop:
                cur.theta = model.upper_stop();
                cur.stroke_dir = -1;
                break;
            case Event::LowerStop:
                cur.theta = model.lower_stop();
                cur.stroke_dir = 1;
                break;
            default:
                cur.theta = at.theta;
                cur.stroke_dir = -cur.stroke_dir;
                break;
        }
    }
    cur.t = s.t + dt;
    return cur;
}

}  // namespace

std::vector<double> Trajectory::times() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.state.t);
    return out;
}

std::vector<double> Trajectory::angles() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.state.theta);
    return out;
}

std::vector<double> Trajectory::rates() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.state.theta_dot);
    return out;
}

std::vector<double> Trajectory::slider() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.state.x);
    return out;
}

std::vector<double> Trajectory::lifts() const {
    std::vector<double> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.lift);
    return out;
}

DivergenceError::DivergenceError(const std::string& message, const WingState& last_valid)
    : Error(ErrorKind::Divergence,
            fmt::format("{} (last valid state: t = {:.6g} s, theta_A = {:.6g} rad, theta_dot = {:.6g} rad/s)",
                        message, last_valid.t, last_valid.theta, last_valid.theta_dot)),
      last_valid_(last_valid) {}

WingModel::WingModel(const Configuration& config, const AeroCoefficients& coeffs)
    : config_(config),
      blade_(config.wing, config.sim.alpha, coeffs, config.env, config.sim.n_strips),
      wall_angle_(neutral_wall_angle(config.linkage)),
      limits_(slider_limits(config.linkage)) {
    const double clearance = config.sim.dead_center_clearance;
    if (2.0 * clearance >= limits_.high - limits_.low) {
        fail(ErrorKind::Validation, "sim.dead_center_clearance leaves no slider travel");
    }
    try {
        upper_stop_ = wing_from_slider(config.linkage, limits_.high - clearance);
        lower_stop_ = wing_from_slider(config.linkage, limits_.low + clearance);
    } catch (const Error& e) {
        fail(ErrorKind::Validation,
             fmt::format("linkage: crank dead centers unreachable by the thorax linkage ({})", e.what()));
    }
}

double WingModel::slider_position(double theta) const {
    const ThoraxLinkage& link = config_.linkage;
    const double delta = delta_angle(link, theta);
    return link.wall * std::sin(wall_angle_) - link.wall * std::cos(delta) + link.wing_base * std::sin(theta);
}

double WingModel::crank_force(double x, int stroke_dir) const {
    const SliderState slider{std::clamp(x, limits_.low, limits_.high), stroke_dir};
    return drive_force(config_.linkage, config_.sim.tau, slider);
}

WingModel::Torques WingModel::torques(double theta, double theta_dot, int stroke_dir, double extra_force) const {
    const ThoraxLinkage& link = config_.linkage;
    const WingGeometry& wing = config_.wing;
    const double delta = delta_angle(link, theta);
    const double x =
        link.wall * std::sin(wall_angle_) - link.wall * std::cos(delta) + link.wing_base * std::sin(theta);

    Torques out;
    const double force = crank_force(x, stroke_dir) + extra_force;
    out.drive = force * link.wing_base * std::sin(kHalfPi - theta - delta) / (2.0 * std::sin(kHalfPi - delta));
    if (config_.sim.hinges_enabled) {
        const double theta_b = std::abs(wall_angle_ - (kHalfPi - theta - delta));
        const double theta_c = std::abs(wall_angle_ - (kHalfPi - delta));
        out.spring = sgn(theta) * link.stiffness * (std::abs(theta) + theta_b + theta_c);
    }
    if (config_.sim.aero_enabled) {
        out.drag = sgn(theta_dot) * blade_.at(theta_dot).drag_moment;
    }
    out.gravity = wing.mass * config_.env.gravity * wing.mass_radius * std::cos(theta);
    return out;
}

double WingModel::acceleration(double theta, double theta_dot, int stroke_dir, double extra_force) const {
    const Torques m = torques(theta, theta_dot, stroke_dir, extra_force);
    return (m.drive - m.spring - m.drag - m.gravity) / config_.wing.inertia;
}

double wing_acceleration(const WingState& state, const ThoraxLinkage& link, const WingGeometry& wing,
                         const AeroCoefficients& coeffs, const Environment& env, double tau, double alpha,
                         bool hinges_enabled) {
    Configuration config;
    config.linkage = link;
    config.wing = wing;
    config.env = env;
    config.sim.tau = tau;
    config.sim.alpha = alpha;
    config.sim.hinges_enabled = hinges_enabled;
    config.sim.dead_center_clearance = 0.0;
    const WingModel model(config, coeffs);
    return model.acceleration(state.theta, state.theta_dot, state.stroke_dir);
}

WingState step(const WingModel& model, const WingState& state, double dt, const SliderForce& extra) {
    if (!(dt > 0.0)) fail(ErrorKind::Validation, "sim.dt must be positive");
    WingState next;
    try {
        next = advance(model, state, dt, extra);
        next.x = model.slider_position(next.theta);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::Geometry) throw;
        throw DivergenceError(fmt::format("wing left the reachable linkage range: {}", e.what()), state);
    }
    if (!std::isfinite(next.theta) || !std::isfinite(next.theta_dot) || !std::isfinite(next.x)) {
        throw DivergenceError("non-finite wing state", state);
    }
    return next;
}

Trajectory simulate(const Configuration& config, const SimulateOptions& options) {
    validate(config);

    Trajectory traj;
    traj.config = config;
    if (options.coefficients) {
        traj.coefficients = *options.coefficients;
        traj.reynolds = options.reynolds.value_or(config.sim.reynolds.value_or(0.0));
    } else {
        traj.reynolds = config.sim.reynolds ? *config.sim.reynolds : estimate_reynolds(config);
        traj.coefficients = coefficients_from_re(traj.reynolds);
    }

    const WingModel model(config, traj.coefficients);
    WingState state;
    state.theta = config.sim.initial_angle.value_or(model.upper_stop());
    if (state.theta > model.upper_stop() || state.theta < model.lower_stop()) {
        fail(ErrorKind::Validation,
             fmt::format("sim.initial_angle {:.4f} deg outside the stroke limits [{:.4f}, {:.4f}] deg",
                         state.theta * 180.0 / std::numbers::pi, model.lower_stop() * 180.0 / std::numbers::pi,
                         model.upper_stop() * 180.0 / std::numbers::pi));
    }
    state.x = model.slider_position(state.theta);
    state.stroke_dir = -1;

    const auto n = static_cast<std::size_t>(std::llround(config.sim.duration / config.sim.dt));
    traj.samples.reserve(n + 1);
    auto record = [&](const WingState& s) {
        TrajectorySample sample;
        sample.state = s;
        sample.drive_force = model.crank_force(s.x, s.stroke_dir);
        if (config.sim.aero_enabled) {
            const StripForces f = model.blade().at(s.theta_dot);
            sample.lift = f.lift;
            sample.drag = f.drag;
            sample.drag_moment = f.drag_moment;
        }
        traj.samples.push_back(sample);
    };

    record(state);
    for (std::size_t i = 1; i <= n; ++i) {
        state = step(model, state, config.sim.dt, options.extra_force);
        state.t = static_cast<double>(i) * config.sim.dt;
        record(state);
    }
    return traj;
}

double estimate_reynolds(const Configuration& config) {
    Configuration dry = config;
    dry.sim.aero_enabled = false;
    dry.sim.dt = kDryRunStep;
    dry.sim.duration = kDryRunDuration;
    dry.sim.initial_angle.reset();

    double frequency = 0.0;
    try {
        SimulateOptions opts;
        opts.coefficients = AeroCoefficients{};
        frequency = flapping_frequency(simulate(dry, opts));
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::InsufficientData && e.kind() != ErrorKind::Divergence) throw;
        if (!(config.sim.hinges_enabled && config.linkage.stiffness > 0.0)) {
            fail(ErrorKind::Validation,
                 fmt::format("cannot estimate the Reynolds number ({}); set sim.reynolds", e.what()));
        }
        frequency = std::sqrt(2.0 * config.linkage.stiffness / config.wing.inertia) / (2.0 * std::numbers::pi);
    }
    const StaticStroke stroke = static_stroke(config.linkage, kDesignStroke);
    return reynolds(config.wing, frequency, stroke.up - stroke.down, config.env);
}

double flapping_frequency(std::span<const double> time, std::span<const double> theta) {
    if (time.size() != theta.size()) fail(ErrorKind::Validation, "time and angle series lengths differ");
    if (time.size() < 3) fail(ErrorKind::InsufficientData, "angle series too short for a frequency");

    double mean = 0.0;
    for (double v : theta) mean += v;
    mean /= static_cast<double>(theta.size());

    std::vector<double> crossings;
    for (std::size_t i = 1; i < theta.size(); ++i) {
        const double a = theta[i - 1] - mean;
        const double b = theta[i] - mean;
        if (a < 0.0 && b >= 0.0) {
            const double w = -a / (b - a);
            crossings.push_back(time[i - 1] + w * (time[i] - time[i - 1]));
        }
    }
    if (crossings.size() < 3) {
        fail(ErrorKind::InsufficientData,
             fmt::format("need at least 3 upward mean crossings of theta_A, found {}", crossings.size()));
    }
    // The first period is the release transient.
    const double span = crossings.back() - crossings[1];
    return static_cast<double>(crossings.size() - 2) / span;
}

double flapping_frequency(const Trajectory& traj) {
    const std::vector<double> t = traj.times();
    const std::vector<double> theta = traj.angles();
    return flapping_frequency(t, theta);
}

HingeEffect hinge_effect(const Configuration& config) {
    Configuration on = config;
    on.sim.hinges_enabled = true;
    Configuration off = config;
    off.sim.hinges_enabled = false;

    HingeEffect out;
    out.with_hinges = flapping_frequency(simulate(on));
    out.without_hinges = flapping_frequency(simulate(off));
    out.relative = (out.with_hinges - out.without_hinges) / out.without_hinges;
    return out;
}

}  // namespace butterfly
