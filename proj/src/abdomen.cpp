#include "butterfly/abdomen.hpp"

#include "butterfly/aero.hpp"
#include "butterfly/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace butterfly {

namespace {

double sgn(double v) { return (v > 0.0) - (v < 0.0); }

template <typename Fn>
auto run_stage(int stage, const char* label, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.kind(), fmt::format("coupled pipeline stage {} ({}): {}", stage, label, e.what()));
    }
}

// Linear interpolation on a uniform grid starting at t = 0, held flat past the ends.
class UniformSeries {
public:
    UniformSeries(std::vector<double> values, double dt) : values_(std::move(values)), dt_(dt) {}

    double operator()(double t) const {
        const double u = t / dt_;
        if (u <= 0.0) return values_.front();
        const auto last = values_.size() - 1;
        if (u >= static_cast<double>(last)) return values_.back();
        const auto i = static_cast<std::size_t>(u);
        const double w = u - static_cast<double>(i);
        return values_[i] + w * (values_[i + 1] - values_[i]);
    }

private:
    std::vector<double> values_;
    double dt_;
};

}  // namespace

double abdomen_angle(const AbdomenParams& ab, double x) { return -std::atan((x - ab.pivot_dy) / ab.pivot_dx); }

AbdomenTrace abdomen_kinematics(const AbdomenParams& ab, std::span<const double> x, double dt) {
    if (x.size() < 5) {
        fail(ErrorKind::InsufficientData,
             fmt::format("abdomen kinematics need at least 5 samples, got {}", x.size()));
    }
    if (!(dt > 0.0)) fail(ErrorKind::Validation, "abdomen kinematics need a positive sample step");

    const std::size_t n = x.size();
    AbdomenTrace out;
    out.time.resize(n);
    out.angle.resize(n);
    out.rate.resize(n);
    out.acceleration.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.time[i] = static_cast<double>(i) * dt;
        out.angle[i] = abdomen_angle(ab, x[i]);
    }

    const auto& f = out.angle;
    const double h2 = dt * dt;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        out.rate[i] = (f[i + 1] - f[i - 1]) / (2.0 * dt);
        out.acceleration[i] = ((f[i + 1] - f[i]) - (f[i] - f[i - 1])) / h2;
    }
    // One-sided stencils written as sums of differences so a constant series
    // differentiates to exactly zero.
    auto d = [&](std::size_t a, std::size_t b) { return f[a] - f[b]; };
    out.rate[0] = (3.0 * d(1, 0) + d(1, 2)) / (2.0 * dt);
    out.rate[n - 1] = (3.0 * d(n - 1, n - 2) + d(n - 3, n - 2)) / (2.0 * dt);
    out.acceleration[0] = (2.0 * d(0, 1) - 3.0 * d(1, 2) + d(2, 3)) / h2;
    out.acceleration[n - 1] = (2.0 * d(n - 1, n - 2) - 3.0 * d(n - 2, n - 3) + d(n - 3, n - 4)) / h2;
    return out;
}

double slider_reaction(const AbdomenParams& ab, double theta_d, double theta_d_ddot, double x,
                       const Environment& env) {
    const double u = x - ab.pivot_dy;
    return -(ab.mass * ab.mass_arm * theta_d_ddot + ab.mass * env.gravity * std::cos(theta_d)) * ab.pivot_dx *
           ab.mass_arm / (u * u + ab.pivot_dx * ab.pivot_dx);
}

double reaction_residual(const AbdomenParams& ab, double f2, double theta_d, double theta_d_ddot, double x,
                         const Environment& env) {
    const double u = x - ab.pivot_dy;
    const double lhs = -f2 * (u * u + ab.pivot_dx * ab.pivot_dx) / (ab.pivot_dx * ab.mass_arm) -
                       ab.mass * env.gravity * std::cos(theta_d);
    return lhs - ab.mass * ab.mass_arm * theta_d_ddot;
}

AbdomenTrace abdomen_trace(const AbdomenParams& ab, const Trajectory& traj, const Environment& env) {
    const std::vector<double> x = traj.slider();
    AbdomenTrace trace = abdomen_kinematics(ab, x, traj.dt());
    trace.time = traj.times();
    trace.reaction.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        trace.reaction[i] = slider_reaction(ab, trace.angle[i], trace.acceleration[i], x[i], env);
    }
    return trace;
}

CoupledResult coupled_pipeline(const Configuration& config) {
    CoupledResult out;
    out.baseline = run_stage(1, "baseline wing trajectory", [&] { return simulate(config); });
    out.trace = run_stage(2, "abdomen reaction", [&] { return abdomen_trace(config.abdomen, out.baseline, config.env); });

    out.reaction = out.trace.reaction;
    out.drive.reserve(out.reaction.size());
    out.resultant.reserve(out.reaction.size());
    for (std::size_t i = 0; i < out.reaction.size(); ++i) {
        out.drive.push_back(out.baseline.samples[i].drive_force);
        out.resultant.push_back(out.drive.back() + out.reaction[i]);
    }

    out.corrected = run_stage(3, "corrected wing trajectory", [&] {
        SimulateOptions opts;
        opts.coefficients = out.baseline.coefficients;
        opts.reynolds = out.baseline.reynolds;
        opts.extra_force = UniformSeries(out.reaction, config.sim.dt);
        return simulate(config, opts);
    });

    run_stage(4, "lift and moments", [&] {
        out.freq_baseline = flapping_frequency(out.baseline);
        out.freq_coupled = flapping_frequency(out.corrected);
        const std::vector<double> t = out.baseline.times();
        out.lift_baseline = average_lift(t, out.baseline.lifts(), 1.0 / out.freq_baseline);
        out.lift_corrected = average_lift(out.corrected.times(), out.corrected.lifts(), 1.0 / out.freq_coupled);
        out.lift_gain = out.lift_corrected / out.lift_baseline - 1.0;
        const AbdomenTrace own = abdomen_trace(config.abdomen, out.corrected, config.env);
        out.moments = pitch_moments(out.corrected, own, config.abdomen, config.wing, config.env);
        return 0;
    });
    if (!std::isfinite(out.lift_gain)) {
        fail(ErrorKind::InsufficientData, "coupled pipeline: lift gain undefined (zero baseline lift)");
    }
    return out;
}

double antiphase_check(std::span<const double> wing_rate, std::span<const double> abdomen_rate) {
    if (wing_rate.size() != abdomen_rate.size()) {
        fail(ErrorKind::Validation, "wing and abdomen rate series lengths differ");
    }
    std::size_t counted = 0;
    std::size_t agree = 0;
    for (std::size_t i = 0; i < wing_rate.size(); ++i) {
        const double a = -wing_rate[i];
        const double b = abdomen_rate[i];
        if (a == 0.0 || b == 0.0) continue;
        ++counted;
        if ((a > 0.0) == (b > 0.0)) ++agree;
    }
    if (counted == 0) {
        fail(ErrorKind::InsufficientData, "antiphase check undefined: no samples with both rates nonzero");
    }
    return static_cast<double>(agree) / static_cast<double>(counted);
}

double antiphase_check(const Trajectory& traj, const AbdomenTrace& trace) {
    // A centered difference whose stencil straddles a wing turning point has no
    // defined sign; such samples are dropped like zero-rate samples.
    std::vector<double> wing = traj.rates();
    const std::vector<double> theta = traj.angles();
    for (std::size_t i = 1; i + 1 < theta.size(); ++i) {
        const double back = theta[i] - theta[i - 1];
        const double ahead = theta[i + 1] - theta[i];
        if (!((back > 0.0 && ahead > 0.0) || (back < 0.0 && ahead < 0.0))) wing[i] = 0.0;
    }
    return antiphase_check(wing, trace.rate);
}

MomentSeries pitch_moments(const Trajectory& traj, const AbdomenTrace& trace, const AbdomenParams& ab,
                           const WingGeometry& wing, const Environment& env) {
    if (traj.samples.size() != trace.angle.size()) {
        fail(ErrorKind::Validation, "trajectory and abdomen trace are not aligned");
    }
    const double arm = ab.com_to_nose - mean_chord(wing) / 4.0;
    MomentSeries out;
    const std::size_t n = traj.samples.size();
    out.abdomen.resize(n);
    out.drag.resize(n);
    out.total.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& s = traj.samples[i];
        out.drag[i] = sgn(s.state.theta_dot) * 2.0 * s.drag * arm;
        out.abdomen[i] =
            ab.mass * (env.gravity * std::cos(trace.angle[i]) + ab.mass_arm * trace.acceleration[i]) * ab.mass_arm;
        out.total[i] = out.drag[i] + out.abdomen[i];
    }
    return out;
}

}  // namespace butterfly
