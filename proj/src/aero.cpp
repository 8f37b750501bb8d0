#include "butterfly/aero.hpp"

#include "butterfly/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace butterfly {

AeroCoefficients coefficients_from_re(double re) {
    if (!(re > 0.0) || !std::isfinite(re)) {
        fail(ErrorKind::ModelRange, fmt::format("Reynolds number must be positive, got {}", re));
    }
    AeroCoefficients c{
        .drag_amplitude = 1.873 - 3.14 * std::pow(re, -0.369),
        .drag_base = 0.031 + 10.48 * std::pow(re, -0.764),
        .lift_amplitude = 1.966 - 3.94 * std::pow(re, -0.429),
    };
    if (c.drag_amplitude < 0.0) {
        fail(ErrorKind::ModelRange,
             fmt::format("A_D = {:.6g} < 0 at Re = {:.6g}: below the fitted range", c.drag_amplitude, re));
    }
    if (c.drag_base < 0.0) {
        fail(ErrorKind::ModelRange,
             fmt::format("C_D0 = {:.6g} < 0 at Re = {:.6g}: below the fitted range", c.drag_base, re));
    }
    if (c.lift_amplitude < 0.0) {
        fail(ErrorKind::ModelRange,
             fmt::format("A_L = {:.6g} < 0 at Re = {:.6g}: below the fitted range", c.lift_amplitude, re));
    }
    return c;
}

ForceCoefficients lift_drag_coeff(const AeroCoefficients& c, double alpha) {
    return ForceCoefficients{
        .lift = c.lift_amplitude * std::sin(2.0 * alpha),
        .drag = c.drag_base + c.drag_amplitude * (1.0 - std::cos(2.0 * alpha)),
    };
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

StripForces strip_forces(const WingGeometry& wing, double theta_dot, double alpha,
                         const AeroCoefficients& coeffs, const Environment& env, int n_strips) {
    if (n_strips < 8) fail(ErrorKind::Validation, "sim.n_strips must be >= 8");
    const ForceCoefficients cf = lift_drag_coeff(coeffs, alpha);
    const double width = wing.span / n_strips;
    std::vector<double> drag(n_strips), lift(n_strips), moment(n_strips);
    for (int i = 0; i < n_strips; ++i) {
        const double r = (i + 0.5) * width;
        const double speed = r * std::abs(theta_dot);
        const double q = 0.5 * env.air_density * chord_at(wing, r) * speed * speed * width;
        drag[i] = q * cf.drag;
        lift[i] = q * cf.lift;
        moment[i] = drag[i] * r;
    }
    return StripForces{pairwise_sum(drag), pairwise_sum(lift), pairwise_sum(moment)};
}

BladeElementWing::BladeElementWing(const WingGeometry& wing, double alpha, const AeroCoefficients& coeffs,
                                   const Environment& env, int n_strips)
    : coeffs_(lift_drag_coeff(coeffs, alpha)) {
    if (n_strips < 8) fail(ErrorKind::Validation, "sim.n_strips must be >= 8");
    const double width = wing.span / n_strips;
    std::vector<double> second(n_strips), third(n_strips);
    for (int i = 0; i < n_strips; ++i) {
        const double r = (i + 0.5) * width;
        second[i] = chord_at(wing, r) * r * r * width;
        third[i] = second[i] * r;
    }
    force_factor_ = 0.5 * env.air_density * pairwise_sum(second);
    moment_factor_ = 0.5 * env.air_density * pairwise_sum(third);
}

StripForces BladeElementWing::at(double theta_dot) const {
    const double w2 = theta_dot * theta_dot;
    return StripForces{force_factor_ * coeffs_.drag * w2, force_factor_ * coeffs_.lift * w2,
                       moment_factor_ * coeffs_.drag * w2};
}

double average_lift(std::span<const double> time, std::span<const double> lift, double period) {
    if (time.size() != lift.size()) fail(ErrorKind::Validation, "lift and time series lengths differ");
    if (!(period > 0.0)) fail(ErrorKind::Validation, "average_lift needs a positive period");
    if (time.size() < 2 || time.back() - time.front() < period * (1.0 - 1e-12)) {
        fail(ErrorKind::InsufficientData, "lift series shorter than one period");
    }
    const double span = time.back() - time.front();
    const double cycles = std::max(1.0, std::floor(span / period + 1e-9));
    const double start = time.back() - cycles * period;

    double integral = 0.0;
    for (std::size_t i = 1; i < time.size(); ++i) {
        double t0 = time[i - 1];
        const double t1 = time[i];
        if (t1 <= start) continue;
        double y0 = lift[i - 1];
        if (t0 < start) {
            const double w = (start - t0) / (t1 - t0);
            y0 = y0 + w * (lift[i] - y0);
            t0 = start;
        }
        integral += 0.5 * (y0 + lift[i]) * (t1 - t0);
    }
    return integral / (time.back() - std::max(start, time.front()));
}

}  // namespace butterfly
