#include "butterfly/linkage.hpp"

#include "butterfly/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace butterfly {

namespace {

constexpr double kUnitSlack = 1e-12;
constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kBracketLow = -70.0 * kDeg;
constexpr double kBracketHigh = 80.0 * kDeg;

bool slider_defined(const ThoraxLinkage& link, double theta_a) {
    const double arg = (link.wing_base * std::cos(theta_a) - link.base + link.tergum) / link.wall;
    return std::abs(arg) <= 1.0 + kUnitSlack;
}

// Pulls a bracket end toward neutral until the slider map is defined there.
double shrink_to_defined(const ThoraxLinkage& link, double end) {
    for (int i = 0; i < 60 && !slider_defined(link, end); ++i) end *= 0.5;
    return end;
}

}  // namespace

double checked_unit(double arg, const char* what) {
    if (!std::isfinite(arg) || std::abs(arg) > 1.0 + kUnitSlack) {
        fail(ErrorKind::Geometry, fmt::format("{} out of range (argument {:.6g})", what, arg));
    }
    return std::clamp(arg, -1.0, 1.0);
}

double delta_angle(const ThoraxLinkage& link, double theta_a) {
    const double arg = (link.wing_base * std::cos(theta_a) - link.base + link.tergum) / link.wall;
    return std::asin(checked_unit(
        arg, "linkage cannot reach the wing angle: (l1 cos(theta_A) - l3 + d1)/l2"));
}

double slider_from_wing(const ThoraxLinkage& link, double theta_a) {
    const double wall_angle = neutral_wall_angle(link);
    const double delta = delta_angle(link, theta_a);
    return link.wall * std::sin(wall_angle) - link.wall * std::cos(delta) +
           link.wing_base * std::sin(theta_a);
}

double wing_from_slider(const ThoraxLinkage& link, double x) {
    double lo = shrink_to_defined(link, kBracketLow);
    double hi = shrink_to_defined(link, kBracketHigh);
    double f_lo = slider_from_wing(link, lo) - x;
    double f_hi = slider_from_wing(link, hi) - x;
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if (f_lo * f_hi > 0.0) {
        fail(ErrorKind::Geometry,
             fmt::format("slider displacement {:.6g} m unreachable: no sign change for wing angles in "
                         "[{:.1f}, {:.1f}] deg",
                         x, lo / kDeg, hi / kDeg));
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f_mid = slider_from_wing(link, mid) - x;
        if (f_mid == 0.0) return mid;
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

SliderLimits slider_limits(const ThoraxLinkage& link) {
    return SliderLimits{std::abs(link.rod - link.crank) - link.slider_offset,
                        link.rod + link.crank - link.slider_offset};
}

CrankPose crank_pose(const ThoraxLinkage& link, double x) {
    const double reach = link.slider_offset + x;
    if (!(reach > 0.0)) {
        fail(ErrorKind::Geometry, fmt::format("dead-center overrun: slider at x = {:.6g} m passes the crank centre", x));
    }
    const double cos_psi = (link.rod * link.rod + link.crank * link.crank - reach * reach) /
                           (2.0 * link.rod * link.crank);
    if (!std::isfinite(cos_psi) || std::abs(cos_psi) > 1.0 + kUnitSlack) {
        fail(ErrorKind::Geometry,
             fmt::format("dead-center overrun: slider at x = {:.6g} m violates |l4 - l5| <= d2 + x <= l4 + l5", x));
    }
    const double psi = std::acos(std::clamp(cos_psi, -1.0, 1.0));
    const double phi = std::asin(checked_unit(link.crank * std::sin(psi) / reach, "rod angle sin(phi)"));
    return CrankPose{psi, phi};
}

double drive_force(const ThoraxLinkage& link, double tau, const SliderState& slider) {
    const CrankPose pose = crank_pose(link, slider.x);
    // sin ψ from the clamped cosine vanishes exactly at either dead center.
    const double cos_psi = std::cos(pose.psi);
    const double sin_psi = std::sqrt(std::max(0.0, 1.0 - cos_psi * cos_psi));
    return slider.stroke_dir * (tau / link.crank) * sin_psi * std::cos(pose.phi);
}

SpringDeflections spring_deflections(const ThoraxLinkage& link, double theta_a) {
    const double wall_angle = neutral_wall_angle(link);
    const double delta = delta_angle(link, theta_a);
    constexpr double half_pi = std::numbers::pi / 2.0;
    return SpringDeflections{std::abs(wall_angle - (half_pi - theta_a - delta)),
                             std::abs(wall_angle - (half_pi - delta))};
}

StaticStroke static_stroke(const ThoraxLinkage& link, double x_max) {
    if (x_max == 0.0) return StaticStroke{0.0, 0.0};
    return StaticStroke{wing_from_slider(link, x_max), wing_from_slider(link, -x_max)};
}

}  // namespace butterfly
