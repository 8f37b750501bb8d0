#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "butterfly/errors.hpp"
#include "butterfly/flapdyn.hpp"
#include "support/dynamics.hpp"
#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

using namespace butterfly;
using oracle::kDeg;
using dynamics::rest_angle;

namespace {

Configuration model() { return model_preset(); }

AeroCoefficients coeffs() { return coefficients_from_re(1.1e4); }

std::vector<double> peaks(const std::vector<double>& v, bool maxima) {
    std::vector<double> out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
        const bool peak = maxima ? (v[i] > v[i - 1] && v[i] >= v[i + 1]) : (v[i] < v[i - 1] && v[i] <= v[i + 1]);
        if (peak) out.push_back(v[i]);
    }
    return out;
}

bool identical(const Trajectory& a, const Trajectory& b) {
    if (a.samples.size() != b.samples.size()) return false;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const auto& x = a.samples[i];
        const auto& y = b.samples[i];
        const double u[] = {x.state.t, x.state.theta, x.state.theta_dot, x.state.x, x.drive_force, x.lift, x.drag, x.drag_moment};
        const double w[] = {y.state.t, y.state.theta, y.state.theta_dot, y.state.x, y.drive_force, y.lift, y.drag, y.drag_moment};
        if (std::memcmp(u, w, sizeof u) != 0 || x.state.stroke_dir != y.state.stroke_dir) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("gravity sag at neutral") {
    const Configuration c = model();
    const WingState s{};
    const double a = wing_acceleration(s, c.linkage, c.wing, coeffs(), c.env, 0.0, 70.0 * kDeg, true);
    CHECK(a == doctest::Approx(oracle::gravity_sag(c.wing, c.env.gravity)).epsilon(1e-12));
    CHECK(a == doctest::Approx(-85.6).epsilon(1e-3));
}

TEST_CASE("drive torque at neutral") {
    const Configuration c = model();
    WingState s{};
    s.stroke_dir = 1;
    const double a = wing_acceleration(s, c.linkage, c.wing, coeffs(), c.env, 0.03, 70.0 * kDeg, true);
    const double f1 = oracle::drive_force(c.linkage, 0.03, 0.0, 1);
    CHECK(f1 == doctest::Approx(2.79).epsilon(2e-3));
    const double expected = (f1 * c.linkage.wing_base / 2.0 - c.wing.mass * c.env.gravity * c.wing.mass_radius) / c.wing.inertia;
    CHECK(a == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("hinges add restoring torque away from neutral") {
    Configuration on = model();
    Configuration off = model();
    off.sim.hinges_enabled = false;
    const WingModel m_on(on, coeffs());
    const WingModel m_off(off, coeffs());
    for (double deg = -35.0; deg <= 48.0; deg += 1.0) {
        if (deg == 0.0) continue;
        const double th = deg * kDeg;
        const double s_on = m_on.torques(th, 0.0, 1).spring;
        CHECK(std::abs(s_on) > std::abs(m_off.torques(th, 0.0, 1).spring));
        CHECK(m_off.torques(th, 0.0, 1).spring == 0.0);
        // Restoring: opposes the deflection.
        CHECK(s_on * th > 0.0);
    }
}

TEST_CASE("drag moment always resists the motion") {
    const WingModel m(model(), coeffs());
    for (double rate : {-60.0, -5.0, 0.0, 5.0, 60.0}) {
        const double drag = m.torques(0.1, rate, 1).drag;
        CHECK(drag * rate >= 0.0);
        if (rate == 0.0) CHECK(drag == 0.0);
    }
}

TEST_CASE("a state at rest with zero net moment is a fixed point") {
    Configuration c = model();
    c.sim.tau = 0.0;
    const WingModel m(c, coeffs());
    WingState s;
    s.theta = rest_angle(m);
    s.x = m.slider_position(s.theta);
    const WingState next = step(m, s, 2e-5);
    CHECK(next.t == doctest::Approx(2e-5).epsilon(1e-15));
    CHECK(std::abs(next.theta - s.theta) < 1e-12);
    CHECK(std::abs(next.theta_dot) < 1e-9);
}

TEST_CASE("undriven wing settles at the spring-gravity equilibrium") {
    Configuration c = model();
    c.sim.tau = 0.0;
    c.sim.initial_angle = 0.0;
    c.sim.duration = 4.0;
    const Trajectory t = simulate(c);
    const double rest = rest_angle(WingModel(c, t.coefficients));
    CHECK(rest < 0.0);
    CHECK(rest == doctest::Approx(-0.108).epsilon(0.02));

    const std::vector<double> th = t.angles();
    const std::vector<double> hi = peaks(th, true);
    const std::vector<double> lo = peaks(th, false);
    REQUIRE(hi.size() >= 3);
    for (std::size_t i = 1; i < hi.size(); ++i) CHECK(hi[i] <= hi[i - 1] + 1e-12);
    for (std::size_t i = 1; i < lo.size(); ++i) CHECK(lo[i] >= lo[i - 1] - 1e-12);
    CHECK(hi.back() - lo.back() < 0.5 * (hi.front() - lo.front()));
    CHECK(0.5 * (hi.back() + lo.back()) == doctest::Approx(rest).epsilon(0.05));
}

TEST_CASE("drag never pumps energy into the undriven wing") {
    Configuration c = model();
    c.sim.tau = 0.0;
    c.sim.duration = 2.0;
    const Trajectory t = simulate(c);
    const std::vector<double> hi = peaks(t.angles(), true);
    REQUIRE(hi.size() >= 3);
    for (std::size_t i = 1; i < hi.size(); ++i) CHECK(hi[i] <= hi[i - 1] + 1e-12);
}

TEST_CASE("energy is conserved without drive or drag") {
    CHECK(dynamics::energy_drift_per_cycle(dynamics::conservative(model())) < 1e-3);
}

TEST_CASE("position error shrinks at fourth order") {
    Configuration c = dynamics::conservative(model());
    c.sim.duration = 0.5;
    CHECK(dynamics::convergence_ratio(c, 8e-5) >= 8.0);
    CHECK(dynamics::convergence_ratio(dynamics::smooth_driven(model()), 4e-5) >= 8.0);
}

TEST_CASE("driven flapping") {
    const Trajectory t = simulate(model());
    SUBCASE("single degree of freedom") {
        double worst = 0.0;
        for (const auto& s : t.samples) worst = std::max(worst, std::abs(s.state.x - slider_from_wing(t.config.linkage, s.state.theta)));
        CHECK(worst < 1e-12);
    }
    SUBCASE("uniform grid and finite values") {
        for (std::size_t i = 0; i < t.samples.size(); ++i) {
            const auto& s = t.samples[i];
            CHECK(s.state.t == doctest::Approx(i * t.dt()).epsilon(1e-12));
            CHECK(std::isfinite(s.state.theta));
            CHECK(std::isfinite(s.state.theta_dot));
            CHECK(std::isfinite(s.lift));
        }
    }
    SUBCASE("starts at rest at the upper stop heading down") {
        const auto& s0 = t.samples.front().state;
        CHECK(s0.theta_dot == 0.0);
        CHECK(s0.stroke_dir == -1);
        CHECK(s0.theta == doctest::Approx(50.0 * kDeg).epsilon(0.03));
    }
    SUBCASE("frequency near the flight measurement") {
        CHECK(flapping_frequency(t) == doctest::Approx(8.0).epsilon(0.2));
    }
    SUBCASE("positive mean lift") {
        const double period = 1.0 / flapping_frequency(t);
        CHECK(average_lift(t.times(), t.lifts(), period) > 0.0);
    }
}

TEST_CASE("frequency increases with torque") {
    double prev = 0.0;
    for (double tau : {0.02, 0.025, 0.03}) {
        Configuration c = model();
        c.sim.tau = tau;
        const double f = flapping_frequency(simulate(c));
        CHECK(f > prev);
        prev = f;
    }
}

TEST_CASE("identical configurations give bit-identical trajectories") {
    Configuration c = model();
    c.sim.duration = 0.5;
    CHECK(identical(simulate(c), simulate(c)));
}

TEST_CASE("frequency of synthetic records") {
    std::vector<double> t;
    std::vector<double> th;
    for (int i = 0; i <= 20000; ++i) {
        t.push_back(i * 1e-4);
        th.push_back(std::sin(2.0 * std::numbers::pi * 8.0 * t.back()));
    }
    CHECK(flapping_frequency(t, th) == doctest::Approx(8.0).epsilon(1e-3));

    const std::vector<double> t2(t.begin(), t.begin() + 2500);
    const std::vector<double> th2(th.begin(), th.begin() + 2500);
    try {
        flapping_frequency(t2, th2);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InsufficientData);
    }
}

TEST_CASE("hinge effect") {
    const HingeEffect e = hinge_effect(model());
    CHECK(e.relative > 0.10);
    CHECK(e.relative < 0.25);
    CHECK(e.relative == doctest::Approx((e.with_hinges - e.without_hinges) / e.without_hinges));

    Configuration none = model();
    none.linkage.stiffness = 0.0;
    CHECK(hinge_effect(none).relative == 0.0);

    double prev = -1.0;
    for (double k : {0.5e-3, 1.0e-3, 1.57e-3}) {
        Configuration c = model();
        c.linkage.stiffness = k;
        const double r = hinge_effect(c).relative;
        CHECK(r > prev);
        prev = r;
    }
}

TEST_CASE("oversized steps diverge with the last valid state") {
    Configuration c = model();
    c.sim.dt = 0.5;
    c.sim.duration = 5.0;
    try {
        simulate(c);
        FAIL("expected divergence");
    } catch (const DivergenceError& e) {
        CHECK(e.kind() == ErrorKind::Divergence);
        CHECK(std::isfinite(e.last_valid().theta));
        CHECK(std::isfinite(e.last_valid().theta_dot));
    }
}
