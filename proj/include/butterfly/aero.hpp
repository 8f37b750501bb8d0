#pragma once

#include "butterfly/params.hpp"

#include <span>
#include <vector>

namespace butterfly {

// Reynolds-dependent amplitudes of the translational lift/drag laws.
struct AeroCoefficients {
    double drag_amplitude = 0.0;  // A_D
    double drag_base = 0.0;       // C_D0
    double lift_amplitude = 0.0;  // A_L
};

struct ForceCoefficients {
    double lift = 0.0;  // C_Lt
    double drag = 0.0;  // C_Dt
};

// Magnitudes; the caller applies signs.
struct StripForces {
    double drag = 0.0;
    double lift = 0.0;
    double drag_moment = 0.0;  // about the flapping axis
};

// Throws Error{ModelRange} when the fitted laws go negative (Re too low).
AeroCoefficients coefficients_from_re(double re);

ForceCoefficients lift_drag_coeff(const AeroCoefficients& c, double alpha);

// Midpoint blade-element sums over `n_strips` strips of width l6/n_strips, strip
// speed r·|θ̇|.
StripForces strip_forces(const WingGeometry& wing, double theta_dot, double alpha,
                         const AeroCoefficients& coeffs, const Environment& env, int n_strips);

// Blade-element sums with the θ̇² factor pulled out; the integrator evaluates this
// every stage so the strip geometry is summed once.
class BladeElementWing {
public:
    BladeElementWing(const WingGeometry& wing, double alpha, const AeroCoefficients& coeffs,
                     const Environment& env, int n_strips);

    StripForces at(double theta_dot) const;

    ForceCoefficients coefficients() const { return coeffs_; }

private:
    ForceCoefficients coeffs_;
    double force_factor_ = 0.0;   // ½ρ Σ c r² Δr
    double moment_factor_ = 0.0;  // ½ρ Σ c r³ Δr
};

// Pairwise summation; order-independent up to the fixed tree shape.
double pairwise_sum(std::span<const double> values);

// Time-weighted mean (trapezoid) over the last whole number of periods in the record.
// Errors: InsufficientData when the record spans less than one period.
double average_lift(std::span<const double> time, std::span<const double> lift, double period);

}  // namespace butterfly
