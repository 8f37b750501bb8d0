#pragma once

#include "butterfly/flapdyn.hpp"
#include "butterfly/params.hpp"

#include <span>
#include <vector>

namespace butterfly {

// Abdomen swing on the source trajectory's sampling grid.
struct AbdomenTrace {
    std::vector<double> time;
    std::vector<double> angle;         // θ_D, rad
    std::vector<double> rate;          // θ̇_D, rad/s
    std::vector<double> acceleration;  // θ̈_D, rad/s²
    std::vector<double> reaction;      // F2, N (empty from abdomen_kinematics alone)
};

struct MomentSeries {
    std::vector<double> abdomen;  // M_abdomen
    std::vector<double> drag;     // M_drag, both wings
    std::vector<double> total;    // M_total
};

struct CoupledResult {
    Trajectory baseline;
    Trajectory corrected;
    AbdomenTrace trace;               // from the baseline slider motion
    std::vector<double> reaction;     // F2 on the baseline grid
    std::vector<double> drive;        // F1 from the baseline
    std::vector<double> resultant;    // F3 = F1 + F2
    double lift_baseline = 0.0;       // cycle-averaged F_lift
    double lift_corrected = 0.0;      // cycle-averaged F'_lift
    double lift_gain = 0.0;           // mean F'_lift / mean F_lift - 1
    double freq_baseline = 0.0;
    double freq_coupled = 0.0;
    MomentSeries moments;
};

// θ_D = -atan((x - d4)/d3); strictly decreasing in x.
double abdomen_angle(const AbdomenParams& ab, double x);

// θ_D with centered second-order differences (one-sided second order at the ends).
// Errors: InsufficientData with fewer than 5 samples.
AbdomenTrace abdomen_kinematics(const AbdomenParams& ab, std::span<const double> x, double dt);

// Vertical slider force from the abdomen mass balance.
double slider_reaction(const AbdomenParams& ab, double theta_d, double theta_d_ddot, double x,
                       const Environment& env);

// Left side minus right side of the abdomen mass balance for a given F2.
double reaction_residual(const AbdomenParams& ab, double f2, double theta_d, double theta_d_ddot, double x,
                         const Environment& env);

// Kinematics plus F2 for a simulated trajectory.
AbdomenTrace abdomen_trace(const AbdomenParams& ab, const Trajectory& traj, const Environment& env);

// Baseline run, abdomen reaction from its slider motion, then a re-run with F2 added
// to the crank force. Errors keep their kind and gain a stage label.
CoupledResult coupled_pipeline(const Configuration& config);

// Fraction of samples where -θ̇_A and θ̇_D share a sign, skipping samples where
// either is zero. Errors: InsufficientData when every sample is skipped.
double antiphase_check(std::span<const double> wing_rate, std::span<const double> abdomen_rate);
double antiphase_check(const Trajectory& traj, const AbdomenTrace& trace);

MomentSeries pitch_moments(const Trajectory& traj, const AbdomenTrace& trace, const AbdomenParams& ab,
                           const WingGeometry& wing, const Environment& env);

}  // namespace butterfly
