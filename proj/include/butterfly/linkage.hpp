#pragma once

#include "butterfly/params.hpp"

namespace butterfly {

// Slider displacement from the neutral point D, positive upward, plus the
// direction the crank is currently driving it (+1 up, -1 down).
struct SliderState {
    double x = 0.0;
    int stroke_dir = 1;
};

struct CrankPose {
    double psi = 0.0;  // crank to rod
    double phi = 0.0;  // rod to vertical
};

struct SpringDeflections {
    double wall_joint = 0.0;  // θ_B, wing base to thorax wall
    double base_joint = 0.0;  // θ_C, thorax wall to thorax base
};

struct StaticStroke {
    double up = 0.0;
    double down = 0.0;
};

// Slider travel the crank can produce: [|l4 - l5| - d2, l4 + l5 - d2].
struct SliderLimits {
    double low = 0.0;
    double high = 0.0;
};

// Clamps arcsin/arccos arguments within 1e-12 of ±1; anything further out throws
// Error{Geometry} carrying `what`.
double checked_unit(double arg, const char* what);

double delta_angle(const ThoraxLinkage& link, double theta_a);

double slider_from_wing(const ThoraxLinkage& link, double theta_a);

// Inverse of slider_from_wing by bisection on [-70°, 80°].
double wing_from_slider(const ThoraxLinkage& link, double x);

SliderLimits slider_limits(const ThoraxLinkage& link);

CrankPose crank_pose(const ThoraxLinkage& link, double x);

// Vertical force on the slider, positive upward; zero at either dead center.
double drive_force(const ThoraxLinkage& link, double tau, const SliderState& slider);

SpringDeflections spring_deflections(const ThoraxLinkage& link, double theta_a);

StaticStroke static_stroke(const ThoraxLinkage& link, double x_max);

}  // namespace butterfly
