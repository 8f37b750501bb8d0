#pragma once

#include <array>
#include <cstddef>
#include <istream>
#include <optional>
#include <string_view>
#include <vector>

namespace butterfly {

using Vec3 = std::array<double, 3>;

enum class Marker : std::size_t { TergumFront = 0, TergumRear = 1, TailUpper = 2, TailLower = 3 };

// One capture frame in the lab frame (z up, metres). Occluded markers are empty.
struct MarkerFrame {
    double t = 0.0;
    std::array<std::optional<Vec3>, 4> markers;

    const std::optional<Vec3>& operator[](Marker m) const { return markers[static_cast<std::size_t>(m)]; }
};

struct FlightRecord {
    std::vector<MarkerFrame> frames;
    double rate = 0.0;  // Hz; used only when the file has no time column
};

// Frames with at least one tergum and one tail marker.
struct Pose {
    double t = 0.0;
    Vec3 position{};  // tergum centroid
    double pitch = 0.0;  // rad, nose up positive
};

struct FlightMetrics {
    double forward_distance = 0.0;        // m
    double flight_duration = 0.0;         // s
    double final_altitude_drop = 0.0;     // m
    double pitch_p2p = 0.0;               // rad
    double pitch_dominant_freq = 0.0;     // Hz, 0 when fewer than two crossings
    double mean_vertical_velocity = 0.0;  // m/s
};

inline constexpr std::string_view kMocapHeader = "t_s,tfx,tfy,tfz,trx,try,trz,tux,tuy,tuz,tlx,tly,tlz";
inline constexpr double kLandingMargin = 0.05;

// Header must be the documented column set, with or without the leading t_s column.
// Lines starting with '#' are skipped. Errors: Parse (with line number), Ordering for
// decreasing explicit time, Validation for a non-positive rate without a time column.
FlightRecord parse_record(std::istream& input, double rate);

// Errors: DegeneratePose when the tergum and tail centroids are closer than 1e-6 m.
std::vector<Pose> pose_series(const FlightRecord& rec);
std::vector<double> pitch_series(const FlightRecord& rec);

// Centered differences of the tergum centroid, then a centered moving average over
// `window` samples (shrinking symmetrically at the ends). One entry per pose frame.
// Errors: InsufficientData with fewer than 3 pose frames, Validation for an even window.
std::vector<Vec3> velocity_series(const FlightRecord& rec, int window = 5);

// Forward is the direction of the initial horizontal velocity. Errors: EmptyFlight
// when the first pose is already below ground_z + landing_margin.
FlightMetrics flight_metrics(const FlightRecord& rec, double ground_z = 0.0,
                             double landing_margin = kLandingMargin);

}  // namespace butterfly
