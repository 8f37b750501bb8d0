#include "butterfly/mocap.hpp"

#include "butterfly/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

namespace butterfly {

namespace {

constexpr double kMinAxisLength = 1e-6;

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(std::string_view cell, std::size_t line_no, std::string_view column) {
    double value = 0.0;
    const auto* end = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
        fail(ErrorKind::Parse, fmt::format("line {}: column {}: '{}' is not a finite number", line_no, column, cell));
    }
    return value;
}

Vec3 centroid(const std::optional<Vec3>& a, const std::optional<Vec3>& b) {
    if (a && b) return Vec3{0.5 * ((*a)[0] + (*b)[0]), 0.5 * ((*a)[1] + (*b)[1]), 0.5 * ((*a)[2] + (*b)[2])};
    return a ? *a : *b;
}

double lerp(double a, double b, double w) { return a + w * (b - a); }

}  // namespace

FlightRecord parse_record(std::istream& input, double rate) {
    static const std::vector<std::string_view> columns = split(kMocapHeader);

    FlightRecord rec;
    rec.rate = rate;
    std::string raw;
    std::size_t line_no = 0;
    bool have_header = false;
    bool has_time = false;
    while (std::getline(input, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (trim(line).empty() || line.front() == '#') continue;

        if (!have_header) {
            if (line == kMocapHeader) {
                has_time = true;
            } else if (line == kMocapHeader.substr(4)) {
                has_time = false;
                if (!(rate > 0.0) || !std::isfinite(rate)) {
                    fail(ErrorKind::Validation, "mocap file has no t_s column: a positive --rate is required");
                }
            } else {
                fail(ErrorKind::Parse, fmt::format("line {}: expected header '{}'", line_no, kMocapHeader));
            }
            have_header = true;
            continue;
        }

        const auto cells = split(line);
        const std::size_t expected = has_time ? 13 : 12;
        if (cells.size() != expected) {
            fail(ErrorKind::Parse,
                 fmt::format("line {}: expected {} fields, found {}", line_no, expected, cells.size()));
        }
        MarkerFrame frame;
        std::size_t c = 0;
        if (has_time) {
            frame.t = parse_number(trim(cells[0]), line_no, "t_s");
            c = 1;
            if (!rec.frames.empty() && frame.t < rec.frames.back().t) {
                fail(ErrorKind::Ordering, fmt::format("line {}: time {} s precedes the previous frame ({} s)",
                                                      line_no, frame.t, rec.frames.back().t));
            }
        } else {
            frame.t = static_cast<double>(rec.frames.size()) / rate;
        }
        for (std::size_t m = 0; m < 4; ++m) {
            int blanks = 0;
            Vec3 p{};
            for (std::size_t k = 0; k < 3; ++k) {
                const std::string_view cell = trim(cells[c + 3 * m + k]);
                if (cell.empty()) {
                    ++blanks;
                } else {
                    p[k] = parse_number(cell, line_no, columns[1 + 3 * m + k]);
                }
            }
            if (blanks == 0) {
                frame.markers[m] = p;
            } else if (blanks != 3) {
                fail(ErrorKind::Parse, fmt::format("line {}: marker {} is partially blank", line_no,
                                                   columns[1 + 3 * m].substr(0, 2)));
            }
        }
        rec.frames.push_back(frame);
    }
    if (!have_header) fail(ErrorKind::Parse, fmt::format("line {}: missing header", line_no + 1));
    return rec;
}

std::vector<Pose> pose_series(const FlightRecord& rec) {
    std::vector<Pose> out;
    for (const auto& f : rec.frames) {
        const auto& tf = f[Marker::TergumFront];
        const auto& tr = f[Marker::TergumRear];
        const auto& tu = f[Marker::TailUpper];
        const auto& tl = f[Marker::TailLower];
        if (!(tf || tr) || !(tu || tl)) continue;

        const Vec3 tergum = centroid(tf, tr);
        const Vec3 tail = centroid(tu, tl);
        const Vec3 axis{tergum[0] - tail[0], tergum[1] - tail[1], tergum[2] - tail[2]};
        const double norm = std::hypot(axis[0], axis[1], axis[2]);
        if (norm < kMinAxisLength) {
            fail(ErrorKind::DegeneratePose,
                 fmt::format("frame at t = {} s: tergum and tail centroids coincide ({:.3g} m apart)", f.t, norm));
        }
        out.push_back(Pose{f.t, tergum, std::asin(std::clamp(axis[2] / norm, -1.0, 1.0))});
    }
    return out;
}

std::vector<double> pitch_series(const FlightRecord& rec) {
    std::vector<double> out;
    for (const auto& p : pose_series(rec)) out.push_back(p.pitch);
    return out;
}

std::vector<Vec3> velocity_series(const FlightRecord& rec, int window) {
    if (window < 1 || window % 2 == 0) fail(ErrorKind::Validation, "velocity window must be odd and >= 1");
    const std::vector<Pose> poses = pose_series(rec);
    const std::size_t n = poses.size();
    if (n < 3) fail(ErrorKind::InsufficientData, fmt::format("velocity needs at least 3 pose frames, got {}", n));

    auto diff = [&](std::size_t a, std::size_t b) {
        const double dt = poses[b].t - poses[a].t;
        if (!(dt > 0.0)) {
            fail(ErrorKind::Validation, fmt::format("duplicate timestamp {} s in pose frames", poses[a].t));
        }
        Vec3 v{};
        for (int k = 0; k < 3; ++k) v[k] = (poses[b].position[k] - poses[a].position[k]) / dt;
        return v;
    };

    std::vector<Vec3> raw(n);
    raw[0] = diff(0, 1);
    raw[n - 1] = diff(n - 2, n - 1);
    for (std::size_t i = 1; i + 1 < n; ++i) raw[i] = diff(i - 1, i + 1);

    const std::size_t half = static_cast<std::size_t>(window / 2);
    std::vector<Vec3> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t h = std::min({half, i, n - 1 - i});
        Vec3 sum{};
        for (std::size_t j = i - h; j <= i + h; ++j) {
            for (int k = 0; k < 3; ++k) sum[k] += raw[j][k];
        }
        for (int k = 0; k < 3; ++k) out[i][k] = sum[k] / static_cast<double>(2 * h + 1);
    }
    return out;
}

FlightMetrics flight_metrics(const FlightRecord& rec, double ground_z, double landing_margin) {
    const std::vector<Pose> poses = pose_series(rec);
    if (poses.empty()) fail(ErrorKind::EmptyFlight, "no frame has both a tergum and a tail marker");
    const double threshold = ground_z + landing_margin;
    if (poses.front().position[2] < threshold) {
        fail(ErrorKind::EmptyFlight,
             fmt::format("no airborne frames: first pose is below ground_z + {} m", landing_margin));
    }

    // Airborne window: poses [0, last] plus the interpolated landing point.
    std::size_t last = poses.size() - 1;
    double t_end = poses.back().t;
    Vec3 end = poses.back().position;
    for (std::size_t k = 1; k < poses.size(); ++k) {
        if (poses[k].position[2] < threshold) {
            last = k - 1;
            const auto& a = poses[k - 1];
            const auto& b = poses[k];
            const double w = (a.position[2] - threshold) / (a.position[2] - b.position[2]);
            t_end = lerp(a.t, b.t, w);
            for (int i = 0; i < 3; ++i) end[i] = lerp(a.position[i], b.position[i], w);
            break;
        }
    }

    const Vec3& start = poses.front().position;
    double fx = 0.0;
    double fy = 0.0;
    if (poses.size() >= 3) {
        const Vec3 v0 = velocity_series(rec).front();
        const double speed = std::hypot(v0[0], v0[1]);
        if (speed > 1e-9) {
            fx = v0[0] / speed;
            fy = v0[1] / speed;
        }
    }
    auto forward = [&](const Vec3& p) {
        const double dx = p[0] - start[0];
        const double dy = p[1] - start[1];
        return (fx == 0.0 && fy == 0.0) ? std::hypot(dx, dy) : dx * fx + dy * fy;
    };

    FlightMetrics m;
    m.forward_distance = std::max(0.0, forward(end));
    double pitch_min = poses.front().pitch;
    double pitch_max = poses.front().pitch;
    double pitch_mean = 0.0;
    for (std::size_t i = 0; i <= last; ++i) {
        m.forward_distance = std::max(m.forward_distance, forward(poses[i].position));
        pitch_min = std::min(pitch_min, poses[i].pitch);
        pitch_max = std::max(pitch_max, poses[i].pitch);
        pitch_mean += poses[i].pitch;
    }
    pitch_mean /= static_cast<double>(last + 1);

    m.flight_duration = t_end - poses.front().t;
    m.final_altitude_drop = start[2] - end[2];
    m.mean_vertical_velocity = m.flight_duration > 0.0 ? (end[2] - start[2]) / m.flight_duration : 0.0;
    m.pitch_p2p = pitch_max - pitch_min;

    std::vector<double> crossings;
    for (std::size_t i = 1; i <= last; ++i) {
        const double a = poses[i - 1].pitch - pitch_mean;
        const double b = poses[i].pitch - pitch_mean;
        if (a < 0.0 && b >= 0.0) crossings.push_back(lerp(poses[i - 1].t, poses[i].t, -a / (b - a)));
    }
    if (crossings.size() >= 2) {
        m.pitch_dominant_freq = static_cast<double>(crossings.size() - 1) / (crossings.back() - crossings.front());
    }
    return m;
}

}  // namespace butterfly
