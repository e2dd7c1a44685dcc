#include "sva/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sva/common.hpp"

namespace sva::geo {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double normalize_heading(double deg) {
    double v = std::fmod(deg, 360.0);
    if (v < 0.0) v += 360.0;
    // fmod can return 360 - epsilon which rounds back to 360 after the add.
    if (v >= 360.0) v = 0.0;
    return v;
}

void require_finite(const GeoCoordinate& c) {
    if (!std::isfinite(c.lat) || !std::isfinite(c.lon)) {
        fail(ErrorCode::InvalidArgument, "coordinate is not finite");
    }
}

}  // namespace

GeoCoordinate make_coordinate(double lat, double lon) {
    if (!std::isfinite(lat) || !std::isfinite(lon)) {
        fail(ErrorCode::InvalidArgument, "coordinate is not finite");
    }
    if (lat < -90.0 || lat > 90.0) {
        fail(ErrorCode::InvalidArgument, "latitude out of range: " + std::to_string(lat));
    }
    double l = std::fmod(lon + 180.0, 360.0);
    if (l <= 0.0) l += 360.0;
    return {lat, l - 180.0};
}

bool is_valid(const GeoCoordinate& c) {
    return std::isfinite(c.lat) && std::isfinite(c.lon) && c.lat >= -90.0 && c.lat <= 90.0 &&
           c.lon > -180.0 && c.lon <= 180.0;
}

HeadingDeg::HeadingDeg(double degrees) {
    if (!std::isfinite(degrees)) fail(ErrorCode::InvalidArgument, "heading is not finite");
    value_ = normalize_heading(degrees);
}

double angular_difference(HeadingDeg a, HeadingDeg b) {
    double d = std::fabs(a.value() - b.value());
    return d > 180.0 ? 360.0 - d : d;
}

Cardinal cardinal_of(HeadingDeg h) {
    // Sector k covers [45k - 22.5, 45k + 22.5); a boundary value belongs to
    // the clockwise sector.
    auto sector = static_cast<int>(std::floor((h.value() + 22.5) / 45.0)) % 8;
    return static_cast<Cardinal>(sector);
}

std::string_view to_string(Cardinal c) {
    switch (c) {
        case Cardinal::North: return "North";
        case Cardinal::Northeast: return "Northeast";
        case Cardinal::East: return "East";
        case Cardinal::Southeast: return "Southeast";
        case Cardinal::South: return "South";
        case Cardinal::Southwest: return "Southwest";
        case Cardinal::West: return "West";
        case Cardinal::Northwest: return "Northwest";
    }
    return "North";
}

std::string_view to_lower_string(Cardinal c) {
    switch (c) {
        case Cardinal::North: return "north";
        case Cardinal::Northeast: return "northeast";
        case Cardinal::East: return "east";
        case Cardinal::Southeast: return "southeast";
        case Cardinal::South: return "south";
        case Cardinal::Southwest: return "southwest";
        case Cardinal::West: return "west";
        case Cardinal::Northwest: return "northwest";
    }
    return "north";
}

Cardinal cardinal_from_string(std::string_view s) {
    for (int i = 0; i < 8; ++i) {
        auto c = static_cast<Cardinal>(i);
        if (s == to_string(c) || s == to_lower_string(c)) return c;
    }
    fail(ErrorCode::InvalidArgument, "unknown cardinal: " + std::string(s));
}

double haversine_distance(const GeoCoordinate& a, const GeoCoordinate& b) {
    require_finite(a);
    require_finite(b);
    const double phi1 = a.lat * kDeg;
    const double phi2 = b.lat * kDeg;
    const double dphi = (b.lat - a.lat) * kDeg;
    const double dlambda = (b.lon - a.lon) * kDeg;
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

HeadingDeg initial_bearing(const GeoCoordinate& a, const GeoCoordinate& b) {
    require_finite(a);
    require_finite(b);
    if (a == b) fail(ErrorCode::DegenerateBearing, "bearing between identical points");
    const double phi1 = a.lat * kDeg;
    const double phi2 = b.lat * kDeg;
    const double dlambda = (b.lon - a.lon) * kDeg;
    const double y = std::sin(dlambda) * std::cos(phi2);
    const double x = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
    return HeadingDeg(std::atan2(y, x) / kDeg);
}

GeoCoordinate destination_point(const GeoCoordinate& origin, HeadingDeg bearing, double distance_m) {
    require_finite(origin);
    const double delta = distance_m / kEarthRadiusM;
    const double theta = bearing.value() * kDeg;
    const double phi1 = origin.lat * kDeg;
    const double lambda1 = origin.lon * kDeg;
    const double sin_phi2 =
        std::sin(phi1) * std::cos(delta) + std::cos(phi1) * std::sin(delta) * std::cos(theta);
    const double phi2 = std::asin(std::clamp(sin_phi2, -1.0, 1.0));
    const double lambda2 =
        lambda1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                             std::cos(delta) - std::sin(phi1) * sin_phi2);
    return make_coordinate(phi2 / kDeg, lambda2 / kDeg);
}

Polyline::Polyline(std::vector<GeoCoordinate> points) : points_(std::move(points)) {
    if (points_.size() < 2) fail(ErrorCode::InvalidArgument, "polyline needs at least two points");
    cumulative_.reserve(points_.size());
    cumulative_.push_back(0.0);
    for (std::size_t i = 1; i < points_.size(); ++i) {
        if (!is_valid(points_[i]) || !is_valid(points_[i - 1])) {
            fail(ErrorCode::InvalidArgument, "polyline contains an invalid coordinate");
        }
        const double d = haversine_distance(points_[i - 1], points_[i]);
        if (!(d > 0.0)) {
            fail(ErrorCode::InvalidArgument, "polyline has repeated consecutive points at index " +
                                                 std::to_string(i));
        }
        cumulative_.push_back(cumulative_.back() + d);
    }
}

std::size_t Polyline::segment_at(double d) const {
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), d);
    auto idx = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
    if (idx == 0) return 0;
    return std::min(idx - 1, points_.size() - 2);
}

GeoCoordinate interpolate_along(const Polyline& p, double d) {
    if (!std::isfinite(d) || d < 0.0 || d > p.total_length()) {
        fail(ErrorCode::OutOfRange, "distance " + std::to_string(d) + " outside polyline length " +
                                        std::to_string(p.total_length()));
    }
    if (d == 0.0) return p.points().front();
    if (d == p.total_length()) return p.points().back();
    const auto i = p.segment_at(d);
    const double offset = d - p.cumulative()[i];
    if (offset == 0.0) return p.points()[i];
    const auto& a = p.points()[i];
    const auto& b = p.points()[i + 1];
    return destination_point(a, initial_bearing(a, b), offset);
}

HeadingDeg heading_along(const Polyline& p, double d) {
    const auto i = p.segment_at(d);
    return initial_bearing(p.points()[i], p.points()[i + 1]);
}

std::string_view to_string(PointKind k) {
    switch (k) {
        case PointKind::MidBlock: return "MidBlock";
        case PointKind::Intersection: return "Intersection";
        case PointKind::Destination: return "Destination";
    }
    return "MidBlock";
}

PointKind point_kind_from_string(std::string_view s) {
    if (s == "MidBlock") return PointKind::MidBlock;
    if (s == "Intersection") return PointKind::Intersection;
    if (s == "Destination") return PointKind::Destination;
    fail(ErrorCode::InvalidArgument, "unknown point kind: " + std::string(s));
}

void SamplingConfig::validate() const {
    if (!(min_interval_m > 0.0) || !(min_interval_m <= max_interval_m) || !std::isfinite(max_interval_m)) {
        fail(ErrorCode::InvalidArgument, "sampling interval must satisfy 0 < min <= max");
    }
}

std::vector<double> sample_distances(double total_length, const SamplingConfig& cfg) {
    cfg.validate();
    if (!(total_length > 0.0) || !std::isfinite(total_length)) {
        fail(ErrorCode::InvalidArgument, "route has no length");
    }
    const double lo = cfg.min_interval_m;
    const double hi = cfg.max_interval_m;
    const double target = (lo + hi) / 2.0;
    // Tolerance for floating remainders; keeps 100 m / 35 m from missing a 30 m tail.
    constexpr double eps = 1e-9;

    std::vector<double> out;
    if (total_length < lo) return {0.0, total_length};

    const auto steps = static_cast<std::size_t>(std::floor(total_length / target + eps));
    const double remainder = total_length - static_cast<double>(steps) * target;
    const bool exact = remainder <= eps * total_length;
    if (exact || (remainder >= lo - eps && remainder <= hi + eps)) {
        for (std::size_t i = 0; i <= steps; ++i) out.push_back(static_cast<double>(i) * target);
        if (exact) out.back() = total_length;
        else out.push_back(total_length);
        return out;
    }

    // Stretch the midpoint steps to cover the remainder, else add one gap and
    // shrink. When neither fits no other uniform spacing does either.
    for (const std::size_t n : {steps, steps + 1}) {
        if (n == 0) continue;
        const double spacing = total_length / static_cast<double>(n);
        if (spacing < lo - eps || spacing > hi + eps) continue;
        for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<double>(i) * spacing);
        out.push_back(total_length);
        return out;
    }

    // No uniform spacing fits; the destination gap is allowed to be short.
    for (std::size_t i = 0; i <= steps; ++i) out.push_back(static_cast<double>(i) * target);
    out.push_back(total_length);
    return out;
}

std::vector<SamplePoint> sample_route(const Polyline& p, const SamplingConfig& cfg) {
    std::vector<SamplePoint> samples;
    for (double d : sample_distances(p.total_length(), cfg)) {
        SamplePoint s;
        s.coord = interpolate_along(p, d);
        s.heading = heading_along(p, d);
        s.distance_from_start = d;
        s.kind = PointKind::MidBlock;
        samples.push_back(s);
    }
    return samples;
}

}  // namespace sva::geo
