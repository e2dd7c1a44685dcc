#pragma once

#include <string_view>
#include <vector>

namespace sva::geo {

inline constexpr double kEarthRadiusM = 6371000.0;

struct GeoCoordinate {
    double lat = 0.0;
    double lon = 0.0;

    friend bool operator==(const GeoCoordinate&, const GeoCoordinate&) = default;
};

// Validates ranges and normalizes longitude into (-180, 180].
GeoCoordinate make_coordinate(double lat, double lon);
bool is_valid(const GeoCoordinate& c);

// Compass heading in [0, 360), clockwise from true north.
class HeadingDeg {
public:
    HeadingDeg() = default;
    explicit HeadingDeg(double degrees);

    double value() const noexcept { return value_; }
    HeadingDeg rotated(double delta) const { return HeadingDeg(value_ + delta); }

    friend bool operator==(const HeadingDeg&, const HeadingDeg&) = default;

private:
    double value_ = 0.0;
};

// Smallest absolute angle between two headings, in [0, 180].
double angular_difference(HeadingDeg a, HeadingDeg b);

enum class Cardinal { North, Northeast, East, Southeast, South, Southwest, West, Northwest };

Cardinal cardinal_of(HeadingDeg h);
std::string_view to_string(Cardinal c);
// "north", "northeast", ... for use inside prose.
std::string_view to_lower_string(Cardinal c);
Cardinal cardinal_from_string(std::string_view s);

double haversine_distance(const GeoCoordinate& a, const GeoCoordinate& b);
HeadingDeg initial_bearing(const GeoCoordinate& a, const GeoCoordinate& b);
// Great-circle advance of `distance_m` from `origin` along `bearing`.
GeoCoordinate destination_point(const GeoCoordinate& origin, HeadingDeg bearing, double distance_m);

class Polyline {
public:
    explicit Polyline(std::vector<GeoCoordinate> points);

    const std::vector<GeoCoordinate>& points() const noexcept { return points_; }
    // cumulative()[i] is the path distance from points()[0] to points()[i].
    const std::vector<double>& cumulative() const noexcept { return cumulative_; }
    double total_length() const noexcept { return cumulative_.back(); }

    // Index of the segment [i, i+1] containing path distance d.
    std::size_t segment_at(double d) const;

private:
    std::vector<GeoCoordinate> points_;
    std::vector<double> cumulative_;
};

GeoCoordinate interpolate_along(const Polyline& p, double d);
// Bearing of the polyline segment containing path distance d.
HeadingDeg heading_along(const Polyline& p, double d);

enum class PointKind { MidBlock, Intersection, Destination };
std::string_view to_string(PointKind k);
PointKind point_kind_from_string(std::string_view s);

struct SamplePoint {
    GeoCoordinate coord;
    HeadingDeg heading;
    double distance_from_start = 0.0;
    PointKind kind = PointKind::MidBlock;
};

struct SamplingConfig {
    double min_interval_m = 30.0;
    double max_interval_m = 40.0;

    void validate() const;
};

// Places points along the path every (min+max)/2 meters when the remainder
// lands in range; otherwise stretches those steps uniformly to the route end,
// or failing that adds one step and shrinks; otherwise keeps midpoint steps
// and lets the final gap be short. The last point is always at the route end.
std::vector<double> sample_distances(double total_length, const SamplingConfig& cfg);
std::vector<SamplePoint> sample_route(const Polyline& p, const SamplingConfig& cfg);

}  // namespace sva::geo
