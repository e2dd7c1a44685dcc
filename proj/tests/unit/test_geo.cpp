#include <catch_amalgamated.hpp>

#include <random>

#include "oracles.hpp"
#include "test_util.hpp"
#include "sva/geo.hpp"

using namespace sva;
using namespace sva::geo;
using Catch::Approx;

TEST_CASE("haversine matches frozen reference values", "[geo]") {
    CHECK(haversine_distance({0, 0}, {0, 1}) == Approx(111194.9266).margin(0.01));
    CHECK(haversine_distance({40.7580, -73.9855}, {40.7484, -73.9857}) == Approx(1067.604).margin(0.01));
    CHECK(haversine_distance({10, 20}, {10, 20}) == 0.0);
}

TEST_CASE("initial bearing matches frozen reference values", "[geo]") {
    CHECK(initial_bearing({40, -75}, {41, -74}).value() == Approx(36.92588).margin(1e-4));
    CHECK(initial_bearing({0, 0}, {1, 0}).value() == Approx(0.0).margin(1e-9));
    CHECK(initial_bearing({0, 0}, {0, 1}).value() == Approx(90.0).margin(1e-9));
    CHECK(initial_bearing({0, 0}, {-1, 0}).value() == Approx(180.0).margin(1e-9));
    CHECK(initial_bearing({0, 0}, {0, -1}).value() == Approx(270.0).margin(1e-9));
}

TEST_CASE("bearing between identical points is degenerate", "[geo]") {
    CHECK(code_of([] { initial_bearing({47.6, -122.3}, {47.6, -122.3}); }) == ErrorCode::DegenerateBearing);
}

TEST_CASE("geodesy agrees with the chord-sum oracle on random pairs", "[geo][oracle]") {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> lat(-80, 80), lon(-180, 180), off(-0.5, 0.5);
    for (int i = 0; i < 200; ++i) {
        const double la = lat(rng), lo = lon(rng);
        // Mix city-scale and continental pairs.
        const double lb = i % 2 ? la + off(rng) : lat(rng);
        const double lob = i % 2 ? lo + off(rng) : lon(rng);
        const auto a = make_coordinate(la, lo);
        const auto b = make_coordinate(lb, lob);
        const double ref = oracle::chord_sum_distance(a.lat, a.lon, b.lat, b.lon);
        CHECK(haversine_distance(a, b) == Approx(ref).epsilon(0.005));
        if (ref > 1.0) {
            const double rb = oracle::small_step_bearing(a.lat, a.lon, b.lat, b.lon);
            CHECK(oracle::angle_gap(initial_bearing(a, b).value(), rb) < 0.1);
        }
    }
}

TEST_CASE("coordinates validate and normalize longitude", "[geo]") {
    CHECK(make_coordinate(10, 180).lon == 180.0);
    CHECK(make_coordinate(10, -180).lon == 180.0);
    CHECK(make_coordinate(10, 190).lon == Approx(-170.0));
    CHECK(make_coordinate(10, -190).lon == Approx(170.0));
    CHECK(make_coordinate(90, 0).lat == 90.0);
    CHECK(code_of([] { make_coordinate(90.5, 0); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { make_coordinate(std::nan(""), 0); }) == ErrorCode::InvalidArgument);
    CHECK_FALSE(is_valid({-91, 0}));
    CHECK(is_valid({-90, 180}));
}

TEST_CASE("headings normalize into [0, 360)", "[geo]") {
    CHECK(HeadingDeg(-90).value() == Approx(270));
    CHECK(HeadingDeg(360).value() == 0.0);
    CHECK(HeadingDeg(720.5).value() == Approx(0.5));
    CHECK(HeadingDeg(-1e-13).value() < 360.0);
    CHECK(HeadingDeg(10).rotated(-20).value() == Approx(350));
    CHECK(angular_difference(HeadingDeg(350), HeadingDeg(10)) == Approx(20));
    CHECK(angular_difference(HeadingDeg(0), HeadingDeg(180)) == Approx(180));
    CHECK(code_of([] { HeadingDeg(std::numeric_limits<double>::infinity()); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("cardinal sectors are 45 degrees wide, boundaries resolve clockwise", "[geo]") {
    CHECK(cardinal_of(HeadingDeg(0)) == Cardinal::North);
    CHECK(cardinal_of(HeadingDeg(180)) == Cardinal::South);
    CHECK(cardinal_of(HeadingDeg(22.4)) == Cardinal::North);
    CHECK(cardinal_of(HeadingDeg(22.5)) == Cardinal::Northeast);
    CHECK(cardinal_of(HeadingDeg(337.5)) == Cardinal::North);
    CHECK(cardinal_of(HeadingDeg(337.4)) == Cardinal::Northwest);
    CHECK(cardinal_of(HeadingDeg(270)) == Cardinal::West);
    CHECK(to_string(Cardinal::Southeast) == "Southeast");
    CHECK(to_lower_string(Cardinal::Southeast) == "southeast");
    CHECK(cardinal_from_string("northwest") == Cardinal::Northwest);
    CHECK(cardinal_from_string("West") == Cardinal::West);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> h(0, 360);
    for (int i = 0; i < 1000; ++i) {
        const double x = h(rng);
        for (int k = -3; k <= 3; ++k) CHECK(cardinal_of(HeadingDeg(x)) == cardinal_of(HeadingDeg(x + 360.0 * k)));
        // The sector centre is within 22.5 degrees.
        const double centre = 45.0 * static_cast<int>(cardinal_of(HeadingDeg(x)));
        CHECK(oracle::angle_gap(x, centre) <= 22.5 + 1e-9);
    }
}

TEST_CASE("destination_point inverts distance and bearing", "[geo]") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> lat(-70, 70), lon(-180, 180), brg(0, 360), dist(1, 50000);
    for (int i = 0; i < 200; ++i) {
        const auto o = make_coordinate(lat(rng), lon(rng));
        const HeadingDeg b(brg(rng));
        const double d = dist(rng);
        const auto p = destination_point(o, b, d);
        CHECK(haversine_distance(o, p) == Approx(d).epsilon(1e-6));
        CHECK(oracle::angle_gap(initial_bearing(o, p).value(), b.value()) < 1e-5);
    }
}

TEST_CASE("polyline construction and queries", "[geo]") {
    CHECK(code_of([] { Polyline({{0, 0}}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { Polyline({{0, 0}, {0, 0}}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { Polyline({{0, 0}, {0, 0.001}, {0, 0.001}}); }) == ErrorCode::InvalidArgument);

    const Polyline p({{0, 0}, {0, 0.001}, {0.001, 0.001}});
    REQUIRE(p.cumulative().size() == 3);
    CHECK(p.cumulative()[0] == 0.0);
    CHECK(p.cumulative()[1] == Approx(111.1949).margin(1e-3));
    CHECK(p.total_length() == Approx(2 * 111.1949).margin(1e-2));
    CHECK(interpolate_along(p, 0) == p.points().front());
    CHECK(haversine_distance(interpolate_along(p, p.total_length()), p.points().back()) < 1e-6);
    CHECK(heading_along(p, 10).value() == Approx(90).margin(1e-6));
    CHECK(heading_along(p, 150).value() == Approx(0).margin(1e-3));
    CHECK(p.segment_at(p.total_length()) == 1);
    CHECK(code_of([&] { interpolate_along(p, -1); }) == ErrorCode::OutOfRange);
    CHECK(code_of([&] { interpolate_along(p, p.total_length() + 1); }) == ErrorCode::OutOfRange);

    const auto mid = interpolate_along(p, 50);
    CHECK(haversine_distance(p.points()[0], mid) == Approx(50).epsilon(1e-9));
}

TEST_CASE("sample distances follow the midpoint policy", "[geo][sampling]") {
    const SamplingConfig cfg;
    CHECK(sample_distances(100, cfg) == std::vector<double>{0, 35, 70, 100});
    CHECK(sample_distances(20, cfg) == std::vector<double>{0, 20});
    CHECK(sample_distances(30, cfg) == std::vector<double>{0, 30});
    CHECK(sample_distances(70, cfg) == std::vector<double>{0, 35, 70});

    const auto d300 = sample_distances(300, cfg);
    REQUIRE(d300.size() == 9);
    for (std::size_t i = 0; i < d300.size(); ++i) CHECK(d300[i] == Approx(37.5 * static_cast<double>(i)));

    // 45 m: no uniform spacing fits, so the last gap is short.
    CHECK(sample_distances(45, cfg) == std::vector<double>{0, 35, 45});

    CHECK(code_of([&] { sample_distances(0, cfg); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { sample_distances(100, SamplingConfig{40, 30}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("100 m output is one of the feasible samplings and the midpoint one", "[geo][sampling]") {
    // Enumerate every sampling of 100 m whose inner gaps lie in [30, 40]
    // using 5 m resolution, keep those whose gaps are 35 m except the last.
    std::vector<std::vector<double>> midpoint_feasible;
    for (int a = 30; a <= 40; a += 5) {
        for (int b = 30; b <= 40; b += 5) {
            const int last = 100 - a - b;
            if (last <= 0 || last > 40) continue;
            if (a == 35 && b == 35) midpoint_feasible.push_back({0, 35, 70, 100});
        }
    }
    REQUIRE(midpoint_feasible.size() == 1);
    CHECK(sample_distances(100, SamplingConfig{}) == midpoint_feasible.front());
}

TEST_CASE("sampling invariant over random lengths", "[geo][sampling][property]") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> len(0.5, 6000);
    const SamplingConfig cfg;
    for (int i = 0; i < 5000; ++i) {
        const double L = len(rng);
        const auto d = sample_distances(L, cfg);
        REQUIRE(d.size() >= 2);
        CHECK(d.front() == 0.0);
        CHECK(d.back() == L);
        for (std::size_t k = 1; k < d.size(); ++k) {
            const double gap = d[k] - d[k - 1];
            CHECK(gap > 0);
            if (k + 1 < d.size()) {
                CHECK(gap >= 30 - 1e-9);
                CHECK(gap <= 40 + 1e-9);
            } else {
                CHECK(gap <= 40 + 1e-9);
            }
        }
    }
}

TEST_CASE("sample_route interpolates points and headings", "[geo][sampling]") {
    const auto a = make_coordinate(47.62, -122.34);
    const auto b = destination_point(a, HeadingDeg(90), 100);
    const auto c = destination_point(b, HeadingDeg(0), 100);
    const Polyline p({a, b, c});
    const auto samples = sample_route(p, SamplingConfig{});
    REQUIRE(samples.size() >= 6);
    CHECK(samples.front().coord == a);
    CHECK(haversine_distance(samples.back().coord, c) < 1e-3);
    for (const auto& s : samples) {
        CHECK(s.kind == PointKind::MidBlock);
        const auto expected = s.distance_from_start < p.cumulative()[1] ? 90.0 : 0.0;
        CHECK(oracle::angle_gap(s.heading.value(), expected) < 0.01);
    }
}

TEST_CASE("point kinds round-trip through strings", "[geo]") {
    for (auto k : {PointKind::MidBlock, PointKind::Intersection, PointKind::Destination}) {
        CHECK(point_kind_from_string(to_string(k)) == k);
    }
    CHECK(code_of([] { point_kind_from_string("Corner"); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("interpolating 50 m along a 100 m line gives the geographic midpoint", "[geo]") {
    const auto a = make_coordinate(47.6209, -122.3383);
    const auto b = destination_point(a, HeadingDeg(57), 100);
    const Polyline p({a, b});
    const auto mid = interpolate_along(p, p.total_length() / 2);
    const auto va = oracle::to_vec(a.lat, a.lon), vb = oracle::to_vec(b.lat, b.lon);
    const auto vm = oracle::slerp(va, vb, 0.5);
    const double lat = oracle::deg(std::asin(vm[2])), lon = oracle::deg(std::atan2(vm[1], vm[0]));
    CHECK(oracle::chord_sum_distance(mid.lat, mid.lon, lat, lon, 10) < 0.5);
}
