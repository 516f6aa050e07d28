#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "flightopt/geo.hpp"

using namespace flightopt;

namespace {
const geo::Projection kEquator{{0.0, 0.0}};
}

TEST_CASE("one degree east at the equator") {
    // R * pi/180 with R = 6378.137 km, evaluated independently.
    const auto p = geo::project({1.0, 0.0}, kEquator);
    CHECK(p.x == doctest::Approx(111.31949079327356).epsilon(1e-12));
    CHECK(p.y == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("one degree north from the equator") {
    const auto p = geo::project({0.0, 1.0}, kEquator);
    CHECK(p.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.y == doctest::Approx(111.32514286638556).epsilon(1e-12));
}

TEST_CASE("chicago to san francisco") {
    const geo::Projection proj{{-87.9048, 41.9786}};
    const auto sfo = geo::project({-122.3750, 37.6188}, proj);
    CHECK(sfo.x == doctest::Approx(-3837.2051115422987).epsilon(1e-12));
    CHECK(sfo.y == doctest::Approx(-632.0602473767392).epsilon(1e-12));
    CHECK(geo::plane_distance({0.0, 0.0}, sfo) ==
          doctest::Approx(3888.912858931181).epsilon(1e-12));
}

TEST_CASE("shifted origin") {
    const geo::Projection proj{{10.0, 45.0}};
    const auto p = geo::project({12.5, 47.25}, proj);
    CHECK(p.x == doctest::Approx(278.2987269831839).epsilon(1e-12));
    CHECK(p.y == doctest::Approx(361.4548467596476).epsilon(1e-12));
}

TEST_CASE("origin projects to zero") {
    const geo::Projection proj{{-87.9048, 41.9786}};
    const auto p = geo::project(proj.origin, proj);
    CHECK(p.x == 0.0);
    CHECK(p.y == 0.0);
}

TEST_CASE("project and unproject round-trip") {
    const geo::Projection proj{{-87.9048, 41.9786}};
    for (double lon = -170.0; lon <= 170.0; lon += 33.7) {
        for (double lat = -80.0; lat <= 80.0; lat += 15.9) {
            const auto back = geo::unproject(geo::project({lon, lat}, proj), proj);
            CHECK(back.lon == doctest::Approx(lon).epsilon(1e-12));
            CHECK(back.lat == doctest::Approx(lat).epsilon(1e-12));
        }
    }
}

TEST_CASE("latitudes at or beyond the band are rejected") {
    CHECK_THROWS_AS(geo::project({0.0, 85.06}, kEquator), std::domain_error);
    CHECK_THROWS_AS(geo::project({0.0, -85.06}, kEquator), std::domain_error);
    CHECK_THROWS_AS(geo::project({0.0, 89.9}, kEquator), std::domain_error);
    CHECK_NOTHROW(geo::project({0.0, 85.05}, kEquator));

    // The message names the offending value.
    try {
        geo::project({0.0, 87.5}, kEquator);
        FAIL("expected a throw");
    } catch (const std::domain_error& e) {
        CHECK(std::string(e.what()).find("87.5") != std::string::npos);
    }
}

TEST_CASE("invalid projection origins are rejected") {
    CHECK_THROWS_AS(geo::project({0.0, 0.0}, {{0.0, 86.0}}), std::domain_error);
    geo::Projection bad{{0.0, 0.0}};
    bad.earth_radius_km = 0.0;
    CHECK_THROWS_AS(geo::project({1.0, 1.0}, bad), std::domain_error);
}

TEST_CASE("plane distance") {
    CHECK(geo::plane_distance({0.0, 0.0}, {3.0, 4.0}) == doctest::Approx(5.0));
    CHECK(geo::plane_distance({-1.0, -1.0}, {-1.0, -1.0}) == 0.0);
}
