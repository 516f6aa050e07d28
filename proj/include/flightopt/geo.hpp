// Spherical (Pseudo-Mercator) projection between geographic coordinates and
// a planar kilometer grid anchored at a configurable origin.
#pragma once

#include <cmath>

namespace flightopt::geo {

/// Geographic position, decimal degrees. lon east-positive, lat north-positive.
struct GeoPoint {
    double lon{0.0};
    double lat{0.0};
};

/// Planar position in km relative to the projection origin. x east, y north.
struct PlanePoint {
    double x{0.0};
    double y{0.0};
};

/// Latitude band on which the Mercator formulas are well conditioned.
inline constexpr double kMercatorLatLimitDeg = 85.06;

/// WGS84 semi-major axis in km (Pseudo-Mercator uses the spherical formula on it).
inline constexpr double kEarthRadiusKm = 6378.137;

/**
 * Projection with origin at a reference point, so project(origin) == (0,0).
 * Units: kilometers in the plane, decimal degrees on the sphere.
 */
struct Projection {
    GeoPoint origin{};
    double earth_radius_km{kEarthRadiusKm};
};

/// Forward projection. Throws std::domain_error for latitudes outside the
/// Mercator band (the offending value is named in the message).
PlanePoint project(const GeoPoint& p, const Projection& proj);

/// Exact analytic inverse of project.
GeoPoint unproject(const PlanePoint& q, const Projection& proj);

/// Euclidean distance in the projected plane, km.
inline double plane_distance(const PlanePoint& a, const PlanePoint& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace flightopt::geo
