#include "flightopt/geo.hpp"

#include <numbers>
#include <sstream>
#include <stdexcept>

namespace flightopt::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void check_latitude(double lat_deg, const char* what) {
    if (!(lat_deg > -kMercatorLatLimitDeg && lat_deg < kMercatorLatLimitDeg)) {
        std::ostringstream msg;
        msg << what << " latitude " << lat_deg << " deg outside Mercator band (-"
            << kMercatorLatLimitDeg << ", " << kMercatorLatLimitDeg << ")";
        throw std::domain_error(msg.str());
    }
}

// Mercator ordinate ln tan(pi/4 + phi/2) for phi in radians.
double mercator_psi(double lat_rad) {
    return std::log(std::tan(0.25 * std::numbers::pi + 0.5 * lat_rad));
}

}  // namespace

PlanePoint project(const GeoPoint& p, const Projection& proj) {
    check_latitude(proj.origin.lat, "origin");
    check_latitude(p.lat, "point");
    if (!(proj.earth_radius_km > 0.0)) {
        throw std::domain_error("earth radius must be positive");
    }
    const double r = proj.earth_radius_km;
    PlanePoint q;
    q.x = r * (p.lon - proj.origin.lon) * kDegToRad;
    q.y = r * (mercator_psi(p.lat * kDegToRad) - mercator_psi(proj.origin.lat * kDegToRad));
    return q;
}

GeoPoint unproject(const PlanePoint& q, const Projection& proj) {
    check_latitude(proj.origin.lat, "origin");
    const double r = proj.earth_radius_km;
    GeoPoint p;
    p.lon = proj.origin.lon + (q.x / r) / kDegToRad;
    const double psi = q.y / r + mercator_psi(proj.origin.lat * kDegToRad);
    p.lat = (2.0 * std::atan(std::exp(psi)) - 0.5 * std::numbers::pi) / kDegToRad;
    return p;
}

}  // namespace flightopt::geo
