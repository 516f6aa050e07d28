// Post-solution validation: control replay through the integrator, trajectory
// metrics, and comparison against recorded flight tracks.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flightopt/dynamics.hpp"
#include "flightopt/geo.hpp"
#include "flightopt/solver.hpp"
#include "flightopt/transcription.hpp"
#include "flightopt/wind.hpp"

namespace flightopt::sim {

/// One recorded position fix of a real flight.
struct TrackPoint {
    double t_s{0.0};
    geo::GeoPoint pos{};
    std::optional<double> altitude_ft{};  // carried through, never interpreted
};

struct TrajectoryMetrics {
    double travel_time_h{0.0};
    double fuel_burned_kg{0.0};
    double path_length_km{0.0};
    double max_cross_track_km{0.0};   // 0 when no reference was given
    double mean_cross_track_km{0.0};  // 0 when no reference was given
};

struct ReplayReport {
    std::vector<dynamics::State> trajectory;
    /// Max over nodes and components of |replayed - optimized| divided by the
    /// component's characteristic scale (transcription::kStateScale).
    double max_gap{0.0};
};

/// Re-integrates the converged controls with dynamics::simulate and reports
/// the worst scaled gap against the converged states. Throws
/// std::invalid_argument unless result.status == Converged.
ReplayReport replay(const solver::SolveResult& result,
                    const transcription::CftocProblem& problem,
                    const wind::PolynomialWindField& field,
                    const dynamics::AircraftParams& params);

/// Metrics of a discrete trajectory with uniform step dT_s. When a reference
/// track is supplied it must have at least 2 points and a projection must be
/// given (same origin as the trajectory) so cross-track distances live in the
/// same plane.
TrajectoryMetrics metrics(const std::vector<dynamics::State>& trajectory, double dT_s,
                          const dynamics::AircraftParams& params,
                          const std::vector<TrackPoint>& reference = {},
                          const std::optional<geo::Projection>& proj = std::nullopt);

/// Parses a track CSV (header `acid,t,lon,lat,alt`, alt may be empty) into
/// per-flight tracks sorted by time. Every fix must project under proj.
/// Throws std::runtime_error naming the line on malformed rows and if the
/// file yields no tracks.
std::map<std::string, std::vector<TrackPoint>> load_tracks(const std::string& path,
                                                           const geo::Projection& proj);

}  // namespace flightopt::sim
