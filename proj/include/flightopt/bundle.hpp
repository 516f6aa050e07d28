// Result bundles: the plot-ready files a run leaves behind (trajectory.csv,
// metrics.json, trajectory.geojson, solver.log) plus readers for the pieces
// the compare/replay commands need back. All writes are atomic (temp file +
// rename) and byte-deterministic for identical inputs.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flightopt/dynamics.hpp"
#include "flightopt/geo.hpp"
#include "flightopt/sim.hpp"
#include "flightopt/solver.hpp"
#include "flightopt/transcription.hpp"
#include "flightopt/wind.hpp"

namespace flightopt::bundle {

struct BundleInputs {
    std::string scenario_name;
    geo::Projection proj;
    geo::GeoPoint destination{};
    const transcription::CftocProblem* problem{nullptr};
    const solver::SolveResult* result{nullptr};
    std::vector<dynamics::State> states;
    std::vector<dynamics::Control> controls;
    sim::TrajectoryMetrics metrics{};
    double replay_gap{0.0};
    std::string objective_mode;  // "time" or "fuel"
    std::optional<double> T_min_h;
    std::vector<solver::MinTimeAttempt> attempts;  // nonempty for horizon searches
};

/// Writes trajectory.csv, metrics.json, trajectory.geojson, and solver.log
/// into dir (created if missing). Throws std::runtime_error on I/O failure.
void write_bundle(const std::string& dir, const BundleInputs& in);

/// Writes wind_fit.json (coefficients plus fit diagnostics) into dir.
void write_wind_fit(const std::string& dir, const wind::PolynomialWindField& field,
                    const wind::FitReport& report);

/// Writes a comparison report (cross-track metrics against one track) into path.
void write_compare(const std::string& path, const std::string& acid,
                   const sim::TrajectoryMetrics& m);

struct LoadedTrajectory {
    std::vector<dynamics::State> states;
    std::vector<dynamics::Control> controls;  // one fewer than states
    double dT_s{0.0};
};

/// Reads back a bundle's trajectory.csv.
LoadedTrajectory load_trajectory_csv(const std::string& path);

struct BundleMeta {
    geo::GeoPoint origin{};
    geo::GeoPoint destination{};
    int N{0};
    double dT_s{0.0};
    std::string status;
    std::string objective_mode;
};

/// Reads the fields compare/replay need from a bundle's metrics.json.
BundleMeta read_bundle_meta(const std::string& dir);

/// Serializes a double with full round-trip precision (%.17g).
std::string format_full(double value);

}  // namespace flightopt::bundle
