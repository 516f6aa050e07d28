// Scenario files: one JSON document describing a complete optimization run —
// route, departure state, aircraft, horizon, bounds, weights, wind source,
// and solver options. Loading applies documented defaults and validates
// everything against the downstream type invariants; unknown keys are errors.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flightopt/dynamics.hpp"
#include "flightopt/geo.hpp"
#include "flightopt/solver.hpp"
#include "flightopt/transcription.hpp"
#include "flightopt/wind.hpp"

namespace flightopt::scenario {

/// Either a fixed travel time or a grid to scan for the smallest feasible one.
struct HorizonSpec {
    int N{35};
    std::optional<double> T_h;  // fixed horizon when set
    double t_lo_h{0.0};         // search grid otherwise
    double t_hi_h{0.0};
    double step_h{0.1};

    bool is_search() const { return !T_h.has_value(); }
};

struct WindSpec {
    enum class Kind { None, Csv, Inline };
    Kind kind{Kind::None};
    std::string csv_path;          // Kind::Csv
    std::vector<double> a, b;      // Kind::Inline
};

struct Scenario {
    std::string name;
    geo::GeoPoint origin{};
    geo::GeoPoint destination{};
    double v0_mps{0.0};
    double m0_kg{0.0};
    std::optional<double> theta0_rad;  // default: along-route bearing
    dynamics::AircraftParams aircraft{};
    HorizonSpec horizon{};
    Eigen::Matrix<double, 5, 1> x_lb, x_ub;
    Eigen::Vector2d u_lb, u_ub;
    Eigen::Matrix<double, 5, 1> q_diag;
    Eigen::Vector2d r_diag;
    transcription::ObjectiveMode mode{transcription::ObjectiveMode::TimeFocus};
    double w_fuel{1.0};
    double terminal_slack_km{1.0};
    WindSpec wind{};
    solver::SolverOptions solver_opts{};
    std::string output_dir;  // empty: resolved by the caller
};

/// Everything needed to run the scenario: the projection anchored at the
/// origin, the wind field, and the transcribed problem (dT_s set from the
/// fixed horizon, or from the low end of the search grid as a placeholder).
struct Assembled {
    geo::Projection proj;
    wind::PolynomialWindField field;
    transcription::CftocProblem problem;
};

/// Parses and validates a scenario document. Unknown keys anywhere are
/// rejected by name. Throws std::runtime_error with file/field context.
Scenario load_scenario(const std::string& path);

/// Same, from an in-memory JSON string (errors name `source` instead of a path).
Scenario parse_scenario(const std::string& json_text, const std::string& source = "scenario");

/// Re-emits a scenario as a JSON document with every field explicit; parsing
/// the output reproduces the scenario field-for-field.
std::string serialize_scenario(const Scenario& s);

/// Builds the projection, wind field, and CFTOC problem. Relative wind CSV
/// paths resolve against base_dir (the scenario file's directory).
Assembled assemble(const Scenario& s, const std::string& base_dir = ".");

}  // namespace flightopt::scenario
