#include "flightopt/sim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace flightopt::sim {

namespace {

double parse_double(const std::string& field, const char* what) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(field, &consumed);
    } catch (const std::exception&) {
        throw std::runtime_error(std::string("cannot parse ") + what + " from '" + field + "'");
    }
    while (consumed < field.size() && std::isspace(static_cast<unsigned char>(field[consumed]))) {
        ++consumed;
    }
    if (consumed != field.size()) {
        throw std::runtime_error(std::string("trailing junk in ") + what + " field '" + field +
                                 "'");
    }
    if (!std::isfinite(value)) {
        throw std::runtime_error(std::string(what) + " is not finite: '" + field + "'");
    }
    return value;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trimmed(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Distance from p to the segment [a, b] in the plane.
double point_segment_distance(const geo::PlanePoint& p, const geo::PlanePoint& a,
                              const geo::PlanePoint& b) {
    const double abx = b.x - a.x;
    const double aby = b.y - a.y;
    const double len2 = abx * abx + aby * aby;
    double t = 0.0;
    if (len2 > 0.0) {
        t = ((p.x - a.x) * abx + (p.y - a.y) * aby) / len2;
        t = std::clamp(t, 0.0, 1.0);
    }
    return std::hypot(p.x - (a.x + t * abx), p.y - (a.y + t * aby));
}

double point_polyline_distance(const geo::PlanePoint& p,
                               const std::vector<geo::PlanePoint>& poly) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        best = std::min(best, point_segment_distance(p, poly[i], poly[i + 1]));
    }
    return best;
}

}  // namespace

ReplayReport replay(const solver::SolveResult& result,
                    const transcription::CftocProblem& problem,
                    const wind::PolynomialWindField& field,
                    const dynamics::AircraftParams& params) {
    if (result.status != solver::SolveStatus::Converged) {
        throw std::invalid_argument("replay requires a converged solve result");
    }
    const transcription::DecisionLayout layout{problem.N};
    if (result.z_star.size() != layout.dim()) {
        throw std::invalid_argument("replay: solution dimension does not match the problem");
    }

    std::vector<dynamics::State> optimized;
    std::vector<dynamics::Control> controls;
    optimized.reserve(problem.N + 1);
    controls.reserve(problem.N);
    for (int k = 0; k <= problem.N; ++k) {
        Eigen::Matrix<double, 5, 1> sv;
        for (int j = 0; j < 5; ++j) sv[j] = result.z_star[layout.state_index(k, j)];
        optimized.push_back(dynamics::State::from_vector(sv));
        if (k < problem.N) {
            controls.push_back({result.z_star[layout.control_index(k, 0)],
                                result.z_star[layout.control_index(k, 1)]});
        }
    }

    ReplayReport report;
    report.trajectory = dynamics::simulate(optimized.front(), controls, field, problem.dT_s,
                                           params, dynamics::Stepper::Euler);
    for (int k = 0; k <= problem.N; ++k) {
        const auto sim_v = report.trajectory[k].to_vector();
        const auto opt_v = optimized[k].to_vector();
        for (int j = 0; j < 5; ++j) {
            report.max_gap = std::max(
                report.max_gap, std::abs(sim_v[j] - opt_v[j]) / transcription::kStateScale[j]);
        }
    }
    return report;
}

TrajectoryMetrics metrics(const std::vector<dynamics::State>& trajectory, double dT_s,
                          const dynamics::AircraftParams& /*params*/,
                          const std::vector<TrackPoint>& reference,
                          const std::optional<geo::Projection>& proj) {
    if (trajectory.size() < 2) {
        throw std::invalid_argument("metrics needs a trajectory with at least 2 states");
    }
    if (!(dT_s > 0.0)) {
        throw std::invalid_argument("metrics: dT must be positive");
    }

    TrajectoryMetrics out;
    out.travel_time_h = (trajectory.size() - 1) * dT_s / 3600.0;
    out.fuel_burned_kg = trajectory.front().m - trajectory.back().m;
    for (std::size_t i = 0; i + 1 < trajectory.size(); ++i) {
        out.path_length_km = out.path_length_km + std::hypot(trajectory[i + 1].x - trajectory[i].x,
                                                             trajectory[i + 1].y - trajectory[i].y);
    }

    if (!reference.empty()) {
        if (reference.size() < 2) {
            throw std::invalid_argument("reference track needs at least 2 points");
        }
        if (!proj.has_value()) {
            throw std::invalid_argument(
                "cross-track metrics need the projection the trajectory was built with");
        }
        std::vector<geo::PlanePoint> poly;
        poly.reserve(reference.size());
        for (const auto& tp : reference) poly.push_back(geo::project(tp.pos, *proj));
        double sum = 0.0;
        for (const auto& s : trajectory) {
            const double d = point_polyline_distance({s.x, s.y}, poly);
            out.max_cross_track_km = std::max(out.max_cross_track_km, d);
            sum += d;
        }
        out.mean_cross_track_km = sum / static_cast<double>(trajectory.size());
    }
    return out;
}

std::map<std::string, std::vector<TrackPoint>> load_tracks(const std::string& path,
                                                           const geo::Projection& proj) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open track file: " + path);
    }

    std::map<std::string, std::vector<TrackPoint>> tracks;
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trimmed(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        try {
            if (!header_seen) {
                if (stripped != "acid,t,lon,lat,alt") {
                    throw std::runtime_error("expected header 'acid,t,lon,lat,alt', got '" +
                                             stripped + "'");
                }
                header_seen = true;
                continue;
            }
            const auto fields = split_fields(line);
            if (fields.size() != 5) {
                throw std::runtime_error("expected 5 comma-separated fields, got " +
                                         std::to_string(fields.size()));
            }
            const std::string acid = trimmed(fields[0]);
            if (acid.empty()) {
                throw std::runtime_error("empty flight id");
            }
            TrackPoint tp;
            tp.t_s = parse_double(trimmed(fields[1]), "time");
            if (tp.t_s < 0.0) {
                throw std::runtime_error("time must be nonnegative, got " + trimmed(fields[1]));
            }
            tp.pos.lon = parse_double(trimmed(fields[2]), "longitude");
            tp.pos.lat = parse_double(trimmed(fields[3]), "latitude");
            geo::project(tp.pos, proj);  // validates the fix against the projection band
            const std::string alt = trimmed(fields[4]);
            if (!alt.empty()) {
                tp.altitude_ft = parse_double(alt, "altitude");
            }
            tracks[acid].push_back(tp);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!header_seen) {
        throw std::runtime_error(path + ": missing header row");
    }
    if (tracks.empty()) {
        throw std::runtime_error(path + ": no track points found");
    }
    for (auto& [acid, pts] : tracks) {
        std::stable_sort(pts.begin(), pts.end(),
                         [](const TrackPoint& a, const TrackPoint& b) { return a.t_s < b.t_s; });
    }
    return tracks;
}

}  // namespace flightopt::sim
