#include "flightopt/bundle.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace flightopt::bundle {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void atomic_write(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open for writing: " + tmp.string());
        }
        out << content;
        out.flush();
        if (!out) {
            throw std::runtime_error("write failed: " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        throw std::runtime_error("cannot move " + tmp.string() + " to " + path.string() + ": " +
                                 ec.message());
    }
}

json metrics_to_json(const sim::TrajectoryMetrics& m) {
    return {{"travel_time_h", m.travel_time_h},
            {"fuel_burned_kg", m.fuel_burned_kg},
            {"path_length_km", m.path_length_km},
            {"max_cross_track_km", m.max_cross_track_km},
            {"mean_cross_track_km", m.mean_cross_track_km}};
}

double parse_csv_double(const std::string& field, const char* what, int line_no,
                        const std::string& path) {
    try {
        std::size_t consumed = 0;
        const double v = std::stod(field, &consumed);
        if (consumed != field.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                 ": cannot parse " + what + " from '" + field + "'");
    }
}

}  // namespace

std::string format_full(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

void write_bundle(const std::string& dir, const BundleInputs& in) {
    if (in.problem == nullptr || in.result == nullptr) {
        throw std::invalid_argument("bundle inputs need the problem and the solve result");
    }
    const auto& problem = *in.problem;
    const auto& result = *in.result;
    if (in.states.size() != static_cast<std::size_t>(problem.N) + 1 ||
        in.controls.size() != static_cast<std::size_t>(problem.N)) {
        throw std::invalid_argument("bundle inputs have inconsistent trajectory lengths");
    }
    fs::create_directories(dir);

    {  // trajectory.csv
        std::ostringstream csv;
        csv << "k,t_s,x_km,y_km,lon,lat,v_mps,m_kg,theta_rad,T_N,phi_radps\n";
        for (int k = 0; k <= problem.N; ++k) {
            const auto& s = in.states[static_cast<std::size_t>(k)];
            const auto fix = geo::unproject({s.x, s.y}, in.proj);
            csv << k << ',' << format_full(k * problem.dT_s) << ',' << format_full(s.x) << ','
                << format_full(s.y) << ',' << format_full(fix.lon) << ',' << format_full(fix.lat)
                << ',' << format_full(s.v) << ',' << format_full(s.m) << ','
                << format_full(s.theta) << ',';
            if (k < problem.N) {
                const auto& u = in.controls[static_cast<std::size_t>(k)];
                csv << format_full(u.thrust) << ',' << format_full(u.turn_rate);
            } else {
                csv << ',';
            }
            csv << '\n';
        }
        atomic_write(fs::path(dir) / "trajectory.csv", csv.str());
    }

    {  // metrics.json
        json doc;
        doc["scenario"] = in.scenario_name;
        doc["objective_mode"] = in.objective_mode;
        doc["origin"] = {{"lon", in.proj.origin.lon}, {"lat", in.proj.origin.lat}};
        doc["destination"] = {{"lon", in.destination.lon}, {"lat", in.destination.lat}};
        doc["N"] = problem.N;
        doc["dT_s"] = problem.dT_s;
        doc["status"] = solver::to_string(result.status);
        doc["objective_value"] = result.objective_value;
        doc["feas_norm"] = result.feas_norm;
        doc["stat_norm"] = result.stat_norm;
        doc["outer_iters"] = result.outer_iters;
        doc["inner_iters"] = result.inner_iters;
        doc["replay_gap"] = in.replay_gap;
        doc["metrics"] = metrics_to_json(in.metrics);
        if (in.T_min_h.has_value()) {
            doc["T_min_h"] = *in.T_min_h;
            json attempts = json::array();
            for (const auto& at : in.attempts) {
                attempts.push_back({{"T_h", at.T_h},
                                    {"status", solver::to_string(at.status)},
                                    {"feas_norm", at.feas_norm},
                                    {"objective", at.objective}});
            }
            doc["search"] = attempts;
        }
        atomic_write(fs::path(dir) / "metrics.json", doc.dump(2) + "\n");
    }

    {  // trajectory.geojson
        json coords = json::array();
        for (const auto& s : in.states) {
            const auto fix = geo::unproject({s.x, s.y}, in.proj);
            coords.push_back({fix.lon, fix.lat});
        }
        json doc = {{"type", "Feature"},
                    {"properties",
                     {{"name", in.scenario_name},
                      {"travel_time_h", in.metrics.travel_time_h},
                      {"fuel_burned_kg", in.metrics.fuel_burned_kg}}},
                    {"geometry", {{"type", "LineString"}, {"coordinates", coords}}}};
        atomic_write(fs::path(dir) / "trajectory.geojson", doc.dump(2) + "\n");
    }

    {  // solver.log
        std::ostringstream log;
        log << "iter\tobjective\tfeas_norm\tstat_norm\tpenalty\n";
        for (const auto& rec : result.history) {
            log << rec.iter << '\t' << format_full(rec.objective) << '\t'
                << format_full(rec.feas_norm) << '\t' << format_full(rec.stat_norm) << '\t'
                << format_full(rec.penalty) << '\n';
        }
        atomic_write(fs::path(dir) / "solver.log", log.str());
    }
}

void write_wind_fit(const std::string& dir, const wind::PolynomialWindField& field,
                    const wind::FitReport& report) {
    fs::create_directories(dir);
    json doc;
    doc["basis"] = field.basis().is_standard()
                       ? json("standard")
                       : json({{"degree", field.basis().degree()}});
    doc["a"] = std::vector<double>(field.a().data(), field.a().data() + field.a().size());
    doc["b"] = std::vector<double>(field.b().data(), field.b().data() + field.b().size());
    doc["report"] = {{"degree", report.degree},
                     {"rss_x", report.rss_x},
                     {"rss_y", report.rss_y},
                     {"condition_x", report.condition_x},
                     {"condition_y", report.condition_y},
                     {"sample_count", report.sample_count}};
    atomic_write(fs::path(dir) / "wind_fit.json", doc.dump(2) + "\n");
}

void write_compare(const std::string& path, const std::string& acid,
                   const sim::TrajectoryMetrics& m) {
    json doc;
    doc["acid"] = acid;
    doc["metrics"] = metrics_to_json(m);
    atomic_write(path, doc.dump(2) + "\n");
}

LoadedTrajectory load_trajectory_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open trajectory file: " + path);
    }
    LoadedTrajectory out;
    std::string line;
    int line_no = 0;
    std::vector<double> times;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "k,t_s,x_km,y_km,lon,lat,v_mps,m_kg,theta_rad,T_N,phi_radps") {
                throw std::runtime_error(path + ": unexpected trajectory header '" + line + "'");
            }
            continue;
        }
        std::vector<std::string> fields;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += ch;
            }
        }
        fields.push_back(cur);
        if (fields.size() != 11) {
            throw std::runtime_error(path + " line " + std::to_string(line_no) +
                                     ": expected 11 fields, got " + std::to_string(fields.size()));
        }
        dynamics::State s;
        times.push_back(parse_csv_double(fields[1], "t_s", line_no, path));
        s.x = parse_csv_double(fields[2], "x_km", line_no, path);
        s.y = parse_csv_double(fields[3], "y_km", line_no, path);
        s.v = parse_csv_double(fields[6], "v_mps", line_no, path);
        s.m = parse_csv_double(fields[7], "m_kg", line_no, path);
        s.theta = parse_csv_double(fields[8], "theta_rad", line_no, path);
        out.states.push_back(s);
        if (!fields[9].empty() || !fields[10].empty()) {
            dynamics::Control u;
            u.thrust = parse_csv_double(fields[9], "T_N", line_no, path);
            u.turn_rate = parse_csv_double(fields[10], "phi_radps", line_no, path);
            out.controls.push_back(u);
        }
    }
    if (out.states.size() < 2) {
        throw std::runtime_error(path + ": trajectory needs at least 2 rows");
    }
    if (out.controls.size() + 1 != out.states.size()) {
        throw std::runtime_error(path + ": expected controls on every row but the last");
    }
    out.dT_s = times[1] - times[0];
    if (!(out.dT_s > 0.0)) {
        throw std::runtime_error(path + ": non-increasing time column");
    }
    return out;
}

BundleMeta read_bundle_meta(const std::string& dir) {
    const fs::path path = fs::path(dir) / "metrics.json";
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open bundle metadata: " + path.string());
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": invalid JSON: " + e.what());
    }
    try {
        BundleMeta meta;
        meta.origin = {doc.at("origin").at("lon").get<double>(),
                       doc.at("origin").at("lat").get<double>()};
        meta.destination = {doc.at("destination").at("lon").get<double>(),
                            doc.at("destination").at("lat").get<double>()};
        meta.N = doc.at("N").get<int>();
        meta.dT_s = doc.at("dT_s").get<double>();
        meta.status = doc.at("status").get<std::string>();
        meta.objective_mode = doc.at("objective_mode").get<std::string>();
        return meta;
    } catch (const json::exception& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

}  // namespace flightopt::bundle
