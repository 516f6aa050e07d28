#include "flightopt/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "json.hpp"

namespace flightopt::scenario {

namespace {

Assembled assemble_impl(const Scenario& s, const std::string& base_dir, bool skip_csv) {
    Assembled out{geo::Projection{s.origin}, wind::PolynomialWindField::zero(), {}};
    const auto dest = geo::project(s.destination, out.proj);

    switch (s.wind.kind) {
        case WindSpec::Kind::None:
            break;
        case WindSpec::Kind::Inline: {
            Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(
                s.wind.a.data(), static_cast<long>(s.wind.a.size()));
            Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(
                s.wind.b.data(), static_cast<long>(s.wind.b.size()));
            out.field = wind::PolynomialWindField(wind::WindBasis::standard(), std::move(a),
                                                  std::move(b));
            break;
        }
        case WindSpec::Kind::Csv: {
            if (skip_csv) break;
            std::filesystem::path p(s.wind.csv_path);
            if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
            const auto samples = wind::ingest_csv(p.string(), out.proj);
            const auto averaged = wind::average_slots(samples);
            out.field = wind::fit(averaged).first;
            break;
        }
    }

    auto& pb = out.problem;
    pb.N = s.horizon.N;
    const double T_h = s.horizon.is_search() ? s.horizon.t_lo_h : *s.horizon.T_h;
    pb.dT_s = T_h * 3600.0 / pb.N;
    const double theta0 =
        s.theta0_rad.has_value() ? *s.theta0_rad : std::atan2(dest.y, dest.x);
    pb.x0 = {0.0, 0.0, s.v0_mps, s.m0_kg, theta0};
    pb.xf = {dest.x, dest.y, s.v0_mps, s.m0_kg, theta0};
    pb.x_lb = s.x_lb;
    pb.x_ub = s.x_ub;
    pb.u_lb = s.u_lb;
    pb.u_ub = s.u_ub;
    pb.Q = s.q_diag.asDiagonal();
    pb.R = s.r_diag.asDiagonal();
    pb.mode = s.mode;
    pb.w_fuel = s.w_fuel;
    pb.terminal_slack_km = s.terminal_slack_km;
    return out;
}

using nlohmann::json;

[[noreturn]] void fail(const std::string& source, const std::string& message) {
    throw std::runtime_error(source + ": " + message);
}

void check_keys(const json& obj, const std::string& source, const std::string& where,
                std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (ok.count(it.key()) == 0) {
            fail(source, "unknown key '" + it.key() + "' in " + where);
        }
    }
}

const json& require(const json& obj, const std::string& source, const std::string& where,
                    const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        fail(source, std::string("missing required key '") + key + "' in " + where);
    }
    return *it;
}

double as_number(const json& v, const std::string& source, const std::string& what) {
    if (!v.is_number()) {
        fail(source, what + " must be a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        fail(source, what + " must be finite");
    }
    return d;
}

int as_int(const json& v, const std::string& source, const std::string& what) {
    if (!v.is_number_integer()) {
        fail(source, what + " must be an integer");
    }
    return v.get<int>();
}

std::string as_string(const json& v, const std::string& source, const std::string& what) {
    if (!v.is_string()) {
        fail(source, what + " must be a string");
    }
    return v.get<std::string>();
}

geo::GeoPoint as_geopoint(const json& v, const std::string& source, const std::string& what) {
    if (!v.is_object()) {
        fail(source, what + " must be an object with lon/lat");
    }
    check_keys(v, source, what, {"lon", "lat"});
    return {as_number(require(v, source, what, "lon"), source, what + ".lon"),
            as_number(require(v, source, what, "lat"), source, what + ".lat")};
}

std::pair<double, double> as_range(const json& v, const std::string& source,
                                   const std::string& what) {
    if (!v.is_array() || v.size() != 2) {
        fail(source, what + " must be an array [lo, hi]");
    }
    const double lo = as_number(v[0], source, what + "[0]");
    const double hi = as_number(v[1], source, what + "[1]");
    return {lo, hi};
}

std::vector<double> as_numbers(const json& v, const std::string& source, const std::string& what,
                               std::size_t expected) {
    if (!v.is_array() || v.size() != expected) {
        fail(source, what + " must be an array of " + std::to_string(expected) + " numbers");
    }
    std::vector<double> out;
    out.reserve(expected);
    for (std::size_t i = 0; i < expected; ++i) {
        out.push_back(as_number(v[i], source, what + "[" + std::to_string(i) + "]"));
    }
    return out;
}

void apply_objective_defaults(Scenario& s) {
    if (s.mode == transcription::ObjectiveMode::TimeFocus) {
        s.q_diag << 1e-2, 1e-2, 0.0, 0.0, 0.0;
    } else {
        s.q_diag << 1e-4, 1e-4, 0.0, 0.0, 0.0;
    }
    s.r_diag << 1e-10, 1e2;
}

// Route-derived state box: the projected route rectangle padded by a quarter
// of the chord (at least 100 km). v, theta, and control boxes get the
// documented airliner-flavored defaults; mass spans [dry mass, m0].
void apply_bound_defaults(Scenario& s) {
    const geo::Projection proj{s.origin};
    const auto dest = geo::project(s.destination, proj);
    const double chord = std::hypot(dest.x, dest.y);
    const double margin = std::max(0.25 * chord, 100.0);
    s.x_lb[0] = std::min(0.0, dest.x) - margin;
    s.x_ub[0] = std::max(0.0, dest.x) + margin;
    s.x_lb[1] = std::min(0.0, dest.y) - margin;
    s.x_ub[1] = std::max(0.0, dest.y) + margin;
    s.x_lb[2] = 150.0;
    s.x_ub[2] = 304.0;
    s.x_lb[3] = s.aircraft.dry_mass;
    s.x_ub[3] = s.m0_kg;
    s.x_lb[4] = -2.0 * M_PI;
    s.x_ub[4] = 2.0 * M_PI;
    s.u_lb << 0.0, -0.02;
    s.u_ub << 1.4e5, 0.02;
}

Scenario parse_document(const json& doc, const std::string& source) {
    if (!doc.is_object()) {
        fail(source, "top-level document must be an object");
    }
    check_keys(doc, source, "scenario",
               {"name", "origin", "destination", "departure", "aircraft", "horizon", "bounds",
                "objective", "wind", "solver", "terminal_slack_km", "output_dir"});

    Scenario s;
    if (doc.contains("name")) s.name = as_string(doc["name"], source, "name");
    s.origin = as_geopoint(require(doc, source, "scenario", "origin"), source, "origin");
    s.destination =
        as_geopoint(require(doc, source, "scenario", "destination"), source, "destination");

    {
        const json& dep = require(doc, source, "scenario", "departure");
        check_keys(dep, source, "departure", {"v_mps", "m_kg", "theta_rad"});
        s.v0_mps = as_number(require(dep, source, "departure", "v_mps"), source,
                             "departure.v_mps");
        s.m0_kg = as_number(require(dep, source, "departure", "m_kg"), source, "departure.m_kg");
        if (dep.contains("theta_rad")) {
            s.theta0_rad = as_number(dep["theta_rad"], source, "departure.theta_rad");
        }
    }

    if (doc.contains("aircraft")) {
        const json& ac = doc["aircraft"];
        check_keys(ac, source, "aircraft",
                   {"drag_coeff", "air_density", "wing_area", "fuel_rate", "gravity",
                    "dry_mass"});
        if (ac.contains("drag_coeff"))
            s.aircraft.drag_coeff = as_number(ac["drag_coeff"], source, "aircraft.drag_coeff");
        if (ac.contains("air_density"))
            s.aircraft.air_density = as_number(ac["air_density"], source, "aircraft.air_density");
        if (ac.contains("wing_area"))
            s.aircraft.wing_area = as_number(ac["wing_area"], source, "aircraft.wing_area");
        if (ac.contains("fuel_rate"))
            s.aircraft.fuel_rate = as_number(ac["fuel_rate"], source, "aircraft.fuel_rate");
        if (ac.contains("gravity"))
            s.aircraft.gravity = as_number(ac["gravity"], source, "aircraft.gravity");
        if (ac.contains("dry_mass"))
            s.aircraft.dry_mass = as_number(ac["dry_mass"], source, "aircraft.dry_mass");
    }

    {
        const json& hz = require(doc, source, "scenario", "horizon");
        check_keys(hz, source, "horizon", {"N", "T_h", "T_range_h", "step_h"});
        if (hz.contains("N")) s.horizon.N = as_int(hz["N"], source, "horizon.N");
        const bool fixed = hz.contains("T_h");
        const bool search = hz.contains("T_range_h");
        if (fixed == search) {
            fail(source, "horizon needs exactly one of T_h (fixed) or T_range_h (search)");
        }
        if (fixed) {
            if (hz.contains("step_h")) {
                fail(source, "horizon.step_h only applies to a T_range_h search");
            }
            s.horizon.T_h = as_number(hz["T_h"], source, "horizon.T_h");
            if (!(*s.horizon.T_h > 0.0)) {
                fail(source, "horizon.T_h must be positive");
            }
        } else {
            const auto [lo, hi] = as_range(hz["T_range_h"], source, "horizon.T_range_h");
            s.horizon.t_lo_h = lo;
            s.horizon.t_hi_h = hi;
            if (hz.contains("step_h")) {
                s.horizon.step_h = as_number(hz["step_h"], source, "horizon.step_h");
            }
            if (!(lo > 0.0) || hi < lo) {
                fail(source, "horizon.T_range_h must satisfy 0 < lo <= hi");
            }
            if (!(s.horizon.step_h > 0.0)) {
                fail(source, "horizon.step_h must be positive");
            }
        }
    }

    if (doc.contains("objective")) {
        const json& ob = doc["objective"];
        check_keys(ob, source, "objective", {"mode", "q_diag", "r_diag", "w_fuel"});
        if (ob.contains("mode")) {
            const std::string mode = as_string(ob["mode"], source, "objective.mode");
            if (mode == "time") {
                s.mode = transcription::ObjectiveMode::TimeFocus;
            } else if (mode == "fuel") {
                s.mode = transcription::ObjectiveMode::FuelFocus;
            } else {
                fail(source, "objective.mode must be 'time' or 'fuel', got '" + mode + "'");
            }
        }
        apply_objective_defaults(s);
        if (ob.contains("q_diag")) {
            const auto q = as_numbers(ob["q_diag"], source, "objective.q_diag", 5);
            for (int i = 0; i < 5; ++i) s.q_diag[i] = q[i];
        }
        if (ob.contains("r_diag")) {
            const auto r = as_numbers(ob["r_diag"], source, "objective.r_diag", 2);
            for (int i = 0; i < 2; ++i) s.r_diag[i] = r[i];
        }
        if (ob.contains("w_fuel")) {
            s.w_fuel = as_number(ob["w_fuel"], source, "objective.w_fuel");
        }
    } else {
        apply_objective_defaults(s);
    }

    // The defaults project the route, which enforces the Mercator band; keep
    // that failure in this document's error currency.
    try {
        apply_bound_defaults(s);
    } catch (const std::domain_error& e) {
        fail(source, e.what());
    }
    if (doc.contains("bounds")) {
        const json& bd = doc["bounds"];
        check_keys(bd, source, "bounds",
                   {"x_km", "y_km", "v_mps", "m_kg", "theta_rad", "thrust_N",
                    "turn_rate_radps"});
        const auto set_state = [&](const char* key, int idx) {
            if (bd.contains(key)) {
                const auto [lo, hi] = as_range(bd[key], source, std::string("bounds.") + key);
                s.x_lb[idx] = lo;
                s.x_ub[idx] = hi;
            }
        };
        set_state("x_km", 0);
        set_state("y_km", 1);
        set_state("v_mps", 2);
        set_state("m_kg", 3);
        set_state("theta_rad", 4);
        if (bd.contains("thrust_N")) {
            const auto [lo, hi] = as_range(bd["thrust_N"], source, "bounds.thrust_N");
            s.u_lb[0] = lo;
            s.u_ub[0] = hi;
        }
        if (bd.contains("turn_rate_radps")) {
            const auto [lo, hi] = as_range(bd["turn_rate_radps"], source, "bounds.turn_rate_radps");
            s.u_lb[1] = lo;
            s.u_ub[1] = hi;
        }
    }

    if (doc.contains("wind")) {
        const json& wd = doc["wind"];
        if (wd.is_string()) {
            const std::string kind = wd.get<std::string>();
            if (kind != "none") {
                fail(source, "wind as a string must be 'none', got '" + kind + "'");
            }
            s.wind.kind = WindSpec::Kind::None;
        } else if (wd.is_object()) {
            if (wd.contains("csv")) {
                check_keys(wd, source, "wind", {"csv"});
                s.wind.kind = WindSpec::Kind::Csv;
                s.wind.csv_path = as_string(wd["csv"], source, "wind.csv");
            } else {
                check_keys(wd, source, "wind", {"a", "b"});
                s.wind.kind = WindSpec::Kind::Inline;
                s.wind.a = as_numbers(require(wd, source, "wind", "a"), source, "wind.a", 13);
                s.wind.b = as_numbers(require(wd, source, "wind", "b"), source, "wind.b", 10);
            }
        } else {
            fail(source, "wind must be 'none', {\"csv\": path}, or {\"a\": [...], \"b\": [...]}");
        }
    }

    if (doc.contains("solver")) {
        const json& sv = doc["solver"];
        check_keys(sv, source, "solver",
                   {"max_outer", "max_inner", "tol_feas", "tol_stat", "penalty_init",
                    "penalty_growth", "penalty_max"});
        auto& o = s.solver_opts;
        if (sv.contains("max_outer")) o.max_outer = as_int(sv["max_outer"], source, "solver.max_outer");
        if (sv.contains("max_inner")) o.max_inner = as_int(sv["max_inner"], source, "solver.max_inner");
        if (sv.contains("tol_feas")) o.tol_feas = as_number(sv["tol_feas"], source, "solver.tol_feas");
        if (sv.contains("tol_stat")) o.tol_stat = as_number(sv["tol_stat"], source, "solver.tol_stat");
        if (sv.contains("penalty_init"))
            o.penalty_init = as_number(sv["penalty_init"], source, "solver.penalty_init");
        if (sv.contains("penalty_growth"))
            o.penalty_growth = as_number(sv["penalty_growth"], source, "solver.penalty_growth");
        if (sv.contains("penalty_max"))
            o.penalty_max = as_number(sv["penalty_max"], source, "solver.penalty_max");
    }

    if (doc.contains("terminal_slack_km")) {
        s.terminal_slack_km = as_number(doc["terminal_slack_km"], source, "terminal_slack_km");
    }
    if (doc.contains("output_dir")) {
        s.output_dir = as_string(doc["output_dir"], source, "output_dir");
    }

    // Validate against every downstream invariant before handing back.
    try {
        s.aircraft.validate();
        s.solver_opts.validate();
        if (s.wind.kind == WindSpec::Kind::Inline) {
            Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(s.wind.a.data(), 13);
            Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(s.wind.b.data(), 10);
            wind::PolynomialWindField(wind::WindBasis::standard(), a, b);
        }
        Assembled trial = assemble_impl(s, /*base_dir=*/".", /*skip_csv=*/true);
        trial.problem.validate();
    } catch (const std::invalid_argument& e) {
        fail(source, e.what());
    } catch (const std::domain_error& e) {
        fail(source, e.what());
    }
    return s;
}

}  // namespace

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open scenario file: " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), path);
}

Scenario parse_scenario(const std::string& json_text, const std::string& source) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(source, std::string("invalid JSON: ") + e.what());
    }
    return parse_document(doc, source);
}

std::string serialize_scenario(const Scenario& s) {
    json doc;
    doc["name"] = s.name;
    doc["origin"] = {{"lon", s.origin.lon}, {"lat", s.origin.lat}};
    doc["destination"] = {{"lon", s.destination.lon}, {"lat", s.destination.lat}};
    json dep = {{"v_mps", s.v0_mps}, {"m_kg", s.m0_kg}};
    if (s.theta0_rad.has_value()) dep["theta_rad"] = *s.theta0_rad;
    doc["departure"] = dep;
    doc["aircraft"] = {{"drag_coeff", s.aircraft.drag_coeff},
                       {"air_density", s.aircraft.air_density},
                       {"wing_area", s.aircraft.wing_area},
                       {"fuel_rate", s.aircraft.fuel_rate},
                       {"gravity", s.aircraft.gravity},
                       {"dry_mass", s.aircraft.dry_mass}};
    json hz;
    hz["N"] = s.horizon.N;
    if (s.horizon.is_search()) {
        hz["T_range_h"] = {s.horizon.t_lo_h, s.horizon.t_hi_h};
        hz["step_h"] = s.horizon.step_h;
    } else {
        hz["T_h"] = *s.horizon.T_h;
    }
    doc["horizon"] = hz;
    doc["bounds"] = {{"x_km", {s.x_lb[0], s.x_ub[0]}},
                     {"y_km", {s.x_lb[1], s.x_ub[1]}},
                     {"v_mps", {s.x_lb[2], s.x_ub[2]}},
                     {"m_kg", {s.x_lb[3], s.x_ub[3]}},
                     {"theta_rad", {s.x_lb[4], s.x_ub[4]}},
                     {"thrust_N", {s.u_lb[0], s.u_ub[0]}},
                     {"turn_rate_radps", {s.u_lb[1], s.u_ub[1]}}};
    doc["objective"] = {
        {"mode", s.mode == transcription::ObjectiveMode::TimeFocus ? "time" : "fuel"},
        {"q_diag", {s.q_diag[0], s.q_diag[1], s.q_diag[2], s.q_diag[3], s.q_diag[4]}},
        {"r_diag", {s.r_diag[0], s.r_diag[1]}},
        {"w_fuel", s.w_fuel}};
    switch (s.wind.kind) {
        case WindSpec::Kind::None:
            doc["wind"] = "none";
            break;
        case WindSpec::Kind::Csv:
            doc["wind"] = {{"csv", s.wind.csv_path}};
            break;
        case WindSpec::Kind::Inline:
            doc["wind"] = {{"a", s.wind.a}, {"b", s.wind.b}};
            break;
    }
    doc["solver"] = {{"max_outer", s.solver_opts.max_outer},
                     {"max_inner", s.solver_opts.max_inner},
                     {"tol_feas", s.solver_opts.tol_feas},
                     {"tol_stat", s.solver_opts.tol_stat},
                     {"penalty_init", s.solver_opts.penalty_init},
                     {"penalty_growth", s.solver_opts.penalty_growth},
                     {"penalty_max", s.solver_opts.penalty_max}};
    doc["terminal_slack_km"] = s.terminal_slack_km;
    doc["output_dir"] = s.output_dir;
    return doc.dump(2) + "\n";
}

Assembled assemble(const Scenario& s, const std::string& base_dir) {
    return assemble_impl(s, base_dir, /*skip_csv=*/false);
}

}  // namespace flightopt::scenario
