#include <filesystem>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "flightopt/bundle.hpp"
#include "flightopt/scenario.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace flightopt;

namespace {

/// Solves the shared small route once and assembles full bundle inputs.
struct BundleFixture {
    transcription::CftocProblem problem;
    dynamics::AircraftParams params;
    wind::PolynomialWindField field;
    geo::Projection proj{{-87.9048, 41.9786}};
    solver::SolveResult result;
    bundle::BundleInputs inputs;

    BundleFixture() {
        problem = support::straight_problem(8, 1.0, 700.0);
        params = support::default_params();
        field = wind::PolynomialWindField::zero();
        const auto inst = transcription::build(problem, field, params);
        result = solver::solve(inst, transcription::initial_guess(problem, params));

        inputs.scenario_name = "unit-route";
        inputs.proj = proj;
        inputs.destination = geo::unproject({700.0, 0.0}, proj);
        inputs.problem = &problem;
        inputs.result = &result;
        inputs.states = inst.unpack_states(result.z_star);
        inputs.controls = inst.unpack_controls(result.z_star);
        inputs.metrics = sim::metrics(inputs.states, problem.dT_s, params);
        inputs.replay_gap = sim::replay(result, problem, field, params).max_gap;
        inputs.objective_mode = "time";
    }
};

const BundleFixture& fixture() {
    static const BundleFixture f;
    return f;
}

}  // namespace

TEST_CASE("format_full round trips doubles") {
    CHECK(bundle::format_full(0.1) == "0.1");
    CHECK(bundle::format_full(1.0 / 3.0) == "0.3333333333333333");
    CHECK(std::stod(bundle::format_full(-632.0602473767392)) == -632.0602473767392);
}

TEST_CASE("bundle files are written and read back") {
    const auto& f = fixture();
    REQUIRE(f.result.status == solver::SolveStatus::Converged);
    const auto dir = support::scratch_dir("bundle");
    bundle::write_bundle(dir, f.inputs);

    namespace fs = std::filesystem;
    CHECK(fs::exists(fs::path(dir) / "trajectory.csv"));
    CHECK(fs::exists(fs::path(dir) / "metrics.json"));
    CHECK(fs::exists(fs::path(dir) / "trajectory.geojson"));
    CHECK(fs::exists(fs::path(dir) / "solver.log"));

    SUBCASE("trajectory csv") {
        const auto text = support::read_file(dir + "/trajectory.csv");
        CHECK(text.rfind("k,t_s,x_km,y_km,lon,lat,v_mps,m_kg,theta_rad,T_N,phi_radps\n", 0) ==
              0);
        // Last data row carries no controls: it ends with the two commas.
        CHECK(text.find(",,\n") != std::string::npos);

        const auto loaded = bundle::load_trajectory_csv(dir + "/trajectory.csv");
        REQUIRE(loaded.states.size() == f.inputs.states.size());
        REQUIRE(loaded.controls.size() == f.inputs.controls.size());
        CHECK(loaded.dT_s == f.problem.dT_s);
        for (size_t k = 0; k < loaded.states.size(); ++k) {
            CHECK(loaded.states[k].x == f.inputs.states[k].x);  // %.17g is exact
            CHECK(loaded.states[k].m == f.inputs.states[k].m);
            CHECK(loaded.states[k].theta == f.inputs.states[k].theta);
        }
        for (size_t k = 0; k < loaded.controls.size(); ++k) {
            CHECK(loaded.controls[k].thrust == f.inputs.controls[k].thrust);
            CHECK(loaded.controls[k].turn_rate == f.inputs.controls[k].turn_rate);
        }
    }

    SUBCASE("metrics json") {
        const auto doc = nlohmann::json::parse(support::read_file(dir + "/metrics.json"));
        CHECK(doc["scenario"] == "unit-route");
        CHECK(doc["objective_mode"] == "time");
        CHECK(doc["status"] == "converged");
        CHECK(doc["N"] == 8);
        CHECK(doc["dT_s"].get<double>() == f.problem.dT_s);
        CHECK(doc["origin"]["lon"].get<double>() == doctest::Approx(-87.9048));
        CHECK(doc["metrics"]["fuel_burned_kg"].get<double>() ==
              doctest::Approx(f.inputs.metrics.fuel_burned_kg));
        CHECK(doc["metrics"]["path_length_km"].get<double>() > 699.0);
        CHECK(doc["replay_gap"].get<double>() == f.inputs.replay_gap);
        CHECK(doc["feas_norm"].get<double>() == f.result.feas_norm);
        CHECK_FALSE(doc.contains("T_min_h"));  // fixed-horizon run
        CHECK_FALSE(doc.contains("search"));

        const auto meta = bundle::read_bundle_meta(dir);
        CHECK(meta.N == 8);
        CHECK(meta.status == "converged");
        CHECK(meta.objective_mode == "time");
        CHECK(meta.origin.lat == doctest::Approx(41.9786));
        CHECK(meta.dT_s == f.problem.dT_s);
    }

    SUBCASE("geojson line string") {
        const auto doc = nlohmann::json::parse(support::read_file(dir + "/trajectory.geojson"));
        CHECK(doc["type"] == "Feature");
        CHECK(doc["geometry"]["type"] == "LineString");
        const auto& coords = doc["geometry"]["coordinates"];
        REQUIRE(coords.size() == f.inputs.states.size());
        CHECK(coords[0][0].get<double>() == doctest::Approx(-87.9048));
        CHECK(coords[0][1].get<double>() == doctest::Approx(41.9786));
    }

    SUBCASE("solver log") {
        const auto text = support::read_file(dir + "/solver.log");
        CHECK(text.rfind("iter\tobjective\tfeas_norm\tstat_norm\tpenalty\n", 0) == 0);
        size_t rows = 0;
        for (char c : text) {
            if (c == '\n') ++rows;
        }
        CHECK(rows == 1 + f.result.history.size());
    }

    SUBCASE("repeated writes are byte-identical") {
        const auto first_csv = support::read_file(dir + "/trajectory.csv");
        const auto first_json = support::read_file(dir + "/metrics.json");
        const auto first_geo = support::read_file(dir + "/trajectory.geojson");
        const auto first_log = support::read_file(dir + "/solver.log");
        bundle::write_bundle(dir, f.inputs);
        CHECK(support::read_file(dir + "/trajectory.csv") == first_csv);
        CHECK(support::read_file(dir + "/metrics.json") == first_json);
        CHECK(support::read_file(dir + "/trajectory.geojson") == first_geo);
        CHECK(support::read_file(dir + "/solver.log") == first_log);
    }
}

TEST_CASE("search runs record the scan") {
    const auto& f = fixture();
    auto inputs = f.inputs;
    inputs.T_min_h = 1.0;
    inputs.attempts = {
        {0.75, solver::SolveStatus::Infeasible, 0.02, 13.0},
        {1.0, solver::SolveStatus::Converged, 1e-8, 9.0},
    };
    const auto dir = support::scratch_dir("bundle_scan");
    bundle::write_bundle(dir, inputs);

    const auto doc = nlohmann::json::parse(support::read_file(dir + "/metrics.json"));
    CHECK(doc["T_min_h"].get<double>() == 1.0);
    REQUIRE(doc["search"].size() == 2);
    CHECK(doc["search"][0]["T_h"].get<double>() == 0.75);
    CHECK(doc["search"][0]["status"] == "infeasible");
    CHECK(doc["search"][1]["status"] == "converged");
}

TEST_CASE("bundle input validation") {
    const auto& f = fixture();
    const auto dir = support::scratch_dir("bundle_bad");

    auto no_problem = f.inputs;
    no_problem.problem = nullptr;
    CHECK_THROWS_AS(bundle::write_bundle(dir, no_problem), std::invalid_argument);

    auto short_controls = f.inputs;
    short_controls.controls.pop_back();
    CHECK_THROWS_AS(bundle::write_bundle(dir, short_controls), std::invalid_argument);
}

TEST_CASE("wind fit report file") {
    const auto dir = support::scratch_dir("wind_fit");
    const auto field = wind::PolynomialWindField::published();
    wind::FitReport report;
    report.degree = 4;
    report.rss_x = 1.5e-13;
    report.rss_y = 2.5e-13;
    report.condition_x = 1234.5;
    report.condition_y = 987.6;
    report.sample_count = 225;
    bundle::write_wind_fit(dir, field, report);

    const auto doc = nlohmann::json::parse(support::read_file(dir + "/wind_fit.json"));
    CHECK(doc["basis"] == "standard");
    REQUIRE(doc["a"].size() == 13);
    REQUIRE(doc["b"].size() == 10);
    CHECK(doc["a"][4].get<double>() == field.a()[4]);
    CHECK(doc["report"]["sample_count"] == 225);
    CHECK(doc["report"]["condition_x"].get<double>() == 1234.5);
    CHECK(doc["report"]["rss_x"].get<double>() == 1.5e-13);

    SUBCASE("full-degree basis is recorded by degree") {
        Eigen::VectorXd c = Eigen::VectorXd::Zero(6);
        const wind::PolynomialWindField quad(wind::WindBasis::full(2), c, c);
        bundle::write_wind_fit(dir, quad, report);
        const auto doc2 = nlohmann::json::parse(support::read_file(dir + "/wind_fit.json"));
        CHECK(doc2["basis"]["degree"] == 2);
    }
}

TEST_CASE("compare report file") {
    const auto dir = support::scratch_dir("compare");
    sim::TrajectoryMetrics m;
    m.travel_time_h = 3.6;
    m.fuel_burned_kg = 11000.0;
    m.path_length_km = 3900.0;
    m.max_cross_track_km = 42.0;
    m.mean_cross_track_km = 17.5;
    const auto path = dir + "/compare.json";
    bundle::write_compare(path, "AAL123", m);

    const auto doc = nlohmann::json::parse(support::read_file(path));
    CHECK(doc["acid"] == "AAL123");
    CHECK(doc["metrics"]["max_cross_track_km"].get<double>() == 42.0);
    CHECK(doc["metrics"]["mean_cross_track_km"].get<double>() == 17.5);
    CHECK(doc["metrics"]["path_length_km"].get<double>() == 3900.0);
}

TEST_CASE("trajectory csv reader rejects malformed files") {
    const auto dir = support::scratch_dir("bad_csv");

    SUBCASE("wrong header") {
        const auto p = support::write_file(dir, "t.csv", "k,t_s,x_km\n");
        CHECK_THROWS_AS(bundle::load_trajectory_csv(p), std::runtime_error);
    }
    SUBCASE("too few rows") {
        const auto p = support::write_file(
            dir, "t.csv",
            "k,t_s,x_km,y_km,lon,lat,v_mps,m_kg,theta_rad,T_N,phi_radps\n"
            "0,0,0,0,-87.9,41.97,250,70000,0,,\n");
        CHECK_THROWS_AS(bundle::load_trajectory_csv(p), std::runtime_error);
    }
    SUBCASE("controls missing from a non-terminal row") {
        const auto p = support::write_file(
            dir, "t.csv",
            "k,t_s,x_km,y_km,lon,lat,v_mps,m_kg,theta_rad,T_N,phi_radps\n"
            "0,0,0,0,-87.9,41.97,250,70000,0,50000,0\n"
            "1,450,10,0,-87.8,41.97,250,69990,0,,\n"
            "2,900,20,0,-87.7,41.97,250,69980,0,,\n");
        CHECK_THROWS_AS(bundle::load_trajectory_csv(p), std::runtime_error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(bundle::load_trajectory_csv(dir + "/none.csv"), std::runtime_error);
    }
}

TEST_CASE("read_bundle_meta requires metrics.json") {
    const auto dir = support::scratch_dir("meta_missing");
    CHECK_THROWS_AS(bundle::read_bundle_meta(dir), std::runtime_error);
}
