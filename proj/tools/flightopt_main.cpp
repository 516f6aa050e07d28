// flightopt: wind-aware point-mass trajectory optimization runs from scenario
// files. Subcommands: fit-wind, optimize, compare, replay.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "flightopt/bundle.hpp"
#include "flightopt/dynamics.hpp"
#include "flightopt/geo.hpp"
#include "flightopt/scenario.hpp"
#include "flightopt/sim.hpp"
#include "flightopt/solver.hpp"
#include "flightopt/transcription.hpp"
#include "flightopt/wind.hpp"

namespace {

namespace fs = std::filesystem;
using namespace flightopt;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;       // bad flags, unreadable/invalid inputs
constexpr int kExitInfeasible = 2;  // solver could not reach a converged solution
constexpr int kExitInternal = 3;    // unexpected failure after a valid setup

std::string resolve_out_dir(const std::string& flag_value, const std::string& scenario_value) {
    if (!flag_value.empty()) return flag_value;
    if (!scenario_value.empty()) return scenario_value;
    if (const char* env = std::getenv("FLIGHTOPT_OUT"); env != nullptr && *env != '\0') {
        return env;
    }
    return "out";
}

std::string scenario_dir(const std::string& scenario_path) {
    const fs::path parent = fs::path(scenario_path).parent_path();
    return parent.empty() ? std::string(".") : parent.string();
}

void print_metrics(const sim::TrajectoryMetrics& m, bool with_cross_track) {
    std::cout << "  travel_time_h       " << m.travel_time_h << "\n"
              << "  fuel_burned_kg      " << m.fuel_burned_kg << "\n"
              << "  path_length_km      " << m.path_length_km << "\n";
    if (with_cross_track) {
        std::cout << "  max_cross_track_km  " << m.max_cross_track_km << "\n"
                  << "  mean_cross_track_km " << m.mean_cross_track_km << "\n";
    }
}

int run_optimize(const std::string& scenario_path, const std::string& out_flag, int jobs,
                 const std::string& log_path) {
    scenario::Scenario scn;
    scenario::Assembled assembled;
    try {
        scn = scenario::load_scenario(scenario_path);
        assembled = scenario::assemble(scn, scenario_dir(scenario_path));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    const std::string out_dir = resolve_out_dir(out_flag, scn.output_dir);

    std::ofstream live_log;
    solver::SolverOptions opts = scn.solver_opts;
    if (!log_path.empty()) {
        live_log.open(log_path, std::ios::trunc);
        if (!live_log) {
            std::cerr << "error: cannot open log file: " << log_path << "\n";
            return kExitUsage;
        }
        opts.log = &live_log;
    }

    transcription::CftocProblem problem = assembled.problem;
    solver::SolveResult result;
    std::optional<double> T_min_h;
    std::vector<solver::MinTimeAttempt> attempts;
    try {
        if (scn.horizon.is_search()) {
            auto scan = solver::solve_min_time(problem, assembled.field, scn.aircraft,
                                               scn.horizon.t_lo_h, scn.horizon.t_hi_h,
                                               scn.horizon.step_h, opts, jobs);
            T_min_h = scan.T_min_h;
            attempts = std::move(scan.attempts);
            result = std::move(scan.solution);
            problem.dT_s = *T_min_h * 3600.0 / problem.N;
            std::cout << "minimum feasible travel time: " << *T_min_h << " h ("
                      << attempts.size() << " grid points tried)\n";
        } else {
            transcription::NlpInstance inst(problem, assembled.field, scn.aircraft);
            const Eigen::VectorXd z0 = transcription::initial_guess(problem, scn.aircraft);
            result = solver::solve(inst, z0, opts);
        }
    } catch (const solver::NoFeasibleTimeError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        std::cerr << "  closest attempt: T = " << e.best_T_h()
                  << " h, status = " << solver::to_string(e.best_result().status)
                  << ", feas_norm = " << e.best_result().feas_norm << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }

    std::cout << "status: " << solver::to_string(result.status) << " (outer "
              << result.outer_iters << ", inner " << result.inner_iters << ")\n"
              << "feas_norm: " << result.feas_norm << "  stat_norm: " << result.stat_norm
              << "\n";
    if (result.status != solver::SolveStatus::Converged) {
        std::cerr << "infeasible: no converged solution for this scenario (status "
                  << solver::to_string(result.status) << ", feas_norm " << result.feas_norm
                  << ")\n";
        return kExitInfeasible;
    }

    try {
        transcription::NlpInstance inst(problem, assembled.field, scn.aircraft);
        bundle::BundleInputs bi;
        bi.scenario_name = scn.name;
        bi.proj = assembled.proj;
        bi.destination = scn.destination;
        bi.problem = &problem;
        bi.result = &result;
        bi.states = inst.unpack_states(result.z_star);
        bi.controls = inst.unpack_controls(result.z_star);
        bi.metrics = sim::metrics(bi.states, problem.dT_s, scn.aircraft);
        bi.replay_gap = sim::replay(result, problem, assembled.field, scn.aircraft).max_gap;
        bi.objective_mode =
            scn.mode == transcription::ObjectiveMode::TimeFocus ? "time" : "fuel";
        bi.T_min_h = T_min_h;
        bi.attempts = std::move(attempts);
        bundle::write_bundle(out_dir, bi);

        print_metrics(bi.metrics, /*with_cross_track=*/false);
        std::cout << "  replay_gap          " << bi.replay_gap << "\n"
                  << "wrote " << out_dir << "/{trajectory.csv,metrics.json,trajectory.geojson,solver.log}\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitOk;
}

int run_fit_wind(const std::string& csv_path, double origin_lon, double origin_lat, int degree,
                 const std::string& out_flag) {
    try {
        const geo::Projection proj{{origin_lon, origin_lat}};
        const auto samples = wind::ingest_csv(csv_path, proj);
        const auto averaged = wind::average_slots(samples);
        const wind::WindBasis basis =
            degree > 0 ? wind::WindBasis::full(degree) : wind::WindBasis::standard();
        const auto [field, report] = wind::fit(averaged, basis);
        const std::string out_dir = resolve_out_dir(out_flag, "");
        bundle::write_wind_fit(out_dir, field, report);
        std::cout << "fit " << report.sample_count << " averaged samples, degree "
                  << report.degree << "\n"
                  << "  rss_x " << report.rss_x << "  rss_y " << report.rss_y << "\n"
                  << "  condition_x " << report.condition_x << "  condition_y "
                  << report.condition_y << "\n"
                  << "wrote " << out_dir << "/wind_fit.json\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

int run_compare(const std::string& bundle_dir, const std::string& tracks_path,
                const std::string& acid, const std::string& out_flag) {
    try {
        const auto meta = bundle::read_bundle_meta(bundle_dir);
        const auto traj =
            bundle::load_trajectory_csv((fs::path(bundle_dir) / "trajectory.csv").string());
        const geo::Projection proj{meta.origin};
        const auto tracks = sim::load_tracks(tracks_path, proj);
        const auto it = tracks.find(acid);
        if (it == tracks.end()) {
            std::ostringstream ids;
            for (const auto& [id, _] : tracks) ids << ' ' << id;
            std::cerr << "error: no track with id '" << acid << "'; available:" << ids.str()
                      << "\n";
            return kExitUsage;
        }
        const auto m = sim::metrics(traj.states, traj.dT_s, dynamics::AircraftParams{},
                                    it->second, proj);
        std::cout << "trajectory vs track '" << acid << "' (" << it->second.size()
                  << " fixes)\n";
        print_metrics(m, /*with_cross_track=*/true);
        const std::string out_path = out_flag.empty()
                                         ? (fs::path(bundle_dir) / "compare.json").string()
                                         : out_flag;
        bundle::write_compare(out_path, acid, m);
        std::cout << "wrote " << out_path << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

int run_replay(const std::string& scenario_path, const std::string& bundle_dir) {
    scenario::Scenario scn;
    scenario::Assembled assembled;
    bundle::LoadedTrajectory traj;
    try {
        scn = scenario::load_scenario(scenario_path);
        assembled = scenario::assemble(scn, scenario_dir(scenario_path));
        traj = bundle::load_trajectory_csv(
            (fs::path(bundle_dir) / "trajectory.csv").string());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        const auto replayed =
            dynamics::simulate(traj.states.front(), traj.controls, assembled.field, traj.dT_s,
                               scn.aircraft, dynamics::Stepper::Euler);
        double gap = 0.0;
        for (std::size_t k = 0; k < traj.states.size(); ++k) {
            const auto a = replayed[k].to_vector();
            const auto b = traj.states[k].to_vector();
            for (int j = 0; j < 5; ++j) {
                gap = std::max(gap, std::abs(a[j] - b[j]) / transcription::kStateScale[j]);
            }
        }
        const auto m = sim::metrics(replayed, traj.dT_s, scn.aircraft);
        std::cout << "replayed " << traj.controls.size() << " controls\n"
                  << "  max scaled state gap " << gap << "\n";
        print_metrics(m, /*with_cross_track=*/false);
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wind-aware minimum-time / minimum-fuel flight trajectory optimization"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir, log_path;
    int jobs = 1;

    auto* optimize = app.add_subcommand("optimize", "Solve a scenario and write a result bundle");
    optimize->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    optimize->add_option("--out", out_dir, "Output directory (default: scenario, then $FLIGHTOPT_OUT, then ./out)");
    optimize->add_option("--jobs", jobs, "Parallel solves during a travel-time search")
        ->check(CLI::PositiveNumber);
    optimize->add_option("--log", log_path, "Live solver iteration log file");

    std::string fit_csv;
    double origin_lon = 0.0, origin_lat = 0.0;
    int fit_degree = 0;
    std::string fit_out;
    auto* fit = app.add_subcommand("fit-wind", "Fit polynomial wind surfaces to gridded samples");
    fit->add_option("csv", fit_csv, "Wind sample CSV (lon,lat,u,v,slot)")->required();
    fit->add_option("--origin-lon", origin_lon, "Projection origin longitude, deg")->required();
    fit->add_option("--origin-lat", origin_lat, "Projection origin latitude, deg")->required();
    fit->add_option("--degree", fit_degree,
                    "Full bivariate basis of this degree (default: the fixed 13/10-term basis)")
        ->check(CLI::Range(0, 9));
    fit->add_option("--out", fit_out, "Output directory");

    std::string cmp_bundle, cmp_tracks, cmp_acid, cmp_out;
    auto* compare = app.add_subcommand("compare", "Compare a result bundle against a recorded track");
    compare->add_option("--bundle", cmp_bundle, "Result bundle directory")->required();
    compare->add_option("--tracks", cmp_tracks, "Track CSV (acid,t,lon,lat,alt)")->required();
    compare->add_option("--acid", cmp_acid, "Flight id to compare against")->required();
    compare->add_option("--out", cmp_out, "Report path (default: <bundle>/compare.json)");

    std::string rp_scenario, rp_bundle;
    auto* replay = app.add_subcommand("replay", "Re-integrate a bundle's controls and report the gap");
    replay->add_option("--scenario", rp_scenario, "Scenario JSON file")->required();
    replay->add_option("--bundle", rp_bundle, "Result bundle directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (optimize->parsed()) return run_optimize(scenario_path, out_dir, jobs, log_path);
        if (fit->parsed()) return run_fit_wind(fit_csv, origin_lon, origin_lat, fit_degree, fit_out);
        if (compare->parsed()) return run_compare(cmp_bundle, cmp_tracks, cmp_acid, cmp_out);
        if (replay->parsed()) return run_replay(rp_scenario, rp_bundle);
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
