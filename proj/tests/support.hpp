// Shared fixtures: a small eastbound route problem that several test files
// solve, plus temp-file helpers.
#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "flightopt/dynamics.hpp"
#include "flightopt/transcription.hpp"

namespace support {

inline flightopt::dynamics::AircraftParams default_params() { return {}; }

/// Time-focus problem flying dist_km due east from the origin in T_h hours.
inline flightopt::transcription::CftocProblem straight_problem(int N, double T_h,
                                                               double dist_km,
                                                               double v0 = 250.0,
                                                               double m0 = 70000.0) {
    namespace tr = flightopt::transcription;
    tr::CftocProblem p;
    p.N = N;
    p.dT_s = T_h * 3600.0 / N;
    p.x0 = {0.0, 0.0, v0, m0, 0.0};
    p.xf = {dist_km, 0.0, v0, m0, 0.0};
    p.x_lb << -500.0, -500.0, 150.0, 55000.0, -2.0 * M_PI;
    p.x_ub << dist_km + 500.0, 500.0, 304.0, m0, 2.0 * M_PI;
    p.u_lb << 0.0, -0.02;
    p.u_ub << 1.4e5, 0.02;
    p.Q.setZero();
    p.Q(0, 0) = 1e-2;
    p.Q(1, 1) = 1e-2;
    p.R.setZero();
    p.R(0, 0) = 1e-10;
    p.R(1, 1) = 1e2;
    p.mode = tr::ObjectiveMode::TimeFocus;
    return p;
}

/// Unique scratch directory under the system temp dir; removed by the caller
/// if they care, ignored otherwise.
inline std::string scratch_dir(const std::string& tag) {
    static std::mt19937_64 rng{std::random_device{}()};
    const auto dir = std::filesystem::temp_directory_path() /
                     ("flightopt_test_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(dir);
    return dir.string();
}

inline std::string write_file(const std::string& dir, const std::string& name,
                              const std::string& content) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    return path.string();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace support
