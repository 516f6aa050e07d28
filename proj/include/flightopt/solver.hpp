// Equality-constrained NLP solver: augmented-Lagrangian outer loop with a
// projected limited-memory quasi-Newton inner minimizer over box bounds.
// All norms are infinity norms in the problem's scaled coordinates.
#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "flightopt/nlp_problem.hpp"
#include "flightopt/transcription.hpp"

namespace flightopt::solver {

enum class SolveStatus { Converged, Infeasible, IterationLimit };

const char* to_string(SolveStatus status);

struct SolverOptions {
    int max_outer{50};
    int max_inner{20000};
    double tol_feas{1e-6};
    double tol_stat{1e-6};
    double penalty_init{10.0};
    double penalty_growth{10.0};
    double penalty_max{1e8};
    int lbfgs_memory{10};
    double armijo_c{1e-4};
    double backtrack_ratio{0.5};
    std::ostream* log{nullptr};  // optional live iteration log (not owned)

    void validate() const;
};

/// One outer iteration snapshot; objective is in natural (unscaled) units.
struct OuterRecord {
    int iter{0};
    double objective{0.0};
    double feas_norm{0.0};
    double stat_norm{0.0};
    double penalty{0.0};
};

struct SolveResult {
    SolveStatus status{SolveStatus::IterationLimit};
    Eigen::VectorXd z_star;
    Eigen::VectorXd multipliers;  // scaled-constraint currency
    double feas_norm{0.0};
    double stat_norm{0.0};
    int outer_iters{0};
    int inner_iters{0};
    double objective_value{0.0};
    double obj_scale{1.0};  // objective was minimized as f/obj_scale
    int z0_clipped{0};      // start-point entries moved onto the box
    std::vector<OuterRecord> history;
};

struct KktResiduals {
    double stat_norm{0.0};
    double feas_norm{0.0};
    double comp_norm{0.0};
};

/// Minimizes inst subject to its equalities and box bounds, starting from z0
/// (clipped into the box if needed). Throws std::invalid_argument on
/// dimension mismatches and std::runtime_error if the objective or
/// constraints are non-finite at the start point.
SolveResult solve(const NlpProblem& inst, const Eigen::VectorXd& z0,
                  const SolverOptions& opts = {});

/// Scaled KKT residuals at (z, multipliers): projected-gradient stationarity,
/// constraint feasibility, and bound complementarity. obj_scale must match
/// the one the solve used (SolveResult::obj_scale) for comparable numbers.
KktResiduals kkt_residuals(const NlpProblem& inst, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& multipliers, double obj_scale = 1.0);

/// One grid point of a minimum-time scan.
struct MinTimeAttempt {
    double T_h{0.0};
    SolveStatus status{SolveStatus::IterationLimit};
    double feas_norm{0.0};
    double objective{0.0};
};

struct MinTimeResult {
    double T_min_h{0.0};
    SolveResult solution;
    std::vector<MinTimeAttempt> attempts;  // every grid point tried, ascending T
};

/// Raised when no horizon in the scanned range converges; carries the
/// closest-to-feasible diagnostics for reporting.
class NoFeasibleTimeError : public std::runtime_error {
  public:
    NoFeasibleTimeError(std::string message, double best_T_h, SolveResult best,
                        std::vector<MinTimeAttempt> attempts)
        : std::runtime_error(std::move(message)),
          best_T_h_(best_T_h),
          best_(std::move(best)),
          attempts_(std::move(attempts)) {}

    double best_T_h() const { return best_T_h_; }
    const SolveResult& best_result() const { return best_; }
    const std::vector<MinTimeAttempt>& attempts() const { return attempts_; }

  private:
    double best_T_h_;
    SolveResult best_;
    std::vector<MinTimeAttempt> attempts_;
};

/// Scans horizons T = t_lo_h, t_lo_h + step_h, ... <= t_hi_h (N fixed, dT =
/// T/N) and returns the smallest T whose solve converges. jobs > 1 solves
/// grid points concurrently without changing which T wins. Per-solve live
/// logging is suppressed during the scan; the winning solve's history is in
/// the result.
MinTimeResult solve_min_time(const transcription::CftocProblem& problem_template,
                             const wind::PolynomialWindField& field,
                             const dynamics::AircraftParams& params, double t_lo_h,
                             double t_hi_h, double step_h, const SolverOptions& opts = {},
                             int jobs = 1);

}  // namespace flightopt::solver
