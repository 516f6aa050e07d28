#include "flightopt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "flightopt/transcription.hpp"

namespace flightopt::solver {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::VectorXd clip_to_box(const Eigen::VectorXd& z, const Eigen::VectorXd& lb,
                            const Eigen::VectorXd& ub) {
    return z.cwiseMax(lb).cwiseMin(ub);
}

// Scaled view of the problem: zhat = z ./ var_scales, chat = c ./ con_scales,
// fhat = f / obj_scale. The solver iterates exclusively on zhat.
struct ScaledProblem {
    const NlpProblem& inst;
    Eigen::VectorXd var_scales;
    Eigen::VectorXd con_scales;
    Eigen::VectorXd lb_hat, ub_hat;
    double obj_scale{1.0};

    explicit ScaledProblem(const NlpProblem& p) : inst(p) {
        var_scales = p.variable_scales();
        con_scales = p.constraint_scales();
        if (var_scales.size() != p.num_vars() || con_scales.size() != p.num_constraints()) {
            throw std::invalid_argument("problem scale vectors have wrong dimensions");
        }
        if ((var_scales.array() <= 0.0).any() || (con_scales.array() <= 0.0).any()) {
            throw std::invalid_argument("problem scales must be positive");
        }
        const Eigen::VectorXd lb = p.lower_bounds();
        const Eigen::VectorXd ub = p.upper_bounds();
        if (lb.size() != p.num_vars() || ub.size() != p.num_vars()) {
            throw std::invalid_argument("bound vectors have wrong dimensions");
        }
        lb_hat = lb.cwiseQuotient(var_scales);
        ub_hat = ub.cwiseQuotient(var_scales);
    }

    Eigen::VectorXd natural(const Eigen::VectorXd& zhat) const {
        return zhat.cwiseProduct(var_scales);
    }

    double objective_nat(const Eigen::VectorXd& zhat) const {
        return inst.objective(natural(zhat));
    }

    Eigen::VectorXd constraints_hat(const Eigen::VectorXd& zhat) const {
        return inst.constraints(natural(zhat)).cwiseQuotient(con_scales);
    }

    // Augmented Lagrangian value at zhat for multipliers lambda, penalty mu.
    double al_value(const Eigen::VectorXd& zhat, const Eigen::VectorXd& lambda,
                    double mu) const {
        const Eigen::VectorXd z = natural(zhat);
        const double f = inst.objective(z) / obj_scale;
        if (inst.num_constraints() == 0) return f;
        const Eigen::VectorXd c = inst.constraints(z).cwiseQuotient(con_scales);
        return f + lambda.dot(c) + 0.5 * mu * c.squaredNorm();
    }

    // Value and gradient together (one Jacobian evaluation).
    double al_value_grad(const Eigen::VectorXd& zhat, const Eigen::VectorXd& lambda, double mu,
                         Eigen::VectorXd& grad_out) const {
        const Eigen::VectorXd z = natural(zhat);
        const double f = inst.objective(z) / obj_scale;
        Eigen::VectorXd g_nat = inst.objective_gradient(z) / obj_scale;
        double value = f;
        if (inst.num_constraints() > 0) {
            const Eigen::VectorXd c = inst.constraints(z).cwiseQuotient(con_scales);
            value += lambda.dot(c) + 0.5 * mu * c.squaredNorm();
            const Eigen::VectorXd w = (lambda + mu * c).cwiseQuotient(con_scales);
            g_nat += inst.constraint_jacobian(z).transpose() * w;
        }
        grad_out = g_nat.cwiseProduct(var_scales);
        return value;
    }

    // Gradient of the plain Lagrangian (mu = 0) in scaled coordinates.
    Eigen::VectorXd lagrangian_grad_hat(const Eigen::VectorXd& zhat,
                                        const Eigen::VectorXd& lambda) const {
        const Eigen::VectorXd z = natural(zhat);
        Eigen::VectorXd g_nat = inst.objective_gradient(z) / obj_scale;
        if (inst.num_constraints() > 0) {
            const Eigen::VectorXd w = lambda.cwiseQuotient(con_scales);
            g_nat += inst.constraint_jacobian(z).transpose() * w;
        }
        return g_nat.cwiseProduct(var_scales);
    }

    // Infinity norm of the projected-gradient displacement zhat - P(zhat - g).
    double pg_norm(const Eigen::VectorXd& zhat, const Eigen::VectorXd& g) const {
        return (zhat - clip_to_box(zhat - g, lb_hat, ub_hat)).lpNorm<Eigen::Infinity>();
    }
};

// Projected L-BFGS over the box: minimizes the augmented Lagrangian at fixed
// (lambda, mu) until the projected-gradient norm drops below omega or the
// iteration budget runs out.
struct InnerResult {
    int iterations{0};
    double pg_norm{0.0};
    bool reached_tol{false};
};

InnerResult inner_minimize(const ScaledProblem& sp, Eigen::VectorXd& zhat,
                           const Eigen::VectorXd& lambda, double mu, double omega,
                           const SolverOptions& opts) {
    const int n = static_cast<int>(zhat.size());
    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    Eigen::VectorXd grad(n);
    double value = sp.al_value_grad(zhat, lambda, mu, grad);

    InnerResult res;
    for (int it = 0; it < opts.max_inner; ++it) {
        const double pg = sp.pg_norm(zhat, grad);
        res.pg_norm = pg;
        if (pg <= omega) {
            res.reached_tol = true;
            return res;
        }
        ++res.iterations;

        // Freeze variables pressing against a bound the gradient would cross.
        Eigen::VectorXd g_free = grad;
        for (int i = 0; i < n; ++i) {
            const double span = std::max(1.0, std::abs(zhat[i]));
            const bool at_lo = zhat[i] - sp.lb_hat[i] <= 1e-10 * span && grad[i] > 0.0;
            const bool at_hi = sp.ub_hat[i] - zhat[i] <= 1e-10 * span && grad[i] < 0.0;
            if (at_lo || at_hi) g_free[i] = 0.0;
        }

        // Two-loop recursion on the free gradient.
        Eigen::VectorXd d = -g_free;
        const int m = static_cast<int>(s_hist.size());
        if (m > 0) {
            std::vector<double> alpha(m);
            for (int i = m - 1; i >= 0; --i) {
                alpha[i] = rho_hist[i] * s_hist[i].dot(d);
                d -= alpha[i] * y_hist[i];
            }
            const double gamma =
                s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            d *= gamma;
            for (int i = 0; i < m; ++i) {
                const double beta = rho_hist[i] * y_hist[i].dot(d);
                d += (alpha[i] - beta) * s_hist[i];
            }
        }
        for (int i = 0; i < n; ++i) {
            if (g_free[i] == 0.0 && grad[i] != 0.0) d[i] = 0.0;
        }
        if (!(d.dot(g_free) < 0.0)) {  // not a descent direction; restart
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            d = -g_free;
        }

        // Backtracking Armijo search along the projected arc. The sufficient-
        // decrease test carries a rounding floor: near a minimizer the true
        // decrease of an O(|value|) function falls below one ulp, and a strict
        // comparison would reject every step and stall the whole solve.
        const double noise =
            16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(value));
        double step = 1.0;
        bool accepted = false;
        Eigen::VectorXd z_trial;
        double value_trial = 0.0;
        while (step > 1e-20) {
            z_trial = clip_to_box(zhat + step * d, sp.lb_hat, sp.ub_hat);
            const Eigen::VectorXd delta = z_trial - zhat;
            if (delta.lpNorm<Eigen::Infinity>() == 0.0) break;
            value_trial = sp.al_value(z_trial, lambda, mu);
            const double slope = grad.dot(delta);
            if (std::isfinite(value_trial) &&
                ((slope < 0.0 && value_trial <= value + opts.armijo_c * slope + noise) ||
                 (slope >= 0.0 && value_trial < value))) {
                accepted = true;
                break;
            }
            step *= opts.backtrack_ratio;
        }
        if (!accepted) return res;  // stalled; caller reacts via penalty growth

        Eigen::VectorXd grad_new(n);
        value_trial = sp.al_value_grad(z_trial, lambda, mu, grad_new);
        const Eigen::VectorXd s = z_trial - zhat;
        const Eigen::VectorXd y = grad_new - grad;
        const double sy = s.dot(y);
        if (sy > 1e-10 * s.norm() * y.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(y);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > opts.lbfgs_memory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        zhat = z_trial;
        value = value_trial;
        grad = grad_new;
    }
    res.pg_norm = sp.pg_norm(zhat, grad);
    res.reached_tol = res.pg_norm <= omega;
    return res;
}

}  // namespace

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::Converged:
            return "converged";
        case SolveStatus::Infeasible:
            return "infeasible";
        case SolveStatus::IterationLimit:
            return "iteration-limit";
    }
    return "unknown";
}

void SolverOptions::validate() const {
    if (max_outer <= 0 || max_inner <= 0 || lbfgs_memory <= 0) {
        throw std::invalid_argument("solver iteration limits and memory must be positive");
    }
    if (!(tol_feas > 0.0) || !(tol_stat > 0.0)) {
        throw std::invalid_argument("solver tolerances must be positive");
    }
    if (!(penalty_init > 0.0) || !(penalty_max > 0.0)) {
        throw std::invalid_argument("penalty parameters must be positive");
    }
    if (!(penalty_growth > 1.0)) {
        throw std::invalid_argument("penalty_growth must exceed 1");
    }
    if (!(armijo_c > 0.0 && armijo_c < 1.0) ||
        !(backtrack_ratio > 0.0 && backtrack_ratio < 1.0)) {
        throw std::invalid_argument("line-search constants must lie in (0, 1)");
    }
}

SolveResult solve(const NlpProblem& inst, const Eigen::VectorXd& z0,
                  const SolverOptions& opts) {
    opts.validate();
    if (z0.size() != inst.num_vars()) {
        std::ostringstream msg;
        msg << "start point has dimension " << z0.size() << ", expected " << inst.num_vars();
        throw std::invalid_argument(msg.str());
    }

    ScaledProblem sp(inst);
    const Eigen::VectorXd lb = inst.lower_bounds();
    const Eigen::VectorXd ub = inst.upper_bounds();

    SolveResult result;
    Eigen::VectorXd z_start = clip_to_box(z0, lb, ub);
    for (int i = 0; i < z_start.size(); ++i) {
        if (z_start[i] != z0[i]) ++result.z0_clipped;
    }

    {
        const double f0 = inst.objective(z_start);
        const Eigen::VectorXd c0 = inst.constraints(z_start);
        if (!std::isfinite(f0) || !c0.allFinite()) {
            throw std::runtime_error("objective or constraints are non-finite at the start point");
        }
        const Eigen::VectorXd g0_hat =
            inst.objective_gradient(z_start).cwiseProduct(sp.var_scales);
        if (!g0_hat.allFinite()) {
            throw std::runtime_error("objective gradient is non-finite at the start point");
        }
        // Bring the scaled objective gradient to O(10) so the stationarity
        // tolerance means the same thing across objective configurations.
        sp.obj_scale = std::max(1.0, g0_hat.lpNorm<Eigen::Infinity>() / 10.0);
    }
    result.obj_scale = sp.obj_scale;

    const int m = inst.num_constraints();
    Eigen::VectorXd zhat = z_start.cwiseQuotient(sp.var_scales);
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(m);
    double mu = opts.penalty_init;
    double omega = std::max(opts.tol_stat, 1.0 / mu);
    // Feasibility each outer iteration must beat to count as progress; the
    // penalty grows only when progress stalls, so mu stays as small as the
    // problem allows and the inner subproblems stay well conditioned.
    double feas_ref = kInf;
    constexpr double kFeasProgress = 0.25;
    constexpr double kOmegaShrink = 0.1;
    constexpr double kLambdaCap = 1e10;  // safeguard box on the multipliers
    int extensions_used = 0;             // consecutive budget-exhausted inners

    double best_feas = kInf;
    double best_stat = kInf;
    Eigen::VectorXd best_zhat = zhat;
    Eigen::VectorXd best_lambda = lambda;

    result.status = SolveStatus::IterationLimit;
    for (int outer = 1; outer <= opts.max_outer; ++outer) {
        result.outer_iters = outer;
        const InnerResult inner = inner_minimize(sp, zhat, lambda, mu, omega, opts);
        result.inner_iters += inner.iterations;

        const Eigen::VectorXd c = m > 0 ? sp.constraints_hat(zhat)
                                        : Eigen::VectorXd::Zero(0);
        const double feas = m > 0 ? c.lpNorm<Eigen::Infinity>() : 0.0;

        // The subproblem counts as finished when it hit its tolerance or made
        // its final line search stall at the arithmetic floor. A spent
        // iteration budget means "still minimizing" and earns one extension;
        // after that the iterate is taken as the best this subproblem yields.
        const bool exhausted =
            !inner.reached_tol && inner.iterations >= opts.max_inner;
        const bool finished = !exhausted || extensions_used >= 1;

        // First-order multiplier update from the (approximately) minimized
        // subproblem iterate.
        if (finished && m > 0) {
            lambda = (lambda + mu * c).cwiseMax(-kLambdaCap).cwiseMin(kLambdaCap);
        }
        const double stat = sp.pg_norm(zhat, sp.lagrangian_grad_hat(zhat, lambda));

        result.history.push_back(
            {outer, sp.objective_nat(zhat), feas, stat, mu});
        if (opts.log != nullptr) {
            const auto& rec = result.history.back();
            (*opts.log) << rec.iter << '\t' << rec.objective << '\t' << rec.feas_norm << '\t'
                        << rec.stat_norm << '\t' << rec.penalty << '\n';
        }

        if (feas < best_feas || (feas == best_feas && stat < best_stat)) {
            best_feas = feas;
            best_stat = stat;
            best_zhat = zhat;
            best_lambda = lambda;
        }

        if (feas <= opts.tol_feas && stat <= opts.tol_stat) {
            result.status = SolveStatus::Converged;
            result.feas_norm = feas;
            result.stat_norm = stat;
            result.z_star = sp.natural(zhat);
            result.multipliers = lambda;
            result.objective_value = inst.objective(result.z_star);
            return result;
        }

        if (!finished) {
            // Iteration budget ran out mid-subproblem: continue it next outer
            // at unchanged (lambda, mu, omega) rather than reacting to an
            // unconverged iterate.
            ++extensions_used;
            continue;
        }
        extensions_used = 0;

        omega = std::max(opts.tol_stat, kOmegaShrink * omega);
        // Once feasibility holds, the multipliers carry it and the penalty
        // only hurts the inner subproblem's conditioning; shrink it so the
        // stationarity polish converges instead of crawling.
        if (feas <= opts.tol_feas && stat > opts.tol_stat) {
            mu = std::max(opts.penalty_init, 0.2 * mu);
        }
        // Growth is reserved for genuine feasibility stalls well away from
        // tolerance; near-tolerance jitter must not ratchet the penalty.
        const bool stalled = feas > kFeasProgress * feas_ref &&
                             feas > 100.0 * opts.tol_feas;
        feas_ref = std::min(feas_ref, feas);
        if (stalled) {
            if (mu >= opts.penalty_max) {
                if (feas > 10.0 * opts.tol_feas) {
                    result.status = SolveStatus::Infeasible;
                    break;
                }
                // Penalty capped but feasibility is close; keep polishing.
            }
            mu = std::min(mu * opts.penalty_growth, opts.penalty_max);
            omega = std::max(opts.tol_stat, std::min(omega, 1.0 / mu));
        }
    }

    result.feas_norm = best_feas;
    result.stat_norm = best_stat;
    result.z_star = sp.natural(best_zhat);
    result.multipliers = best_lambda;
    result.objective_value = inst.objective(result.z_star);
    return result;
}

KktResiduals kkt_residuals(const NlpProblem& inst, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& multipliers, double obj_scale) {
    if (z.size() != inst.num_vars()) {
        throw std::invalid_argument("kkt_residuals: point dimension mismatch");
    }
    if (multipliers.size() != inst.num_constraints()) {
        throw std::invalid_argument("kkt_residuals: multiplier dimension mismatch");
    }
    if (!(obj_scale > 0.0)) {
        throw std::invalid_argument("kkt_residuals: obj_scale must be positive");
    }
    ScaledProblem sp(inst);
    sp.obj_scale = obj_scale;
    const Eigen::VectorXd zhat = z.cwiseQuotient(sp.var_scales);

    KktResiduals out;
    const Eigen::VectorXd g = sp.lagrangian_grad_hat(zhat, multipliers);
    out.stat_norm = sp.pg_norm(zhat, g);
    out.feas_norm = inst.num_constraints() > 0
                        ? sp.constraints_hat(zhat).lpNorm<Eigen::Infinity>()
                        : 0.0;
    double comp = 0.0;
    for (int i = 0; i < zhat.size(); ++i) {
        const double gap_lo = zhat[i] - sp.lb_hat[i];
        const double gap_hi = sp.ub_hat[i] - zhat[i];
        const double dist = std::min(1.0, std::min(gap_lo, gap_hi));
        comp = std::max(comp, std::abs(g[i]) * std::max(dist, 0.0));
    }
    out.comp_norm = comp;
    return out;
}

MinTimeResult solve_min_time(const transcription::CftocProblem& problem_template,
                             const wind::PolynomialWindField& field,
                             const dynamics::AircraftParams& params, double t_lo_h,
                             double t_hi_h, double step_h, const SolverOptions& opts,
                             int jobs) {
    if (!(step_h > 0.0)) {
        throw std::invalid_argument("minimum-time scan step must be positive");
    }
    if (!(t_lo_h > 0.0) || t_hi_h < t_lo_h) {
        throw std::invalid_argument("minimum-time scan range must satisfy 0 < t_lo <= t_hi");
    }
    if (jobs < 1) {
        throw std::invalid_argument("jobs must be at least 1");
    }

    std::vector<double> grid;
    for (double t = t_lo_h; t <= t_hi_h + 1e-9; t += step_h) grid.push_back(t);

    SolverOptions scan_opts = opts;
    scan_opts.log = nullptr;  // no interleaved per-solve logging during the scan

    const auto solve_one = [&](double T_h) -> SolveResult {
        transcription::CftocProblem p = problem_template;
        p.dT_s = T_h * 3600.0 / p.N;
        transcription::NlpInstance inst(p, field, params);
        const Eigen::VectorXd z0 = transcription::initial_guess(p, params);
        return solve(inst, z0, scan_opts);
    };

    MinTimeResult out;
    std::vector<SolveResult> results(grid.size());
    double best_feas = kInf;
    std::size_t best_idx = 0;

    std::size_t next = 0;
    while (next < grid.size()) {
        const std::size_t chunk_end =
            std::min(grid.size(), next + static_cast<std::size_t>(jobs));
        if (jobs == 1) {
            results[next] = solve_one(grid[next]);
        } else {
            std::vector<std::thread> workers;
            std::vector<std::exception_ptr> errors(chunk_end - next);
            for (std::size_t i = next; i < chunk_end; ++i) {
                workers.emplace_back([&, i] {
                    try {
                        results[i] = solve_one(grid[i]);
                    } catch (...) {
                        errors[i - next] = std::current_exception();
                    }
                });
            }
            for (auto& w : workers) w.join();
            for (const auto& err : errors) {
                if (err) std::rethrow_exception(err);
            }
        }
        for (std::size_t i = next; i < chunk_end; ++i) {
            out.attempts.push_back({grid[i], results[i].status, results[i].feas_norm,
                                    results[i].objective_value});
            if (results[i].status == SolveStatus::Converged) {
                out.T_min_h = grid[i];
                out.solution = std::move(results[i]);
                return out;
            }
            if (results[i].feas_norm < best_feas) {
                best_feas = results[i].feas_norm;
                best_idx = i;
            }
        }
        next = (jobs == 1) ? next + 1 : chunk_end;
    }

    std::ostringstream msg;
    msg << "no feasible travel time in [" << t_lo_h << ", " << t_hi_h << "] h at step "
        << step_h << " h; closest feasibility " << best_feas << " at T = " << grid[best_idx]
        << " h";
    throw NoFeasibleTimeError(msg.str(), grid[best_idx], std::move(results[best_idx]),
                              std::move(out.attempts));
}

}  // namespace flightopt::solver
