#include "flightopt/transcription.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace flightopt::transcription {

namespace {

const char* kStateNames[5] = {"x", "y", "v", "m", "theta"};
const char* kControlNames[2] = {"thrust", "turn_rate"};

// Structural nonzeros of the single-step Jacobians A = df/dX, B = df/dU.
// Position rates feel (x, y) through the wind gradient plus (v, theta); the
// speed rate feels (v, m); the mass and heading rates feel controls only.
bool defect_state_entry(int i, int j) {
    switch (i) {
        case 0:
        case 1:
            return j == 0 || j == 1 || j == 2 || j == 4;
        case 2:
            return j == 2 || j == 3;
        default:
            return false;
    }
}

bool defect_control_entry(int i, int j) {
    return (i == 2 && j == 0) || (i == 3 && j == 0) || (i == 4 && j == 1);
}

void check_symmetric_psd(const Eigen::MatrixXd& M, const char* name, bool strict) {
    const double scale = std::max(1.0, M.norm());
    if (!M.isApprox(M.transpose(), 1e-12)) {
        throw std::invalid_argument(std::string(name) + " must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    const double min_eig = es.eigenvalues().minCoeff();
    if (strict ? !(min_eig > 0.0) : min_eig < -1e-12 * scale) {
        std::ostringstream msg;
        msg << name << " must be positive " << (strict ? "definite" : "semidefinite")
            << "; smallest eigenvalue " << min_eig;
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace

void CftocProblem::validate() const {
    if (N < 2) {
        throw std::invalid_argument("horizon N must be at least 2");
    }
    if (!(dT_s > 0.0) || !std::isfinite(dT_s)) {
        throw std::invalid_argument("step size dT must be positive");
    }
    if (!(terminal_slack_km > 0.0)) {
        throw std::invalid_argument("terminal_slack must be positive");
    }
    if (w_fuel < 0.0) {
        throw std::invalid_argument("w_fuel must be nonnegative");
    }
    for (int j = 0; j < 5; ++j) {
        if (x_lb[j] > x_ub[j]) {
            std::ostringstream msg;
            msg << "state bound " << kStateNames[j] << ": lower " << x_lb[j]
                << " exceeds upper " << x_ub[j];
            throw std::invalid_argument(msg.str());
        }
    }
    for (int j = 0; j < 2; ++j) {
        if (u_lb[j] > u_ub[j]) {
            std::ostringstream msg;
            msg << "control bound " << kControlNames[j] << ": lower " << u_lb[j]
                << " exceeds upper " << u_ub[j];
            throw std::invalid_argument(msg.str());
        }
    }
    const auto check_inside = [&](const dynamics::State& s, const char* which) {
        const auto v = s.to_vector();
        for (int j = 0; j < 5; ++j) {
            if (v[j] < x_lb[j] || v[j] > x_ub[j]) {
                std::ostringstream msg;
                msg << which << " state component " << kStateNames[j] << " = " << v[j]
                    << " violates bounds [" << x_lb[j] << ", " << x_ub[j] << "]";
                throw std::invalid_argument(msg.str());
            }
        }
    };
    check_inside(x0, "initial");
    check_inside(xf, "target");
    check_symmetric_psd(Q, "Q", /*strict=*/false);
    check_symmetric_psd(R, "R", /*strict=*/true);
}

NlpInstance::NlpInstance(CftocProblem problem, wind::PolynomialWindField field,
                         dynamics::AircraftParams params)
    : problem_(std::move(problem)), field_(std::move(field)), params_(std::move(params)) {
    problem_.validate();
    params_.validate();
    layout_.N = problem_.N;
    const int n = layout_.dim();
    const int N = problem_.N;

    lb_.resize(n);
    ub_.resize(n);
    var_scales_.resize(n);
    for (int k = 0; k <= N; ++k) {
        for (int j = 0; j < 5; ++j) {
            const int idx = layout_.state_index(k, j);
            lb_[idx] = problem_.x_lb[j];
            ub_[idx] = problem_.x_ub[j];
            var_scales_[idx] = kStateScale[j];
        }
        if (k < N) {
            for (int j = 0; j < 2; ++j) {
                const int idx = layout_.control_index(k, j);
                lb_[idx] = problem_.u_lb[j];
                ub_[idx] = problem_.u_ub[j];
                var_scales_[idx] = kControlScale[j];
            }
        }
    }

    con_scales_.resize(num_constraints());
    for (int k = 0; k < N; ++k) {
        for (int j = 0; j < 5; ++j) con_scales_[5 * k + j] = kStateScale[j];
    }
    for (int j = 0; j < 5; ++j) con_scales_[5 * N + j] = kStateScale[j];
    // Terminal position rows: a miss of terminal_slack km sits at the same
    // scaled magnitude as a 1e3 km row unit, so the default 1 km slack holds
    // the endpoint three decades tighter than the route scale.
    con_scales_[5 * N + 5] = 1e3 * problem_.terminal_slack_km;
    con_scales_[5 * N + 6] = 1e3 * problem_.terminal_slack_km;

    // Constraint Jacobian sparsity: defect rows touch (X_k, U_k, X_{k+1}) only.
    for (int k = 0; k < N; ++k) {
        for (int i = 0; i < 5; ++i) {
            const int row = 5 * k + i;
            for (int j = 0; j < 5; ++j) {
                if (i == j || defect_state_entry(i, j)) {
                    pattern_.emplace_back(row, layout_.state_index(k, j));
                }
            }
            for (int j = 0; j < 2; ++j) {
                if (defect_control_entry(i, j)) {
                    pattern_.emplace_back(row, layout_.control_index(k, j));
                }
            }
            pattern_.emplace_back(row, layout_.state_index(k + 1, i));
        }
    }
    for (int j = 0; j < 5; ++j) {
        pattern_.emplace_back(5 * N + j, layout_.state_index(0, j));
    }
    pattern_.emplace_back(5 * N + 5, layout_.state_index(N, 0));
    pattern_.emplace_back(5 * N + 6, layout_.state_index(N, 1));
}

namespace {

void check_dim(const Eigen::VectorXd& z, int n, const char* what) {
    if (z.size() != n) {
        std::ostringstream msg;
        msg << what << ": decision vector has dimension " << z.size() << ", expected " << n;
        throw std::invalid_argument(msg.str());
    }
}

}  // namespace

double NlpInstance::objective(const Eigen::VectorXd& z) const {
    check_dim(z, num_vars(), "objective");
    const int N = problem_.N;
    const auto xf = problem_.xf.to_vector();
    double obj = 0.0;
    for (int k = 0; k < N; ++k) {
        Eigen::Matrix<double, 5, 1> dx;
        for (int j = 0; j < 5; ++j) dx[j] = z[layout_.state_index(k, j)] - xf[j];
        Eigen::Vector2d u;
        for (int j = 0; j < 2; ++j) u[j] = z[layout_.control_index(k, j)];
        obj += dx.dot(problem_.Q * dx) + u.dot(problem_.R * u);
    }
    if (problem_.mode == ObjectiveMode::FuelFocus) {
        obj += problem_.w_fuel * (problem_.x0.m - z[layout_.state_index(N, 3)]);
    }
    return obj;
}

Eigen::VectorXd NlpInstance::objective_gradient(const Eigen::VectorXd& z) const {
    check_dim(z, num_vars(), "objective_gradient");
    const int N = problem_.N;
    const auto xf = problem_.xf.to_vector();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(num_vars());
    for (int k = 0; k < N; ++k) {
        Eigen::Matrix<double, 5, 1> dx;
        for (int j = 0; j < 5; ++j) dx[j] = z[layout_.state_index(k, j)] - xf[j];
        const Eigen::Matrix<double, 5, 1> gx = 2.0 * (problem_.Q * dx);
        for (int j = 0; j < 5; ++j) grad[layout_.state_index(k, j)] += gx[j];
        Eigen::Vector2d u;
        for (int j = 0; j < 2; ++j) u[j] = z[layout_.control_index(k, j)];
        const Eigen::Vector2d gu = 2.0 * (problem_.R * u);
        for (int j = 0; j < 2; ++j) grad[layout_.control_index(k, j)] += gu[j];
    }
    if (problem_.mode == ObjectiveMode::FuelFocus) {
        grad[layout_.state_index(N, 3)] -= problem_.w_fuel;
    }
    return grad;
}

Eigen::VectorXd NlpInstance::constraints(const Eigen::VectorXd& z) const {
    check_dim(z, num_vars(), "constraints");
    const int N = problem_.N;
    Eigen::VectorXd r(num_constraints());
    for (int k = 0; k < N; ++k) {
        dynamics::State s;
        Eigen::Matrix<double, 5, 1> sv;
        for (int j = 0; j < 5; ++j) sv[j] = z[layout_.state_index(k, j)];
        s = dynamics::State::from_vector(sv);
        dynamics::Control u{z[layout_.control_index(k, 0)], z[layout_.control_index(k, 1)]};
        const auto f =
            dynamics::continuous_dynamics(s, u, field_.eval(s.pos()), params_).to_vector();
        for (int j = 0; j < 5; ++j) {
            r[5 * k + j] = z[layout_.state_index(k + 1, j)] - sv[j] - problem_.dT_s * f[j];
        }
    }
    const auto x0 = problem_.x0.to_vector();
    for (int j = 0; j < 5; ++j) {
        r[5 * N + j] = z[layout_.state_index(0, j)] - x0[j];
    }
    r[5 * N + 5] = z[layout_.state_index(N, 0)] - problem_.xf.x;
    r[5 * N + 6] = z[layout_.state_index(N, 1)] - problem_.xf.y;
    return r;
}

Eigen::SparseMatrix<double> NlpInstance::constraint_jacobian(const Eigen::VectorXd& z) const {
    check_dim(z, num_vars(), "constraint_jacobian");
    const int N = problem_.N;
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(pattern_.size());
    Eigen::Matrix<double, 5, 5> A;
    Eigen::Matrix<double, 5, 2> B;
    for (int k = 0; k < N; ++k) {
        Eigen::Matrix<double, 5, 1> sv;
        for (int j = 0; j < 5; ++j) sv[j] = z[layout_.state_index(k, j)];
        const auto s = dynamics::State::from_vector(sv);
        const dynamics::Control u{z[layout_.control_index(k, 0)],
                                  z[layout_.control_index(k, 1)]};
        dynamics::jacobians(s, u, field_, params_, A, B);
        for (int i = 0; i < 5; ++i) {
            const int row = 5 * k + i;
            for (int j = 0; j < 5; ++j) {
                if (i == j || defect_state_entry(i, j)) {
                    triplets.emplace_back(row, layout_.state_index(k, j),
                                          -((i == j ? 1.0 : 0.0) + problem_.dT_s * A(i, j)));
                }
            }
            for (int j = 0; j < 2; ++j) {
                if (defect_control_entry(i, j)) {
                    triplets.emplace_back(row, layout_.control_index(k, j),
                                          -problem_.dT_s * B(i, j));
                }
            }
            triplets.emplace_back(row, layout_.state_index(k + 1, i), 1.0);
        }
    }
    for (int j = 0; j < 5; ++j) {
        triplets.emplace_back(5 * N + j, layout_.state_index(0, j), 1.0);
    }
    triplets.emplace_back(5 * N + 5, layout_.state_index(N, 0), 1.0);
    triplets.emplace_back(5 * N + 6, layout_.state_index(N, 1), 1.0);

    Eigen::SparseMatrix<double> jac(num_constraints(), num_vars());
    jac.setFromTriplets(triplets.begin(), triplets.end());
    return jac;
}

Eigen::VectorXd NlpInstance::pack(const std::vector<dynamics::State>& states,
                                  const std::vector<dynamics::Control>& controls) const {
    const int N = problem_.N;
    if (static_cast<int>(states.size()) != N + 1 || static_cast<int>(controls.size()) != N) {
        throw std::invalid_argument("pack: need N+1 states and N controls");
    }
    Eigen::VectorXd z(num_vars());
    for (int k = 0; k <= N; ++k) {
        const auto sv = states[k].to_vector();
        for (int j = 0; j < 5; ++j) z[layout_.state_index(k, j)] = sv[j];
        if (k < N) {
            z[layout_.control_index(k, 0)] = controls[k].thrust;
            z[layout_.control_index(k, 1)] = controls[k].turn_rate;
        }
    }
    return z;
}

std::vector<dynamics::State> NlpInstance::unpack_states(const Eigen::VectorXd& z) const {
    check_dim(z, num_vars(), "unpack_states");
    std::vector<dynamics::State> out;
    out.reserve(problem_.N + 1);
    for (int k = 0; k <= problem_.N; ++k) {
        Eigen::Matrix<double, 5, 1> sv;
        for (int j = 0; j < 5; ++j) sv[j] = z[layout_.state_index(k, j)];
        out.push_back(dynamics::State::from_vector(sv));
    }
    return out;
}

std::vector<dynamics::Control> NlpInstance::unpack_controls(const Eigen::VectorXd& z) const {
    check_dim(z, num_vars(), "unpack_controls");
    std::vector<dynamics::Control> out;
    out.reserve(problem_.N);
    for (int k = 0; k < problem_.N; ++k) {
        out.push_back({z[layout_.control_index(k, 0)], z[layout_.control_index(k, 1)]});
    }
    return out;
}

NlpInstance build(const CftocProblem& problem, const wind::PolynomialWindField& field,
                  const dynamics::AircraftParams& params) {
    return NlpInstance(problem, field, params);
}

Eigen::VectorXd initial_guess(const CftocProblem& problem, const dynamics::AircraftParams& params,
                              int* clipped_count) {
    problem.validate();
    params.validate();
    DecisionLayout layout{problem.N};
    const int N = problem.N;
    Eigen::VectorXd z(layout.dim());

    const double dx = problem.xf.x - problem.x0.x;
    const double dy = problem.xf.y - problem.x0.y;
    const double v_guess = 0.5 * (problem.x0.v + problem.xf.v);
    const double theta_guess =
        (dx == 0.0 && dy == 0.0) ? problem.x0.theta : std::atan2(dy, dx);
    const double trim_thrust =
        0.5 * params.drag_coeff * params.air_density * params.wing_area * v_guess * v_guess;

    for (int k = 0; k <= N; ++k) {
        const double t = static_cast<double>(k) / N;
        z[layout.state_index(k, 0)] = problem.x0.x + t * dx;
        z[layout.state_index(k, 1)] = problem.x0.y + t * dy;
        z[layout.state_index(k, 2)] = v_guess;
        z[layout.state_index(k, 3)] = problem.x0.m + t * (problem.xf.m - problem.x0.m);
        z[layout.state_index(k, 4)] = theta_guess;
        if (k < N) {
            z[layout.control_index(k, 0)] = trim_thrust;
            z[layout.control_index(k, 1)] = 0.0;
        }
    }

    // Clip into the variable box; the count is reported, not hidden.
    int clips = 0;
    for (int k = 0; k <= N; ++k) {
        for (int j = 0; j < 5; ++j) {
            const int idx = layout.state_index(k, j);
            const double clipped = std::min(problem.x_ub[j], std::max(problem.x_lb[j], z[idx]));
            if (clipped != z[idx]) ++clips;
            z[idx] = clipped;
        }
        if (k < N) {
            for (int j = 0; j < 2; ++j) {
                const int idx = layout.control_index(k, j);
                const double clipped =
                    std::min(problem.u_ub[j], std::max(problem.u_lb[j], z[idx]));
                if (clipped != z[idx]) ++clips;
                z[idx] = clipped;
            }
        }
    }
    if (clipped_count != nullptr) *clipped_count = clips;
    return z;
}

}  // namespace flightopt::transcription
