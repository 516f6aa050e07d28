// Direct transcription of the flight CFTOC into a sparse NLP: decision-vector
// layout, quadratic objective, forward-Euler defect constraints, boundary
// conditions, bounds, and their analytic derivatives.
#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <memory>
#include <vector>

#include "flightopt/dynamics.hpp"
#include "flightopt/nlp_problem.hpp"
#include "flightopt/wind.hpp"

namespace flightopt::transcription {

enum class ObjectiveMode { TimeFocus, FuelFocus };

/// Characteristic magnitudes of each state/control component, used to scale
/// the solve and to express mixed-unit gap norms: x, y ~ 1e3 km, v ~ 1e2 m/s,
/// m ~ 1e4 kg, theta ~ 1 rad; thrust ~ 1e5 N, turn rate ~ 1e-3 rad/s.
inline constexpr double kStateScale[5] = {1e3, 1e3, 1e2, 1e4, 1.0};
inline constexpr double kControlScale[2] = {1e5, 1e-3};

/// One discretized optimal-control instance over N forward-Euler steps.
struct CftocProblem {
    int N{0};
    double dT_s{0.0};
    dynamics::State x0{};
    dynamics::State xf{};
    Eigen::Matrix<double, 5, 1> x_lb, x_ub;
    Eigen::Vector2d u_lb, u_ub;
    Eigen::Matrix<double, 5, 5> Q;  // symmetric PSD tracking weight
    Eigen::Matrix2d R;              // symmetric PD control weight
    ObjectiveMode mode{ObjectiveMode::TimeFocus};
    double w_fuel{1.0};             // fuel weight, per kg (FuelFocus only)
    double terminal_slack_km{1.0};  // feasibility currency of the terminal rows

    /// Throws std::invalid_argument on any violated invariant, naming the field.
    void validate() const;
};

/// Bijective map between (node, component) and flat decision indices.
/// Nodes are interleaved [X_0 U_0 X_1 U_1 ... X_{N-1} U_{N-1} X_N] so the
/// constraint Jacobian stays banded.
struct DecisionLayout {
    int N{0};

    int dim() const { return 7 * N + 5; }
    int state_index(int k, int j) const { return 7 * k + j; }
    int control_index(int k, int j) const { return 7 * k + 5 + j; }
};

/**
 * The transcribed NLP. Equality rows are ordered: 5N defects, then 5 initial
 * conditions, then 2 terminal position conditions. Immutable after build;
 * evaluation calls are pure.
 */
class NlpInstance final : public NlpProblem {
  public:
    NlpInstance(CftocProblem problem, wind::PolynomialWindField field,
                dynamics::AircraftParams params);

    int num_vars() const override { return layout_.dim(); }
    int num_constraints() const override { return 5 * problem_.N + 7; }
    Eigen::VectorXd lower_bounds() const override { return lb_; }
    Eigen::VectorXd upper_bounds() const override { return ub_; }

    double objective(const Eigen::VectorXd& z) const override;
    Eigen::VectorXd objective_gradient(const Eigen::VectorXd& z) const override;
    Eigen::VectorXd constraints(const Eigen::VectorXd& z) const override;
    Eigen::SparseMatrix<double> constraint_jacobian(const Eigen::VectorXd& z) const override;

    Eigen::VectorXd variable_scales() const override { return var_scales_; }
    Eigen::VectorXd constraint_scales() const override { return con_scales_; }

    const CftocProblem& problem() const { return problem_; }
    const wind::PolynomialWindField& field() const { return field_; }
    const dynamics::AircraftParams& params() const { return params_; }
    const DecisionLayout& layout() const { return layout_; }

    /// Structurally nonzero (row, col) pairs of the constraint Jacobian;
    /// constant across evaluation points.
    const std::vector<std::pair<int, int>>& sparsity_pattern() const { return pattern_; }

    /// Pack per-node states/controls into a decision vector (and back).
    Eigen::VectorXd pack(const std::vector<dynamics::State>& states,
                         const std::vector<dynamics::Control>& controls) const;
    std::vector<dynamics::State> unpack_states(const Eigen::VectorXd& z) const;
    std::vector<dynamics::Control> unpack_controls(const Eigen::VectorXd& z) const;

  private:
    CftocProblem problem_;
    wind::PolynomialWindField field_;
    dynamics::AircraftParams params_;
    DecisionLayout layout_;
    Eigen::VectorXd lb_, ub_;
    Eigen::VectorXd var_scales_, con_scales_;
    std::vector<std::pair<int, int>> pattern_;
};

/// Validates the problem and assembles the instance.
NlpInstance build(const CftocProblem& problem, const wind::PolynomialWindField& field,
                  const dynamics::AircraftParams& params);

/// Straight-line warm start: x, y, m interpolate x0 -> xf, v constant at the
/// endpoint mean, heading along the chord, controls at drag-balancing trim.
/// Entries outside the variable bounds are clipped; *clipped_count reports
/// how many (pass nullptr to ignore).
Eigen::VectorXd initial_guess(const CftocProblem& problem, const dynamics::AircraftParams& params,
                              int* clipped_count = nullptr);

}  // namespace flightopt::transcription
