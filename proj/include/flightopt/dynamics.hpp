// Planar point-mass aircraft model: continuous dynamics, Euler/RK4 stepping,
// forward simulation, and analytic Jacobians.
#pragma once

#include <Eigen/Core>
#include <vector>

#include "flightopt/wind.hpp"

namespace flightopt::dynamics {

/// Physical aircraft constants. All strictly positive.
struct AircraftParams {
    double drag_coeff{0.025};      // C_d, dimensionless
    double air_density{0.38};      // rho, kg/m^3 (cruise-level)
    double wing_area{122.6};       // A, m^2
    double fuel_rate{1.6e-5};      // eta, kg/(N*s), thrust-specific fuel consumption
    double gravity{9.81};          // g, m/s^2
    double dry_mass{55000.0};      // minimum allowed mass, kg

    void validate() const;
};

/// Aircraft state. Positions in km, speed m/s, mass kg, heading rad
/// (east = 0, counterclockwise positive, unwrapped).
struct State {
    double x{0.0};
    double y{0.0};
    double v{0.0};
    double m{0.0};
    double theta{0.0};

    Eigen::Matrix<double, 5, 1> to_vector() const;
    static State from_vector(const Eigen::Matrix<double, 5, 1>& v);
    geo::PlanePoint pos() const { return {x, y}; }
};

/// Control input: thrust in N (>= 0) and turn rate in rad/s.
struct Control {
    double thrust{0.0};
    double turn_rate{0.0};

    Eigen::Vector2d to_vector() const { return {thrust, turn_rate}; }
    static Control from_vector(const Eigen::Vector2d& u) { return {u[0], u[1]}; }
};

/// Time derivative of State. dx, dy in km/s (position is km while speeds are
/// m/s, so the kinematic rows carry a single 1/1000 factor); dv m/s^2, dm kg/s,
/// dtheta rad/s.
struct Derivative {
    double dx{0.0};
    double dy{0.0};
    double dv{0.0};
    double dm{0.0};
    double dtheta{0.0};

    Eigen::Matrix<double, 5, 1> to_vector() const;
};

/// Right-hand side of the point-mass model with additive wind (m/s).
/// Throws std::domain_error when mass is non-positive.
Derivative continuous_dynamics(const State& s, const Control& u,
                               const Eigen::Vector2d& wind_mps,
                               const AircraftParams& p);

/// One forward-Euler step of dT seconds; wind evaluated at the current position.
/// A resulting mass below dry mass raises std::domain_error.
State euler_step(const State& s, const Control& u, const wind::PolynomialWindField& field,
                 double dT, const AircraftParams& p);

/// Classical RK4 step on the same vector field with zero-order-hold control.
State rk4_step(const State& s, const Control& u, const wind::PolynomialWindField& field,
               double dT, const AircraftParams& p);

enum class Stepper { Euler, Rk4 };

/// Rolls the state forward through the control sequence. Returns N+1 states
/// with trajectory[0] == s0. Stepper errors are annotated with the step index.
std::vector<State> simulate(const State& s0, const std::vector<Control>& controls,
                            const wind::PolynomialWindField& field, double dT,
                            const AircraftParams& p, Stepper stepper = Stepper::Euler);

/// Analytic partials of continuous_dynamics: A = df/d(state) 5x5 including the
/// wind Jacobian chained through (x, y), B = df/d(control) 5x2.
void jacobians(const State& s, const Control& u, const wind::PolynomialWindField& field,
               const AircraftParams& p, Eigen::Matrix<double, 5, 5>& A,
               Eigen::Matrix<double, 5, 2>& B);

/// Bank angle realizing a commanded turn rate at speed v: atan(v*phi/g).
double bank_angle(double v_mps, double turn_rate, const AircraftParams& p);

}  // namespace flightopt::dynamics
