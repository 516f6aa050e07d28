#include "flightopt/dynamics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace flightopt::dynamics {

namespace {
constexpr double kKmPerM = 1e-3;
}

void AircraftParams::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw std::invalid_argument(std::string("aircraft parameter ") + name +
                                        " must be strictly positive");
        }
    };
    positive(drag_coeff, "drag_coeff");
    positive(air_density, "air_density");
    positive(wing_area, "wing_area");
    positive(fuel_rate, "fuel_rate");
    positive(gravity, "gravity");
    positive(dry_mass, "dry_mass");
}

Eigen::Matrix<double, 5, 1> State::to_vector() const {
    Eigen::Matrix<double, 5, 1> out;
    out << x, y, v, m, theta;
    return out;
}

State State::from_vector(const Eigen::Matrix<double, 5, 1>& v5) {
    return {v5[0], v5[1], v5[2], v5[3], v5[4]};
}

Eigen::Matrix<double, 5, 1> Derivative::to_vector() const {
    Eigen::Matrix<double, 5, 1> out;
    out << dx, dy, dv, dm, dtheta;
    return out;
}

Derivative continuous_dynamics(const State& s, const Control& u,
                               const Eigen::Vector2d& wind_mps, const AircraftParams& p) {
    if (!(s.m > 0.0)) {
        std::ostringstream msg;
        msg << "mass must be positive, got " << s.m << " kg";
        throw std::domain_error(msg.str());
    }
    Derivative d;
    d.dx = (s.v * std::cos(s.theta) + wind_mps[0]) * kKmPerM;
    d.dy = (s.v * std::sin(s.theta) + wind_mps[1]) * kKmPerM;
    d.dv = (2.0 * u.thrust - p.drag_coeff * p.air_density * p.wing_area * s.v * s.v) /
           (2.0 * s.m);
    d.dm = -p.fuel_rate * u.thrust;
    d.dtheta = u.turn_rate;
    return d;
}

namespace {

State advance(const State& s, const Eigen::Matrix<double, 5, 1>& delta) {
    return State::from_vector(s.to_vector() + delta);
}

void check_mass_floor(const State& s, const AircraftParams& p) {
    if (s.m < p.dry_mass) {
        std::ostringstream msg;
        msg << "step drives mass to " << s.m << " kg, below dry mass " << p.dry_mass << " kg";
        throw std::domain_error(msg.str());
    }
}

}  // namespace

State euler_step(const State& s, const Control& u, const wind::PolynomialWindField& field,
                 double dT, const AircraftParams& p) {
    if (!(dT > 0.0)) {
        throw std::invalid_argument("step size must be positive");
    }
    const Derivative d = continuous_dynamics(s, u, field.eval(s.pos()), p);
    const State next = advance(s, dT * d.to_vector());
    check_mass_floor(next, p);
    return next;
}

State rk4_step(const State& s, const Control& u, const wind::PolynomialWindField& field,
               double dT, const AircraftParams& p) {
    if (!(dT > 0.0)) {
        throw std::invalid_argument("step size must be positive");
    }
    auto f = [&](const State& state) {
        return continuous_dynamics(state, u, field.eval(state.pos()), p).to_vector();
    };
    const auto k1 = f(s);
    const auto k2 = f(advance(s, 0.5 * dT * k1));
    const auto k3 = f(advance(s, 0.5 * dT * k2));
    const auto k4 = f(advance(s, dT * k3));
    const State next = advance(s, (dT / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    check_mass_floor(next, p);
    return next;
}

std::vector<State> simulate(const State& s0, const std::vector<Control>& controls,
                            const wind::PolynomialWindField& field, double dT,
                            const AircraftParams& p, Stepper stepper) {
    if (controls.empty()) {
        throw std::invalid_argument("simulate: control sequence is empty");
    }
    std::vector<State> traj;
    traj.reserve(controls.size() + 1);
    traj.push_back(s0);
    for (size_t k = 0; k < controls.size(); ++k) {
        try {
            traj.push_back(stepper == Stepper::Euler
                               ? euler_step(traj.back(), controls[k], field, dT, p)
                               : rk4_step(traj.back(), controls[k], field, dT, p));
        } catch (const std::domain_error& e) {
            std::ostringstream msg;
            msg << "simulate failed at step " << k << ": " << e.what();
            throw std::domain_error(msg.str());
        }
    }
    return traj;
}

void jacobians(const State& s, const Control& u, const wind::PolynomialWindField& field,
               const AircraftParams& p, Eigen::Matrix<double, 5, 5>& A,
               Eigen::Matrix<double, 5, 2>& B) {
    if (!(s.m > 0.0)) {
        throw std::domain_error("mass must be positive");
    }
    A.setZero();
    B.setZero();
    const Eigen::Matrix2d wind_jac = field.jacobian(s.pos());  // d(w_x,w_y)/d(x,y), per km

    // Kinematic rows, km/s: wind chain through position plus speed/heading terms.
    A(0, 0) = wind_jac(0, 0) * kKmPerM;
    A(0, 1) = wind_jac(0, 1) * kKmPerM;
    A(0, 2) = std::cos(s.theta) * kKmPerM;
    A(0, 4) = -s.v * std::sin(s.theta) * kKmPerM;
    A(1, 0) = wind_jac(1, 0) * kKmPerM;
    A(1, 1) = wind_jac(1, 1) * kKmPerM;
    A(1, 2) = std::sin(s.theta) * kKmPerM;
    A(1, 4) = s.v * std::cos(s.theta) * kKmPerM;

    // dv = (2T - C_d rho A v^2) / (2m)
    const double cda = p.drag_coeff * p.air_density * p.wing_area;
    A(2, 2) = -cda * s.v / s.m;
    A(2, 3) = -(2.0 * u.thrust - cda * s.v * s.v) / (2.0 * s.m * s.m);
    B(2, 0) = 1.0 / s.m;

    // dm = -eta T
    B(3, 0) = -p.fuel_rate;

    // dtheta = phi
    B(4, 1) = 1.0;
}

double bank_angle(double v_mps, double turn_rate, const AircraftParams& p) {
    if (!(v_mps > 0.0)) {
        std::ostringstream msg;
        msg << "bank angle undefined for non-positive speed " << v_mps << " m/s";
        throw std::domain_error(msg.str());
    }
    return std::atan(v_mps * turn_rate / p.gravity);
}

}  // namespace flightopt::dynamics
