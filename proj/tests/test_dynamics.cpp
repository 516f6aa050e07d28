#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "flightopt/dynamics.hpp"
#include "oracles.hpp"

using namespace flightopt;
using dynamics::AircraftParams;
using dynamics::Control;
using dynamics::State;

namespace {

State random_state(std::mt19937& rng) {
    std::uniform_real_distribution<double> ux(-4000.0, 500.0), uy(-900.0, 500.0),
        uv(160.0, 300.0), um(56000.0, 78000.0), uth(-3.0, 3.0);
    return {ux(rng), uy(rng), uv(rng), um(rng), uth(rng)};
}

Control random_control(std::mt19937& rng) {
    std::uniform_real_distribution<double> ut(0.0, 1.4e5), up(-0.02, 0.02);
    return {ut(rng), up(rng)};
}

}  // namespace

TEST_CASE("parameter validation") {
    AircraftParams p;
    CHECK_NOTHROW(p.validate());
    p.air_density = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = AircraftParams{};
    p.dry_mass = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("continuous dynamics against hand-computed values") {
    const AircraftParams p;
    const State s{10.0, -20.0, 240.0, 69000.0, 0.3};
    const Control u{9.0e4, 1.0e-3};
    const Eigen::Vector2d wind{5.0, -3.0};

    const auto d = dynamics::continuous_dynamics(s, u, wind, p);
    CHECK(d.dx == doctest::Approx(0.23428075739014542).epsilon(1e-14));
    CHECK(d.dy == doctest::Approx(0.0679248495987215).epsilon(1e-14));
    CHECK(d.dv == doctest::Approx(0.8182121739130435).epsilon(1e-14));
    CHECK(d.dm == doctest::Approx(-1.44).epsilon(1e-14));
    CHECK(d.dtheta == doctest::Approx(0.001).epsilon(1e-14));
}

TEST_CASE("kinematic rows convert m/s to km/s") {
    const AircraftParams p;
    // Pure eastbound flight, no wind: dx must be v/1000 exactly.
    const auto d = dynamics::continuous_dynamics({0, 0, 200.0, 60000.0, 0.0}, {0.0, 0.0},
                                                 {0.0, 0.0}, p);
    CHECK(d.dx == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(d.dy == doctest::Approx(0.0));
}

TEST_CASE("zero thrust decelerates, trim thrust holds speed") {
    const AircraftParams p;
    const State s{0, 0, 250.0, 65000.0, 1.0};
    const auto coast = dynamics::continuous_dynamics(s, {0.0, 0.0}, {0, 0}, p);
    CHECK(coast.dv < 0.0);
    CHECK(coast.dm == 0.0);

    const double trim = 0.5 * p.drag_coeff * p.air_density * p.wing_area * s.v * s.v;
    const auto hold = dynamics::continuous_dynamics(s, {trim, 0.0}, {0, 0}, p);
    CHECK(hold.dv == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(hold.dm == doctest::Approx(-p.fuel_rate * trim).epsilon(1e-12));
}

TEST_CASE("non-positive mass is rejected") {
    const AircraftParams p;
    CHECK_THROWS_AS(
        dynamics::continuous_dynamics({0, 0, 200, 0.0, 0}, {0, 0}, {0, 0}, p),
        std::domain_error);
    CHECK_THROWS_AS(
        dynamics::continuous_dynamics({0, 0, 200, -5.0, 0}, {0, 0}, {0, 0}, p),
        std::domain_error);
}

TEST_CASE("euler step against hand-computed values") {
    const AircraftParams p;
    const State s{10.0, -20.0, 240.0, 69000.0, 0.3};
    const Control u{9.0e4, 1.0e-3};
    // Constant synthetic field equal to (5, -3) m/s everywhere: build it from
    // the standard basis with only the constant coefficients set.
    Eigen::VectorXd a = Eigen::VectorXd::Zero(13), b = Eigen::VectorXd::Zero(10);
    a[4] = 5.0;
    b[4] = -3.0;
    const wind::PolynomialWindField field(wind::WindBasis::standard(), a, b);

    const auto next = dynamics::euler_step(s, u, field, 360.0, p);
    CHECK(next.x == doctest::Approx(94.34107266045235).epsilon(1e-14));
    CHECK(next.y == doctest::Approx(4.452945855539738).epsilon(1e-14));
    CHECK(next.v == doctest::Approx(534.5563826086957).epsilon(1e-14));
    CHECK(next.m == doctest::Approx(68481.6).epsilon(1e-14));
    CHECK(next.theta == doctest::Approx(0.66).epsilon(1e-14));
}

TEST_CASE("euler step rejects burning below dry mass") {
    const AircraftParams p;
    const State s{0, 0, 240.0, p.dry_mass + 1.0, 0.0};
    // 1.4e5 N * 1.6e-5 kg/(N s) = 2.24 kg/s; 3600 s burns far more than 1 kg.
    CHECK_THROWS_AS(
        dynamics::euler_step(s, {1.4e5, 0.0}, wind::PolynomialWindField::zero(), 3600.0, p),
        std::domain_error);
}

TEST_CASE("rk4 matches euler to first order and beats it at second") {
    const AircraftParams p;
    const auto field = wind::PolynomialWindField::published();
    std::mt19937 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const State s = random_state(rng);
        const Control u = random_control(rng);
        const double dT = 64.0;

        // |euler - rk4| is O(dT^2): halving dT must quarter the gap (+-20%).
        const auto gap = [&](double h) {
            const auto e = dynamics::euler_step(s, u, field, h, p).to_vector();
            const auto r = dynamics::rk4_step(s, u, field, h, p).to_vector();
            return (e - r).norm();
        };
        const double g1 = gap(dT);
        const double g2 = gap(dT / 2.0);
        REQUIRE(g1 > 0.0);
        const double ratio = g1 / g2;
        CHECK(ratio > 4.0 * 0.8);
        CHECK(ratio < 4.0 * 1.2);
    }
}

TEST_CASE("simulate returns N+1 states and starts at s0") {
    const AircraftParams p;
    const auto field = wind::PolynomialWindField::published();
    const State s0{0, 0, 240.0, 70000.0, -3.0};
    const std::vector<Control> controls(10, Control{5.0e4, 1.0e-4});

    const auto traj = dynamics::simulate(s0, controls, field, 120.0, p);
    REQUIRE(traj.size() == 11);
    CHECK(traj[0].x == s0.x);
    CHECK(traj[0].m == s0.m);
    // Mass decreases monotonically under positive thrust.
    for (size_t k = 1; k < traj.size(); ++k) {
        CHECK(traj[k].m < traj[k - 1].m);
    }

    // Same rollout step by step.
    State cur = s0;
    for (size_t k = 0; k < controls.size(); ++k) {
        cur = dynamics::euler_step(cur, controls[k], field, 120.0, p);
        CHECK(traj[k + 1].x == cur.x);
        CHECK(traj[k + 1].v == cur.v);
    }
}

TEST_CASE("simulate annotates the failing step") {
    const AircraftParams p;
    const State s0{0, 0, 240.0, p.dry_mass + 500.0, 0.0};
    const std::vector<Control> controls(40, Control{1.4e5, 0.0});
    try {
        dynamics::simulate(s0, controls, wind::PolynomialWindField::zero(), 120.0, p);
        FAIL("expected dry-mass violation");
    } catch (const std::domain_error& e) {
        CHECK(std::string(e.what()).find("step") != std::string::npos);
    }
}

TEST_CASE("analytic jacobians match central finite differences") {
    const AircraftParams p;
    const auto field = wind::PolynomialWindField::published();
    std::mt19937 rng(31);

    for (int trial = 0; trial < 40; ++trial) {
        const State s = random_state(rng);
        const Control u = random_control(rng);

        Eigen::Matrix<double, 5, 5> A;
        Eigen::Matrix<double, 5, 2> B;
        dynamics::jacobians(s, u, field, p, A, B);

        Eigen::VectorXd z(7);
        z << s.x, s.y, s.v, s.m, s.theta, u.thrust, u.turn_rate;
        const auto fd = oracles::fd_jacobian(
            [&](const Eigen::VectorXd& q) -> Eigen::VectorXd {
                const State sq{q[0], q[1], q[2], q[3], q[4]};
                const Control uq{q[5], q[6]};
                return dynamics::continuous_dynamics(sq, uq, field.eval(sq.pos()), p)
                    .to_vector();
            },
            z);
        CHECK(oracles::max_rel_err(A, fd.leftCols<5>()) < 1e-6);
        CHECK(oracles::max_rel_err(B, fd.rightCols<2>()) < 1e-6);
    }
}

TEST_CASE("bank angle") {
    const AircraftParams p;
    CHECK(dynamics::bank_angle(240.0, 1.0e-3, p) ==
          doctest::Approx(0.02445995259412351).epsilon(1e-14));
    CHECK(dynamics::bank_angle(240.0, 0.0, p) == 0.0);
    CHECK(dynamics::bank_angle(240.0, -1.0e-3, p) ==
          doctest::Approx(-0.02445995259412351).epsilon(1e-14));
}

TEST_CASE("state vector round trip") {
    const State s{1.0, -2.0, 3.0, 4.0, -5.0};
    const auto v = s.to_vector();
    const State back = State::from_vector(v);
    CHECK(back.x == s.x);
    CHECK(back.y == s.y);
    CHECK(back.v == s.v);
    CHECK(back.m == s.m);
    CHECK(back.theta == s.theta);
}
