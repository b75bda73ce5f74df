/*
 Copyright 2026 The BSA Toolkit Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bsa/errors.hpp"
#include "bsa/sim.hpp"

using namespace bsa;

namespace {

const ActuatorParams kDefault;

ActuatorParams frictionless() {
    ActuatorParams p;
    p.tauC_psi = p.tauC_q = 0.0;
    p.d_psi = p.d_q = 0.0;
    return p;
}

// Independent impact oracle: dense KKT system [B -C^T; C 0] [v+; L] = [B v-; 0]
// solved by a generic LU factorization.
void kkt_impact(Mode mode, const Eigen::Vector2d& v_minus, const ActuatorParams& p,
                Eigen::Vector2d& v_plus, Eigen::VectorXd& impulse) {
    const Eigen::MatrixXd c = constraint_matrix(mode);
    const long m = c.rows();
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(2 + m, 2 + m);
    kkt(0, 0) = p.J_psi;
    kkt(1, 1) = p.J_q;
    kkt.topRightCorner(2, m) = -c.transpose();
    kkt.bottomLeftCorner(m, 2) = c;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 + m);
    rhs[0] = p.J_psi * v_minus[0];
    rhs[1] = p.J_q * v_minus[1];
    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    v_plus = sol.head<2>();
    impulse = sol.tail(m);
}

double kinetic(const Eigen::Vector2d& v, const ActuatorParams& p) {
    return 0.5 * p.J_psi * v[0] * v[0] + 0.5 * p.J_q * v[1] * v[1];
}

} // namespace

TEST_CASE("impact impulse matches the dense KKT oracle") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> vel(-10.0, 10.0);
    for (int i = 0; i < 1000; ++i) {
        const Eigen::Vector2d v_minus(vel(rng), vel(rng));
        for (Mode mode : {Mode::Sea, Mode::Stg, Mode::Brk}) {
            Eigen::Vector2d v_oracle;
            Eigen::VectorXd l_oracle;
            kkt_impact(mode, v_minus, kDefault, v_oracle, l_oracle);

            const Eigen::VectorXd impulse = impact_impulse(mode, v_minus, kDefault);
            REQUIRE(impulse.size() == l_oracle.size());
            CHECK((impulse - l_oracle).lpNorm<Eigen::Infinity>() < 1e-12);

            HybridState x;
            x.psi_dot = v_minus[0];
            x.q_dot = v_minus[1];
            const HybridState xr = reset(mode, x, kDefault);
            CHECK(std::abs(xr.psi_dot - v_oracle[0]) < 1e-12);
            CHECK(std::abs(xr.q_dot - v_oracle[1]) < 1e-12);

            const Eigen::MatrixXd c = constraint_matrix(mode);
            CHECK((c * xr.xi_dot()).lpNorm<Eigen::Infinity>() < 1e-10);
        }
    }
}

TEST_CASE("SEA engagement conserves angular momentum") {
    HybridState x;
    x.psi_dot = 2.0;
    x.q_dot = 0.0;
    const HybridState xr = reset(Mode::Sea, x, kDefault);
    const double expected = kDefault.J_psi * 2.0 / (kDefault.J_psi + kDefault.J_q);
    CHECK(xr.psi_dot == doctest::Approx(expected).epsilon(1e-12));
    CHECK(xr.q_dot == doctest::Approx(expected).epsilon(1e-12));

    // Worked example at J_psi = 8.28e-3, J_q = 0.52: common velocity 0.03135.
    ActuatorParams heavy = kDefault;
    heavy.J_q = 0.52;
    const HybridState xh = reset(Mode::Sea, x, heavy);
    CHECK(xh.psi_dot == doctest::Approx(0.03135).epsilon(1e-3));
    CHECK(xh.q_dot == doctest::Approx(xh.psi_dot).epsilon(1e-12));

    // Already coupled: no impulse, velocities untouched.
    HybridState y;
    y.psi_dot = y.q_dot = 1.3;
    CHECK(impact_impulse(Mode::Sea, y.xi_dot(), kDefault).norm() == 0.0);
    const HybridState yr = reset(Mode::Sea, y, kDefault);
    CHECK(yr.psi_dot == 1.3);
    CHECK(yr.q_dot == 1.3);
}

TEST_CASE("BRK engagement annihilates velocity, DEC leaves the state alone") {
    HybridState x{0.1, 0.2, 0.3, -4.0, 5.0, 0.02};
    const HybridState xb = reset(Mode::Brk, x, kDefault);
    CHECK(xb.psi_dot == 0.0);
    CHECK(xb.q_dot == 0.0);
    CHECK(xb.theta == x.theta);
    CHECK(xb.psi == x.psi);
    CHECK(xb.q == x.q);
    CHECK(xb.h == x.h);

    const HybridState xd = reset(Mode::Dec, x, kDefault);
    CHECK(xd.psi_dot == x.psi_dot);
    CHECK(xd.q_dot == x.q_dot);
}

TEST_CASE("reset is exactly idempotent") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> vel(-10.0, 10.0);
    for (int i = 0; i < 200; ++i) {
        HybridState x{vel(rng), vel(rng), vel(rng), vel(rng), vel(rng), 0.0};
        for (Mode mode : {Mode::Dec, Mode::Sea, Mode::Stg, Mode::Brk}) {
            const HybridState once = reset(mode, x, kDefault);
            const HybridState twice = reset(mode, once, kDefault);
            CHECK(twice.psi_dot == once.psi_dot);
            CHECK(twice.q_dot == once.q_dot);
        }
    }
}

TEST_CASE("impacts never create kinetic energy") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> vel(-10.0, 10.0);
    for (int i = 0; i < 500; ++i) {
        const Eigen::Vector2d v_minus(vel(rng), vel(rng));
        for (Mode mode : {Mode::Sea, Mode::Stg, Mode::Brk}) {
            HybridState x;
            x.psi_dot = v_minus[0];
            x.q_dot = v_minus[1];
            const HybridState xr = reset(mode, x, kDefault);
            const double ek_minus = kinetic(v_minus, kDefault);
            const double ek_plus = kinetic(xr.xi_dot(), kDefault);
            CHECK(ek_plus <= ek_minus + 1e-12);
            const double impulse_norm = impact_impulse(mode, v_minus, kDefault).norm();
            if (impulse_norm < 1e-14) {
                CHECK(ek_plus == doctest::Approx(ek_minus).epsilon(1e-12));
            } else {
                CHECK(ek_plus < ek_minus);
            }
        }
    }
}

TEST_CASE("constraint torque pins the constrained accelerations") {
    // STG at rest with phi = 0.2: lambda balances the spring exactly.
    HybridState x;
    x.theta = 0.2;
    const Eigen::VectorXd lambda = constraint_torque(Mode::Stg, x, kDefault, SpringLaw::Linear);
    REQUIRE(lambda.size() == 1);
    CHECK(lambda[0] == doctest::Approx(-3.0).epsilon(1e-12));

    // SEA at full rest with no deflection: nothing to enforce.
    HybridState rest;
    const Eigen::VectorXd l0 = constraint_torque(Mode::Sea, rest, kDefault, SpringLaw::Linear);
    CHECK(l0.norm() == doctest::Approx(0.0));

    // BRK: xi_ddot = B^-1 (C^T lambda + tau_s - g - tau_f) = 0 for arbitrary states.
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        HybridState s{dist(rng), dist(rng), dist(rng), dist(rng), dist(rng), 0.0};
        const Eigen::VectorXd l = constraint_torque(Mode::Brk, s, kDefault, SpringLaw::Linear);
        const Eigen::MatrixXd c = constraint_matrix(Mode::Brk);
        Eigen::Vector2d tau_s_vec(kDefault.K * s.phi(), 0.0);
        const Eigen::Vector2d force = tau_s_vec - gravity_vector(s.q, kDefault) -
                                      friction_torque(s.psi_dot, s.q_dot, kDefault, false);
        const Eigen::Vector2d accel =
            Eigen::Vector2d(kDefault.J_psi, kDefault.J_q).cwiseInverse().asDiagonal() *
            (c.transpose() * l + force);
        CHECK(accel.lpNorm<Eigen::Infinity>() < 1e-10);
    }
}

TEST_CASE("continuous dynamics per mode") {
    const SimOptions opt;

    SUBCASE("DEC equilibrium has zero derivative") {
        HybridState rest;
        const HybridState dx = continuous_dynamics(Mode::Dec, rest, 0.0, kDefault, opt);
        CHECK(dx.to_vector().norm() == 0.0);
    }

    SUBCASE("STG holds the spring body and leaves gravity to the link") {
        HybridState x;
        x.theta = 0.2;
        x.q = 0.5;
        const HybridState dx = continuous_dynamics(Mode::Stg, x, 1.0, kDefault, opt);
        CHECK(dx.theta == 1.0);
        CHECK(dx.psi_dot == 0.0);
        // Link breaks away: Coulomb resists the gravity torque.
        const double drive = -kDefault.mgl() * std::sin(0.5);
        CHECK(dx.q_dot == doctest::Approx((drive + kDefault.tauC_q) / kDefault.J_q));

        const ActuatorParams nf = frictionless();
        const HybridState dxf = continuous_dynamics(Mode::Stg, x, 1.0, nf, opt);
        CHECK(dxf.q_dot == doctest::Approx(-nf.mgl() * std::sin(0.5) / nf.J_q));
    }

    SUBCASE("STG stiction holds the link below breakaway") {
        HybridState x;
        x.q = 0.05;  // |mgl sin q| ~ 0.118 < tauC_q = 0.28
        const HybridState dx = continuous_dynamics(Mode::Stg, x, 0.0, kDefault, opt);
        CHECK(dx.q_dot == 0.0);
    }

    SUBCASE("SEA keeps the coupled accelerations equal") {
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> dist(-1.5, 1.5);
        for (int i = 0; i < 200; ++i) {
            HybridState x{dist(rng), dist(rng), dist(rng), 0.0, 0.0, 0.0};
            x.psi_dot = x.q_dot = dist(rng);
            const HybridState dx = continuous_dynamics(Mode::Sea, x, dist(rng), kDefault, opt);
            CHECK(dx.psi_dot == doctest::Approx(dx.q_dot).epsilon(1e-10));
        }
    }

    SUBCASE("BRK pins both accelerations exactly") {
        HybridState x{0.4, -0.1, 0.9, 0.0, 0.0, 0.0};
        const HybridState dx = continuous_dynamics(Mode::Brk, x, 2.0, kDefault, opt);
        CHECK(dx.theta == 2.0);
        CHECK(dx.psi_dot == 0.0);
        CHECK(dx.q_dot == 0.0);
    }

    SUBCASE("BoucWen law evolves the hysteresis state") {
        HybridState x;
        x.psi_dot = 0.0;
        SimOptions bw = opt;
        bw.law = SpringLaw::BoucWen;
        const HybridState dx = continuous_dynamics(Mode::Stg, x, 1.0, kDefault, bw);
        CHECK(dx.h == doctest::Approx(kDefault.alpha));  // phi_dot = u - psi_dot = 1, h = 0
        const HybridState dl = continuous_dynamics(Mode::Stg, x, 1.0, kDefault, opt);
        CHECK(dl.h == 0.0);
    }
}

TEST_CASE("integrate_phase conserves energy in frictionless SEA flow") {
    const ActuatorParams p = frictionless();
    HybridState x0;
    x0.theta = 0.2;  // phi = 0.2 stored
    x0.q = 0.3;
    x0.psi = 0.0;

    HybridTrajectory traj;
    integrate_phase(Mode::Sea, reset(Mode::Sea, x0, p), ControlSignal::constant(0.0), 0.0, 1.0,
                    1e-4, p, SimOptions{}, traj);
    const Energy e0 = energy(traj.samples.front().state, p, SpringLaw::Linear);
    double max_drift = 0.0;
    for (const auto& s : traj.samples) {
        const Energy e = energy(s.state, p, SpringLaw::Linear);
        max_drift = std::max(max_drift, std::abs(e.total() - e0.total()));
    }
    CHECK(max_drift / e0.total() < 1e-6);
    CHECK(traj.samples.back().t == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("integrate_phase in STG winds the motor linearly") {
    HybridState x0;
    HybridTrajectory traj;
    integrate_phase(Mode::Stg, x0, ControlSignal::constant(0.5), 0.0, 0.4, 1e-3, kDefault,
                    SimOptions{}, traj);
    for (const auto& s : traj.samples) {
        CHECK(s.state.theta == doctest::Approx(0.5 * s.t).epsilon(1e-9));
        CHECK(s.state.psi == 0.0);
    }
}

TEST_CASE("integrate_phase in BRK freezes the mechanism") {
    HybridState x0;
    x0.psi = 0.1;
    x0.q = -0.2;
    HybridTrajectory traj;
    integrate_phase(Mode::Brk, x0, ControlSignal::constant(3.0), 0.0, 0.5, 1e-3, kDefault,
                    SimOptions{}, traj);
    for (const auto& s : traj.samples) {
        CHECK(s.state.psi == 0.1);
        CHECK(s.state.q == -0.2);
        CHECK(s.state.psi_dot == 0.0);
        CHECK(s.state.q_dot == 0.0);
        CHECK(energy(s.state, kDefault, SpringLaw::Linear).kinetic == 0.0);
    }
}

TEST_CASE("integrate_phase input validation") {
    HybridState x0;
    HybridTrajectory traj;
    CHECK_THROWS_AS(integrate_phase(Mode::Dec, x0, ControlSignal::constant(0.0), 0.0, -1.0, 1e-3,
                                    kDefault, SimOptions{}, traj),
                    ConfigError);
    CHECK_THROWS_AS(integrate_phase(Mode::Dec, x0, ControlSignal::constant(0.0), 0.0, 0.1, 0.0,
                                    kDefault, SimOptions{}, traj),
                    ConfigError);
    CHECK_THROWS_AS(integrate_phase(Mode::Dec, x0, ControlSignal::constant(0.0), 0.0, 0.1, 0.2,
                                    kDefault, SimOptions{}, traj),
                    ConfigError);
}

TEST_CASE("RK4 step halving converges at fourth order") {
    const ActuatorParams p = [] {
        ActuatorParams q;
        q.tauC_psi = q.tauC_q = 0.0;  // keep the vector field smooth
        return q;
    }();
    HybridState x0;
    x0.theta = 0.1;
    x0.q = 0.4;

    auto final_state = [&](double dt) {
        HybridTrajectory traj;
        integrate_phase(Mode::Sea, reset(Mode::Sea, x0, p), ControlSignal::constant(1.0), 0.0,
                        0.5, dt, p, SimOptions{}, traj);
        return traj.samples.back().state.to_vector();
    };

    const double e1 = (final_state(2e-3) - final_state(1e-3)).norm();
    const double e2 = (final_state(1e-3) - final_state(5e-4)).norm();
    const double ratio = e1 / e2;
    CHECK(ratio > 16.0 * 0.7);
    CHECK(ratio < 16.0 * 1.3);
}

TEST_CASE("DEC pendulum release respects the energy bound") {
    Schedule sched;
    sched.phases = {{Mode::Dec, 3.0}};
    sched.control = ControlSignal::constant(0.0);
    HybridState x0;
    x0.q = M_PI / 2;

    const HybridTrajectory traj = execute_schedule(sched, x0, 1e-4, kDefault, SimOptions{});
    const double bound = std::sqrt(2.0 * kDefault.mgl() / kDefault.J_q);
    double peak = 0.0;
    for (const auto& s : traj.samples) peak = std::max(peak, std::abs(s.state.q_dot));
    CHECK(peak > 0.1);  // it does swing
    CHECK(peak <= bound + 1e-9);

    // Friction dissipates: the final total energy is below the initial one.
    const Energy e0 = energy(traj.samples.front().state, kDefault, SpringLaw::Linear);
    const Energy ef = energy(traj.final_state(), kDefault, SpringLaw::Linear);
    CHECK(ef.total() < e0.total());
}

TEST_CASE("empty schedule yields only the initial sample") {
    Schedule sched;
    sched.control = ControlSignal::constant(0.0);
    HybridState x0;
    x0.q = 0.25;
    const HybridTrajectory traj = execute_schedule(sched, x0, 1e-3, kDefault, SimOptions{});
    REQUIRE(traj.samples.size() == 1);
    CHECK(traj.samples[0].t == 0.0);
    CHECK(traj.samples[0].state.q == 0.25);
    CHECK(traj.events.empty());
}

TEST_CASE("schedule execution records switch events with satisfied constraints") {
    Schedule sched;
    sched.phases = {{Mode::Brk, 0.3}, {Mode::Sea, 0.2}, {Mode::Dec, 0.1}};
    sched.control = ControlSignal::constant(1.5);
    HybridState x0;

    const HybridTrajectory traj = execute_schedule(sched, x0, 1e-4, kDefault, SimOptions{});
    REQUIRE(traj.events.size() == 2);
    CHECK(traj.events[0].t == doctest::Approx(0.3));
    CHECK(traj.events[0].from == Mode::Brk);
    CHECK(traj.events[0].to == Mode::Sea);
    CHECK(traj.events[1].t == doctest::Approx(0.5));

    for (const auto& ev : traj.events) {
        const Eigen::MatrixXd c = constraint_matrix(ev.to);
        if (c.rows() > 0) {
            CHECK((c * ev.after.xi_dot()).lpNorm<Eigen::Infinity>() < 1e-10);
        }
    }
    // Sample times strictly increasing.
    for (size_t i = 1; i < traj.samples.size(); ++i) {
        CHECK(traj.samples[i].t > traj.samples[i - 1].t);
    }
    CHECK(traj.samples.back().t == doctest::Approx(0.6));
}

TEST_CASE("commanded switches land late when delays are enabled") {
    SimOptions opt;
    opt.apply_delays = true;

    SUBCASE("BRK to SEA toggles only the brake") {
        Schedule sched;
        sched.phases = {{Mode::Brk, 0.1}, {Mode::Sea, 0.2}};
        sched.control = ControlSignal::constant(2.0);
        const HybridTrajectory traj = execute_schedule(sched, HybridState{}, 1e-4, kDefault, opt);
        REQUIRE(traj.events.size() == 1);
        CHECK(traj.events[0].t == doctest::Approx(0.1 + kDefault.delay_brake));
        CHECK(traj.events[0].from == Mode::Brk);
        CHECK(traj.events[0].to == Mode::Sea);
    }

    SUBCASE("STG to SEA passes through DEC between the two landings") {
        Schedule sched;
        sched.phases = {{Mode::Stg, 0.1}, {Mode::Sea, 0.2}};
        sched.control = ControlSignal::constant(2.0);
        const HybridTrajectory traj = execute_schedule(sched, HybridState{}, 1e-5, kDefault, opt);
        REQUIRE(traj.events.size() == 2);
        CHECK(traj.events[0].t == doctest::Approx(0.1 + kDefault.delay_brake));
        CHECK(traj.events[0].from == Mode::Stg);
        CHECK(traj.events[0].to == Mode::Dec);
        CHECK(traj.events[1].t == doctest::Approx(0.1 + kDefault.delay_clutch));
        CHECK(traj.events[1].from == Mode::Dec);
        CHECK(traj.events[1].to == Mode::Sea);
    }

    SUBCASE("delays off reproduces the commanded times") {
        Schedule sched;
        sched.phases = {{Mode::Stg, 0.1}, {Mode::Sea, 0.2}};
        sched.control = ControlSignal::constant(2.0);
        const HybridTrajectory traj =
            execute_schedule(sched, HybridState{}, 1e-4, kDefault, SimOptions{});
        REQUIRE(traj.events.size() == 1);
        CHECK(traj.events[0].t == doctest::Approx(0.1));
    }
}

TEST_CASE("SEA momentum balance integrates the spring torque") {
    ActuatorParams p = frictionless();
    p.grav = 1e-12;  // effectively disable gravity while staying positive

    HybridState x0;
    x0.theta = 0.1;
    SimOptions opt;
    HybridTrajectory traj;
    integrate_phase(Mode::Sea, reset(Mode::Sea, x0, p), ControlSignal::constant(1.0), 0.0, 1.0,
                    1e-4, p, opt, traj);

    // d/dt (J_psi psi_dot + J_q q_dot) = tau_s when only the spring acts.
    double torque_impulse = 0.0;
    for (size_t i = 1; i < traj.samples.size(); ++i) {
        const auto& a = traj.samples[i - 1];
        const auto& b = traj.samples[i];
        const double tau_a = spring_torque(a.state.theta, a.state.psi, 0.0, SpringLaw::Linear, p);
        const double tau_b = spring_torque(b.state.theta, b.state.psi, 0.0, SpringLaw::Linear, p);
        torque_impulse += 0.5 * (tau_a + tau_b) * (b.t - a.t);
    }
    const auto momentum = [&](const HybridState& s) {
        return p.J_psi * s.psi_dot + p.J_q * s.q_dot;
    };
    const double dl = momentum(traj.final_state()) - momentum(traj.samples.front().state);
    CHECK(dl == doctest::Approx(torque_impulse).epsilon(1e-6));
}

TEST_CASE("control signal interpolation") {
    const ControlSignal u = ControlSignal::sampled({0.0, 1.0, 1.0, 2.0}, {0.0, 2.0, -1.0, -1.0});
    CHECK(u(-0.5) == 0.0);
    CHECK(u(0.5) == doctest::Approx(1.0));
    CHECK(u(0.999999) == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(u(1.0 + 1e-12) == doctest::Approx(-1.0));  // step at the duplicate knot
    CHECK(u(1.5) == doctest::Approx(-1.0));
    CHECK(u(5.0) == -1.0);

    CHECK_THROWS_AS(ControlSignal::sampled({1.0, 0.5}, {0.0, 0.0}), ConfigError);
    CHECK_THROWS_AS(ControlSignal::sampled({}, {}), ConfigError);
}
