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
#include <cstdio>
#include <filesystem>
#include <random>

#include "bsa/errors.hpp"
#include "bsa/model.hpp"
#include "bsa/params.hpp"

using namespace bsa;

namespace {
const ActuatorParams kDefault;
}

TEST_CASE("constraint matrices match the mode table exactly") {
    const Eigen::MatrixXd dec = constraint_matrix(Mode::Dec);
    CHECK(dec.rows() == 0);
    CHECK(dec.cols() == 2);

    const Eigen::MatrixXd sea = constraint_matrix(Mode::Sea);
    REQUIRE(sea.rows() == 1);
    CHECK(sea(0, 0) == 1.0);
    CHECK(sea(0, 1) == -1.0);

    const Eigen::MatrixXd stg = constraint_matrix(Mode::Stg);
    REQUIRE(stg.rows() == 1);
    CHECK(stg(0, 0) == 1.0);
    CHECK(stg(0, 1) == 0.0);

    const Eigen::MatrixXd brk = constraint_matrix(Mode::Brk);
    REQUIRE(brk.rows() == 2);
    CHECK(brk(0, 0) == 1.0);
    CHECK(brk(0, 1) == 0.0);
    CHECK(brk(1, 0) == 1.0);
    CHECK(brk(1, 1) == -1.0);

    // BRK pins everything: rank 2.
    CHECK(Eigen::FullPivLU<Eigen::MatrixXd>(brk).rank() == 2);
}

TEST_CASE("mode ids and clutch states") {
    CHECK(static_cast<int>(Mode::Dec) == 0);
    CHECK(static_cast<int>(Mode::Sea) == 1);
    CHECK(static_cast<int>(Mode::Stg) == 2);
    CHECK(static_cast<int>(Mode::Brk) == 3);
    for (Mode m : {Mode::Dec, Mode::Sea, Mode::Stg, Mode::Brk}) {
        CHECK(mode_from_name(mode_name(m)) == m);
        CHECK(mode_from_clutches(clutch_state(m)) == m);
    }
    CHECK_THROWS_AS(mode_from_name("XYZ"), ConfigError);
    CHECK_THROWS_AS(mode_from_id(7), ConfigError);
}

TEST_CASE("spring torque") {
    CHECK(spring_torque(0.3, 0.0, 0.0, SpringLaw::Linear, kDefault) == doctest::Approx(4.5));
    CHECK(spring_torque(0.0, 0.0, 0.0, SpringLaw::Linear, kDefault) == 0.0);
    CHECK(spring_torque(0.2, 0.0, 0.05, SpringLaw::BoucWen, kDefault) == doctest::Approx(2.25));

    // Odd in phi for the linear law.
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    for (int i = 0; i < 200; ++i) {
        const double phi = dist(rng);
        CHECK(spring_torque(phi, 0.0, 0.0, SpringLaw::Linear, kDefault) ==
              doctest::Approx(-spring_torque(-phi, 0.0, 0.0, SpringLaw::Linear, kDefault)));
    }
}

TEST_CASE("hysteresis rate") {
    CHECK(hysteresis_rate(0.1, 0.0, 0.1, kDefault) == 0.0);
    CHECK(hysteresis_rate(0.0, 1.0, 0.0, kDefault) == doctest::Approx(0.08));
    // 0.08 - 2.0*0.05 - 0.6*0.05 with (alpha, beta, gamma) = (0.08, 2.0, 0.6)
    CHECK(hysteresis_rate(0.0, 1.0, 0.05, kDefault) == doctest::Approx(-0.05));

    ActuatorParams off = kDefault;
    off.alpha = off.beta = off.gamma = 0.0;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        CHECK(hysteresis_rate(dist(rng), dist(rng), dist(rng), off) == 0.0);
    }

    // Deflection-magnitude variant keys the middle term on |phi| instead.
    const double lit = hysteresis_rate(0.2, 1.0, 0.05, kDefault, HysteresisForm::DeflectionMagnitude);
    CHECK(lit == doctest::Approx(0.08 - 2.0 * 0.2 * 0.05 - 0.6 * 0.05));
}

TEST_CASE("friction torque") {
    const Eigen::Vector2d at_rest = friction_torque(0.0, 0.0, kDefault, false);
    CHECK(at_rest[0] == 0.0);
    CHECK(at_rest[1] == 0.0);

    CHECK(friction_torque(0.0, 1.0, kDefault, false)[1] == doctest::Approx(0.36));
    CHECK(friction_torque(-0.5, 0.0, kDefault, false)[0] == doctest::Approx(-0.13));

    // Dissipativity: v * tau_f(v) >= 0 componentwise, exact and smoothed.
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> dist(-8.0, 8.0);
    for (int i = 0; i < 500; ++i) {
        const double vp = dist(rng), vq = dist(rng);
        for (bool smoothed : {false, true}) {
            const Eigen::Vector2d tf = friction_torque(vp, vq, kDefault, smoothed);
            CHECK(vp * tf[0] >= 0.0);
            CHECK(vq * tf[1] >= 0.0);
        }
    }
}

TEST_CASE("gravity vector") {
    CHECK(gravity_vector(0.0, kDefault).norm() == 0.0);
    CHECK(gravity_vector(M_PI / 2, kDefault)[1] == doctest::Approx(2.3544));
    CHECK(gravity_vector(-M_PI / 2, kDefault)[1] == doctest::Approx(-2.3544));
    CHECK(gravity_vector(0.7, kDefault)[0] == 0.0);
}

TEST_CASE("aggregate_params sums the spring chain") {
    std::map<std::string, double> rows = {
        {"S_o", 5.8e-3}, {"T_i", 6.4e-4}, {"T_o", 1.4e-4}, {"B", 7.0e-4}, {"C_i", 1.0e-3},
        {"L", 0.52},
    };
    const ActuatorParams p = aggregate_params(rows);
    CHECK(p.J_psi == doctest::Approx(8.28e-3).epsilon(1e-12));
    CHECK(p.J_q == doctest::Approx(0.52));

    rows.erase("T_o");
    rows.erase("B");
    CHECK_THROWS_WITH_AS(aggregate_params(rows), doctest::Contains("T_o"), ConfigError);

    CHECK_THROWS_AS(aggregate_params({{"J_psi", 8.28e-3}, {"bogus", 1.0}}), ConfigError);
}

TEST_CASE("default parameter set is self-consistent") {
    kDefault.validate();
    CHECK(std::abs(kDefault.K * kDefault.phi_max - kDefault.tau_s_max) < 1e-9);
    CHECK(kDefault.mgl() == doctest::Approx(2.3544));
    CHECK(kDefault.J_psi == doctest::Approx(8.28e-3));
}

TEST_CASE("validate names the offending field") {
    ActuatorParams p = kDefault;
    p.K = -1.0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("K"), ConfigError);
    p = kDefault;
    p.J_q = 0.0;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("J_q"), ConfigError);
    p = kDefault;
    p.delay_brake = -0.01;
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("delay_brake"), ConfigError);
}

TEST_CASE("parameter file round trip") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "bsa_params_roundtrip.txt";
    ActuatorParams p = kDefault;
    p.K = 17.5;
    p.u_max = 3.25;
    save_params(p, path.string());
    const ActuatorParams q = load_params(path.string());
    CHECK(q.K == doctest::Approx(17.5).epsilon(1e-15));
    CHECK(q.u_max == doctest::Approx(3.25).epsilon(1e-15));
    CHECK(q.J_psi == doctest::Approx(p.J_psi).epsilon(1e-15));
    fs::remove(path);
}

TEST_CASE("parameter file errors carry the field name") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "bsa_params_bad.txt";
    {
        std::FILE* f = std::fopen(path.string().c_str(), "w");
        REQUIRE(f);
        std::fputs("J_psi = 8.28e-3\nJ_q = abc\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_WITH_AS(load_params(path.string()), doctest::Contains("J_q"), ConfigError);
    fs::remove(path);
    CHECK_THROWS_AS(load_params("/nonexistent/params.txt"), ConfigError);
}

TEST_CASE("energy") {
    HybridState rest;
    const Energy e0 = energy(rest, kDefault, SpringLaw::Linear);
    CHECK(e0.kinetic == 0.0);
    CHECK(e0.potential == 0.0);

    HybridState wound;
    wound.theta = 0.3;
    CHECK(energy(wound, kDefault, SpringLaw::Linear).potential == doctest::Approx(0.675));

    HybridState lifted;
    lifted.q = M_PI / 2;
    CHECK(energy(lifted, kDefault, SpringLaw::Linear).potential == doctest::Approx(2.3544));

    // Nonnegative everywhere; zero only at the datum.
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> dist(-2.0, 2.0);
    for (int i = 0; i < 500; ++i) {
        HybridState x{dist(rng), dist(rng), dist(rng), dist(rng), dist(rng), 0.0};
        const Energy e = energy(x, kDefault, SpringLaw::Linear);
        CHECK(e.kinetic >= 0.0);
        CHECK(e.potential >= 0.0);
    }
}

TEST_CASE("hybrid state vector round trip") {
    HybridState x{0.1, -0.2, 0.3, -0.4, 0.5, 0.01};
    const HybridState y = HybridState::from_vector(x.to_vector());
    CHECK(y.theta == x.theta);
    CHECK(y.psi == x.psi);
    CHECK(y.q == x.q);
    CHECK(y.psi_dot == x.psi_dot);
    CHECK(y.q_dot == x.q_dot);
    CHECK(y.h == x.h);
    CHECK(x.phi() == doctest::Approx(0.3));
    CHECK(x.all_finite());
    x.q = std::nan("");
    CHECK_FALSE(x.all_finite());
}
