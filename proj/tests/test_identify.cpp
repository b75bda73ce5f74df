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
#include "bsa/identify.hpp"

using namespace bsa;

namespace {
const ActuatorParams kDefault;
}

TEST_CASE("zero hysteresis collapses the loop to a line") {
    ActuatorParams p = kDefault;
    p.alpha = p.beta = p.gamma = 0.0;
    const LoadingCycleData data = generate_cycles(p, 2.0, 0.29, 3, 1e-3);
    for (size_t i = 0; i < data.t.size(); ++i) {
        CHECK(data.tau[i] == doctest::Approx(p.K * data.phi[i]).epsilon(1e-12));
    }
    CHECK(std::abs(loop_area_per_cycle(data)) < 1e-9);
}

TEST_CASE("hysteretic cycles enclose positive loop area") {
    const LoadingCycleData data = generate_cycles(kDefault, 2.0, 0.29, 10, 1e-3);
    CHECK(loop_area_per_cycle(data) > 0.0);
}

TEST_CASE("cycle count produces the requested reversal pairs") {
    const LoadingCycleData data = generate_cycles(kDefault, 2.0, 0.29, 10, 1e-3);
    CHECK(data.cycles == 10);

    // Count velocity sign reversals of the deflection profile.
    int reversals = 0;
    int last_sign = 0;
    for (size_t i = 1; i < data.t.size(); ++i) {
        const double d = data.phi[i] - data.phi[i - 1];
        if (std::abs(d) < 1e-12) continue;
        const int sign = d > 0 ? 1 : -1;
        if (last_sign != 0 && sign != last_sign) ++reversals;
        last_sign = sign;
    }
    CHECK(reversals == 2 * data.cycles);  // one pair per cycle
    CHECK(data.phi.front() == 0.0);
    double max_phi = 0.0;
    for (double v : data.phi) max_phi = std::max(max_phi, std::abs(v));
    CHECK(max_phi == doctest::Approx(0.29));
}

TEST_CASE("stiffness fit is exact on linear data") {
    ActuatorParams p = kDefault;
    p.alpha = p.beta = p.gamma = 0.0;
    const LoadingCycleData data = generate_cycles(p, 2.0, 0.29, 2, 1e-3);
    CHECK(fit_stiffness(data) == doctest::Approx(15.0).epsilon(1e-9));
}

TEST_CASE("stiffness fit input validation") {
    LoadingCycleData tiny;
    tiny.t = {0.0, 0.1};
    tiny.phi = {0.0, 0.1};
    tiny.tau = {0.0, 1.5};
    CHECK_THROWS_AS(fit_stiffness(tiny), ConfigError);

    LoadingCycleData zeros;
    for (int i = 0; i < 20; ++i) {
        zeros.t.push_back(0.01 * i);
        zeros.phi.push_back(0.0);
        zeros.tau.push_back(0.0);
    }
    CHECK_THROWS_AS(fit_stiffness(zeros), ConfigError);
}

TEST_CASE("round trip recovers stiffness and shaping factors") {
    for (double set_point : {1.0, 2.0, 3.0, 4.0}) {
        const LoadingCycleData data = generate_cycles(kDefault, set_point, 0.29, 4, 1e-3);
        const BoucWenFit fit = fit_bouc_wen(data, std::nullopt);
        CAPTURE(set_point);
        CHECK(fit.K == doctest::Approx(15.0).epsilon(0.05));
        CHECK(fit.alpha == doctest::Approx(0.08).epsilon(0.05));
        CHECK(fit.beta == doctest::Approx(2.0).epsilon(0.05));
        CHECK(fit.gamma == doctest::Approx(0.6).epsilon(0.05));
    }
}

TEST_CASE("stiffness fit is insensitive to cycle count") {
    const double k2 = fit_stiffness(generate_cycles(kDefault, 2.0, 0.29, 2, 1e-3));
    const double k6 = fit_stiffness(generate_cycles(kDefault, 2.0, 0.29, 6, 1e-3));
    CHECK(k6 == doctest::Approx(k2).epsilon(0.01));
}

TEST_CASE("zero-hysteresis data yields a near-zero loss model") {
    ActuatorParams p = kDefault;
    p.alpha = p.beta = p.gamma = 0.0;
    const LoadingCycleData data = generate_cycles(p, 2.0, 0.29, 3, 1e-3);
    const BoucWenFit fit = fit_bouc_wen(data, 15.0);
    // The fitted model must not add torque loss where there is none.
    CHECK(fit.rms_residual < 1e-6);
    CHECK(fit.alpha * 15.0 < 0.05);  // negligible loss-term amplitude
}

TEST_CASE("fit tolerates measurement noise") {
    LoadingCycleData data = generate_cycles(kDefault, 2.0, 0.29, 6, 1e-3);
    std::mt19937_64 rng(7);
    auto gaussian = [&rng]() {
        const double u1 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
        const double u2 = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    };
    for (double& tau : data.tau) tau += 0.01 * kDefault.tau_s_max * gaussian();

    const BoucWenFit fit = fit_bouc_wen(data, std::nullopt);
    CHECK(fit.K == doctest::Approx(15.0).epsilon(0.15));
    CHECK(fit.alpha == doctest::Approx(0.08).epsilon(0.15));
    CHECK(fit.beta == doctest::Approx(2.0).epsilon(0.15));
    CHECK(fit.gamma == doctest::Approx(0.6).epsilon(0.15));
}

TEST_CASE("delay estimation") {
    SUBCASE("injected delay is recovered within one integrator step") {
        const double dt = 1e-4;
        const DelayLog log = generate_delay_log(kDefault, 0.022, M_PI / 2, dt);
        CHECK(estimate_delay(log) == doctest::Approx(0.022).epsilon(0.0).scale(1.0).epsilon(dt / 0.022));
    }

    SUBCASE("zero-delay log estimates zero") {
        const double dt = 1e-4;
        const DelayLog log = generate_delay_log(kDefault, 0.0, M_PI / 2, dt);
        CHECK(estimate_delay(log) <= dt + 1e-12);
    }

    SUBCASE("missing crossing raises an error") {
        DelayLog log;
        log.t_cmd = {0.0, 0.1, 0.3};
        log.cmd = {0.0, 1.0, 1.0};
        for (int i = 0; i <= 300; ++i) {
            log.t_resp.push_back(i * 1e-3);
            log.resp.push_back(0.0);  // never reacts
        }
        CHECK_THROWS_AS(estimate_delay(log), ConfigError);
    }

    SUBCASE("no command edge raises an error") {
        DelayLog log;
        log.t_cmd = {0.0, 0.3};
        log.cmd = {1.0, 1.0};
        log.t_resp = {0.0, 0.3};
        log.resp = {0.0, 1.0};
        CHECK_THROWS_AS(estimate_delay(log), ConfigError);
    }
}

TEST_CASE("generator input validation") {
    CHECK_THROWS_AS(generate_cycles(kDefault, -1.0, 0.29, 2, 1e-3), ConfigError);
    CHECK_THROWS_AS(generate_cycles(kDefault, 1.0, 0.29, 0, 1e-3), ConfigError);
    CHECK_THROWS_AS(generate_cycles(kDefault, 1.0, 0.29, 2, 0.0), ConfigError);
}
