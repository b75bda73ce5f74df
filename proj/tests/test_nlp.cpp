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
#include <limits>

#include "bsa/nlp.hpp"

using namespace bsa;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

VectorXd vec(std::initializer_list<double> vals) {
    VectorXd v(static_cast<long>(vals.size()));
    long i = 0;
    for (double x : vals) v[i++] = x;
    return v;
}
} // namespace

TEST_CASE("unconstrained quadratic") {
    NlpProblem p;
    p.num_vars = 2;
    p.num_cons = 0;
    p.x_lower = vec({-kInf, -kInf});
    p.x_upper = vec({kInf, kInf});
    p.c_lower = VectorXd(0);
    p.c_upper = VectorXd(0);
    p.objective = [](const VectorXd& x) {
        return (x[0] - 3.0) * (x[0] - 3.0) + 2.0 * (x[1] + 1.0) * (x[1] + 1.0);
    };
    p.objective_gradient = [](const VectorXd& x) {
        return vec({2.0 * (x[0] - 3.0), 4.0 * (x[1] + 1.0)});
    };
    p.constraints = [](const VectorXd&) { return VectorXd(0); };
    p.constraint_jacobian = [](const VectorXd&) { return MatrixXd(0, 2); };

    const NlpResult r = solve_nlp(p, vec({0.0, 0.0}));
    CHECK(r.status == NlpStatus::Converged);
    CHECK(r.x[0] == doctest::Approx(3.0).epsilon(1e-5));
    CHECK(r.x[1] == doctest::Approx(-1.0).epsilon(1e-5));
}

TEST_CASE("active variable bound") {
    NlpProblem p;
    p.num_vars = 1;
    p.num_cons = 0;
    p.x_lower = vec({-kInf});
    p.x_upper = vec({2.0});
    p.c_lower = VectorXd(0);
    p.c_upper = VectorXd(0);
    p.objective = [](const VectorXd& x) { return (x[0] - 3.0) * (x[0] - 3.0); };
    p.objective_gradient = [](const VectorXd& x) { return vec({2.0 * (x[0] - 3.0)}); };
    p.constraints = [](const VectorXd&) { return VectorXd(0); };
    p.constraint_jacobian = [](const VectorXd&) { return MatrixXd(0, 1); };

    const NlpResult r = solve_nlp(p, vec({0.0}));
    CHECK(r.status == NlpStatus::Converged);
    CHECK(r.x[0] == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("equality-constrained quadratic has the analytic solution and multiplier") {
    NlpProblem p;
    p.num_vars = 2;
    p.num_cons = 1;
    p.x_lower = vec({-kInf, -kInf});
    p.x_upper = vec({kInf, kInf});
    p.c_lower = vec({2.0});
    p.c_upper = vec({2.0});
    p.objective = [](const VectorXd& x) { return x.squaredNorm(); };
    p.objective_gradient = [](const VectorXd& x) { return VectorXd(2.0 * x); };
    p.constraints = [](const VectorXd& x) { return vec({x[0] + x[1]}); };
    p.constraint_jacobian = [](const VectorXd&) {
        MatrixXd j(1, 2);
        j << 1.0, 1.0;
        return j;
    };

    const NlpResult r = solve_nlp(p, vec({5.0, -3.0}));
    CHECK(r.status == NlpStatus::Converged);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-6));
    // grad f + J^T y = 0  =>  y = -2
    CHECK(r.multipliers[0] == doctest::Approx(-2.0).epsilon(1e-4));
}

TEST_CASE("hs071") {
    NlpProblem p;
    p.num_vars = 4;
    p.num_cons = 2;
    p.x_lower = vec({1.0, 1.0, 1.0, 1.0});
    p.x_upper = vec({5.0, 5.0, 5.0, 5.0});
    p.c_lower = vec({25.0, 40.0});
    p.c_upper = vec({kInf, 40.0});
    p.objective = [](const VectorXd& x) { return x[0] * x[3] * (x[0] + x[1] + x[2]) + x[2]; };
    p.objective_gradient = [](const VectorXd& x) {
        return vec({x[3] * (2.0 * x[0] + x[1] + x[2]), x[0] * x[3], x[0] * x[3] + 1.0,
                    x[0] * (x[0] + x[1] + x[2])});
    };
    p.constraints = [](const VectorXd& x) {
        return vec({x[0] * x[1] * x[2] * x[3], x.squaredNorm()});
    };
    p.constraint_jacobian = [](const VectorXd& x) {
        MatrixXd j(2, 4);
        j << x[1] * x[2] * x[3], x[0] * x[2] * x[3], x[0] * x[1] * x[3], x[0] * x[1] * x[2],
            2.0 * x[0], 2.0 * x[1], 2.0 * x[2], 2.0 * x[3];
        return j;
    };

    const NlpResult r = solve_nlp(p, vec({1.0, 5.0, 5.0, 1.0}));
    CHECK(r.status == NlpStatus::Converged);
    CHECK(r.objective == doctest::Approx(17.0140173).epsilon(1e-4));
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(r.x[1] == doctest::Approx(4.743).epsilon(1e-3));
    CHECK(r.x[2] == doctest::Approx(3.82115).epsilon(1e-3));
    CHECK(r.x[3] == doctest::Approx(1.379408).epsilon(1e-3));
}

TEST_CASE("rosenbrock") {
    NlpProblem p;
    p.num_vars = 2;
    p.num_cons = 0;
    p.x_lower = vec({-kInf, -kInf});
    p.x_upper = vec({kInf, kInf});
    p.c_lower = VectorXd(0);
    p.c_upper = VectorXd(0);
    p.objective = [](const VectorXd& x) {
        const double a = 1.0 - x[0];
        const double b = x[1] - x[0] * x[0];
        return a * a + 100.0 * b * b;
    };
    p.objective_gradient = [](const VectorXd& x) {
        const double b = x[1] - x[0] * x[0];
        return vec({-2.0 * (1.0 - x[0]) - 400.0 * x[0] * b, 200.0 * b});
    };
    p.constraints = [](const VectorXd&) { return VectorXd(0); };
    p.constraint_jacobian = [](const VectorXd&) { return MatrixXd(0, 2); };

    const NlpResult r = solve_nlp(p, vec({-1.2, 1.0}));
    CHECK(r.status == NlpStatus::Converged);
    CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("inconsistent equalities are reported infeasible") {
    NlpProblem p;
    p.num_vars = 2;
    p.num_cons = 2;
    p.x_lower = vec({-kInf, -kInf});
    p.x_upper = vec({kInf, kInf});
    p.c_lower = vec({2.0, 0.0});
    p.c_upper = vec({2.0, 0.0});
    p.objective = [](const VectorXd& x) { return x.squaredNorm(); };
    p.objective_gradient = [](const VectorXd& x) { return VectorXd(2.0 * x); };
    p.constraints = [](const VectorXd& x) { return vec({x[0] + x[1], x[0] + x[1]}); };
    p.constraint_jacobian = [](const VectorXd&) {
        MatrixXd j(2, 2);
        j << 1.0, 1.0, 1.0, 1.0;
        return j;
    };

    NlpOptions opt;
    opt.max_iter = 300;
    const NlpResult r = solve_nlp(p, vec({0.0, 0.0}), opt);
    CHECK(r.status != NlpStatus::Converged);
    CHECK(r.constraint_violation > 1e-3);
}

TEST_CASE("fixed variables are honoured exactly") {
    NlpProblem p;
    p.num_vars = 2;
    p.num_cons = 1;
    p.x_lower = vec({1.5, -kInf});
    p.x_upper = vec({1.5, kInf});
    p.c_lower = vec({-kInf});
    p.c_upper = vec({3.0});
    p.objective = [](const VectorXd& x) {
        return (x[0] - 3.0) * (x[0] - 3.0) + (x[1] - 1.0) * (x[1] - 1.0);
    };
    p.objective_gradient = [](const VectorXd& x) {
        return vec({2.0 * (x[0] - 3.0), 2.0 * (x[1] - 1.0)});
    };
    p.constraints = [](const VectorXd& x) { return vec({x[0] + x[1]}); };
    p.constraint_jacobian = [](const VectorXd&) {
        MatrixXd j(1, 2);
        j << 1.0, 1.0;
        return j;
    };

    const NlpResult r = solve_nlp(p, vec({0.0, 0.0}));
    CHECK(r.status == NlpStatus::Converged);
    CHECK(r.x[0] == 1.5);
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("linear program over a simplex face") {
    NlpProblem p;
    p.num_vars = 2;
    p.num_cons = 1;
    p.x_lower = vec({0.0, 0.0});
    p.x_upper = vec({kInf, kInf});
    p.c_lower = vec({-kInf});
    p.c_upper = vec({1.0});
    p.objective = [](const VectorXd& x) { return -x[0] - 2.0 * x[1]; };
    p.objective_gradient = [](const VectorXd&) { return vec({-1.0, -2.0}); };
    p.constraints = [](const VectorXd& x) { return vec({x[0] + x[1]}); };
    p.constraint_jacobian = [](const VectorXd&) {
        MatrixXd j(1, 2);
        j << 1.0, 1.0;
        return j;
    };

    const NlpResult r = solve_nlp(p, vec({0.3, 0.3}));
    CHECK(r.status == NlpStatus::Converged);
    CHECK(r.x[0] == doctest::Approx(0.0).epsilon(1e-4));
    CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(r.objective == doctest::Approx(-2.0).epsilon(1e-5));
}
