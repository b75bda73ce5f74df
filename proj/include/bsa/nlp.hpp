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

#ifndef BSA_NLP_HPP
#define BSA_NLP_HPP

#include <Eigen/Dense>
#include <functional>

namespace bsa {

/**
 * @brief Smooth nonlinear program
 *
 *   min f(x)   s.t.   c_lower <= c(x) <= c_upper,   x_lower <= x <= x_upper.
 *
 * Equality constraints are rows with c_lower == c_upper; fixed variables are
 * entries with x_lower == x_upper. Infinite bounds mark one-sided or free
 * entries. Callbacks must be thread-safe for concurrent solves.
 */
struct NlpProblem {
    int num_vars = 0;
    int num_cons = 0;
    Eigen::VectorXd x_lower, x_upper;  // size num_vars
    Eigen::VectorXd c_lower, c_upper;  // size num_cons

    std::function<double(const Eigen::VectorXd&)> objective;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> objective_gradient;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> constraints;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> constraint_jacobian;

    /// Optional exact Hessian of f(x) + y^T c(x); when absent the solver
    /// falls back to a damped BFGS approximation.
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>
        lagrangian_hessian;
};

enum class NlpStatus { Converged, MaxIterations, Infeasible, Stalled };

const char* nlp_status_name(NlpStatus status);

struct NlpOptions {
    double tol = 1e-6;       // KKT error target
    int max_iter = 3000;
    double mu_init = 1.0;    // initial barrier parameter
    bool verbose = false;

    // Acceptable-level termination: once the error sits below acceptable_tol
    // (with constraint violation still below tol) and the objective has
    // stopped moving for acceptable_iter consecutive iterations, the point is
    // declared converged. Degenerate active sets otherwise stretch the last
    // digits of dual polish over thousands of iterations.
    double acceptable_tol = 1e-3;
    int acceptable_iter = 25;
};

struct NlpResult {
    Eigen::VectorXd x;            // best iterate (full variable space)
    Eigen::VectorXd multipliers;  // constraint multipliers
    NlpStatus status = NlpStatus::Stalled;
    double objective = 0.0;
    double kkt_error = 0.0;
    double constraint_violation = 0.0;
    int iterations = 0;
};

/**
 * @brief Primal-dual interior-point solve with a damped dense BFGS
 * Lagrangian-Hessian approximation.
 *
 * Inequality rows get slacks, bounds get log barriers with a monotone
 * barrier-parameter reduction, steps come from the condensed KKT system with
 * inertia regularization, and acceptance uses an l1-penalty merit line
 * search with fraction-to-boundary safeguards. On failure the best iterate
 * found is returned with a diagnostic status.
 */
NlpResult solve_nlp(const NlpProblem& problem, const Eigen::VectorXd& x0,
                    const NlpOptions& options = {});

} // namespace bsa

#endif // BSA_NLP_HPP
