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

#include "bsa/nlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

#include "bsa/errors.hpp"

namespace bsa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEqualityTol = 1e-12;   // row width below which a row is an equality
constexpr double kKappaSigma = 1e10;     // bound-multiplier sandwich
constexpr double kKappaEps = 10.0;       // barrier decrease trigger
constexpr double kKappaMu = 0.2;         // linear barrier decrease factor
constexpr double kThetaMu = 1.5;         // superlinear barrier decrease exponent
constexpr double kTauMin = 0.99;         // fraction-to-boundary floor
constexpr double kArmijoEta = 1e-4;
constexpr double kFilterGamma = 1e-5;    // filter envelope margins
constexpr double kSwitchSPhi = 2.3;      // f-type switching exponents
constexpr double kSwitchSTheta = 1.1;
constexpr double kSwitchDelta = 1.0;

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Bounded {
    std::vector<int> lo;  // indices with finite lower bound
    std::vector<int> hi;  // indices with finite upper bound
};

double safe_dot(const VectorXd& a, const VectorXd& b) { return a.size() ? a.dot(b) : 0.0; }

} // namespace

const char* nlp_status_name(NlpStatus status) {
    switch (status) {
        case NlpStatus::Converged: return "converged";
        case NlpStatus::MaxIterations: return "max_iterations";
        case NlpStatus::Infeasible: return "infeasible";
        case NlpStatus::Stalled: return "stalled";
    }
    return "?";
}

namespace {

/// The working problem after fixed variables are substituted out and
/// inequality rows are given slacks: variables z = (x_free, s). Constraint
/// rows are rescaled so no row gradient exceeds ~100 at the start point;
/// violations are still reported in original units.
class Workspace {
public:
    Workspace(const NlpProblem& p, const VectorXd& x0) : problem_(p) {
        for (int i = 0; i < p.num_vars; ++i) {
            if (p.x_upper[i] - p.x_lower[i] <= kEqualityTol) {
                fixed_idx_.push_back(i);
            } else {
                free_idx_.push_back(i);
            }
        }
        x_full_ = x0;
        for (int i : fixed_idx_) x_full_[i] = 0.5 * (p.x_lower[i] + p.x_upper[i]);
        for (int j = 0; j < p.num_cons; ++j) {
            if (p.c_upper[j] - p.c_lower[j] <= kEqualityTol) eq_rows_.push_back(j);
            else ineq_rows_.push_back(j);
        }
        nx_ = static_cast<int>(free_idx_.size());
        ns_ = static_cast<int>(ineq_rows_.size());
        m_ = p.num_cons;
        row_scale_ = VectorXd::Ones(m_);
        if (m_ > 0) {
            const MatrixXd j0 = problem_.constraint_jacobian(x_full_);
            for (int j = 0; j < m_; ++j) {
                const double mag = j0.row(j).lpNorm<Eigen::Infinity>();
                if (mag > 100.0) row_scale_[j] = 100.0 / mag;
            }
        }
    }

    const VectorXd& row_scale() const { return row_scale_; }

    void set_objective_scale(double s) { obj_scale_ = s; }
    double objective_scale() const { return obj_scale_; }

    int nx() const { return nx_; }
    int ns() const { return ns_; }
    int nz() const { return nx_ + ns_; }
    int m() const { return m_; }

    VectorXd x_reduced(const VectorXd& x_full) const {
        VectorXd xr(nx_);
        for (int i = 0; i < nx_; ++i) xr[i] = x_full[free_idx_[i]];
        return xr;
    }

    const VectorXd& assemble(const VectorXd& xr) const {
        for (int i = 0; i < nx_; ++i) x_full_[free_idx_[i]] = xr[i];
        return x_full_;
    }

    double eval_f(const VectorXd& xr) const {
        return obj_scale_ * problem_.objective(assemble(xr));
    }

    VectorXd eval_grad(const VectorXd& xr) const {
        const VectorXd g = problem_.objective_gradient(assemble(xr));
        VectorXd gr(nx_);
        for (int i = 0; i < nx_; ++i) gr[i] = obj_scale_ * g[free_idx_[i]];
        return gr;
    }

    // Scaled constraint values (slack bounds live in scaled units too).
    VectorXd eval_c(const VectorXd& xr) const {
        return row_scale_.cwiseProduct(problem_.constraints(assemble(xr)));
    }

    MatrixXd eval_jac(const VectorXd& xr) const {
        const MatrixXd j = problem_.constraint_jacobian(assemble(xr));
        MatrixXd jr(m_, nx_);
        for (int i = 0; i < nx_; ++i) {
            jr.col(i) = row_scale_.cwiseProduct(j.col(free_idx_[i]));
        }
        return jr;
    }

    bool has_hessian() const { return static_cast<bool>(problem_.lagrangian_hessian); }

    // y here is the scaled-system multiplier; the user callback sees the
    // original-system multiplier and its result is mapped back.
    MatrixXd eval_hess(const VectorXd& xr, const VectorXd& y) const {
        const VectorXd y_user = row_scale_.cwiseProduct(y) / obj_scale_;
        const MatrixXd h = problem_.lagrangian_hessian(assemble(xr), y_user);
        MatrixXd hr(nx_, nx_);
        for (int i = 0; i < nx_; ++i) {
            for (int j = 0; j < nx_; ++j) {
                hr(i, j) = obj_scale_ * h(free_idx_[i], free_idx_[j]);
            }
        }
        return hr;
    }

    // Residual g(z) = 0 in scaled units: equality rows offset by their bound,
    // inequality rows get c(x) - s.
    VectorXd residual(const VectorXd& c_scaled, const VectorXd& s) const {
        VectorXd g(m_);
        for (int j : eq_rows_) g[j] = c_scaled[j] - row_scale_[j] * problem_.c_lower[j];
        for (int k = 0; k < ns_; ++k) g[ineq_rows_[k]] = c_scaled[ineq_rows_[k]] - s[k];
        return g;
    }

    // Largest violation in original (unscaled) units.
    double unscaled_violation(const VectorXd& g_scaled) const {
        double v = 0.0;
        for (int j = 0; j < m_; ++j) v = std::max(v, std::abs(g_scaled[j]) / row_scale_[j]);
        return v;
    }

    // Bounds of z = (x_free, s); slack bounds in scaled units.
    void z_bounds(VectorXd& lo, VectorXd& hi) const {
        lo.resize(nz());
        hi.resize(nz());
        for (int i = 0; i < nx_; ++i) {
            lo[i] = problem_.x_lower[free_idx_[i]];
            hi[i] = problem_.x_upper[free_idx_[i]];
        }
        for (int k = 0; k < ns_; ++k) {
            lo[nx_ + k] = row_scale_[ineq_rows_[k]] * problem_.c_lower[ineq_rows_[k]];
            hi[nx_ + k] = row_scale_[ineq_rows_[k]] * problem_.c_upper[ineq_rows_[k]];
        }
    }

    const std::vector<int>& ineq_rows() const { return ineq_rows_; }
    const std::vector<int>& fixed_idx() const { return fixed_idx_; }

private:
    const NlpProblem& problem_;
    std::vector<int> free_idx_, fixed_idx_, eq_rows_, ineq_rows_;
    mutable VectorXd x_full_;
    VectorXd row_scale_;
    double obj_scale_ = 1.0;
    int nx_ = 0, ns_ = 0, m_ = 0;
};

struct Iterate {
    VectorXd z;       // (x_free, s)
    VectorXd y;       // constraint multipliers
    VectorXd v_lo;    // bound multipliers (0 at unbounded entries)
    VectorXd v_hi;
};

} // namespace

NlpResult solve_nlp(const NlpProblem& problem, const VectorXd& x0, const NlpOptions& options) {
    if (x0.size() != problem.num_vars) {
        throw ConfigError("solve_nlp: initial point has wrong dimension");
    }

    Workspace w(problem, x0);
    const int nx = w.nx(), ns = w.ns(), nz = w.nz(), m = w.m();

    NlpResult result;
    result.multipliers = VectorXd::Zero(m);

    if (nz == 0) {  // everything fixed
        result.x = w.assemble(VectorXd(0));
        result.objective = problem.objective(result.x);
        const VectorXd c = m ? problem.constraints(result.x) : VectorXd(0);
        double viol = 0.0;
        for (int j = 0; j < m; ++j) {
            viol = std::max({viol, problem.c_lower[j] - c[j], c[j] - problem.c_upper[j]});
        }
        result.constraint_violation = viol;
        result.status = viol <= options.tol ? NlpStatus::Converged : NlpStatus::Infeasible;
        return result;
    }

    VectorXd z_lo, z_hi;
    w.z_bounds(z_lo, z_hi);
    Bounded bounded;
    for (int i = 0; i < nz; ++i) {
        if (std::isfinite(z_lo[i])) bounded.lo.push_back(i);
        if (std::isfinite(z_hi[i])) bounded.hi.push_back(i);
    }
    const int n_bounds = static_cast<int>(bounded.lo.size() + bounded.hi.size());

    // --- initial interior point ----------------------------------------------
    Iterate it;
    it.z.resize(nz);
    it.z.head(nx) = w.x_reduced(x0);
    {
        const VectorXd c0 = m ? w.eval_c(it.z.head(nx)) : VectorXd(0);
        for (int k = 0; k < ns; ++k) it.z[nx + k] = c0[w.ineq_rows()[k]];
    }
    const double kappa1 = 1e-2, kappa2 = 1e-2;
    for (int i = 0; i < nz; ++i) {
        const bool has_lo = std::isfinite(z_lo[i]), has_hi = std::isfinite(z_hi[i]);
        if (has_lo && has_hi) {
            const double pad = std::min(kappa2 * (z_hi[i] - z_lo[i]),
                                        kappa1 * std::max(1.0, std::abs(z_lo[i])));
            it.z[i] = std::clamp(it.z[i], z_lo[i] + pad, z_hi[i] - pad);
        } else if (has_lo) {
            it.z[i] = std::max(it.z[i], z_lo[i] + kappa1 * std::max(1.0, std::abs(z_lo[i])));
        } else if (has_hi) {
            it.z[i] = std::min(it.z[i], z_hi[i] - kappa1 * std::max(1.0, std::abs(z_hi[i])));
        }
    }

    double mu = options.mu_init;
    it.y = VectorXd::Zero(m);
    it.v_lo = VectorXd::Zero(nz);
    it.v_hi = VectorXd::Zero(nz);
    for (int i : bounded.lo) it.v_lo[i] = mu / (it.z[i] - z_lo[i]);
    for (int i : bounded.hi) it.v_hi[i] = mu / (z_hi[i] - it.z[i]);

    // Objective normalization: initial gradient magnitude capped at one;
    // user-facing values are reported unscaled.
    {
        const VectorXd g0 = w.eval_grad(it.z.head(nx));
        const double g0_norm = g0.size() ? g0.lpNorm<Eigen::Infinity>() : 1.0;
        w.set_objective_scale(1.0 / std::max(1.0, g0_norm));
    }

    // Least-squares multiplier estimate: (J J^T) y = -J (grad_f - v_lo + v_hi)
    // over z; discarded if absurdly large.
    if (m > 0) {
        const VectorXd xr0 = it.z.head(nx);
        const MatrixXd jx0 = w.eval_jac(xr0);
        MatrixXd jz0 = MatrixXd::Zero(m, nz);
        jz0.leftCols(nx) = jx0;
        for (int k = 0; k < ns; ++k) jz0(w.ineq_rows()[k], nx + k) = -1.0;
        VectorXd gz0 = VectorXd::Zero(nz);
        gz0.head(nx) = w.eval_grad(xr0);
        gz0 -= it.v_lo;
        gz0 += it.v_hi;
        MatrixXd jjt = jz0 * jz0.transpose();
        jjt.diagonal().array() += 1e-10;
        const VectorXd y_lsq = jjt.ldlt().solve(-jz0 * gz0);
        if (y_lsq.allFinite() && y_lsq.lpNorm<Eigen::Infinity>() <= 1e3) it.y = y_lsq;
    }

    // --- helpers over the current point --------------------------------------
    auto barrier_value = [&](const VectorXd& z) {
        double b = 0.0;
        for (int i : bounded.lo) {
            const double s = z[i] - z_lo[i];
            if (s <= 0.0) return kInf;
            b -= std::log(s);
        }
        for (int i : bounded.hi) {
            const double s = z_hi[i] - z[i];
            if (s <= 0.0) return kInf;
            b -= std::log(s);
        }
        return b;
    };

    MatrixXd bfgs = MatrixXd::Identity(nx, nx);
    bool bfgs_scaled = false;

    VectorXd grad_f = w.eval_grad(it.z.head(nx));
    VectorXd c_val = m ? w.eval_c(it.z.head(nx)) : VectorXd(0);
    MatrixXd jac = m ? w.eval_jac(it.z.head(nx)) : MatrixXd(0, nx);
    double f_val = w.eval_f(it.z.head(nx));

    double last_alpha = 0.0;
    double last_alpha_max = 0.0;

    // Filter globalization: pairs (theta, phi) = (l1 infeasibility, barrier
    // objective); a trial point must stay out of the dominated region.
    std::vector<std::pair<double, double>> filter;
    double theta_max = kInf;
    auto filter_reset = [&](double theta_now) {
        filter.clear();
        theta_max = 1e4 * std::max(1.0, theta_now);
        filter.emplace_back(theta_max, -kInf);
    };
    auto filter_blocks = [&](double theta, double phi) {
        for (const auto& [ft, fp] : filter) {
            if (theta >= ft && phi >= fp) return true;
        }
        return false;
    };
    double delta_w_last = 0.0; // Hessian regularization memory
    int consecutive_failures = 0;

    double best_err = kInf;
    Iterate best = it;
    double best_f = f_val;
    double best_viol = kInf;
    bool best_feasible = false;
    int jam_count = 0;
    int acceptable_count = 0;
    double acceptable_prev_f = kInf;

    // Gradient of the Lagrangian in x (for BFGS pairs).
    auto lagrangian_grad_x = [&](const VectorXd& gf, const MatrixXd& jx, const VectorXd& y) {
        VectorXd g = gf;
        if (m) g.noalias() += jx.transpose() * y;
        return g;
    };

    int iter = 0;
    NlpStatus exit_status = NlpStatus::MaxIterations;

    VectorXd prev_lag_grad;  // at previous x with current y (set when a step is taken)
    VectorXd prev_step_x;

    for (iter = 0; iter < options.max_iter; ++iter) {
        // Residual pieces.
        VectorXd g_res = m ? w.residual(c_val, it.z.tail(ns)) : VectorXd(0);

        VectorXd grad_z = VectorXd::Zero(nz);
        grad_z.head(nx) = grad_f;

        // J over z: x columns from user Jacobian, slack columns -I pattern.
        auto jz_mul_t = [&](const VectorXd& y) {  // J^T y
            VectorXd out = VectorXd::Zero(nz);
            if (m) out.head(nx).noalias() = jac.transpose() * y;
            for (int k = 0; k < ns; ++k) out[nx + k] -= y[w.ineq_rows()[k]];
            return out;
        };

        const VectorXd jty = jz_mul_t(it.y);
        VectorXd dual_res = grad_z + jty - it.v_lo + it.v_hi;

        double compl_err0 = 0.0, compl_err_mu = 0.0;
        for (int i : bounded.lo) {
            const double prod = (it.z[i] - z_lo[i]) * it.v_lo[i];
            compl_err0 = std::max(compl_err0, std::abs(prod));
            compl_err_mu = std::max(compl_err_mu, std::abs(prod - mu));
        }
        for (int i : bounded.hi) {
            const double prod = (z_hi[i] - it.z[i]) * it.v_hi[i];
            compl_err0 = std::max(compl_err0, std::abs(prod));
            compl_err_mu = std::max(compl_err_mu, std::abs(prod - mu));
        }

        const double mult_sum = it.y.lpNorm<1>() + it.v_lo.lpNorm<1>() + it.v_hi.lpNorm<1>();
        const double s_max = 100.0;
        const double s_d = std::max(s_max, mult_sum / std::max(1, m + n_bounds)) / s_max;
        const double s_c =
            std::max(s_max, (it.v_lo.lpNorm<1>() + it.v_hi.lpNorm<1>()) / std::max(1, n_bounds)) /
            s_max;

        const double dual_inf = dual_res.size() ? dual_res.lpNorm<Eigen::Infinity>() : 0.0;
        const double primal_inf = m ? w.unscaled_violation(g_res) : 0.0;
        const double err0 = std::max({dual_inf / s_d, primal_inf, compl_err0 / s_c});
        const double err_mu = std::max({dual_inf / s_d, primal_inf, compl_err_mu / s_c});

        // Incumbent: prefer feasible-enough points with the lowest objective,
        // otherwise the least infeasible point seen.
        const double feas_tol = std::max(10.0 * options.tol, 1e-8);
        if (primal_inf <= feas_tol) {
            if (!best_feasible || f_val < best_f) {
                best_feasible = true;
                best = it;
                best_f = f_val;
                best_viol = primal_inf;
                best_err = err0;
            }
        } else if (!best_feasible && primal_inf < best_viol) {
            best = it;
            best_f = f_val;
            best_viol = primal_inf;
            best_err = err0;
        }

        if (options.verbose) {
            std::printf(
                "it %4d  f % .6e  viol %.2e  dual %.2e  compl %.2e  mu %.1e  a %.2e  dw %.1e\n",
                iter, f_val, primal_inf, dual_inf, compl_err0, mu, last_alpha, delta_w_last);
        }

        if (err0 <= options.tol) {
            exit_status = NlpStatus::Converged;
            best_err = err0;
            best = it;
            best_f = f_val;
            best_viol = primal_inf;
            break;
        }

        // Acceptable-level exit: error below the acceptable threshold, tight
        // feasibility, and a stagnant objective for a sustained stretch.
        if (err0 <= options.acceptable_tol && primal_inf <= options.tol &&
            std::abs(f_val - acceptable_prev_f) <= 1e-6 * std::max(1.0, std::abs(f_val))) {
            if (++acceptable_count >= options.acceptable_iter) {
                exit_status = NlpStatus::Converged;
                best_err = err0;
                best = it;
                best_f = f_val;
                best_viol = primal_inf;
                break;
            }
        } else {
            acceptable_count = 0;
        }
        acceptable_prev_f = f_val;

        // Monotone barrier decrease: hold mu until the barrier subproblem is
        // solved to kappa_eps * mu, so active sets settle while the walls are
        // still soft. Geometric decay only: superlinear collapse hardens the
        // walls before low-curvature problems have walked to their optimum.
        const double mu_floor = options.tol / 10.0;
        if (err_mu <= kKappaEps * mu && mu > mu_floor) {
            mu = std::max(mu_floor, kKappaMu * mu);
            filter_reset(m ? g_res.lpNorm<1>() : 0.0);
            continue;  // recompute residuals against the new barrier
        }
        if (filter.empty()) filter_reset(m ? g_res.lpNorm<1>() : 0.0);

        // --- assemble and solve the condensed KKT system ---------------------
        VectorXd sigma = VectorXd::Zero(nz);
        VectorXd barrier_grad = VectorXd::Zero(nz);
        for (int i : bounded.lo) {
            const double sl = it.z[i] - z_lo[i];
            sigma[i] += it.v_lo[i] / sl;
            barrier_grad[i] -= mu / sl;
        }
        for (int i : bounded.hi) {
            const double sl = z_hi[i] - it.z[i];
            sigma[i] += it.v_hi[i] / sl;
            barrier_grad[i] += mu / sl;
        }

        const VectorXd r1 = -(grad_z + barrier_grad + jty);
        const VectorXd r2 = -g_res;

        const bool exact_hessian = w.has_hessian();
        const MatrixXd hess_x = exact_hessian ? w.eval_hess(it.z.head(nx), it.y) : MatrixXd();

        VectorXd dz(nz), dy(m);
        bool solved = false;
        double delta_w = 0.0;
        if (!exact_hessian && consecutive_failures > 0 && delta_w_last > 0.0) {
            delta_w = delta_w_last;
        }

        if (exact_hessian) {
            // Null-space KKT solve: the Lagrangian Hessian may be indefinite;
            // only the reduced Hessian Z^T H Z on the constraint null space
            // must be positive definite, and regularization is applied there.
            MatrixXd hz = MatrixXd::Zero(nz, nz);
            hz.topLeftCorner(nx, nx) = hess_x;
            hz.diagonal() += sigma;

            MatrixXd jz = MatrixXd::Zero(m, nz);
            jz.leftCols(nx) = jac;
            for (int k = 0; k < ns; ++k) jz(w.ineq_rows()[k], nx + k) = -1.0;

            const Eigen::ColPivHouseholderQR<MatrixXd> qr(jz.transpose());
            if (qr.rank() == m && m <= nz) {
                const MatrixXd q_full = qr.householderQ() * MatrixXd::Identity(nz, nz);
                const MatrixXd q1 = q_full.leftCols(m);
                const MatrixXd z_base = q_full.rightCols(nz - m);
                const MatrixXd r_tri =
                    qr.matrixR().topLeftCorner(m, m).triangularView<Eigen::Upper>();
                const auto perm = qr.colsPermutation();

                // Particular step: J dz_p = r2  =>  dz_p = Q1 R^-T P^T r2.
                const VectorXd r2_perm = perm.transpose() * r2;
                const VectorXd dz_p =
                    q1 * r_tri.transpose().triangularView<Eigen::Lower>().solve(r2_perm);

                const MatrixXd hz_z = hz * z_base;
                const MatrixXd h_red = z_base.transpose() * hz_z;
                const VectorXd rhs_red = z_base.transpose() * (r1 - hz * dz_p);

                // Saddle-free modification: replace the reduced-Hessian
                // eigenvalues by max(|lambda|, floor), so negative curvature
                // becomes a descent direction instead of being damped away.
                const Eigen::SelfAdjointEigenSolver<MatrixXd> es(h_red);
                if (es.info() == Eigen::Success) {
                    VectorXd lam = es.eigenvalues();
                    double lam_floor = 1e-8 * std::max(1.0, lam.cwiseAbs().maxCoeff());
                    for (int i = 0; i < lam.size(); ++i) {
                        lam[i] = std::max(std::abs(lam[i]), lam_floor);
                    }
                    const VectorXd w_red = es.eigenvectors() *
                                           lam.cwiseInverse().asDiagonal() *
                                           (es.eigenvectors().transpose() * rhs_red);
                    dz = dz_p + z_base * w_red;
                    // J^T dy = r1 - H dz  =>  dy = P R^-1 Q1^T (r1 - H dz)
                    const VectorXd resid = r1 - hz * dz;
                    dy = perm *
                         r_tri.triangularView<Eigen::Upper>().solve(q1.transpose() * resid);
                    const double step_scale =
                        1e6 * std::max(1.0, it.z.lpNorm<Eigen::Infinity>());
                    if (dz.allFinite() && dy.allFinite() &&
                        dz.lpNorm<Eigen::Infinity>() <= step_scale) {
                        solved = true;
                        delta_w_last = 0.0;
                    }
                }
            }
            // Rank-deficient J or persistent failure falls through to the
            // Schur path below with a convexified Hessian.
        }

        if (!solved) {
            Eigen::LLT<MatrixXd> hx_llt;
            Eigen::LLT<MatrixXd> schur_llt;
            VectorXd hs;
            double delta_c = 0.0;
            if (exact_hessian) delta_w = std::max(1e-8, delta_w_last);

            for (int attempt = 0; attempt < 16 && !solved; ++attempt) {
                MatrixXd hx = exact_hessian ? hess_x : bfgs;
                hx.diagonal() += sigma.head(nx);
                hx.diagonal().array() += delta_w;

                hx_llt.compute(hx);
                if (hx_llt.info() != Eigen::Success) {
                    delta_w = delta_w == 0.0 ? 1e-8 : delta_w * 10.0;
                    continue;
                }

                hs = sigma.tail(ns);
                hs.array() += delta_w;
                bool hs_ok = true;
                for (int k = 0; k < ns; ++k) {
                    if (hs[k] <= 0.0) hs_ok = false;
                }
                if (!hs_ok) {  // a slack with no finite bound would be a modeling bug
                    delta_w = delta_w == 0.0 ? 1e-8 : delta_w * 100.0;
                    continue;
                }

                if (m > 0) {
                    const MatrixXd hinv_jt = hx_llt.solve(jac.transpose());  // nx x m
                    MatrixXd schur = jac * hinv_jt;
                    for (int k = 0; k < ns; ++k) {
                        const int row = w.ineq_rows()[k];
                        schur(row, row) += 1.0 / hs[k];
                    }
                    schur.diagonal().array() += delta_c;

                    schur_llt.compute(schur);
                    if (schur_llt.info() != Eigen::Success) {
                        delta_c = delta_c == 0.0 ? 1e-10 : delta_c * 100.0;
                        continue;
                    }
                }

                if (m == 0) {
                    dz.head(nx) = hx_llt.solve(r1.head(nx));
                    for (int k = 0; k < ns; ++k) dz[nx + k] = r1[nx + k] / hs[k];
                } else {
                    VectorXd rhs_y = jac * hx_llt.solve(r1.head(nx)) - r2;
                    for (int k = 0; k < ns; ++k) {
                        rhs_y[w.ineq_rows()[k]] -= r1[nx + k] / hs[k];
                    }
                    dy = schur_llt.solve(rhs_y);
                    dz.head(nx) = hx_llt.solve(r1.head(nx) - jac.transpose() * dy);
                    for (int k = 0; k < ns; ++k) {
                        dz[nx + k] = (r1[nx + k] + dy[w.ineq_rows()[k]]) / hs[k];
                    }
                }

                // Direction sanity: a ridiculous step means the factorization
                // was numerically worthless despite reporting success.
                const double step_scale = 1e6 * std::max(1.0, it.z.lpNorm<Eigen::Infinity>());
                if (!dz.allFinite() || (m && !dy.allFinite()) ||
                    dz.lpNorm<Eigen::Infinity>() > step_scale) {
                    delta_w = delta_w == 0.0 ? 1e-8 : delta_w * 10.0;
                    continue;
                }
                solved = true;
                delta_w_last = delta_w;
            }
        }
        if (!solved) {
            exit_status = NlpStatus::Stalled;
            break;
        }


        if (options.verbose && iter % 50 == 0) {
            // KKT solve residual audit (debug only).
            MatrixXd hx_chk = exact_hessian ? hess_x : bfgs;
            hx_chk.diagonal() += sigma.head(nx);
            hx_chk.diagonal().array() += delta_w;
            VectorXd row1 = hx_chk * dz.head(nx) - r1.head(nx);
            if (m) row1 += jac.transpose() * dy;
            VectorXd row1s(ns);
            for (int k = 0; k < ns; ++k) {
                row1s[k] = (sigma[nx + k] + delta_w) * dz[nx + k] - dy[w.ineq_rows()[k]] -
                           r1[nx + k];
            }
            VectorXd row2 = -r2;
            if (m) {
                row2 += jac * dz.head(nx);
                for (int k = 0; k < ns; ++k) row2[w.ineq_rows()[k]] -= dz[nx + k];
            }
            int idz = 0;
            dz.cwiseAbs().maxCoeff(&idz);
            int ir1 = 0;
            r1.cwiseAbs().maxCoeff(&ir1);
            std::printf(
                "    kkt-res: row1 %.2e row1s %.2e row2 %.2e  |dz| %.2e @%d  |dy| %.2e  "
                "|r1| %.2e @%d\n",
                row1.lpNorm<Eigen::Infinity>(), ns ? row1s.lpNorm<Eigen::Infinity>() : 0.0,
                m ? row2.lpNorm<Eigen::Infinity>() : 0.0, dz.lpNorm<Eigen::Infinity>(), idz,
                m ? dy.lpNorm<Eigen::Infinity>() : 0.0, r1.lpNorm<Eigen::Infinity>(), ir1);
        }

        // Bound-multiplier steps from the complementarity rows.
        VectorXd dv_lo = VectorXd::Zero(nz), dv_hi = VectorXd::Zero(nz);
        for (int i : bounded.lo) {
            const double sl = it.z[i] - z_lo[i];
            dv_lo[i] = mu / sl - it.v_lo[i] - (it.v_lo[i] / sl) * dz[i];
        }
        for (int i : bounded.hi) {
            const double sl = z_hi[i] - it.z[i];
            dv_hi[i] = mu / sl - it.v_hi[i] + (it.v_hi[i] / sl) * dz[i];
        }

        // Fraction-to-boundary limits.
        const double tau = std::max(kTauMin, 1.0 - mu);
        double alpha_max = 1.0, alpha_dual = 1.0;
        for (int i : bounded.lo) {
            if (dz[i] < 0.0) alpha_max = std::min(alpha_max, -tau * (it.z[i] - z_lo[i]) / dz[i]);
            if (dv_lo[i] < 0.0) alpha_dual = std::min(alpha_dual, -tau * it.v_lo[i] / dv_lo[i]);
        }
        for (int i : bounded.hi) {
            if (dz[i] > 0.0) alpha_max = std::min(alpha_max, tau * (z_hi[i] - it.z[i]) / dz[i]);
            if (dv_hi[i] < 0.0) alpha_dual = std::min(alpha_dual, -tau * it.v_hi[i] / dv_hi[i]);
        }

        // --- filter line search -------------------------------------------------
        const double theta0 = m ? g_res.lpNorm<1>() : 0.0;
        const double phi0 = f_val + mu * barrier_value(it.z);
        const double dir_deriv = safe_dot(grad_z + barrier_grad, dz);

        double alpha = alpha_max;
        bool accepted = false;
        bool f_type_accept = false;
        VectorXd z_trial, c_trial;
        double f_trial = 0.0;
        for (int ls = 0; ls < 50; ++ls) {
            z_trial = it.z + alpha * dz;
            f_trial = w.eval_f(z_trial.head(nx));
            c_trial = m ? w.eval_c(z_trial.head(nx)) : VectorXd(0);
            if (std::isfinite(f_trial) && (!m || c_trial.allFinite())) {
                const double theta_t =
                    m ? w.residual(c_trial, z_trial.tail(ns)).lpNorm<1>() : 0.0;
                const double phi_t = f_trial + mu * barrier_value(z_trial);
                if (std::isfinite(phi_t) && theta_t <= theta_max &&
                    !filter_blocks(theta_t, phi_t)) {
                    // f-type: strong descent relative to the infeasibility level
                    const bool switching =
                        dir_deriv < 0.0 &&
                        std::pow(alpha * (-dir_deriv), kSwitchSPhi) >
                            kSwitchDelta * std::pow(theta0, kSwitchSTheta);
                    if (switching) {
                        if (phi_t <= phi0 + kArmijoEta * alpha * dir_deriv) {
                            accepted = true;
                            f_type_accept = true;
                            break;
                        }
                    } else if (theta_t <= (1.0 - kFilterGamma) * theta0 ||
                               phi_t <= phi0 - kFilterGamma * theta0) {
                        accepted = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
            if (alpha < 1e-14) break;
        }

        if (!accepted) {
            if (++consecutive_failures >= 8) {
                exit_status = NlpStatus::Stalled;
                break;
            }
            delta_w_last = std::max(delta_w_last * 10.0, 1e-6);
            // retry from the same point with stronger regularization
            continue;
        }
        if (!f_type_accept) {
            // theta-type step: block this corner of the (theta, phi) plane.
            filter.emplace_back((1.0 - kFilterGamma) * theta0, phi0 - kFilterGamma * theta0);
        }
        consecutive_failures = 0;
        last_alpha = alpha;
        last_alpha_max = alpha_max;

        // --- accept ------------------------------------------------------------
        const VectorXd x_old_grad_f = grad_f;
        const MatrixXd x_old_jac = jac;

        it.z = z_trial;
        it.y += alpha * dy;
        it.v_lo += alpha_dual * dv_lo;
        it.v_hi += alpha_dual * dv_hi;

        // Keep bound multipliers in the kappa-sigma sandwich around mu/slack.
        for (int i : bounded.lo) {
            const double sl = it.z[i] - z_lo[i];
            it.v_lo[i] = std::clamp(it.v_lo[i], mu / (kKappaSigma * sl), kKappaSigma * mu / sl);
        }
        for (int i : bounded.hi) {
            const double sl = z_hi[i] - it.z[i];
            it.v_hi[i] = std::clamp(it.v_hi[i], mu / (kKappaSigma * sl), kKappaSigma * mu / sl);
        }

        if (options.verbose && iter >= 400 && iter < 406) {
            int ri = 0;
            dual_res.cwiseAbs().maxCoeff(&ri);
            int di = 0;
            dz.cwiseAbs().maxCoeff(&di);
            std::printf(
                "      dres @%d = % .4e (z %.5f lo %.2f hi %.2f)  |dz| @%d = % .4e  "
                "(z %.5f)\n",
                ri, dual_res[ri], it.z[ri], z_lo[ri], z_hi[ri], di, dz[di], it.z[di]);
        }

        // Jamming escape: persistent micro-steps mean the quasi-Newton model
        // and the barrier disagree about a nearby wall. Recentre the bound
        // multipliers and drop the accumulated curvature.
        if (alpha < 1e-5) {
            if (++jam_count >= 5) {
                for (int i : bounded.lo) it.v_lo[i] = mu / (it.z[i] - z_lo[i]);
                for (int i : bounded.hi) it.v_hi[i] = mu / (z_hi[i] - it.z[i]);
                bfgs = MatrixXd::Identity(nx, nx);
                bfgs_scaled = false;
                jam_count = 0;
            }
        } else {
            jam_count = 0;
        }

        f_val = f_trial;
        c_val = c_trial;
        grad_f = w.eval_grad(it.z.head(nx));
        jac = m ? w.eval_jac(it.z.head(nx)) : MatrixXd(0, nx);

        // --- damped BFGS update on the x block ----------------------------------
        if (exact_hessian) continue;
        prev_step_x = alpha * dz.head(nx);
        prev_lag_grad = lagrangian_grad_x(x_old_grad_f, x_old_jac, it.y);
        const VectorXd lag_grad_new = lagrangian_grad_x(grad_f, jac, it.y);
        const VectorXd s_b = prev_step_x;
        VectorXd y_b = lag_grad_new - prev_lag_grad;
        const double s_norm = s_b.norm();
        if (s_norm > 1e-14) {
            if (!bfgs_scaled) {
                const double sy = s_b.dot(y_b);
                if (sy > 1e-12 * s_norm * y_b.norm()) {
                    const double scale = std::clamp(y_b.dot(y_b) / sy, 1e-4, 1e6);
                    bfgs = scale * MatrixXd::Identity(nx, nx);
                    bfgs_scaled = true;
                }
            }
            const VectorXd ws = bfgs * s_b;
            const double sws = s_b.dot(ws);
            double sy = s_b.dot(y_b);
            if (sws > 0.0) {
                if (sy < 0.2 * sws) {  // Powell damping
                    const double theta = 0.8 * sws / (sws - sy);
                    y_b = theta * y_b + (1.0 - theta) * ws;
                    sy = s_b.dot(y_b);
                }
                if (sy > 1e-12 * sws) {
                    bfgs.noalias() -= (ws * ws.transpose()) / sws;
                    bfgs.noalias() += (y_b * y_b.transpose()) / sy;
                }
            }
        }
    }

    result.x = w.assemble(best.z.head(nx));
    result.multipliers = w.row_scale().cwiseProduct(best.y) / w.objective_scale();
    result.objective = best_f / w.objective_scale();
    result.kkt_error = best_err;
    result.constraint_violation = best_viol;
    result.iterations = iter;
    if (exit_status == NlpStatus::Converged) {
        result.status = NlpStatus::Converged;
    } else if (exit_status == NlpStatus::Stalled) {
        result.status =
            best_viol > std::sqrt(options.tol) ? NlpStatus::Infeasible : NlpStatus::Stalled;
    } else {
        result.status = NlpStatus::MaxIterations;
    }
    return result;
}

} // namespace bsa
